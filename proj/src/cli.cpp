#include "puzzleforge/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>

#include "puzzleforge/augment.hpp"
#include "puzzleforge/config.hpp"
#include "puzzleforge/eval.hpp"
#include "puzzleforge/store.hpp"
#include "puzzleforge/synthesis.hpp"
#include "puzzleforge/training.hpp"

namespace puzzleforge {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::string templates;
    std::string transcripts;

    std::string corpus, out, quarantine, in, report, puzzles, samples, verdicts, kind = "sft", policy = "first",
                                                                               format = "md", plot, model_label,
                                                                               dataset_label;
    std::uint64_t seed = 0;
    int max_attempts = 8;
    int trials = 5;
    int n = 8;
    std::size_t workers = 1;
    bool no_expand = false;
};

class Run {
public:
    Run(std::string command, const std::vector<std::string>& args) {
        manifest_.command = std::move(command);
        manifest_.arguments = args;
        manifest_.started = timestamp_now();
    }

    void input(const std::string& path) { manifest_.inputs[path] = file_sha256(path); }
    void output(const std::string& path) { manifest_.outputs[path] = file_sha256(path); }
    void config(const Config& c) { manifest_.config = config_to_json(c); }
    void templates(const TemplateSet& t) { manifest_.template_hashes = t.hashes(); }
    void backend(const Client& c) { manifest_.backends.push_back(c.backend().id()); }
    json& seeds() { return manifest_.seeds; }
    json& counts() { return manifest_.counts; }

    void finish(const std::string& primary_output) {
        manifest_.finished = timestamp_now();
        write_manifest(primary_output, manifest_);
    }

private:
    RunManifest manifest_;
};

Config load_or_default(const std::string& path) { return path.empty() ? Config{} : load_config(path); }

TemplateSet load_templates(const std::string& dir) {
    return dir.empty() ? TemplateSet::builtin() : TemplateSet::load(dir);
}

std::vector<json> to_rows(const std::vector<PuzzleSpec>& puzzles) {
    std::vector<json> rows;
    for (const auto& p : puzzles) rows.push_back(puzzle_to_json(p));
    return rows;
}

void save_transcripts(const Options& o, const Client& client, Run& run) {
    if (o.transcripts.empty()) return;
    client.save_transcripts(o.transcripts);
    run.output(o.transcripts);
}

int cmd_synthesize(const Options& o, Run& run, std::ostream& out) {
    auto config = load_config(o.config);
    auto templates = load_templates(o.templates);
    run.config(config);
    run.templates(templates);
    run.input(o.corpus);

    std::vector<CorpusItem> corpus;
    std::size_t line = 0;
    for (const auto& row : read_jsonl(o.corpus)) {
        ++line;
        try {
            corpus.push_back(corpus_item_from_json(row));
        } catch (const std::exception& e) {
            throw SchemaError(line, e.what());
        }
    }

    auto client = make_client(config);
    run.backend(client);
    SynthesisOptions opts;
    opts.generation = {config.backend.model, config.generation_temperature, config.max_tokens, 0};
    opts.retries = config.synthesis_retries;
    opts.solve = config.solve;
    opts.workers = std::max<std::size_t>(o.workers, 1);
    auto result = synthesize(corpus, client, templates, opts);

    const auto quarantine_path = o.quarantine.empty() ? o.out + ".quarantine.jsonl" : o.quarantine;
    std::vector<json> q;
    for (const auto& r : result.quarantine) q.push_back(report_to_json(r));
    for (const auto& d : result.duplicates) {
        q.push_back({{"puzzle_id", d.id}, {"status", "duplicate"}, {"attempts", 0}, {"stage", "dedup"},
                     {"detail", "same fingerprint as " + d.kept}, {"solution_space", nullptr}});
    }
    write_jsonl(o.out, to_rows(result.puzzles));
    write_jsonl(quarantine_path, q);
    save_transcripts(o, client, run);
    run.output(o.out);
    run.output(quarantine_path);
    run.seeds()["generation"] = "attempt index";
    run.counts() = {{"corpus", corpus.size()},
                    {"puzzles", result.puzzles.size()},
                    {"quarantined", result.quarantine.size()},
                    {"duplicates", result.duplicates.size()}};
    run.finish(o.out);
    out << result.puzzles.size() << " puzzles, " << result.quarantine.size() << " quarantined, "
        << result.duplicates.size() << " duplicates\n";
    return 0;
}

int cmd_validate(const Options& o, Run& run, std::ostream& out) {
    auto config = load_or_default(o.config);
    run.input(o.in);
    auto puzzles = load_puzzles(o.in);
    std::vector<json> rows;
    std::size_t valid = 0;
    for (const auto& p : puzzles) {
        auto report = cross_validate(p, config.solve);
        if (report.valid()) ++valid;
        out << p.id << ": " << status_name(report.status);
        if (report.space) out << " (" << report.space->solution_count << "/" << report.space->domain_count << ")";
        out << "\n";
        rows.push_back(report_to_json(report));
    }
    if (!o.report.empty()) {
        write_jsonl(o.report, rows);
        run.output(o.report);
        run.counts() = {{"puzzles", puzzles.size()}, {"valid", valid}};
        run.finish(o.report);
    }
    return valid == puzzles.size() ? 0 : 1;
}

int cmd_augment(const Options& o, Run& run, std::ostream& out) {
    run.input(o.in);
    auto puzzles = load_puzzles(o.in);
    std::sort(puzzles.begin(), puzzles.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    auto config = load_or_default(o.config);
    auto templates = load_templates(o.templates);
    run.config(config);
    run.templates(templates);
    run.seeds()["reduce"] = o.seed;

    const bool do_expand = !o.no_expand && !o.config.empty();
    std::optional<Client> client;
    if (do_expand) {
        client.emplace(make_backend(config), config.retry, config.max_in_flight);
        run.backend(*client);
        run.seeds()["expand"] = "attempt index";
    }

    std::vector<PuzzleSpec> dataset;
    std::vector<json> records;
    for (auto& p : puzzles) {
        if (!p.solution_space) {
            auto r = cross_validate(p, config.solve);
            if (r.space && r.space->exhausted) p.solution_space = r.space;
        }
        auto reduced = reduce(p, o.seed, true, config.solve);
        ExpandResult expanded;
        if (do_expand) {
            ExpandOptions eo;
            eo.max_attempts = o.max_attempts;
            eo.model = config.backend.model;
            eo.temperature = config.generation_temperature;
            eo.max_tokens = config.max_tokens;
            eo.solve = config.solve;
            try {
                expanded = expand(p, *client, eo, templates);
            } catch (const Error& e) {
                records.push_back({{"parent", p.id}, {"op", "expand"}, {"accepted", false},
                                   {"reason", std::string("skipped: ") + e.what()}});
            }
        }
        dataset.push_back(p);
        for (auto& r : reduced.records) records.push_back(record_to_json(r));
        for (auto& r : expanded.records) records.push_back(record_to_json(r));
        for (auto& c : reduced.puzzles) dataset.push_back(std::move(c));
        for (auto& c : expanded.puzzles) dataset.push_back(std::move(c));
    }

    write_jsonl(o.out, to_rows(dataset));
    run.output(o.out);
    if (!o.report.empty()) {
        write_jsonl(o.report, records);
        run.output(o.report);
    }
    if (client) save_transcripts(o, *client, run);

    json profile = json::array();
    bool all_counted = std::all_of(dataset.begin(), dataset.end(), [](const auto& p) { return p.solution_space; });
    if (all_counted)
        for (const auto& c : difficulty_profile(dataset))
            profile.push_back({{"constraint_count", c.constraint_count},
                               {"ratio_bucket", bucket_label(c.ratio_bucket)},
                               {"puzzles", c.puzzles}});
    run.counts() = {{"roots", puzzles.size()}, {"puzzles", dataset.size()}, {"records", records.size()},
                    {"difficulty_profile", profile}};
    run.finish(o.out);
    out << dataset.size() << " puzzles from " << puzzles.size() << " roots\n";
    return 0;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

int cmd_evaluate(const Options& o, Run& run, std::ostream& out) {
    run.input(o.puzzles);
    auto puzzles = load_puzzles(o.puzzles);
    auto config = load_config(o.config);
    auto templates = load_templates(o.templates);
    run.config(config);
    run.templates(templates);
    auto client = make_client(config);
    run.backend(client);

    EvaluationOptions eo;
    eo.model = config.backend.model;
    eo.dataset = o.dataset_label.empty() ? stem_of(o.puzzles) : o.dataset_label;
    eo.trials = o.trials;
    eo.temperature = config.evaluation_temperature;
    eo.max_tokens = config.max_tokens;
    eo.solve = config.solve;
    auto result = evaluate(puzzles, client, eo, templates);

    std::vector<json> rows;
    for (const auto& v : result.verdicts) rows.push_back(verdict_to_json(v));
    write_jsonl(o.out, rows);
    run.output(o.out);
    if (!o.report.empty()) {
        write_text_atomic(o.report, score_to_json(result.report).dump(2) + "\n");
        run.output(o.report);
    }
    save_transcripts(o, client, run);
    run.seeds()["trials"] = "trial index";
    run.counts() = {{"puzzles", puzzles.size()}, {"trials", o.trials}, {"verdicts", rows.size()},
                    {"flagged", result.report.flagged}};
    run.finish(o.out);
    out << "accuracy " << result.report.mean << " +/- " << result.report.std << " over " << o.trials << " trials\n";
    return 0;
}

int cmd_sample(const Options& o, Run& run, std::ostream& out) {
    run.input(o.puzzles);
    auto puzzles = load_puzzles(o.puzzles);
    std::sort(puzzles.begin(), puzzles.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    auto config = load_config(o.config);
    auto templates = load_templates(o.templates);
    run.config(config);
    run.templates(templates);
    auto client = make_client(config);
    run.backend(client);

    SampleOptions so;
    so.model = config.backend.model;
    so.n = o.n;
    so.temperature = config.sampling_temperature;
    so.max_tokens = config.max_tokens;
    std::vector<json> rows;
    std::size_t skipped = 0;
    for (const auto& p : puzzles) {
        if (p.constraints.size() < 2) {
            ++skipped;
            continue;
        }
        rows.push_back(sample_set_to_json(sample(p, client, so, templates)));
    }
    write_jsonl(o.out, rows);
    run.output(o.out);
    save_transcripts(o, client, run);
    run.seeds()["sampling"] = "response index";
    run.counts() = {{"puzzles", puzzles.size()}, {"sampled", rows.size()}, {"skipped_single_constraint", skipped},
                    {"n", o.n}};
    run.finish(o.out);
    out << rows.size() << " puzzles sampled, " << skipped << " single-constraint puzzles skipped\n";
    return 0;
}

int cmd_build_training(const Options& o, Run& run, std::ostream& out) {
    run.input(o.samples);
    std::vector<SampleSet> sets;
    std::size_t line = 0;
    for (const auto& row : read_jsonl(o.samples)) {
        ++line;
        try {
            sets.push_back(sample_set_from_json(row));
        } catch (const json::exception& e) {
            throw SchemaError(line, e.what());
        }
    }
    const auto policy = parse_policy(o.policy);
    BuildStats stats;
    std::vector<json> rows;
    if (o.kind == "sft") {
        for (const auto& r : build_sft(sets, policy, o.seed, &stats)) rows.push_back(sft_to_json(r));
    } else {
        for (const auto& r : build_dpo(sets, policy, o.seed, &stats)) rows.push_back(dpo_to_json(r));
    }
    write_jsonl(o.out, rows);
    run.output(o.out);
    run.seeds()["selection"] = o.seed;
    run.counts() = {{"kind", o.kind}, {"policy", o.policy}, {"sets", stats.sets}, {"records", stats.emitted},
                    {"dropped", stats.dropped}};
    run.finish(o.out);
    out << stats.emitted << " " << o.kind << " records, " << stats.dropped << " sets dropped\n";
    return 0;
}

int cmd_report(const Options& o, Run& run, std::ostream& out) {
    run.input(o.verdicts);
    std::vector<Verdict> verdicts;
    for (const auto& row : read_jsonl(o.verdicts)) verdicts.push_back(verdict_from_json(row));
    auto r = score(verdicts, o.model_label, o.dataset_label.empty() ? stem_of(o.verdicts) : o.dataset_label);
    auto text = o.format == "csv" ? report_csv(r) : report_markdown(r);
    if (o.out.empty()) {
        out << text;
        if (!o.plot.empty()) write_text_atomic(o.plot, plot_data(r).dump(2) + "\n");
        return 0;
    }
    write_text_atomic(o.out, text);
    run.output(o.out);
    const auto plot = o.plot.empty() ? o.out + ".plot.json" : o.plot;
    write_text_atomic(plot, plot_data(r).dump(2) + "\n");
    run.output(plot);
    run.counts() = {{"verdicts", verdicts.size()}, {"trials", r.per_trial.size()}};
    run.finish(o.out);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthesize, verify, augment and grade logic puzzles", "puzzleforge"};
    app.require_subcommand(1);
    Options o;

    auto* synth = app.add_subcommand("synthesize", "Turn corpus items into validated puzzles");
    synth->add_option("--corpus", o.corpus, "corpus JSONL")->required();
    synth->add_option("--out", o.out, "puzzles JSONL")->required();
    synth->add_option("--quarantine", o.quarantine, "quarantine JSONL");
    synth->add_option("--templates", o.templates, "template directory");
    synth->add_option("--config", o.config, "config JSON")->required();
    synth->add_option("--transcripts", o.transcripts, "write LLM transcripts here");
    synth->add_option("--workers", o.workers, "items processed concurrently");

    auto* validate_cmd = app.add_subcommand("validate", "Cross-validate puzzles by exhaustive search");
    validate_cmd->add_option("--in", o.in, "puzzles JSONL")->required();
    validate_cmd->add_option("--report", o.report, "validation report JSONL");
    validate_cmd->add_option("--config", o.config, "config JSON");

    auto* aug = app.add_subcommand("augment", "Reduce and expand puzzles");
    aug->add_option("--in", o.in, "puzzles JSONL")->required();
    aug->add_option("--out", o.out, "augmented JSONL")->required();
    aug->add_option("--seed", o.seed, "reduction seed");
    aug->add_option("--max-attempts", o.max_attempts, "expansion attempts per puzzle")->check(CLI::NonNegativeNumber);
    aug->add_option("--report", o.report, "augmentation records JSONL");
    aug->add_option("--config", o.config, "config JSON; expansion needs a backend");
    aug->add_option("--templates", o.templates, "template directory");
    aug->add_option("--transcripts", o.transcripts, "write LLM transcripts here");
    aug->add_flag("--no-expand", o.no_expand, "reduction only");

    auto* ev = app.add_subcommand("evaluate", "Grade a model over repeated trials");
    ev->add_option("--puzzles", o.puzzles, "puzzles JSONL")->required();
    ev->add_option("--model", o.config, "model config JSON")->required();
    ev->add_option("--trials", o.trials, "independent runs")->check(CLI::PositiveNumber);
    ev->add_option("--out", o.out, "verdicts JSONL")->required();
    ev->add_option("--report", o.report, "score report JSON");
    ev->add_option("--templates", o.templates, "template directory");
    ev->add_option("--transcripts", o.transcripts, "write LLM transcripts here");
    ev->add_option("--dataset", o.dataset_label, "dataset name in the report");

    auto* smp = app.add_subcommand("sample", "Rejection-sample responses per puzzle");
    smp->add_option("--puzzles", o.puzzles, "puzzles JSONL")->required();
    smp->add_option("--model", o.config, "model config JSON")->required();
    smp->add_option("--n", o.n, "responses per puzzle")->check(CLI::PositiveNumber);
    smp->add_option("--out", o.out, "sample sets JSONL")->required();
    smp->add_option("--templates", o.templates, "template directory");
    smp->add_option("--transcripts", o.transcripts, "write LLM transcripts here");

    auto* bt = app.add_subcommand("build-training", "Assemble SFT or DPO records from samples");
    bt->add_option("--samples", o.samples, "sample sets JSONL")->required();
    bt->add_option("--kind", o.kind, "sft or dpo")->check(CLI::IsMember({"sft", "dpo"}));
    bt->add_option("--out", o.out, "training JSONL")->required();
    bt->add_option("--policy", o.policy, "first, all or random")->check(CLI::IsMember({"first", "all", "random"}));
    bt->add_option("--seed", o.seed, "seed for the random policy");

    auto* rep = app.add_subcommand("report", "Tabulate verdicts by difficulty bucket");
    rep->add_option("--verdicts", o.verdicts, "verdicts JSONL")->required();
    rep->add_option("--format", o.format, "md or csv")->check(CLI::IsMember({"md", "csv"}));
    rep->add_option("--out", o.out, "table output; stdout when absent");
    rep->add_option("--plot", o.plot, "plot data JSON");
    rep->add_option("--model", o.model_label, "model name in the report");
    rep->add_option("--dataset", o.dataset_label, "dataset name in the report");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    auto* sub = app.get_subcommands().front();
    Run manifest(sub->get_name(), args);
    try {
        if (sub == synth) return cmd_synthesize(o, manifest, out);
        if (sub == validate_cmd) return cmd_validate(o, manifest, out);
        if (sub == aug) return cmd_augment(o, manifest, out);
        if (sub == ev) return cmd_evaluate(o, manifest, out);
        if (sub == smp) return cmd_sample(o, manifest, out);
        if (sub == bt) return cmd_build_training(o, manifest, out);
        return cmd_report(o, manifest, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace puzzleforge
