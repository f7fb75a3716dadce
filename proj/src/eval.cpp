#include "puzzleforge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "puzzleforge/extract.hpp"

namespace puzzleforge {

std::string render_prompt(const PuzzleSpec& puzzle, const TemplateSet& templates) {
    return render(templates.get(puzzle.language, "solve"),
                  {{"background", puzzle.background},
                   {"constraints", numbered_constraints(puzzle)},
                   {"schema", describe_schema(puzzle.schema, puzzle.language)},
                   {"example", arrangement_to_json(puzzle.domain, puzzle.example).dump()}});
}

std::optional<json> extract_candidate(std::string_view response, const ArrangementSchema& schema) {
    auto wanted = json::value_t::object;
    if (schema.bare) {
        switch (schema.fields.at(0).shape) {
        case JsonShape::Array: wanted = json::value_t::array; break;
        case JsonShape::Object: wanted = json::value_t::object; break;
        case JsonShape::String: {
            auto strings = quoted_strings(response);
            if (strings.empty()) return std::nullopt;
            return json(strings.back());
        }
        }
    }
    auto segments = json_segments(response);
    for (auto it = segments.rbegin(); it != segments.rend(); ++it)
        if (it->type() == wanted) return *it;
    return std::nullopt;
}

std::vector<std::string> Verdict::failed_constraints() const {
    std::vector<std::string> out;
    for (const auto& [id, ok] : constraint_results)
        if (!ok) out.push_back(id);
    return out;
}

json verdict_to_json(const Verdict& v) {
    json format = json::array();
    for (const auto& f : v.format.violations) format.push_back({{"path", f.path}, {"kind", f.kind}, {"detail", f.detail}});
    json constraints = json::array();
    for (const auto& [id, ok] : v.constraint_results) constraints.push_back({{"id", id}, {"passed", ok}});
    json j;
    j["puzzle_id"] = v.puzzle_id;
    j["trial"] = v.trial;
    j["extraction"] = v.extraction == Extraction::Found ? "found" : "none";
    j["format"] = std::move(format);
    j["constraints"] = std::move(constraints);
    j["correct"] = v.correct;
    j["flagged"] = v.flagged;
    j["error"] = v.error;
    j["constraint_count"] = v.constraint_count;
    j["ratio_bucket"] = v.ratio_bucket;
    return j;
}

Verdict verdict_from_json(const json& j) {
    Verdict v;
    v.puzzle_id = j.at("puzzle_id").get<std::string>();
    v.trial = j.value("trial", 0);
    v.extraction = j.value("extraction", "none") == "found" ? Extraction::Found : Extraction::None;
    for (const auto& f : j.value("format", json::array()))
        v.format.violations.push_back({f.value("path", ""), f.value("kind", ""), f.value("detail", "")});
    for (const auto& c : j.value("constraints", json::array()))
        v.constraint_results.emplace_back(c.at("id").get<std::string>(), c.at("passed").get<bool>());
    v.correct = j.at("correct").get<bool>();
    v.flagged = j.value("flagged", false);
    v.error = j.value("error", "");
    v.constraint_count = j.value("constraint_count", std::size_t{0});
    v.ratio_bucket = j.value("ratio_bucket", -1);
    return v;
}

namespace {

Verdict blank_verdict(const PuzzleSpec& puzzle, int trial) {
    Verdict v;
    v.puzzle_id = puzzle.id;
    v.trial = trial;
    v.constraint_count = puzzle.constraints.size();
    if (puzzle.solution_space)
        v.ratio_bucket = ratio_bucket(puzzle.solution_space->solution_count, puzzle.solution_space->domain_count);
    return v;
}

}  // namespace

Verdict verify(std::string_view response, const PuzzleSpec& puzzle, int trial) {
    auto v = blank_verdict(puzzle, trial);
    auto candidate = extract_candidate(response, puzzle.schema);
    if (!candidate) return v;
    v.extraction = Extraction::Found;
    v.format = conforms(*candidate, puzzle.schema);
    if (!v.format.ok()) return v;
    const auto state = to_candidate(puzzle.domain, arrangement_from_json(puzzle.domain, *candidate));
    bool all = true;
    for (const auto& c : puzzle.constraints) {
        bool ok = c.program.eval(state);
        all = all && ok;
        v.constraint_results.emplace_back(c.id, ok);
    }
    v.correct = all && !v.constraint_results.empty();
    return v;
}

Verdict flagged_verdict(const PuzzleSpec& puzzle, int trial, const std::string& error) {
    auto v = blank_verdict(puzzle, trial);
    v.flagged = true;
    v.error = error;
    return v;
}

// ---------------------------------------------------------------------------

json score_to_json(const ScoreReport& r) {
    auto bucket = [](const BucketScore& b) {
        return json{{"correct", b.correct}, {"total", b.total}, {"accuracy", b.accuracy()}};
    };
    json by_count = json::array();
    for (const auto& [k, b] : r.by_constraint_count) {
        auto row = bucket(b);
        row["constraint_count"] = k;
        by_count.push_back(std::move(row));
    }
    json by_ratio = json::array();
    for (const auto& [k, b] : r.by_ratio_bucket) {
        auto row = bucket(b);
        row["ratio_bucket"] = k;
        row["label"] = bucket_label(k);
        by_ratio.push_back(std::move(row));
    }
    json cells = json::array();
    for (const auto& [k, b] : r.by_cell) {
        auto row = bucket(b);
        row["constraint_count"] = k.first;
        row["ratio_bucket"] = k.second;
        cells.push_back(std::move(row));
    }
    json j;
    j["model"] = r.model;
    j["dataset"] = r.dataset;
    j["trials"] = r.per_trial.size();
    j["per_trial"] = r.per_trial;
    j["mean"] = r.mean;
    j["std"] = r.std;
    j["flagged"] = r.flagged;
    j["temperature"] = r.temperature;
    j["by_constraint_count"] = std::move(by_count);
    j["by_ratio_bucket"] = std::move(by_ratio);
    j["cells"] = std::move(cells);
    return j;
}

ScoreReport score(const std::vector<Verdict>& verdicts, const std::string& model, const std::string& dataset) {
    if (verdicts.empty()) throw EmptyDataset("no verdicts to score");
    ScoreReport r;
    r.model = model;
    r.dataset = dataset;
    std::map<int, BucketScore> per_trial;
    for (const auto& v : verdicts) {
        auto add = [&](BucketScore& b) {
            ++b.total;
            if (v.correct) ++b.correct;
        };
        add(per_trial[v.trial]);
        add(r.by_constraint_count[v.constraint_count]);
        add(r.by_ratio_bucket[v.ratio_bucket]);
        add(r.by_cell[{v.constraint_count, v.ratio_bucket}]);
        if (v.flagged) ++r.flagged;
    }
    for (const auto& [t, b] : per_trial) r.per_trial.push_back(b.accuracy());
    const double n = static_cast<double>(r.per_trial.size());
    r.mean = std::accumulate(r.per_trial.begin(), r.per_trial.end(), 0.0) / n;
    double var = 0;
    for (double a : r.per_trial) var += (a - r.mean) * (a - r.mean);
    r.std = std::sqrt(var / n);
    return r;
}

Evaluation evaluate(const std::vector<PuzzleSpec>& dataset, Client& client, const EvaluationOptions& options,
                    const TemplateSet& templates) {
    if (dataset.empty()) throw EmptyDataset("dataset has no puzzles");
    if (options.trials < 1) throw PreconditionError("trials must be >= 1");

    std::vector<PuzzleSpec> puzzles = dataset;
    std::sort(puzzles.begin(), puzzles.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    std::vector<std::string> prompts;
    for (auto& p : puzzles) {
        if (!p.solution_space) {
            try {
                auto space = solve(p.domain, p.programs(), options.solve);
                if (space.exhausted) p.solution_space = summarize(space);
            } catch (const DomainTooLarge&) {
            }
        }
        prompts.push_back(render_prompt(p, templates));
    }

    std::vector<CompletionRequest> requests;
    for (int t = 0; t < options.trials; ++t) {
        for (const auto& prompt : prompts) {
            CompletionRequest req;
            req.model = options.model;
            req.messages.push_back({"user", prompt});
            req.temperature = options.temperature;
            req.max_tokens = options.max_tokens;
            req.seed = t;
            requests.push_back(std::move(req));
        }
    }
    auto results = client.complete_many(requests, options.max_in_flight);

    Evaluation out;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const int trial = static_cast<int>(i / puzzles.size());
        const auto& p = puzzles[i % puzzles.size()];
        out.verdicts.push_back(results[i].ok() ? verify(*results[i].text, p, trial)
                                               : flagged_verdict(p, trial, results[i].error));
    }
    out.report = score(out.verdicts, options.model, options.dataset);
    out.report.temperature = options.temperature;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string report_markdown(const ScoreReport& r) {
    std::string out;
    out += "# " + (r.model.empty() ? std::string("model") : r.model) + " on " +
           (r.dataset.empty() ? std::string("dataset") : r.dataset) + "\n\n";
    out += "Trials: " + std::to_string(r.per_trial.size()) + ", accuracy " + fixed(r.mean) + " +/- " + fixed(r.std) +
           " (population std)";
    if (r.flagged) out += ", " + std::to_string(r.flagged) + " flagged backend errors";
    out += "\n\nPer trial:";
    for (double a : r.per_trial) out += " " + fixed(a);
    out += "\n\n## By constraint count\n\n| constraints | correct | total | accuracy |\n|---|---|---|---|\n";
    for (const auto& [k, b] : r.by_constraint_count)
        out += "| " + std::to_string(k) + " | " + std::to_string(b.correct) + " | " + std::to_string(b.total) + " | " +
               fixed(b.accuracy()) + " |\n";
    out += "\n## By solution space ratio\n\n| ratio | correct | total | accuracy |\n|---|---|---|---|\n";
    for (const auto& [k, b] : r.by_ratio_bucket)
        out += "| " + bucket_label(k) + " | " + std::to_string(b.correct) + " | " + std::to_string(b.total) + " | " +
               fixed(b.accuracy()) + " |\n";
    out += "\n## Cells\n\n| constraints | ratio | correct | total | accuracy |\n|---|---|---|---|---|\n";
    for (const auto& [k, b] : r.by_cell)
        out += "| " + std::to_string(k.first) + " | " + bucket_label(k.second) + " | " + std::to_string(b.correct) +
               " | " + std::to_string(b.total) + " | " + fixed(b.accuracy()) + " |\n";
    return out;
}

std::string report_csv(const ScoreReport& r) {
    std::string out = "dimension,constraint_count,ratio_bucket,label,correct,total,accuracy\n";
    auto row = [&](const char* dim, const std::string& count, int bucket, const BucketScore& b) {
        out += std::string(dim) + "," + count + "," + (bucket == -2 ? "" : std::to_string(bucket)) + "," +
               (bucket == -2 ? "" : "\"" + bucket_label(bucket) + "\"") + "," + std::to_string(b.correct) + "," +
               std::to_string(b.total) + "," + fixed(b.accuracy(), 6) + "\n";
    };
    for (const auto& [k, b] : r.by_constraint_count) row("constraint_count", std::to_string(k), -2, b);
    for (const auto& [k, b] : r.by_ratio_bucket) row("ratio_bucket", "", k, b);
    for (const auto& [k, b] : r.by_cell) row("cell", std::to_string(k.first), k.second, b);
    return out;
}

json plot_data(const ScoreReport& r) {
    json j = score_to_json(r);
    json out;
    out["model"] = r.model;
    out["dataset"] = r.dataset;
    out["series"] = {{"constraint_count", j["by_constraint_count"]},
                     {"ratio_bucket", j["by_ratio_bucket"]},
                     {"cells", j["cells"]}};
    return out;
}

}  // namespace puzzleforge
