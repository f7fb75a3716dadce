#include "puzzleforge/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "puzzleforge/extract.hpp"

namespace puzzleforge {

namespace {

std::optional<json> last_object_with(std::string_view response, std::initializer_list<const char*> keys) {
    auto segments = json_segments(response);
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
        if (!it->is_object()) continue;
        if (std::all_of(keys.begin(), keys.end(), [&](const char* k) { return it->contains(k); })) return *it;
    }
    return std::nullopt;
}

CompletionRequest user_request(const GenerationOptions& o, std::string prompt) {
    CompletionRequest r;
    r.model = o.model;
    r.messages.push_back({"user", std::move(prompt)});
    r.temperature = o.temperature;
    r.max_tokens = o.max_tokens;
    r.seed = o.seed;
    return r;
}

}  // namespace

CorpusItem corpus_item_from_json(const json& j) {
    if (!j.is_object()) throw Error("corpus item must be a JSON object");
    CorpusItem item;
    item.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    item.language = parse_language(j.value("language", "EN"));
    if (j.contains("question"))
        item.text = j.at("question").get<std::string>();
    else
        item.text = j.value("text", "");
    if (trim(item.text).empty()) throw Error("corpus item '" + item.id + "' has no question text");
    return item;
}

std::vector<std::string> split_constraints(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        auto t = trim(current);
        if (!t.empty()) out.push_back(std::move(t));
        current.clear();
    };
    static const std::string_view kWide = "\xEF\xBC\x9B";  // U+FF1B
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == ';') {
            flush();
        } else if (text.substr(i, kWide.size()) == kWide) {
            flush();
            i += kWide.size() - 1;
        } else {
            current += text[i];
        }
    }
    flush();
    return out;
}

Draft parse_draft(std::string_view response) {
    auto obj = last_object_with(response, {"background", "logic_constraints"});
    if (!obj) throw MalformedLLMOutput("no JSON object with background and logic_constraints");
    Draft d;
    const auto& bg = obj->at("background");
    if (!bg.is_string() || trim(bg.get<std::string>()).empty())
        throw MalformedLLMOutput("background must be a non-empty string");
    d.background = trim(bg.get<std::string>());
    const auto& lc = obj->at("logic_constraints");
    if (lc.is_string()) {
        d.constraints = split_constraints(lc.get<std::string>());
    } else if (lc.is_array()) {
        for (const auto& c : lc) {
            if (!c.is_string()) throw MalformedLLMOutput("logic_constraints entries must be strings");
            for (auto& part : split_constraints(c.get<std::string>())) d.constraints.push_back(std::move(part));
        }
    } else {
        throw MalformedLLMOutput("logic_constraints must be a string or a list");
    }
    if (d.constraints.empty()) throw MalformedLLMOutput("logic_constraints is empty");
    return d;
}

PuzzleSpec parse_spec(std::string_view response, const std::string& id, Language language,
                      const std::string& background) {
    auto obj = last_object_with(response, {"domain", "constraints", "example"});
    if (!obj) throw MalformedLLMOutput("no JSON object with domain, constraints and example");
    if (!obj->at("constraints").is_array() || obj->at("constraints").empty())
        throw MalformedLLMOutput("constraints must be a non-empty list");

    DomainSpec domain;
    try {
        domain = domain_from_json(obj->at("domain"));
    } catch (const json::exception& e) {
        throw ExampleNonconformant(std::string("domain declaration: ") + e.what());
    } catch (const DomainError& e) {
        throw ExampleNonconformant(std::string("domain declaration: ") + e.what());
    }

    std::vector<ConstraintSource> sources;
    for (const auto& c : obj->at("constraints")) {
        const auto n = sources.size() + 1;
        if (!c.is_object() || !c.contains("expr") || !c.at("expr").is_string())
            throw MalformedLLMOutput("constraint " + std::to_string(n) + " has no expr");
        std::string text = c.contains("text") && c.at("text").is_string() ? c.at("text").get<std::string>() : "";
        std::string expr = c.at("expr").get<std::string>();
        try {
            dsl::compile(expr, domain);
        } catch (const DslError& e) {
            throw DslRejected("constraint " + std::to_string(n) + " (" + expr + "): " + e.what());
        }
        sources.push_back({"c" + std::to_string(n), std::move(text), std::move(expr)});
    }

    auto report = conforms(obj->at("example"), schema_of(domain));
    if (!report.ok()) {
        const auto& v = report.violations.front();
        throw ExampleNonconformant("example: " + v.kind + " at " + v.path);
    }
    return make_puzzle(id, language, background, std::move(domain), sources, obj->at("example"));
}

Draft formulate(const CorpusItem& item, Client& client, const TemplateSet& templates,
                const GenerationOptions& options) {
    const auto& tmpl = templates.get(item.language, "formulate");
    if (!has_placeholder(tmpl, "question"))
        throw PreconditionError("formulate template lacks the [[[question]]] placeholder");
    auto prompt = render(tmpl, {{"question", item.text}});
    return parse_draft(client.complete(user_request(options, std::move(prompt))));
}

PuzzleSpec generate_spec(const CorpusItem& item, const Draft& draft, Client& client, const TemplateSet& templates,
                         const GenerationOptions& options) {
    std::string constraints;
    for (std::size_t i = 0; i < draft.constraints.size(); ++i)
        constraints += (i ? "\n" : "") + std::to_string(i + 1) + ". " + draft.constraints[i];
    auto prompt = render(templates.get(item.language, "generate"),
                         {{"background", draft.background},
                          {"constraints", constraints},
                          {"dsl", templates.get(item.language, "dsl")}});
    auto response = client.complete(user_request(options, std::move(prompt)));
    auto puzzle = parse_spec(response, item.id, item.language, draft.background);
    // Keep the drafted wording when the model left a text field out.
    for (std::size_t i = 0; i < puzzle.constraints.size() && i < draft.constraints.size(); ++i)
        if (trim(puzzle.constraints[i].text).empty()) puzzle.constraints[i].text = draft.constraints[i];
    return puzzle;
}

std::string_view status_name(ValidationStatus s) {
    switch (s) {
    case ValidationStatus::Valid: return "valid";
    case ValidationStatus::EmptySolutionSpace: return "empty_solution_space";
    case ValidationStatus::ParseFailure: return "parse_failure";
    case ValidationStatus::SchemaMismatch: return "schema_mismatch";
    case ValidationStatus::TooLarge: return "too_large";
    case ValidationStatus::Timeout: return "timeout";
    }
    return "unknown";
}

json report_to_json(const ValidationReport& r) {
    json j;
    j["puzzle_id"] = r.puzzle_id;
    j["status"] = status_name(r.status);
    j["attempts"] = r.attempts;
    j["stage"] = r.stage;
    j["detail"] = r.detail;
    if (r.space)
        j["solution_space"] = {{"solution_count", r.space->solution_count},
                               {"domain_count", r.space->domain_count},
                               {"exhausted", r.space->exhausted}};
    else
        j["solution_space"] = nullptr;
    return j;
}

ValidationReport cross_validate(const PuzzleSpec& puzzle, const SolveOptions& options) {
    ValidationReport r;
    r.puzzle_id = puzzle.id;
    r.attempts = 1;
    r.stage = "validate";
    try {
        auto space = solve(puzzle.domain, puzzle.programs(), options);
        r.space = summarize(space);
        if (!space.exhausted) {
            r.status = ValidationStatus::Timeout;
            r.detail = "search stopped after " + std::to_string(options.timeout.count()) + " ms";
        } else if (space.solution_count == 0) {
            r.status = ValidationStatus::EmptySolutionSpace;
            r.detail = "no arrangement satisfies every constraint";
        }
    } catch (const DomainTooLarge& e) {
        r.status = ValidationStatus::TooLarge;
        r.detail = e.what();
    }
    return r;
}

std::string fingerprint(const PuzzleSpec& puzzle) {
    std::string bg;
    bool space = false;
    for (unsigned char c : puzzle.background) {
        if (std::isspace(c)) {
            space = !bg.empty();
            continue;
        }
        if (space) bg += ' ';
        space = false;
        bg += static_cast<char>(std::tolower(c));
    }
    std::vector<std::string> exprs;
    for (const auto& c : puzzle.constraints) exprs.push_back(dsl::print(c.program.source()));
    std::sort(exprs.begin(), exprs.end());
    std::string out = bg;
    for (const auto& e : exprs) out += "\n" + e;
    return out;
}

namespace {

struct Outcome {
    std::optional<PuzzleSpec> puzzle;
    std::optional<ValidationReport> report;
};

Outcome synthesize_one(const CorpusItem& item, Client& client, const TemplateSet& templates,
                       const SynthesisOptions& options) {
    const int budget = options.retries + 1;
    auto gen = options.generation;

    std::optional<Draft> draft;
    std::string detail;
    for (int attempt = 0; attempt < budget && !draft; ++attempt) {
        gen.seed = attempt;
        try {
            draft = formulate(item, client, templates, gen);
        } catch (const MalformedLLMOutput& e) {
            detail = e.what();
        } catch (const LlmError& e) {
            detail = std::string("backend: ") + e.what();
        }
    }
    if (!draft)
        return {std::nullopt, ValidationReport{item.id, ValidationStatus::ParseFailure, budget, "formulate", detail, {}}};

    ValidationReport last{item.id, ValidationStatus::ParseFailure, 0, "generate", "", {}};
    for (int attempt = 0; attempt < budget; ++attempt) {
        gen.seed = attempt;
        try {
            auto puzzle = generate_spec(item, *draft, client, templates, gen);
            auto report = cross_validate(puzzle, options.solve);
            report.attempts = attempt + 1;
            if (report.valid()) {
                puzzle.solution_space = report.space;
                return {std::move(puzzle), std::nullopt};
            }
            last = report;
        } catch (const DslRejected& e) {
            last = {item.id, ValidationStatus::ParseFailure, 0, "generate", e.what(), {}};
        } catch (const MalformedLLMOutput& e) {
            last = {item.id, ValidationStatus::ParseFailure, 0, "generate", e.what(), {}};
        } catch (const ExampleNonconformant& e) {
            last = {item.id, ValidationStatus::SchemaMismatch, 0, "generate", e.what(), {}};
        } catch (const DomainError& e) {
            last = {item.id, ValidationStatus::SchemaMismatch, 0, "generate", e.what(), {}};
        } catch (const LlmError& e) {
            last = {item.id, ValidationStatus::ParseFailure, 0, "generate", std::string("backend: ") + e.what(), {}};
        }
    }
    last.attempts = budget;
    return {std::nullopt, std::move(last)};
}

}  // namespace

SynthesisResult synthesize(const std::vector<CorpusItem>& corpus, Client& client, const TemplateSet& templates,
                           const SynthesisOptions& options) {
    std::vector<CorpusItem> items = corpus;
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < items.size(); ++i)
        if (items[i].id == items[i - 1].id) throw PreconditionError("corpus item id '" + items[i].id + "' repeats");

    std::vector<Outcome> outcomes(items.size());
    parallel_for(items.size(), options.workers,
                 [&](std::size_t i) { outcomes[i] = synthesize_one(items[i], client, templates, options); });

    SynthesisResult result;
    std::map<std::string, std::string> seen;  // fingerprint -> kept id
    for (auto& o : outcomes) {
        if (o.report) {
            result.quarantine.push_back(std::move(*o.report));
            continue;
        }
        auto fp = fingerprint(*o.puzzle);
        if (auto it = seen.find(fp); it != seen.end()) {
            result.duplicates.push_back({o.puzzle->id, it->second});
            continue;
        }
        seen.emplace(std::move(fp), o.puzzle->id);
        result.puzzles.push_back(std::move(*o.puzzle));
    }
    return result;
}

}  // namespace puzzleforge
