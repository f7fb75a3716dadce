#include "puzzleforge/puzzle.hpp"

#include <set>

namespace puzzleforge {

std::string_view language_code(Language l) { return l == Language::CN ? "CN" : "EN"; }

Language parse_language(std::string_view code) {
    if (code == "EN" || code == "en") return Language::EN;
    if (code == "CN" || code == "cn" || code == "ZH" || code == "zh") return Language::CN;
    throw Error("unknown language '" + std::string(code) + "'");
}

SpaceSummary summarize(const SolutionSpace& space) {
    return {space.solution_count, space.domain_count, space.exhausted};
}

int ratio_bucket(std::uint64_t solutions, std::uint64_t domain) {
    if (solutions == 0 || solutions > domain) return -1;
    int b = 0;
    for (unsigned __int128 scaled = solutions; scaled * 10 <= domain; scaled *= 10) ++b;
    return b;
}

std::string bucket_label(int bucket) {
    if (bucket < 0) return "none";
    auto power = [](int e) { return e == 0 ? std::string("1") : "10^-" + std::to_string(e); };
    return "[" + power(bucket) + "," + power(bucket + 1) + ")";
}

std::vector<dsl::Program> PuzzleSpec::programs() const {
    std::vector<dsl::Program> out;
    out.reserve(constraints.size());
    for (const auto& c : constraints) out.push_back(c.program);
    return out;
}

PuzzleSpec make_puzzle(std::string id, Language language, std::string background, DomainSpec domain,
                       const std::vector<ConstraintSource>& constraints, const json& example,
                       std::optional<Lineage> lineage) {
    if (constraints.empty()) throw DomainError("puzzle '" + id + "' has no constraints");
    PuzzleSpec p;
    p.id = std::move(id);
    p.language = language;
    p.background = std::move(background);
    p.schema = schema_of(domain);
    std::set<std::string> ids;
    for (const auto& c : constraints) {
        if (c.id.empty() || !ids.insert(c.id).second)
            throw DomainError("puzzle '" + p.id + "': constraint id '" + c.id + "' is empty or repeated");
        // Compile before building the aggregate: GCC leaks already-copied
        // members when an initializer throws mid-aggregate.
        auto program = dsl::compile(c.expr, domain);
        p.constraints.push_back({c.id, c.text, c.expr, std::move(program)});
    }
    p.example = arrangement_from_json(domain, example);
    p.domain = std::move(domain);
    p.lineage = std::move(lineage);
    return p;
}

PuzzleSpec with_constraints(const PuzzleSpec& base, std::string id, std::vector<Constraint> constraints,
                            Lineage lineage) {
    PuzzleSpec p = base;
    p.id = std::move(id);
    p.constraints = std::move(constraints);
    p.lineage = std::move(lineage);
    p.solution_space.reset();
    return p;
}

json puzzle_to_json(const PuzzleSpec& p) {
    json constraints = json::array();
    for (const auto& c : p.constraints) constraints.push_back({{"id", c.id}, {"text", c.text}, {"expr", c.expr}});
    json j;
    j["id"] = p.id;
    j["language"] = language_code(p.language);
    j["background"] = p.background;
    j["constraints"] = std::move(constraints);
    j["domain"] = domain_to_json(p.domain);
    j["schema"] = schema_to_json(p.schema);
    j["example"] = arrangement_to_json(p.domain, p.example);
    if (p.lineage)
        j["lineage"] = {{"parent", p.lineage->parent}, {"op", p.lineage->op}, {"root", p.lineage->root}};
    else
        j["lineage"] = nullptr;
    if (p.solution_space)
        j["solution_space"] = {{"solution_count", p.solution_space->solution_count},
                               {"domain_count", p.solution_space->domain_count},
                               {"exhausted", p.solution_space->exhausted}};
    return j;
}

PuzzleSpec puzzle_from_json(const json& j) {
    if (!j.is_object()) throw Error("puzzle must be a JSON object");
    for (const char* key : {"id", "language", "background", "constraints", "domain", "example"})
        if (!j.contains(key)) throw Error(std::string("puzzle is missing '") + key + "'");

    auto domain = domain_from_json(j.at("domain"));
    if (j.contains("schema") && !j.at("schema").is_null()) {
        if (schema_from_json(j.at("schema")) != schema_of(domain))
            throw DomainError("schema does not match the declared domain");
    }
    std::vector<ConstraintSource> constraints;
    if (!j.at("constraints").is_array()) throw Error("'constraints' must be an array");
    for (const auto& c : j.at("constraints")) {
        auto id = c.at("id").get<std::string>();
        auto text = c.value("text", "");
        auto expr = c.at("expr").get<std::string>();
        constraints.push_back({std::move(id), std::move(text), std::move(expr)});
    }

    std::optional<Lineage> lineage;
    if (j.contains("lineage") && j.at("lineage").is_object()) {
        const auto& l = j.at("lineage");
        lineage = Lineage{l.at("parent").get<std::string>(), l.at("op").get<std::string>(), l.value("root", "")};
    }
    auto p = make_puzzle(j.at("id").get<std::string>(), parse_language(j.at("language").get<std::string>()),
                         j.at("background").get<std::string>(), std::move(domain), constraints, j.at("example"),
                         std::move(lineage));
    if (j.contains("solution_space") && j.at("solution_space").is_object()) {
        const auto& s = j.at("solution_space");
        p.solution_space = SpaceSummary{s.at("solution_count").get<std::uint64_t>(),
                                        s.at("domain_count").get<std::uint64_t>(), s.value("exhausted", true)};
    }
    return p;
}

}  // namespace puzzleforge
