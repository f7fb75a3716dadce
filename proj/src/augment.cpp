#include "puzzleforge/augment.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "puzzleforge/eval.hpp"
#include "puzzleforge/extract.hpp"

namespace puzzleforge {

json record_to_json(const AugmentationRecord& r) {
    json j;
    j["parent"] = r.parent;
    j["op"] = r.op;
    j["constraint_id"] = r.constraint_id;
    if (!r.expr.empty()) j["expr"] = r.expr;
    j["solution_count"] = r.solution_count ? json(*r.solution_count) : json(nullptr);
    j["accepted"] = r.accepted;
    j["attempt"] = r.attempt;
    j["child"] = r.child;
    j["reason"] = r.reason;
    return j;
}

namespace {

std::string root_of(const PuzzleSpec& p) { return p.lineage && !p.lineage->root.empty() ? p.lineage->root : p.id; }

std::optional<SpaceSummary> try_count(const PuzzleSpec& p, const SolveOptions& options) {
    try {
        auto space = solve(p.domain, p.programs(), options);
        if (space.exhausted) return summarize(space);
    } catch (const DomainTooLarge&) {
    }
    return std::nullopt;
}

}  // namespace

std::uint64_t bounded_draw(std::uint64_t& state, std::uint64_t n) {
    // splitmix64 steps feed a rejection sampler.
    const std::uint64_t limit = n == 0 ? 0 : ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    for (;;) {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        if (n == 0) return 0;
        if (z < limit) return z % n;
    }
}

ReduceResult reduce(const PuzzleSpec& puzzle, std::uint64_t seed, bool count, const SolveOptions& options) {
    ReduceResult out;
    if (puzzle.constraints.size() < 2) return out;
    // Mix the id in so each puzzle gets its own stream under one run seed.
    std::uint64_t state = seed;
    for (unsigned char c : puzzle.id) state = (state ^ c) * 0x100000001b3ULL;

    const auto root = root_of(puzzle);
    const PuzzleSpec* parent = &puzzle;
    std::vector<Constraint> remaining = puzzle.constraints;
    out.puzzles.reserve(remaining.size() - 1);  // keeps `parent` valid
    while (remaining.size() > 1) {
        auto victim = static_cast<std::size_t>(bounded_draw(state, remaining.size()));
        const auto removed = remaining[victim].id;
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(victim));
        auto child = with_constraints(*parent, puzzle.id + "-r" + std::to_string(remaining.size()), remaining,
                                      Lineage{parent->id, "reduce", root});
        if (count) child.solution_space = try_count(child, options);

        AugmentationRecord rec;
        rec.parent = parent->id;
        rec.op = "reduce";
        rec.constraint_id = removed;
        if (child.solution_space) rec.solution_count = child.solution_space->solution_count;
        rec.accepted = true;
        rec.attempt = static_cast<int>(out.records.size());
        rec.child = child.id;
        rec.reason = "removed";
        out.records.push_back(std::move(rec));
        out.puzzles.push_back(std::move(child));
        parent = &out.puzzles.back();
    }
    return out;
}

namespace {

std::string samples_text(const PuzzleSpec& p, const SolutionSpace& space, std::size_t limit) {
    std::string out;
    for (std::size_t i = 0; i < space.samples.size() && i < limit; ++i)
        out += (i ? "\n" : "") + arrangement_to_json(p.domain, space.samples[i]).dump();
    return out;
}

std::string fresh_id(const PuzzleSpec& p) {
    std::set<std::string> used;
    for (const auto& c : p.constraints) used.insert(c.id);
    for (std::size_t n = p.constraints.size() + 1;; ++n)
        if (!used.count("c" + std::to_string(n))) return "c" + std::to_string(n);
}

}  // namespace

ExpandResult expand(const PuzzleSpec& puzzle, Client& client, const ExpandOptions& options,
                    const TemplateSet& templates) {
    ExpandResult out;
    const auto root = root_of(puzzle);
    PuzzleSpec base = puzzle;
    auto opts = options.solve;
    opts.sample_cap = std::max<std::size_t>(opts.sample_cap, options.samples_in_prompt);
    auto space = solve(base.domain, base.programs(), opts);
    if (!space.exhausted) throw SolveTimeout("expand: solution space of '" + puzzle.id + "' not exhausted");
    if (space.solution_count == 0) throw PreconditionError("expand: puzzle '" + puzzle.id + "' has no solution");
    base.solution_space = summarize(space);

    for (int attempt = 0; attempt < options.max_attempts && space.solution_count > 1; ++attempt) {
        AugmentationRecord rec;
        rec.parent = base.id;
        rec.op = "expand";
        rec.attempt = attempt;
        rec.constraint_id = fresh_id(base);

        auto prompt = render(templates.get(base.language, "expand"),
                             {{"background", base.background},
                              {"constraints", numbered_constraints(base)},
                              {"schema", describe_schema(base.schema, base.language)},
                              {"solution_count", std::to_string(space.solution_count)},
                              {"domain_count", std::to_string(space.domain_count)},
                              {"samples", samples_text(base, space, options.samples_in_prompt)},
                              {"dsl", templates.get(base.language, "dsl")}});
        CompletionRequest req;
        req.model = options.model;
        req.messages.push_back({"user", std::move(prompt)});
        req.temperature = options.temperature;
        req.max_tokens = options.max_tokens;
        req.seed = attempt;

        std::string response;
        try {
            response = client.complete(req);
        } catch (const LlmError& e) {
            rec.reason = std::string("backend_error: ") + e.what();
            out.records.push_back(std::move(rec));
            continue;
        }

        std::optional<json> proposal;
        auto segments = json_segments(response);
        for (auto it = segments.rbegin(); it != segments.rend() && !proposal; ++it)
            if (it->is_object() && it->contains("expr") && it->at("expr").is_string()) proposal = *it;
        if (!proposal) {
            rec.reason = "malformed";
            out.records.push_back(std::move(rec));
            continue;
        }
        rec.expr = proposal->at("expr").get<std::string>();
        std::string text = proposal->contains("text") && proposal->at("text").is_string()
                               ? proposal->at("text").get<std::string>()
                               : rec.expr;

        dsl::Program program;
        try {
            program = dsl::compile(rec.expr, base.domain);
        } catch (const DslError& e) {
            rec.reason = std::string("dsl_rejected: ") + e.what();
            out.records.push_back(std::move(rec));
            continue;
        }

        auto constraints = base.constraints;
        constraints.push_back({rec.constraint_id, text, rec.expr, program});
        auto child = with_constraints(base, puzzle.id + "-e" + std::to_string(out.puzzles.size() + 1),
                                      std::move(constraints), Lineage{base.id, "expand", root});
        SolutionSpace next;
        try {
            next = solve(child.domain, child.programs(), opts);
        } catch (const DomainTooLarge& e) {
            rec.reason = std::string("too_large: ") + e.what();
            out.records.push_back(std::move(rec));
            continue;
        }
        rec.solution_count = next.solution_count;
        if (!next.exhausted) {
            rec.solution_count.reset();
            rec.reason = "timeout";
        } else if (next.solution_count == 0) {
            rec.reason = "unsolvable";
        } else if (next.solution_count >= space.solution_count) {
            rec.reason = "not_smaller";
        } else {
            rec.accepted = true;
            rec.reason = "accepted";
            rec.child = child.id;
            child.solution_space = summarize(next);
            space = std::move(next);
            base = child;
            out.puzzles.push_back(std::move(child));
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

std::vector<DifficultyCell> difficulty_profile(const std::vector<PuzzleSpec>& puzzles) {
    std::map<std::pair<std::size_t, int>, std::size_t> cells;
    for (const auto& p : puzzles) {
        if (!p.solution_space) throw MissingSolutionSpace("puzzle '" + p.id + "' has no solution space");
        ++cells[{p.constraints.size(), ratio_bucket(p.solution_space->solution_count, p.solution_space->domain_count)}];
    }
    std::vector<DifficultyCell> out;
    for (const auto& [k, n] : cells) out.push_back({k.first, k.second, n});
    return out;
}

}  // namespace puzzleforge
