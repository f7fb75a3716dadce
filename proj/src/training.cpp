#include "puzzleforge/training.hpp"

#include <algorithm>

#include "puzzleforge/augment.hpp"

namespace puzzleforge {

std::size_t SampleSet::correct() const {
    return static_cast<std::size_t>(
        std::count_if(responses.begin(), responses.end(), [](const auto& r) { return r.verdict.correct; }));
}

json sample_set_to_json(const SampleSet& s) {
    json responses = json::array();
    for (const auto& r : s.responses) responses.push_back({{"text", r.text}, {"verdict", verdict_to_json(r.verdict)}});
    json j;
    j["puzzle_id"] = s.puzzle_id;
    j["prompt"] = s.prompt;
    j["model"] = s.model;
    j["temperature"] = s.temperature;
    j["responses"] = std::move(responses);
    return j;
}

SampleSet sample_set_from_json(const json& j) {
    SampleSet s;
    s.puzzle_id = j.at("puzzle_id").get<std::string>();
    s.prompt = j.at("prompt").get<std::string>();
    s.model = j.value("model", "");
    s.temperature = j.value("temperature", 1.0);
    for (const auto& r : j.at("responses"))
        s.responses.push_back({r.at("text").get<std::string>(), verdict_from_json(r.at("verdict"))});
    return s;
}

SampleSet sample(const PuzzleSpec& puzzle, Client& client, const SampleOptions& options,
                 const TemplateSet& templates) {
    if (puzzle.constraints.size() < 2)
        throw PreconditionError("puzzle '" + puzzle.id + "' has a single constraint and is not sampled");
    if (options.n < 1) throw PreconditionError("n must be >= 1");
    SampleSet set;
    set.puzzle_id = puzzle.id;
    set.prompt = render_prompt(puzzle, templates);
    set.model = options.model;
    set.temperature = options.temperature;

    std::vector<CompletionRequest> requests;
    for (int i = 0; i < options.n; ++i) {
        CompletionRequest req;
        req.model = options.model;
        req.messages.push_back({"user", set.prompt});
        req.temperature = options.temperature;
        req.max_tokens = options.max_tokens;
        req.seed = i;
        requests.push_back(std::move(req));
    }
    auto results = client.complete_many(requests, options.max_in_flight);
    for (std::size_t i = 0; i < results.size(); ++i) {
        const int index = static_cast<int>(i);
        if (results[i].ok())
            set.responses.push_back({*results[i].text, verify(*results[i].text, puzzle, index)});
        else
            set.responses.push_back({"", flagged_verdict(puzzle, index, results[i].error)});
    }
    return set;
}

SelectionPolicy parse_policy(std::string_view name) {
    if (name == "first") return SelectionPolicy::First;
    if (name == "all") return SelectionPolicy::All;
    if (name == "random") return SelectionPolicy::Random;
    throw Error("unknown selection policy '" + std::string(name) + "'");
}

json sft_to_json(const SftRecord& r) {
    return {{"prompt", r.prompt}, {"completion", r.completion}, {"puzzle_id", r.puzzle_id}, {"model", r.model}};
}

json dpo_to_json(const DpoRecord& r) {
    return {{"prompt", r.prompt}, {"chosen", r.chosen}, {"rejected", r.rejected}, {"puzzle_id", r.puzzle_id}};
}

namespace {

std::vector<const SampleSet*> by_id(const std::vector<SampleSet>& sets) {
    std::vector<const SampleSet*> out;
    for (const auto& s : sets) out.push_back(&s);
    std::stable_sort(out.begin(), out.end(), [](auto a, auto b) { return a->puzzle_id < b->puzzle_id; });
    return out;
}

}  // namespace

std::vector<SftRecord> build_sft(const std::vector<SampleSet>& sets, SelectionPolicy policy, std::uint64_t seed,
                                 BuildStats* stats) {
    std::vector<SftRecord> out;
    BuildStats local;
    std::uint64_t state = seed;
    for (const auto* s : by_id(sets)) {
        ++local.sets;
        std::vector<const SampledResponse*> good;
        for (const auto& r : s->responses)
            if (r.verdict.correct) good.push_back(&r);
        if (good.empty()) {
            ++local.dropped;
            continue;
        }
        if (policy == SelectionPolicy::First) good.resize(1);
        if (policy == SelectionPolicy::Random) good = {good[bounded_draw(state, good.size())]};
        for (const auto* r : good) out.push_back({s->prompt, r->text, s->puzzle_id, s->model});
    }
    local.emitted = out.size();
    if (stats) *stats = local;
    return out;
}

std::vector<DpoRecord> build_dpo(const std::vector<SampleSet>& sets, SelectionPolicy policy, std::uint64_t seed,
                                 BuildStats* stats) {
    std::vector<DpoRecord> out;
    BuildStats local;
    std::uint64_t state = seed;
    for (const auto* s : by_id(sets)) {
        ++local.sets;
        std::vector<const SampledResponse*> good;
        std::vector<const SampledResponse*> bad;
        for (const auto& r : s->responses) {
            if (r.verdict.correct)
                good.push_back(&r);
            else if (!r.verdict.flagged)
                bad.push_back(&r);
        }
        if (good.empty() || bad.empty()) {
            ++local.dropped;
            continue;
        }
        switch (policy) {
        case SelectionPolicy::First: out.push_back({s->prompt, good[0]->text, bad[0]->text, s->puzzle_id}); break;
        case SelectionPolicy::All:
            for (const auto* g : good)
                for (const auto* b : bad) out.push_back({s->prompt, g->text, b->text, s->puzzle_id});
            break;
        case SelectionPolicy::Random: {
            const auto* g = good[bounded_draw(state, good.size())];
            const auto* b = bad[bounded_draw(state, bad.size())];
            out.push_back({s->prompt, g->text, b->text, s->puzzle_id});
            break;
        }
        }
    }
    local.emitted = out.size();
    if (stats) *stats = local;
    return out;
}

}  // namespace puzzleforge
