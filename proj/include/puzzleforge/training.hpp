#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "puzzleforge/eval.hpp"

namespace puzzleforge {

struct SampledResponse {
    std::string text;
    Verdict verdict;
};

struct SampleSet {
    std::string puzzle_id;
    std::string prompt;
    std::string model;
    double temperature = 1.0;
    std::vector<SampledResponse> responses;  // sampling order

    std::size_t correct() const;
};

json sample_set_to_json(const SampleSet& s);
SampleSet sample_set_from_json(const json& j);

struct SampleOptions {
    std::string model;
    int n = 8;
    double temperature = 1.0;
    int max_tokens = 2048;
    std::size_t max_in_flight = 0;
};

/// n completions (seeds 0..n-1), each verified on arrival. Backend failures
/// become flagged incorrect responses. Throws PreconditionError for puzzles
/// with fewer than two constraints or n < 1.
SampleSet sample(const PuzzleSpec& puzzle, Client& client, const SampleOptions& options,
                 const TemplateSet& templates = TemplateSet::builtin());

enum class SelectionPolicy { First, All, Random };

SelectionPolicy parse_policy(std::string_view name);

struct SftRecord {
    std::string prompt;
    std::string completion;
    std::string puzzle_id;
    std::string model;
};

struct DpoRecord {
    std::string prompt;
    std::string chosen;
    std::string rejected;
    std::string puzzle_id;
};

json sft_to_json(const SftRecord& r);
json dpo_to_json(const DpoRecord& r);

struct BuildStats {
    std::size_t sets = 0;
    std::size_t emitted = 0;
    std::size_t dropped = 0;
};

/// Sets are folded in puzzle id order. First: the first correct response.
/// All: every correct response. Random: one correct response drawn with `seed`.
std::vector<SftRecord> build_sft(const std::vector<SampleSet>& sets, SelectionPolicy policy = SelectionPolicy::First,
                                 std::uint64_t seed = 0, BuildStats* stats = nullptr);

/// First: first correct with first incorrect. All: every correct x incorrect
/// pair. Random: one seeded pair. Flagged backend failures are never rejected
/// responses.
std::vector<DpoRecord> build_dpo(const std::vector<SampleSet>& sets, SelectionPolicy policy = SelectionPolicy::First,
                                 std::uint64_t seed = 0, BuildStats* stats = nullptr);

}  // namespace puzzleforge
