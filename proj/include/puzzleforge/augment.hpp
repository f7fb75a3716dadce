#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "puzzleforge/llm.hpp"
#include "puzzleforge/puzzle.hpp"
#include "puzzleforge/templates.hpp"

namespace puzzleforge {

class MissingSolutionSpace : public Error {
public:
    using Error::Error;
};

struct AugmentationRecord {
    std::string parent;
    std::string op;             // reduce | expand
    std::string constraint_id;  // removed or proposed
    std::string expr;           // proposed expression (expand)
    std::optional<std::uint64_t> solution_count;  // unknown when not traversable
    bool accepted = false;
    int attempt = 0;
    std::string child;   // id of the resulting puzzle when accepted
    std::string reason;  // accepted | removed | malformed | dsl_rejected | unsolvable | not_smaller | ...
};

json record_to_json(const AugmentationRecord& r);

/// Unbiased draw in [0, n) by rejection; portable across standard libraries.
std::uint64_t bounded_draw(std::uint64_t& state_seed, std::uint64_t n);

struct ReduceResult {
    std::vector<PuzzleSpec> puzzles;  // k-1 puzzles, constraint counts k-1 ... 1
    std::vector<AugmentationRecord> records;
};

/// Removes one uniformly drawn constraint at a time until one remains.
/// Children are named `<parent>-r<k>` for k remaining constraints; with
/// `count` the traversal fills in each child's solution space when the domain
/// is small enough. A puzzle with fewer than two constraints yields nothing.
ReduceResult reduce(const PuzzleSpec& puzzle, std::uint64_t seed, bool count = true,
                    const SolveOptions& options = {});

struct ExpandOptions {
    int max_attempts = 8;
    std::string model;
    double temperature = 0.2;
    int max_tokens = 2048;
    std::size_t samples_in_prompt = 5;
    SolveOptions solve;
};

struct ExpandResult {
    std::vector<PuzzleSpec> puzzles;  // accepted children in order, named `<root>-e<n>`
    std::vector<AugmentationRecord> records;
};

/// Asks for one extra constraint per attempt; accepts it only when it
/// type-checks and shrinks the solution count without emptying it. Stops at
/// max_attempts or a count of one. Attempt i sends seed i.
ExpandResult expand(const PuzzleSpec& puzzle, Client& client, const ExpandOptions& options,
                    const TemplateSet& templates = TemplateSet::builtin());

struct DifficultyCell {
    std::size_t constraint_count = 0;
    int ratio_bucket = 0;
    std::size_t puzzles = 0;
};

/// Counts per (constraint count, ratio bucket), sorted. Throws MissingSolutionSpace.
std::vector<DifficultyCell> difficulty_profile(const std::vector<PuzzleSpec>& puzzles);

}  // namespace puzzleforge
