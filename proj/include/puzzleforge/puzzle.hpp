#pragma once

#include <optional>
#include <string>
#include <vector>

#include "puzzleforge/domain.hpp"
#include "puzzleforge/dsl.hpp"
#include "puzzleforge/enumerator.hpp"

namespace puzzleforge {

enum class Language { EN, CN };

std::string_view language_code(Language l);
Language parse_language(std::string_view code);

struct Constraint {
    std::string id;
    std::string text;     // natural-language statement, opaque
    std::string expr;     // DSL source
    dsl::Program program; // expr checked against the puzzle domain
};

struct Lineage {
    std::string parent;
    std::string op;    // "reduce" | "expand"
    std::string root;  // id of the validated puzzle the chain started from
};

/// Counts persisted with a puzzle so analytics need not re-traverse.
struct SpaceSummary {
    std::uint64_t solution_count = 0;
    std::uint64_t domain_count = 1;
    bool exhausted = true;
};

SpaceSummary summarize(const SolutionSpace& space);

/// Decade band of solutions/domain: the largest b with solutions * 10^b <= domain,
/// so bucket b holds ratios in (10^-(b+1), 10^-b]. -1 when there are no solutions.
int ratio_bucket(std::uint64_t solutions, std::uint64_t domain);
/// "[10^-1,10^-2)" style label; "[1,10^-1)" for bucket 0.
std::string bucket_label(int bucket);

struct PuzzleSpec {
    std::string id;
    Language language = Language::EN;
    std::string background;
    std::vector<Constraint> constraints;
    DomainSpec domain;
    ArrangementSchema schema;
    Arrangement example;
    std::optional<Lineage> lineage;
    std::optional<SpaceSummary> solution_space;

    std::vector<dsl::Program> programs() const;
};

struct ConstraintSource {
    std::string id;
    std::string text;
    std::string expr;
};

/// Builds a puzzle, compiling every constraint and checking the example's shape.
/// Throws DslError for a bad expression, DomainError for a nonconformant example
/// or an empty/duplicate constraint list.
PuzzleSpec make_puzzle(std::string id, Language language, std::string background, DomainSpec domain,
                       const std::vector<ConstraintSource>& constraints, const json& example,
                       std::optional<Lineage> lineage = std::nullopt);

/// Copy of `base` with a different constraint list (already compiled against the same domain).
PuzzleSpec with_constraints(const PuzzleSpec& base, std::string id, std::vector<Constraint> constraints,
                            Lineage lineage);

json puzzle_to_json(const PuzzleSpec& puzzle);
/// Full validation; throws DslError / DomainError / Error.
PuzzleSpec puzzle_from_json(const json& j);

}  // namespace puzzleforge
