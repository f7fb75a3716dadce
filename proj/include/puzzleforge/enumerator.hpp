#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "puzzleforge/domain.hpp"
#include "puzzleforge/dsl.hpp"

namespace puzzleforge {

class SolveTimeout : public Error {
public:
    using Error::Error;
};

struct SolveOptions {
    /// Check each constraint as soon as every slot it reads is bound.
    bool prune = true;
    std::size_t sample_cap = 1000;
    std::chrono::milliseconds timeout{10'000};
    std::uint64_t domain_cap = kDefaultDomainCap;
    bool stop_at_first = false;
};

struct SolutionSpace {
    std::uint64_t solution_count = 0;
    std::uint64_t domain_count = 1;
    /// First `sample_cap` solutions in enumeration order.
    std::vector<Arrangement> samples;
    /// False when the search stopped early; solution_count is then a lower bound.
    bool exhausted = true;

    /// solution_count / domain_count in lowest terms.
    std::pair<std::uint64_t, std::uint64_t> ratio() const;
    double ratio_value() const;
};

/// Visits every arrangement of the domain exactly once, slot by slot (first
/// slot varies slowest). Permutations step in lexicographic order of their
/// declared items, assignments as an odometer over keys (last key fastest),
/// subsets as lexicographic index combinations. Return false from the
/// visitor to stop. Returns the number of arrangements visited.
std::uint64_t enumerate(const DomainSpec& domain, const std::function<bool(const Candidate&)>& visit,
                        std::uint64_t cap = kDefaultDomainCap);

/// Materializes enumerate(); meant for small domains.
std::vector<Arrangement> enumerate_all(const DomainSpec& domain, std::uint64_t cap = kDefaultDomainCap);

/// Counts (and samples) the arrangements satisfying every constraint.
/// Throws DomainTooLarge. A timeout yields exhausted = false.
SolutionSpace solve(const DomainSpec& domain, std::span<const dsl::Program> constraints,
                    const SolveOptions& options = {});

/// True iff solve() would find a solution; stops at the first one.
/// Throws DomainTooLarge, or SolveTimeout if the budget ran out first.
bool is_solvable(const DomainSpec& domain, std::span<const dsl::Program> constraints,
                 const SolveOptions& options = {});

}  // namespace puzzleforge
