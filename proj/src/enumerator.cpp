#include "puzzleforge/enumerator.hpp"

#include <algorithm>
#include <numeric>

namespace puzzleforge {

namespace {

/// Steps one slot through its values, writing each into a SlotState.
class SlotCursor {
public:
    SlotCursor(const DomainSpec& domain, std::size_t slot) : domain_(domain), slot_(slot) {
        const auto& kind = domain.slot(slot).kind;
        if (std::holds_alternative<PermutationSlot>(kind)) kind_ = Kind::Permutation;
        else if (std::holds_alternative<AssignmentSlot>(kind)) kind_ = Kind::Assignment;
        else if (const auto* s = std::get_if<SubsetSlot>(&kind)) {
            kind_ = Kind::Subset;
            k_ = s->cardinality;
        } else kind_ = Kind::Scalar;
    }

    void reset(SlotState& st) {
        const auto& elements = domain_.element_ids(slot_);
        switch (kind_) {
        case Kind::Permutation:
            digits_.resize(elements.size());
            std::iota(digits_.begin(), digits_.end(), 0);
            st.index.assign(domain_.token_count(), 0);
            break;
        case Kind::Assignment:
            digits_.assign(elements.size(), 0);
            st.index.assign(domain_.token_count(), -1);
            break;
        case Kind::Subset:
            digits_.resize(k_);
            std::iota(digits_.begin(), digits_.end(), 0);
            st.index.assign(domain_.token_count(), 0);
            break;
        case Kind::Scalar:
            digits_.assign(1, 0);
            st.index.assign(domain_.token_count(), 0);
            break;
        }
        write(st);
    }

    /// Moves to the next value; false when the slot is exhausted.
    bool advance(SlotState& st) {
        const auto& elements = domain_.element_ids(slot_);
        bool more = false;
        switch (kind_) {
        case Kind::Permutation: more = std::next_permutation(digits_.begin(), digits_.end()); break;
        case Kind::Assignment: {
            const auto base = static_cast<int>(domain_.value_ids(slot_).size());
            for (std::size_t i = digits_.size(); i-- > 0;) {
                if (++digits_[i] < base) {
                    more = true;
                    break;
                }
                digits_[i] = 0;
            }
            break;
        }
        case Kind::Subset: {
            const auto n = static_cast<int>(elements.size());
            const auto k = static_cast<int>(k_);
            for (int i = k - 1; i >= 0; --i) {
                if (digits_[static_cast<std::size_t>(i)] < n - k + i) {
                    ++digits_[static_cast<std::size_t>(i)];
                    for (int j = i + 1; j < k; ++j)
                        digits_[static_cast<std::size_t>(j)] = digits_[static_cast<std::size_t>(j - 1)] + 1;
                    more = true;
                    break;
                }
            }
            break;
        }
        case Kind::Scalar: more = ++digits_[0] < static_cast<int>(elements.size()); break;
        }
        if (more) write(st);
        return more;
    }

private:
    enum class Kind { Permutation, Assignment, Subset, Scalar };

    void write(SlotState& st) {
        const auto& elements = domain_.element_ids(slot_);
        st.list.clear();
        switch (kind_) {
        case Kind::Permutation:
            for (std::size_t p = 0; p < digits_.size(); ++p) {
                int id = elements[static_cast<std::size_t>(digits_[p])];
                st.list.push_back(id);
                st.index[static_cast<std::size_t>(id)] = static_cast<int>(p + 1);
            }
            break;
        case Kind::Assignment: {
            const auto& values = domain_.value_ids(slot_);
            for (std::size_t k = 0; k < digits_.size(); ++k) {
                int v = values[static_cast<std::size_t>(digits_[k])];
                st.list.push_back(v);
                st.index[static_cast<std::size_t>(elements[k])] = v;
            }
            break;
        }
        case Kind::Subset:
            for (int e : elements) st.index[static_cast<std::size_t>(e)] = 0;
            for (int d : digits_) {
                int id = elements[static_cast<std::size_t>(d)];
                st.list.push_back(id);
                st.index[static_cast<std::size_t>(id)] = 1;
            }
            break;
        case Kind::Scalar: {
            for (int e : elements) st.index[static_cast<std::size_t>(e)] = 0;
            int id = elements[static_cast<std::size_t>(digits_[0])];
            st.list.push_back(id);
            st.index[static_cast<std::size_t>(id)] = 1;
            break;
        }
        }
    }

    const DomainSpec& domain_;
    std::size_t slot_;
    Kind kind_ = Kind::Scalar;
    std::size_t k_ = 0;
    std::vector<int> digits_;
};

/// Depth-first walk over slots. `checks[d]` are evaluated once slot d is bound;
/// a failing check skips the whole subtree.
class Walker {
public:
    using Leaf = std::function<bool(const Candidate&)>;

    Walker(const DomainSpec& domain, std::vector<std::vector<const dsl::Program*>> checks, Leaf leaf,
           std::chrono::steady_clock::time_point deadline)
        : domain_(domain), checks_(std::move(checks)), leaf_(std::move(leaf)), deadline_(deadline) {
        candidate_.slots.resize(domain.slot_count());
        for (std::size_t i = 0; i < domain.slot_count(); ++i) cursors_.emplace_back(domain, i);
    }

    /// Returns false if stopped early (visitor request or timeout).
    bool run() { return descend(0); }
    bool timed_out() const noexcept { return timed_out_; }

private:
    bool descend(std::size_t depth) {
        auto& cursor = cursors_[depth];
        auto& state = candidate_.slots[depth];
        cursor.reset(state);
        do {
            if ((++ticks_ & 0x3ff) == 0 && std::chrono::steady_clock::now() > deadline_) {
                timed_out_ = true;
                return false;
            }
            bool ok = std::all_of(checks_[depth].begin(), checks_[depth].end(),
                                  [&](const dsl::Program* p) { return p->eval(candidate_); });
            if (!ok) continue;
            if (depth + 1 == cursors_.size()) {
                if (!leaf_(candidate_)) return false;
            } else if (!descend(depth + 1)) {
                return false;
            }
        } while (cursor.advance(state));
        return true;
    }

    const DomainSpec& domain_;
    std::vector<std::vector<const dsl::Program*>> checks_;
    Leaf leaf_;
    std::chrono::steady_clock::time_point deadline_;
    Candidate candidate_;
    std::vector<SlotCursor> cursors_;
    std::uint64_t ticks_ = 0;
    bool timed_out_ = false;
};

}  // namespace

std::pair<std::uint64_t, std::uint64_t> SolutionSpace::ratio() const {
    auto g = std::gcd(solution_count, domain_count);
    if (g == 0) return {0, 1};
    return {solution_count / g, domain_count / g};
}

double SolutionSpace::ratio_value() const {
    return domain_count == 0 ? 0.0 : static_cast<double>(solution_count) / static_cast<double>(domain_count);
}

std::uint64_t enumerate(const DomainSpec& domain, const std::function<bool(const Candidate&)>& visit,
                        std::uint64_t cap) {
    domain_size(domain, cap);
    std::uint64_t visited = 0;
    std::vector<std::vector<const dsl::Program*>> none(domain.slot_count());
    Walker walker(
        domain, std::move(none),
        [&](const Candidate& c) {
            ++visited;
            return visit(c);
        },
        std::chrono::steady_clock::time_point::max());
    walker.run();
    return visited;
}

std::vector<Arrangement> enumerate_all(const DomainSpec& domain, std::uint64_t cap) {
    std::vector<Arrangement> out;
    enumerate(
        domain,
        [&](const Candidate& c) {
            out.push_back(to_arrangement(domain, c));
            return true;
        },
        cap);
    return out;
}

SolutionSpace solve(const DomainSpec& domain, std::span<const dsl::Program> constraints,
                    const SolveOptions& options) {
    SolutionSpace space;
    space.domain_count = domain_size(domain, options.domain_cap);

    const std::size_t depth = domain.slot_count();
    std::vector<std::vector<const dsl::Program*>> checks(depth);
    for (const auto& p : constraints) {
        std::size_t at = depth - 1;
        if (options.prune) at = p.last_slot() < 0 ? 0 : static_cast<std::size_t>(p.last_slot());
        checks[at].push_back(&p);
    }

    const auto start = std::chrono::steady_clock::now();
    const auto deadline = options.timeout.count() > 0 ? start + options.timeout
                                                      : std::chrono::steady_clock::time_point::max();
    bool stopped_by_request = false;
    Walker walker(
        domain, std::move(checks),
        [&](const Candidate& c) {
            ++space.solution_count;
            if (space.samples.size() < options.sample_cap) space.samples.push_back(to_arrangement(domain, c));
            if (options.stop_at_first) {
                stopped_by_request = true;
                return false;
            }
            return true;
        },
        deadline);
    walker.run();
    space.exhausted = !walker.timed_out() && !stopped_by_request;
    return space;
}

bool is_solvable(const DomainSpec& domain, std::span<const dsl::Program> constraints, const SolveOptions& options) {
    auto opts = options;
    opts.stop_at_first = true;
    opts.sample_cap = 0;
    auto space = solve(domain, constraints, opts);
    if (space.solution_count > 0) return true;
    if (!space.exhausted) throw SolveTimeout("search budget exhausted before a solution was found");
    return false;
}

}  // namespace puzzleforge
