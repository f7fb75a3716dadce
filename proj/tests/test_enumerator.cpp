#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "puzzleforge/enumerator.hpp"
#include "support/fixtures.hpp"
#include "support/random_puzzles.hpp"

using namespace puzzleforge;
using namespace puzzleforge::testing;

namespace {

std::vector<dsl::Program> programs(const DomainSpec& d, const std::vector<std::string>& sources) {
    std::vector<dsl::Program> out;
    for (const auto& s : sources) out.push_back(dsl::compile(s, d));
    return out;
}

std::set<std::string> as_strings(const DomainSpec& d, const std::vector<Arrangement>& v) {
    std::set<std::string> out;
    for (const auto& a : v) out.insert(arrangement_to_json(d, a).dump());
    return out;
}

}  // namespace

TEST(Enumerate, IslandsLexicographic) {
    auto d = islands_domain();
    auto all = enumerate_all(d);
    ASSERT_EQ(all.size(), 120u);
    EXPECT_EQ(arrangement_to_json(d, all.front()), json::array({"E", "F", "G", "H", "I"}));
    EXPECT_EQ(arrangement_to_json(d, all.back()), json::array({"I", "H", "G", "F", "E"}));
    EXPECT_EQ(as_strings(d, all).size(), 120u);
}

TEST(Enumerate, TwoKeysTwoValues) {
    auto d = DomainSpec::create({{"c", AssignmentSlot{{"a", "b"}, {"x", "y"}}}});
    auto all = enumerate_all(d);
    ASSERT_EQ(all.size(), 4u);
    EXPECT_EQ(arrangement_to_json(d, all[0]).dump(), R"({"a":"x","b":"x"})");
    EXPECT_EQ(arrangement_to_json(d, all[1]).dump(), R"({"a":"x","b":"y"})");
}

TEST(Enumerate, SubsetsInCombinationOrder) {
    auto d = DomainSpec::create({{"s", SubsetSlot{{"a", "b", "c", "d"}, 2}}});
    auto all = enumerate_all(d);
    ASSERT_EQ(all.size(), 6u);
    EXPECT_EQ(arrangement_to_json(d, all[0]).dump(), R"(["a","b"])");
    EXPECT_EQ(arrangement_to_json(d, all[5]).dump(), R"(["c","d"])");
}

TEST(Enumerate, AthletesStreamsEveryCandidate) {
    auto d = athletes_domain();
    std::uint64_t seen = 0;
    auto n = enumerate(d, [&](const Candidate&) {
        ++seen;
        return true;
    });
    EXPECT_EQ(n, 645120u);
    EXPECT_EQ(seen, 645120u);
}

TEST(Enumerate, VisitorCanStop) {
    std::uint64_t seen = 0;
    enumerate(islands_domain(), [&](const Candidate&) { return ++seen < 10; });
    EXPECT_EQ(seen, 10u);
}

TEST(Enumerate, RespectsCap) { EXPECT_THROW(enumerate_all(islands_domain(), 119), DomainTooLarge); }

TEST(Solve, IslandsHasTwoSolutions) {
    auto p = islands_puzzle();
    auto s = solve(p.domain, p.programs());
    EXPECT_EQ(s.solution_count, 2u);
    EXPECT_EQ(s.domain_count, 120u);
    EXPECT_TRUE(s.exhausted);
    EXPECT_EQ(s.ratio(), std::make_pair(std::uint64_t{1}, std::uint64_t{60}));
    EXPECT_EQ(as_strings(p.domain, s.samples),
              (std::set<std::string>{R"(["G","E","I","F","H"])", R"(["I","E","G","F","H"])"}));
}

TEST(Solve, IslandsAgreesWithHandWrittenBruteForce) {
    std::vector<std::string> order{"E", "F", "G", "H", "I"};
    std::set<std::string> expected;
    do {
        auto at = [&](const std::string& t) {
            return static_cast<int>(std::find(order.begin(), order.end(), t) - order.begin());
        };
        if (at("F") + 1 == at("H") && std::abs(at("I") - at("E")) == 1 && at("G") < at("F") &&
            std::abs(at("G") - at("E")) == 1)
            expected.insert(json(order).dump());
    } while (std::next_permutation(order.begin(), order.end()));
    auto p = islands_puzzle();
    EXPECT_EQ(as_strings(p.domain, solve(p.domain, p.programs()).samples), expected);
}

TEST(Solve, AthletesCountMatchesHandWrittenBruteForce) {
    // Direct loops over orders and color masks; no DSL involved.
    std::vector<char> order{'S', 'T', 'U', 'W', 'X', 'Y', 'Z'};
    std::uint64_t expected = 0;
    do {
        auto at = [&](char c) { return static_cast<int>(std::find(order.begin(), order.end(), c) - order.begin()); };
        if (!(at('Y') < at('T') && at('Y') < at('W') && at('S') == 5 && at('Z') < at('U'))) continue;
        for (int mask = 0; mask < 128; ++mask) {
            auto red = [&](char c) { return (mask >> (c == 'S' ? 0 : c == 'T' ? 1 : c == 'U' ? 2 : c == 'W' ? 3 : c == 'X' ? 4 : c == 'Y' ? 5 : 6)) & 1; };
            bool ok = true;
            for (int i = 0; i + 1 < 7; ++i)
                if (red(order[i]) && red(order[i + 1])) ok = false;
            int before = 0;
            for (int i = 0; i < at('Y'); ++i) before += red(order[i]);
            if (ok && before == 2) ++expected;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    auto p = athletes_puzzle();
    auto s = solve(p.domain, p.programs());
    EXPECT_EQ(s.solution_count, expected);
    EXPECT_EQ(s.solution_count, 30u);
}

TEST(Solve, NoConstraintsCountsTheDomain) {
    auto s = solve(islands_domain(), {});
    EXPECT_EQ(s.solution_count, 120u);
}

TEST(Solve, ContradictionIsEmpty) {
    auto d = DomainSpec::create({{"order", PermutationSlot{{"A", "B", "C"}}}});
    auto c = programs(d, {"pos(order, A) < pos(order, B)", "pos(order, B) < pos(order, A)"});
    EXPECT_EQ(solve(d, c).solution_count, 0u);
    EXPECT_FALSE(is_solvable(d, c));
}

TEST(Solve, SampleCapKeepsCounting) {
    SolveOptions o;
    o.sample_cap = 5;
    auto s = solve(islands_domain(), {}, o);
    EXPECT_EQ(s.solution_count, 120u);
    EXPECT_EQ(s.samples.size(), 5u);
    EXPECT_TRUE(s.exhausted);
}

TEST(Solve, TimeoutMarksNotExhausted) {
    std::vector<std::string> items;
    for (int i = 0; i < 11; ++i) items.push_back("t" + std::to_string(i));
    auto d = DomainSpec::create({{"order", PermutationSlot{items}}});
    SolveOptions o;
    o.timeout = std::chrono::milliseconds(20);
    auto s = solve(d, programs(d, {"pos(order, t0) >= 1"}), o);
    EXPECT_FALSE(s.exhausted);
    EXPECT_LT(s.solution_count, s.domain_count);
}

TEST(Solve, TooLargeDomainThrows) {
    std::vector<std::string> items;
    for (int i = 0; i < 13; ++i) items.push_back("t" + std::to_string(i));
    auto d = DomainSpec::create({{"order", PermutationSlot{items}}});
    EXPECT_THROW(solve(d, {}), DomainTooLarge);
    EXPECT_THROW(is_solvable(d, {}), DomainTooLarge);
}

TEST(IsSolvable, Examples) {
    auto p = islands_puzzle();
    EXPECT_TRUE(is_solvable(p.domain, p.programs()));
    auto a = athletes_domain();
    EXPECT_TRUE(is_solvable(a, programs(a, {"pos(order, S) = 6"})));
}

TEST(Solve, Deterministic) {
    auto p = athletes_puzzle();
    auto a = solve(p.domain, p.programs());
    auto b = solve(p.domain, p.programs());
    EXPECT_EQ(a.solution_count, b.solution_count);
    EXPECT_EQ(a.samples, b.samples);
}

TEST(SolveProperty, PrunedMatchesUnpruned) {
    RandomPuzzles gen(51);
    for (int i = 0; i < 200; ++i) {
        auto d = gen.domain(200'000);
        std::vector<dsl::Program> cs;
        for (int k = 0; k < 1 + static_cast<int>(gen.below(4)); ++k) cs.push_back(dsl::compile(gen.constraint(d, 2), d));
        SolveOptions pruned, flat;
        flat.prune = false;
        pruned.sample_cap = flat.sample_cap = 1'000'000;
        auto a = solve(d, cs, pruned);
        auto b = solve(d, cs, flat);
        ASSERT_EQ(a.solution_count, b.solution_count);
        ASSERT_EQ(a.samples, b.samples);
    }
}

TEST(SolveProperty, AddingAConstraintShrinksTheSolutionSet) {
    RandomPuzzles gen(52);
    for (int i = 0; i < 100; ++i) {
        auto d = gen.domain(100'000);
        std::vector<dsl::Program> cs{dsl::compile(gen.constraint(d, 2), d)};
        SolveOptions o;
        o.sample_cap = 1'000'000;
        auto base = solve(d, cs, o);
        cs.push_back(dsl::compile(gen.constraint(d, 2), d));
        auto more = solve(d, cs, o);
        ASSERT_LE(more.solution_count, base.solution_count);
        auto all = as_strings(d, base.samples);
        for (const auto& a : more.samples) ASSERT_TRUE(all.count(arrangement_to_json(d, a).dump()));
    }
}
