// Acceptance suite: one PASS/FAIL line per criterion. Runs offline against the
// mock backend and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "puzzleforge/augment.hpp"
#include "puzzleforge/eval.hpp"
#include "puzzleforge/store.hpp"
#include "puzzleforge/synthesis.hpp"
#include "puzzleforge/training.hpp"
#include "support/fixtures.hpp"
#include "support/pipeline.hpp"
#include "support/random_puzzles.hpp"
#include "support/scripted.hpp"
#include "support/temp_dir.hpp"

using namespace puzzleforge;
using namespace puzzleforge::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Failure {
    std::string why;
};

void require(bool ok, const std::string& why) {
    if (!ok) throw Failure{why};
}

double millis_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

const RetryPolicy kNoWait{0, std::chrono::milliseconds(0)};

std::set<std::string> solution_set(const DomainSpec& d, std::span<const dsl::Program> cs, bool prune = true) {
    SolveOptions o;
    o.prune = prune;
    o.sample_cap = 1'000'000;
    std::set<std::string> out;
    for (const auto& a : solve(d, cs, o).samples) out.insert(arrangement_to_json(d, a).dump());
    return out;
}

std::string islands_oracle() {
    auto p = islands_puzzle();
    auto start = Clock::now();
    auto space = solve(p.domain, p.programs());
    double ms = millis_since(start);
    std::set<std::string> got;
    for (const auto& a : space.samples) got.insert(arrangement_to_json(p.domain, a).dump());
    require(space.solution_count == 2, "expected 2 solutions, got " + std::to_string(space.solution_count));
    require(got == std::set<std::string>{R"(["G","E","I","F","H"])", R"(["I","E","G","F","H"])"}, "wrong solution set");
    require(space.ratio() == std::make_pair(std::uint64_t{1}, std::uint64_t{60}), "ratio is not 1/60");

    // Brute force over all 120 orders with the conditions written out by hand.
    std::vector<std::string> order{"E", "F", "G", "H", "I"};
    std::set<std::string> brute;
    do {
        auto at = [&](const char* t) { return std::find(order.begin(), order.end(), t) - order.begin(); };
        if (at("F") + 1 == at("H") && std::abs(at("I") - at("E")) == 1 && at("G") < at("F") &&
            std::abs(at("G") - at("E")) == 1)
            brute.insert(json(order).dump());
    } while (std::next_permutation(order.begin(), order.end()));
    require(brute == got, "brute force disagrees");
    require(ms < 50, "solve took " + std::to_string(ms) + " ms");
    std::ostringstream s;
    s << "2 solutions, ratio 1/60, brute force agrees, " << ms << " ms";
    return s.str();
}

std::string islands_verdict() {
    auto v = verify(islands_response(), islands_puzzle());
    require(v.extraction == Extraction::Found && v.format.ok(), "answer not extracted");
    require(!v.correct, "graded correct");
    require(v.failed_constraints() == std::vector<std::string>{"c2"}, "failing set is not {c2}");
    require(islands_puzzle().constraints[1].text == "I is adjacent to E.", "c2 is not the adjacency rule");
    return "['I','G','E','F','H'] incorrect, only 'I is adjacent to E.' fails";
}

std::string athletes_fixture() {
    auto p = athletes_puzzle();
    auto sample = verify("```json\n" + athletes_sample_input().dump() + "\n```", p);
    auto failed = sample.failed_constraints();
    require(!sample.correct, "sample input graded correct");
    require(std::find(failed.begin(), failed.end(), "c2") != failed.end(), "Y-before-T-and-W rule did not fail");
    auto derived = verify(R"({"order": ["X", "Z", "U", "Y", "T", "S", "W"], "colors": {"S": "red", "T": "green",
        "U": "red", "W": "green", "X": "red", "Y": "green", "Z": "green"}})",
                          p);
    require(derived.correct, "derived arrangement graded incorrect");
    auto start = Clock::now();
    auto n = enumerate(p.domain, [](const Candidate&) { return true; });
    double ms = millis_since(start);
    require(n == 645120, "enumerated " + std::to_string(n));
    require(ms < 2000, "enumeration took " + std::to_string(ms) + " ms");
    std::ostringstream s;
    s << "sample fails c2, derived answer correct, 645120 candidates in " << ms << " ms";
    return s.str();
}

std::string reduction_monotonicity() {
    RandomPuzzles gen(2024);
    int puzzles = 0, steps = 0, violations = 0;
    for (int i = 0; i < 250; ++i) {
        auto p = gen.solvable_puzzle("r" + std::to_string(i), 2 + gen.below(4), 50'000);
        auto before = solution_set(p.domain, p.programs());
        for (const auto& child : reduce(p, static_cast<std::uint64_t>(i)).puzzles) {
            auto after = solution_set(child.domain, child.programs());
            bool ok = child.solution_space && child.solution_space->solution_count == after.size() &&
                      after.size() >= before.size() &&
                      std::includes(after.begin(), after.end(), before.begin(), before.end());
            violations += ok ? 0 : 1;
            before = std::move(after);
            ++steps;
        }
        ++puzzles;
    }
    require(violations == 0, std::to_string(violations) + " violations");
    return std::to_string(puzzles) + " puzzles, " + std::to_string(steps) + " steps, 0 violations";
}

std::string expansion_gating() {
    auto mock = std::make_shared<MockBackend>();
    mock->add_rule(reply_rule({kExpandMarker}, R"({"text": "G is last.", "expr": "pos(order, G) = 5"})", 0));
    mock->add_rule(reply_rule({kExpandMarker}, R"({"text": "G is first.", "expr": "pos(order, G) = 1"})", 1));
    Client client(mock, kNoWait);
    ExpandOptions o;
    o.model = "mock-model";
    o.max_attempts = 8;
    auto r = expand(islands_puzzle(), client, o);
    require(r.records.size() == 2, "expected 2 attempts, got " + std::to_string(r.records.size()));
    require(!r.records[0].accepted && r.records[0].reason == "unsolvable", "unsatisfiable proposal not rejected");
    require(r.records[1].accepted, "satisfiable proposal not accepted");
    require(r.puzzles.size() == 1 && r.puzzles[0].constraints.back().expr == "pos(order, G) = 1",
            "wrong constraint accepted");
    require(r.puzzles[0].solution_space->solution_count == 1, "count did not reach 1");
    return "G=5 rejected as unsolvable, G=1 accepted, count 2 -> 1, stopped after 2 attempts";
}

std::string cross_validation() {
    auto contradiction = make_puzzle("zz-race", Language::EN, "Three runners A, B and C finish a race.",
                                     DomainSpec::create({{"order", PermutationSlot{{"A", "B", "C"}}}}),
                                     {{"c1", "A beats B.", "pos(order, A) < pos(order, B)"},
                                      {"c2", "B beats A.", "pos(order, B) < pos(order, A)"}},
                                     json::array({"A", "B", "C"}));
    auto mock = std::make_shared<MockBackend>();
    std::vector<CorpusItem> corpus;
    for (const auto& p : {islands_puzzle(), athletes_puzzle(), committee_puzzle(), duty_puzzle(), contradiction}) {
        script_synthesis(*mock, p);
        corpus.push_back(corpus_for(p));
    }
    Client client(mock, kNoWait);
    SynthesisOptions o;
    o.generation.model = "mock-model";
    auto r = synthesize(corpus, client, TemplateSet::builtin(), o);
    require(r.quarantine.size() == 1 && r.quarantine[0].status == ValidationStatus::EmptySolutionSpace,
            "contradiction not quarantined as empty_solution_space");
    require(r.quarantine[0].attempts == o.retries + 1, "attempts != R + 1");
    require(mock->calls() == 5 + 4 + static_cast<std::size_t>(o.retries + 1), "unexpected number of generations");
    for (const auto& p : r.puzzles) require(is_solvable(p.domain, p.programs()), p.id + " is not solvable");
    return "empty_solution_space after " + std::to_string(o.retries + 1) + " generations, " +
           std::to_string(r.puzzles.size()) + "/" + std::to_string(r.puzzles.size()) + " emitted puzzles solvable";
}

std::string training_purity() {
    TempDir dir;
    auto files = run_demo_pipeline(dir / "work");
    std::map<std::string, PuzzleSpec> by_id;
    for (auto& p : load_puzzles(dir / "work" / "augmented.jsonl")) by_id.emplace(p.id, std::move(p));
    std::size_t singles = 0;
    for (const auto& [id, p] : by_id) singles += p.constraints.size() == 1;
    require(singles > 0, "demo has no single-constraint puzzle to exclude");

    auto sets = read_jsonl(dir / "work" / "samples.jsonl");
    for (const auto& s : sets) require(s["responses"].size() == 8, "sample set without 8 responses");
    auto sft = read_jsonl(dir / "work" / "sft.jsonl");
    auto dpo = read_jsonl(dir / "work" / "dpo.jsonl");
    require(!sft.empty() && !dpo.empty(), "no training records");
    for (const auto& row : sft) {
        const auto& p = by_id.at(row["puzzle_id"].get<std::string>());
        require(p.constraints.size() >= 2, "single-constraint puzzle in SFT");
        require(verify(row["completion"].get<std::string>(), p).correct, "SFT completion does not verify");
    }
    for (const auto& row : dpo) {
        const auto& p = by_id.at(row["puzzle_id"].get<std::string>());
        require(p.constraints.size() >= 2, "single-constraint puzzle in DPO");
        require(verify(row["chosen"].get<std::string>(), p).correct, "DPO chosen does not verify");
        require(!verify(row["rejected"].get<std::string>(), p).correct, "DPO rejected verifies");
    }
    return std::to_string(sets.size()) + " sets x 8, " + std::to_string(sft.size()) + " SFT and " +
           std::to_string(dpo.size()) + " DPO records re-verified, " + std::to_string(singles) +
           " single-constraint puzzles excluded";
}

std::string scoring_arithmetic() {
    auto mock = std::make_shared<MockBackend>();
    mock->add_rule(reply_rule({kSolveMarker, islands_puzzle().background}, R"(["G", "E", "I", "F", "H"])"));
    mock->add_rule(reply_rule({kSolveMarker, athletes_puzzle().background},
                              R"({"order": ["X", "Z", "U", "Y", "T", "S", "W"], "colors": {"S": "red",
                                  "T": "green", "U": "red", "W": "green", "X": "red", "Y": "green", "Z": "green"}})"));
    mock->add_rule(reply_rule({kSolveMarker, committee_puzzle().background}, committee_response()));
    mock->add_rule(reply_rule({kSolveMarker, duty_puzzle().background}, duty_response()));
    Client client(mock, kNoWait);
    EvaluationOptions o;
    o.model = "mock-model";
    o.trials = 5;
    auto e = evaluate({islands_puzzle(), athletes_puzzle(), committee_puzzle(), duty_puzzle()}, client, o);
    require(std::abs(e.report.mean - 0.5) <= 1e-9, "mean " + std::to_string(e.report.mean));
    require(e.report.std == 0.0, "std " + std::to_string(e.report.std));
    require(e.report.per_trial.size() == 5, "not 5 trials");
    auto check = [&](const auto& buckets) {
        std::size_t correct = 0, total = 0;
        for (const auto& [k, b] : buckets) {
            correct += b.correct;
            total += b.total;
        }
        require(correct == 10 && total == 20, "bucket rows do not sum to totals");
    };
    check(e.report.by_constraint_count);
    check(e.report.by_ratio_bucket);
    check(e.report.by_cell);
    return "mean 0.500, std 0 over 5 trials, bucket rows sum to 10/20";
}

std::string determinism() {
    TempDir dir;
    auto first = run_demo_pipeline(dir / "work");
    auto second = run_demo_pipeline(dir / "work");
    require(first.size() == second.size(), "different file sets");
    std::size_t manifests = 0;
    for (const auto& [name, bytes] : first) {
        require(second.count(name) && second.at(name) == bytes, name + " differs");
        manifests += name.find(".manifest.json") != std::string::npos;
    }
    return std::to_string(first.size()) + " files byte-identical, " + std::to_string(manifests) + " manifests";
}

std::string pruning_equivalence() {
    RandomPuzzles gen(1234);
    int domains = 0;
    std::uint64_t largest = 0;
    for (int i = 0; i < 200; ++i) {
        auto d = gen.domain(1'000'000);
        std::vector<dsl::Program> cs;
        for (std::uint64_t k = 0; k < 1 + gen.below(4); ++k) cs.push_back(dsl::compile(gen.constraint(d, 2), d));
        SolveOptions pruned, flat;
        flat.prune = false;
        pruned.sample_cap = flat.sample_cap = 1'000'000;
        auto a = solve(d, cs, pruned);
        auto b = solve(d, cs, flat);
        require(a.solution_count == b.solution_count, "count mismatch on domain " + std::to_string(i));
        require(a.samples == b.samples, "solution sets differ on domain " + std::to_string(i));
        largest = std::max(largest, a.domain_count);
        ++domains;
    }
    return std::to_string(domains) + " domains (largest " + std::to_string(largest) + "), identical counts and sets";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<std::string()>>> criteria{
        {"islands oracle", islands_oracle},
        {"islands answer verdict", islands_verdict},
        {"athletes fixture", athletes_fixture},
        {"reduction monotonicity", reduction_monotonicity},
        {"expansion gating", expansion_gating},
        {"cross-validation", cross_validation},
        {"training-data purity", training_purity},
        {"scoring arithmetic", scoring_arithmetic},
        {"determinism", determinism},
        {"pruned vs unpruned solver", pruning_equivalence},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& [name, check] = criteria[i];
        std::string status = "PASS", detail;
        try {
            detail = check();
        } catch (const Failure& f) {
            status = "FAIL";
            detail = f.why;
        } catch (const std::exception& e) {
            status = "FAIL";
            detail = std::string("exception: ") + e.what();
        }
        if (status == "FAIL") ++failed;
        std::cout << "[" << status << "] " << (i + 1) << ". " << name << ": " << detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
