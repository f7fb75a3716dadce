#include <gtest/gtest.h>

#include "puzzleforge/store.hpp"
#include "puzzleforge/synthesis.hpp"
#include "support/fixtures.hpp"
#include "support/random_puzzles.hpp"
#include "support/scripted.hpp"
#include "support/temp_dir.hpp"

using namespace puzzleforge;
using namespace puzzleforge::testing;

namespace {

const RetryPolicy kNoWait{0, std::chrono::milliseconds(0)};

PuzzleSpec contradiction_puzzle() {
    return make_puzzle("zz-contradiction", Language::EN, "Three runners A, B and C finish a race in some order.",
                       DomainSpec::create({{"order", PermutationSlot{{"A", "B", "C"}}}}),
                       {{"c1", "A beats B.", "pos(order, A) < pos(order, B)"},
                        {"c2", "B beats A.", "pos(order, B) < pos(order, A)"}},
                       json::array({"A", "B", "C"}));
}

PuzzleSpec chinese_puzzle() {
    return make_puzzle("cn-islands", Language::CN, "有五座火山岛 E、F、G、H、I，自北向南排成一条直线。",
                       islands_domain(),
                       {{"c1", "F 与 H 相邻并在 H 的北面", "pos(order, F) + 1 = pos(order, H)"},
                        {"c2", "G 在 F 北面的某处", "pos(order, G) < pos(order, F)"}},
                       json::array({"E", "F", "G", "H", "I"}));
}

SynthesisOptions options(std::size_t workers = 1) {
    SynthesisOptions o;
    o.generation.model = "mock-model";
    o.workers = workers;
    return o;
}

std::string dump(const SynthesisResult& r) {
    std::string s;
    for (const auto& p : r.puzzles) s += puzzle_to_json(p).dump() + "\n";
    for (const auto& q : r.quarantine) s += report_to_json(q).dump() + "\n";
    for (const auto& d : r.duplicates) s += d.id + "=" + d.kept + "\n";
    return s;
}

}  // namespace

TEST(Draft, SplitsSemicolonDelimitedConstraints) {
    auto d = parse_draft(draft_reply(islands_puzzle()));
    EXPECT_EQ(d.background, islands_puzzle().background);
    ASSERT_EQ(d.constraints.size(), 4u);
    EXPECT_EQ(d.constraints[1], "I is adjacent to E.");
}

TEST(Draft, FullWidthSemicolon) {
    EXPECT_EQ(split_constraints("甲在乙之前；乙在丙之前； ;丁第一"),
              (std::vector<std::string>{"甲在乙之前", "乙在丙之前", "丁第一"}));
}

TEST(Draft, AcceptsListAndTakesLastObject) {
    auto d = parse_draft(R"({"background": "old", "logic_constraints": "x"} then
        {"background": "new", "logic_constraints": ["a; b", "c"]})");
    EXPECT_EQ(d.background, "new");
    EXPECT_EQ(d.constraints, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Draft, MissingKeyIsMalformed) {
    EXPECT_THROW(parse_draft(R"({"background": "only"})"), MalformedLLMOutput);
    EXPECT_THROW(parse_draft("no json here"), MalformedLLMOutput);
    EXPECT_THROW(parse_draft(R"({"background": "", "logic_constraints": "a"})"), MalformedLLMOutput);
    EXPECT_THROW(parse_draft(R"({"background": "b", "logic_constraints": " ; "})"), MalformedLLMOutput);
}

TEST(Spec, BuildsPuzzleWithSequentialIds) {
    auto p = parse_spec(spec_reply(committee_puzzle()), "x", Language::EN, "bg");
    ASSERT_EQ(p.constraints.size(), 5u);
    EXPECT_EQ(p.constraints[0].id, "c1");
    EXPECT_EQ(p.constraints[4].id, "c5");
    EXPECT_EQ(p.background, "bg");
}

TEST(Spec, TypeErrorIsDslRejected) {
    auto text = spec_reply(athletes_puzzle());
    auto pos = text.find("pos(order, S) = 6");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 17, "pos(colors, S) = 6");
    EXPECT_THROW(parse_spec(text, "x", Language::EN, "bg"), DslRejected);
}

TEST(Spec, BadExampleIsNonconformant) {
    auto p = islands_puzzle();
    auto text = spec_reply(p);
    auto pos = text.find(R"("example": [)");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 12, R"("example": ["Q", )");
    EXPECT_THROW(parse_spec(text, "x", Language::EN, "bg"), ExampleNonconformant);
}

TEST(Spec, MissingPartsAreMalformed) {
    EXPECT_THROW(parse_spec(R"({"domain": {"slots": []}, "constraints": [], "example": []})", "x", Language::EN, ""),
                 MalformedLLMOutput);
    EXPECT_THROW(parse_spec("```json\n{}\n```", "x", Language::EN, ""), MalformedLLMOutput);
}

TEST(CrossValidate, Statuses) {
    auto ok = cross_validate(islands_puzzle());
    EXPECT_TRUE(ok.valid());
    EXPECT_EQ(ok.space->solution_count, 2u);

    auto empty = cross_validate(contradiction_puzzle());
    EXPECT_EQ(empty.status, ValidationStatus::EmptySolutionSpace);
    EXPECT_EQ(status_name(empty.status), "empty_solution_space");

    std::vector<std::string> items;
    for (int i = 0; i < 13; ++i) items.push_back("t" + std::to_string(i));
    auto big = make_puzzle("big", Language::EN, "", DomainSpec::create({{"order", PermutationSlot{items}}}),
                           {{"c1", "", "true"}}, json(items));
    EXPECT_EQ(cross_validate(big).status, ValidationStatus::TooLarge);

    items.pop_back();
    auto twelve = make_puzzle("twelve", Language::EN, "", DomainSpec::create({{"order", PermutationSlot{items}}}),
                              {{"c1", "", "true"}}, json(items));
    SolveOptions tight;
    tight.domain_cap = 100'000'000;
    EXPECT_EQ(cross_validate(twelve, tight).status, ValidationStatus::TooLarge);

    SolveOptions quick;
    quick.timeout = std::chrono::milliseconds(10);
    EXPECT_EQ(cross_validate(twelve, quick).status, ValidationStatus::Timeout);
}

TEST(Templates, RenderAndFallback) {
    EXPECT_EQ(render("a [[[x]]] b [[[x]]]", {{"x", "1"}}), "a 1 b 1");
    EXPECT_THROW(render("[[[missing]]]", {}), PreconditionError);
    auto t = TemplateSet::builtin();
    EXPECT_TRUE(has_placeholder(t.get(Language::EN, "formulate"), "question"));
    EXPECT_TRUE(has_placeholder(t.get(Language::CN, "solve"), "example"));
    EXPECT_EQ(t.hashes().size(), 10u);
}

TEST(Templates, DirectoryOverridesBuiltin) {
    TempDir dir;
    std::filesystem::create_directories(dir.path() / "en");
    write_text_atomic(dir.path() / "en" / "solve.txt", "custom [[[background]]]");
    auto t = TemplateSet::load(dir.path());
    EXPECT_EQ(t.get(Language::EN, "solve"), "custom [[[background]]]");
    EXPECT_EQ(t.get(Language::EN, "formulate"), TemplateSet::builtin().get(Language::EN, "formulate"));
    EXPECT_NE(t.hashes()["en/solve"], TemplateSet::builtin().hashes()["en/solve"]);
}

TEST(Formulate, ReplaysFixedDraft) {
    auto mock = std::make_shared<MockBackend>();
    script_synthesis(*mock, duty_puzzle());
    Client client(mock, kNoWait);
    auto d = formulate(corpus_for(duty_puzzle()), client, TemplateSet::builtin(), options().generation);
    EXPECT_EQ(d.constraints.size(), 6u);
    auto p = generate_spec(corpus_for(duty_puzzle()), d, client, TemplateSet::builtin(), options().generation);
    EXPECT_EQ(p.id, "duty");
    EXPECT_EQ(p.constraints.size(), 6u);
}

TEST(Synthesize, FourValidOneQuarantined) {
    auto mock = std::make_shared<MockBackend>();
    std::vector<PuzzleSpec> sources{islands_puzzle(), athletes_puzzle(), committee_puzzle(), duty_puzzle(),
                                    contradiction_puzzle()};
    std::vector<CorpusItem> corpus;
    for (const auto& p : sources) {
        script_synthesis(*mock, p);
        corpus.push_back(corpus_for(p));
    }
    Client client(mock, kNoWait);
    auto r = synthesize(corpus, client, TemplateSet::builtin(), options());

    ASSERT_EQ(r.puzzles.size(), 4u);
    ASSERT_EQ(r.quarantine.size(), 1u);
    EXPECT_TRUE(r.duplicates.empty());
    EXPECT_EQ(r.quarantine[0].puzzle_id, "zz-contradiction");
    EXPECT_EQ(r.quarantine[0].status, ValidationStatus::EmptySolutionSpace);
    EXPECT_EQ(r.quarantine[0].attempts, 4);
    // 5 drafts, 4 specs for the valid items and R + 1 for the contradiction.
    EXPECT_EQ(mock->calls(), 5u + 4u + 4u);

    std::vector<std::uint64_t> counts;
    for (const auto& p : r.puzzles) {
        ASSERT_TRUE(p.solution_space);
        EXPECT_TRUE(is_solvable(p.domain, p.programs())) << p.id;
        counts.push_back(p.solution_space->solution_count);
    }
    EXPECT_EQ(r.puzzles[0].id, "athletes");
    EXPECT_EQ(counts, (std::vector<std::uint64_t>{30, 20, 44, 2}));
}

TEST(Synthesize, RegeneratesAfterBadDsl) {
    auto p = islands_puzzle();
    auto mock = std::make_shared<MockBackend>();
    auto broken = spec_reply(p);
    broken.replace(broken.find("pos(order, G) < pos(order, F)"), 29, "pos(order, G) < pos(order, Q)");
    mock->add_rule(reply_rule({kFormulateMarker, p.background}, draft_reply(p)));
    mock->add_rule(reply_rule({kGenerateMarker, p.background}, broken, 0));
    mock->add_rule(reply_rule({kGenerateMarker, p.background}, spec_reply(p)));
    Client client(mock, kNoWait);
    auto r = synthesize({corpus_for(p)}, client, TemplateSet::builtin(), options());
    ASSERT_EQ(r.puzzles.size(), 1u);
    EXPECT_EQ(mock->calls(), 3u);
}

TEST(Synthesize, PersistentFailuresBecomeStatuses) {
    auto p = islands_puzzle();
    auto mock = std::make_shared<MockBackend>();
    mock->add_rule(reply_rule({kFormulateMarker, "draft-fails"}, "I cannot split this."));
    auto bad_dsl = spec_reply(p);
    bad_dsl.replace(bad_dsl.find("pos(order, G) < pos(order, F)"), 29, "pos(order, G) < pos(order, Q)");
    auto bad_example = spec_reply(p);
    bad_example.replace(bad_example.find(R"("example": [)"), 12, R"("example": ["Q", )");
    for (const char* id : {"dsl-fails", "example-fails"}) {
        auto q = p;
        q.background = std::string("Marker ") + id;
        q.id = id;
        mock->add_rule(reply_rule({kFormulateMarker, q.background}, draft_reply(q)));
    }
    mock->add_rule(reply_rule({kGenerateMarker, "Marker dsl-fails"}, bad_dsl));
    mock->add_rule(reply_rule({kGenerateMarker, "Marker example-fails"}, bad_example));

    Client client(mock, kNoWait);
    auto r = synthesize({{"draft-fails", Language::EN, "draft-fails"},
                         {"dsl-fails", Language::EN, "Marker dsl-fails"},
                         {"example-fails", Language::EN, "Marker example-fails"},
                         {"no-rule", Language::EN, "nothing matches this"}},
                        client, TemplateSet::builtin(), options());
    EXPECT_TRUE(r.puzzles.empty());
    ASSERT_EQ(r.quarantine.size(), 4u);
    std::map<std::string, ValidationReport> by_id;
    for (const auto& q : r.quarantine) by_id[q.puzzle_id] = q;
    EXPECT_EQ(by_id["draft-fails"].status, ValidationStatus::ParseFailure);
    EXPECT_EQ(by_id["draft-fails"].stage, "formulate");
    EXPECT_EQ(by_id["dsl-fails"].status, ValidationStatus::ParseFailure);
    EXPECT_EQ(by_id["dsl-fails"].stage, "generate");
    EXPECT_EQ(by_id["example-fails"].status, ValidationStatus::SchemaMismatch);
    EXPECT_EQ(by_id["no-rule"].status, ValidationStatus::ParseFailure);
    for (const auto& q : r.quarantine) EXPECT_EQ(q.attempts, 4) << q.puzzle_id;
}

TEST(Synthesize, DuplicatesFoldIntoFirstId) {
    auto mock = std::make_shared<MockBackend>();
    auto p = islands_puzzle();
    script_synthesis(*mock, p);
    auto a = corpus_for(p);
    auto b = a;
    b.id = "islands-copy";
    Client client(mock, kNoWait);
    auto r = synthesize({b, a}, client, TemplateSet::builtin(), options());
    ASSERT_EQ(r.puzzles.size(), 1u);
    EXPECT_EQ(r.puzzles[0].id, "islands");
    ASSERT_EQ(r.duplicates.size(), 1u);
    EXPECT_EQ(r.duplicates[0].id, "islands-copy");
    EXPECT_EQ(r.duplicates[0].kept, "islands");
}

TEST(Synthesize, ChineseUsesChineseTemplates) {
    auto mock = std::make_shared<MockBackend>();
    auto p = chinese_puzzle();
    script_synthesis(*mock, p);
    Client client(mock, kNoWait);
    auto r = synthesize({corpus_for(p)}, client, TemplateSet::builtin(), options());
    ASSERT_EQ(r.puzzles.size(), 1u);
    EXPECT_EQ(r.puzzles[0].language, Language::CN);
    EXPECT_EQ(r.puzzles[0].background, p.background);
    EXPECT_EQ(r.puzzles[0].constraints[1].text, "G 在 F 北面的某处");
}

TEST(Synthesize, EmptyCorpus) {
    Client client(std::make_shared<MockBackend>(), kNoWait);
    auto r = synthesize({}, client, TemplateSet::builtin(), options());
    EXPECT_TRUE(r.puzzles.empty());
    EXPECT_TRUE(r.quarantine.empty());
}

TEST(Synthesize, RepeatedIdsArePreconditionErrors) {
    Client client(std::make_shared<MockBackend>(), kNoWait);
    CorpusItem item{"same", Language::EN, "x"};
    EXPECT_THROW(synthesize({item, item}, client, TemplateSet::builtin(), options()), PreconditionError);
}

TEST(Synthesize, DeterministicAcrossWorkerCounts) {
    std::vector<PuzzleSpec> sources{duty_puzzle(), islands_puzzle(), contradiction_puzzle(), committee_puzzle()};
    auto run = [&](std::size_t workers) {
        auto mock = std::make_shared<MockBackend>();
        std::vector<CorpusItem> corpus;
        for (const auto& p : sources) {
            script_synthesis(*mock, p);
            corpus.push_back(corpus_for(p));
        }
        Client client(mock, kNoWait);
        auto r = synthesize(corpus, client, TemplateSet::builtin(), options(workers));
        std::string transcripts;
        for (const auto& t : client.transcripts()) transcripts += transcript_to_json(t).dump();
        return dump(r) + transcripts;
    };
    auto one = run(1);
    EXPECT_EQ(one, run(1));
    EXPECT_EQ(one, run(3));
}

TEST(SynthesizeProperty, EmittedPuzzlesAreSolvable) {
    RandomPuzzles gen(61);
    auto mock = std::make_shared<MockBackend>();
    std::vector<CorpusItem> corpus;
    for (int i = 0; i < 40; ++i) {
        auto id = "rand-" + std::to_string(100 + i);
        auto p = gen.solvable_puzzle(id, 1 + static_cast<int>(gen.below(3)), 50'000);
        p.background = "Random setting " + id + ".";
        // Every fourth item gets a contradictory pair appended.
        if (i % 4 == 0) {
            auto expr = p.constraints[0].expr;
            p.constraints.push_back({"cx", "negation", "not (" + expr + ")", dsl::compile("not (" + expr + ")", p.domain)});
        }
        script_synthesis(*mock, p);
        corpus.push_back(corpus_for(p));
    }
    Client client(mock, kNoWait);
    auto r = synthesize(corpus, client, TemplateSet::builtin(), options());
    EXPECT_EQ(r.puzzles.size() + r.quarantine.size() + r.duplicates.size(), corpus.size());
    EXPECT_GE(r.quarantine.size(), 10u);
    for (const auto& q : r.quarantine) EXPECT_EQ(q.status, ValidationStatus::EmptySolutionSpace);
    for (const auto& p : r.puzzles) EXPECT_TRUE(is_solvable(p.domain, p.programs())) << p.id;
}
