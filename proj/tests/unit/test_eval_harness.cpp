#include <gtest/gtest.h>

#include "cotcurate/corpus.hpp"
#include "cotcurate/error.hpp"
#include "cotcurate/eval_harness.hpp"
#include "cotcurate/llm_client.hpp"
#include "pipeline_fixture.hpp"

using namespace cotcurate;

namespace {

const std::filesystem::path kThree = std::filesystem::path(COTCURATE_TEST_FIXTURES) / "three.jsonl";

LlmClient client_for(std::shared_ptr<StubTransport> stub) {
    EndpointConfig cfg;
    cfg.base_url = "stub:inline";
    return LlmClient(cfg, std::move(stub));
}

EvalOutcome outcome(std::string id, Tier tier, double score) {
    EvalOutcome o;
    o.example_id = std::move(id);
    o.dataset = "d";
    o.reference = {"x"};
    o.per_vote_answers = {"x"};
    o.final_answer = "x";
    o.tier = tier;
    o.score = score;
    return o;
}

}  // namespace

TEST(Eval, McqOracleStubScoresOne) {
    auto examples = load_examples(kThree);
    examples.push_back({"q4", "c", "q?", {"Lake Verr"}, {}});
    const auto dir = fixture::fresh_dir("evalmcq");
    save_mcq(dir / "m.jsonl", build_mcq_dataset(examples, 4, 9));
    const auto items = load_eval_items(dir / "m.jsonl");
    ASSERT_EQ(items.size(), 4u);
    auto stub = std::make_shared<StubTransport>();
    for (const auto& it : items) {
        ASSERT_TRUE(it.mcq.has_value());
        stub->script("eval/" + it.example.id + "/0",
                     {{200, std::string("The answer is (") + option_letter(it.mcq->correct_index) + ")."}});
    }
    EvalConfig cfg;
    cfg.mode = EvalMode::kDirect;
    const auto run = evaluate(items, client_for(stub), cfg);
    ASSERT_TRUE(run.report.overall.mean.has_value());
    EXPECT_EQ(*run.report.overall.mean, 1.0);
    EXPECT_EQ(run.report.flagged, 0u);
    EXPECT_EQ(run.outcomes.front().metric, EvalMetric::kChoice);
    const auto prompt = render_eval_prompt(items[0], EvalMode::kDirect);
    EXPECT_NE(prompt.find("(A) "), std::string::npos);
    EXPECT_NE(prompt.find("(D) "), std::string::npos);
}

TEST(Eval, FreeFormGoldVerbatimScoresOne) {
    const auto items = load_eval_items(kThree);
    auto stub = std::make_shared<StubTransport>();
    for (const auto& it : items) {
        stub->script("eval/" + it.example.id + "/0", {{200, fixture::response("reasoning", it.example.gold_answers[0])}});
    }
    const auto run = evaluate(items, client_for(stub), EvalConfig{});
    EXPECT_EQ(*run.report.overall.mean, 1.0);
    EXPECT_EQ(run.report.by_dataset.at("hand").count, 2u);
    EXPECT_EQ(run.report.by_dataset.at("three").count, 1u);
    EXPECT_EQ(run.report.by_tier.at("short").count, 3u);
    for (const auto& r : stub->received()) EXPECT_EQ(r.temperature, 0.0);
}

TEST(Eval, VotingPicksMajority) {
    std::vector<EvalItem> items{{{"v1", "The treaty was signed in 1960.", "When?", {"1960"}, {}}, std::nullopt, "d"}};
    auto stub = std::make_shared<StubTransport>();
    stub->script("eval/v1/0", {{200, "1960"}});
    stub->script("eval/v1/1", {{200, "1959"}});
    stub->script("eval/v1/2", {{200, "1960"}});
    EvalConfig cfg;
    cfg.mode = EvalMode::kDirect;
    cfg.votes = 3;
    cfg.temperature = 0.7;
    const auto run = evaluate(items, client_for(stub), cfg);
    EXPECT_EQ(run.outcomes[0].per_vote_answers, (std::vector<std::string>{"1960", "1959", "1960"}));
    EXPECT_EQ(run.outcomes[0].final_answer, "1960");
    EXPECT_EQ(run.outcomes[0].score, 1.0);
    cfg.temperature = 0.0;
    EXPECT_THROW(evaluate(items, client_for(stub), cfg), UsageError);
}

TEST(Eval, UnparseableAndFailedAreFlagged) {
    std::vector<EvalItem> items{{{"f1", "c", "q", {"apple"}, {}}, std::nullopt, "d"},
                                {{"f2", "c", "q", {"apple"}, {}}, std::nullopt, "d"}};
    auto stub = std::make_shared<StubTransport>();
    stub->script("eval/f1/0", {{200, "no json here"}});
    stub->script("eval/f2/0", {{400, "bad"}});
    const auto run = evaluate(items, client_for(stub), EvalConfig{});
    EXPECT_TRUE(run.outcomes[0].flagged);
    EXPECT_TRUE(run.outcomes[1].flagged);
    EXPECT_EQ(run.report.flagged, 2u);
    EXPECT_EQ(*run.report.overall.mean, 0.0);
}

TEST(Eval, OutcomesRoundTrip) {
    std::vector<EvalOutcome> outs{outcome("a", Tier::kShort, 0.5), outcome("b", Tier::kLong, 1.0)};
    outs[1].metric = EvalMetric::kChoice;
    outs[1].num_options = 4;
    outs[1].reference = {"C"};
    const auto dir = fixture::fresh_dir("outcomes");
    save_outcomes(dir / "o.jsonl", outs);
    EXPECT_EQ(load_outcomes(dir / "o.jsonl"), outs);
}

TEST(Gain, SelfDifferenceIsZero) {
    std::vector<EvalOutcome> run{outcome("a", Tier::kShort, 0.3), outcome("b", Tier::kMedium, 0.9)};
    const auto t = gain_report(run, run);
    EXPECT_EQ(*t.overall.gain_points, 0.0);
    EXPECT_EQ(*t.by_tier.at("short").gain_points, 0.0);
    EXPECT_EQ(*t.by_tier.at("medium").gain_points, 0.0);
    EXPECT_FALSE(t.by_tier.at("long").gain_points.has_value());
}

TEST(Gain, MediumOnlyImprovement) {
    std::vector<EvalOutcome> a{outcome("s1", Tier::kShort, 0.5), outcome("m1", Tier::kMedium, 0.2),
                               outcome("m2", Tier::kMedium, 0.6), outcome("l1", Tier::kLong, 0.4)};
    auto b = a;
    b[1].score = 0.3;
    b[2].score = 0.7;
    const auto t = gain_report(a, b);
    EXPECT_NEAR(*t.by_tier.at("medium").gain_points, 10.0, 1e-9);
    EXPECT_EQ(*t.by_tier.at("short").gain_points, 0.0);
    EXPECT_EQ(*t.by_tier.at("long").gain_points, 0.0);
    EXPECT_NEAR(*t.overall.gain_points, 5.0, 1e-9);
    const auto text = gain_to_text(t);
    EXPECT_NE(text.find("+10.0"), std::string::npos);
    EXPECT_NE(text.find("Medium"), std::string::npos);
}

TEST(Gain, MismatchedIdsAreListed) {
    std::vector<EvalOutcome> a{outcome("a", Tier::kShort, 0), outcome("b", Tier::kShort, 0)};
    std::vector<EvalOutcome> b{outcome("a", Tier::kShort, 0), outcome("c", Tier::kShort, 0)};
    try {
        gain_report(a, b);
        FAIL();
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("only in a: [b]"), std::string::npos);
        EXPECT_NE(msg.find("only in b: [c]"), std::string::npos);
    }
}

TEST(Curve, WrongRightRight) {
    auto o = outcome("e", Tier::kShort, 0);
    o.reference = {"right"};
    o.per_vote_answers = {"wrong", "right", "right"};
    const auto c = voting_curve({o});
    EXPECT_EQ(c.k, 3u);
    EXPECT_EQ(c.vote, (std::vector<double>{0.0, 0.0, 1.0}));
    EXPECT_EQ(c.oracle, (std::vector<double>{0.0, 1.0, 1.0}));
}

TEST(Curve, IdenticalAnswersGiveConstantSeries) {
    auto o = outcome("e", Tier::kShort, 0);
    o.reference = {"right"};
    o.per_vote_answers = {"right", "right", "right", "right"};
    const auto c = voting_curve({o});
    EXPECT_EQ(c.vote, (std::vector<double>(4, 1.0)));
}

TEST(Curve, OracleMonotoneAndFirstPointIsSingleSample) {
    std::vector<EvalOutcome> outs;
    for (int i = 0; i < 5; ++i) {
        auto o = outcome("e" + std::to_string(i), Tier::kShort, 0);
        o.reference = {"gold"};
        o.per_vote_answers = {"no", "no", "no"};
        o.per_vote_answers[i % 3] = "gold";
        outs.push_back(o);
    }
    const auto c = voting_curve(outs);
    for (const auto& [id, series] : c.per_example_oracle) {
        for (std::size_t j = 1; j < series.size(); ++j) EXPECT_LE(series[j - 1], series[j]);
    }
    double single = 0;
    for (const auto& o : outs) single += score_answer(o, o.per_vote_answers[0]);
    EXPECT_EQ(c.vote[0], single / outs.size());
}
