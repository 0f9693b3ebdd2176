#include <algorithm>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "cotcurate/assess.hpp"
#include "cotcurate/corpus.hpp"
#include "cotcurate/cot_parse.hpp"
#include "cotcurate/error.hpp"
#include "cotcurate/eval_harness.hpp"
#include "cotcurate/llm_client.hpp"
#include "cotcurate/metrics.hpp"
#include "cotcurate/sampling.hpp"
#include "cotcurate/sft_dataset.hpp"
#include "oracles.hpp"
#include "pipeline_fixture.hpp"

using namespace cotcurate;

namespace {

LlmClient stub_client(std::shared_ptr<StubTransport> stub, int max_attempts = 3) {
    EndpointConfig cfg;
    cfg.base_url = "stub:inline";
    cfg.retry.max_attempts = max_attempts;
    cfg.retry.backoff_base_ms = 1;
    LlmClient client(cfg, std::move(stub));
    client.set_sleeper([](std::chrono::milliseconds) {});
    return client;
}

std::string random_words(std::mt19937_64& rng, std::size_t max_words) {
    static const std::vector<std::string> words{"river", "The", "bank", "a", "north,", "1960", "Quill", "an", "x"};
    std::string s;
    const auto n = 1 + rng() % max_words;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + words[rng() % words.size()];
    return s;
}

}  // namespace

TEST(Properties, TierIsTotalAndOrdered) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100000; ++i) {
        const std::uint64_t t = i < 50000 ? rng() % 200000 : rng();
        const auto tier = tier_for(t);
        const int matches = (t < 32000) + (t >= 32000 && t <= 96000) + (t > 96000);
        ASSERT_EQ(matches, 1);
        EXPECT_EQ(tier == Tier::kShort, t < 32000);
        EXPECT_EQ(tier == Tier::kLong, t > 96000);
    }
}

TEST(Properties, McqCorrectIndexPointsAtGold) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 300; ++i) {
        TrainingExample e{"e", "c", "q", {random_words(rng, 3)}, {}};
        std::vector<std::string> pool;
        for (int k = 0; k < 12; ++k) pool.push_back("distractor " + std::to_string(k));
        const int k_options = 2 + static_cast<int>(rng() % 8);
        const auto seed = rng();
        const auto m = build_mcq(e, pool, k_options, seed);
        EXPECT_EQ(m.options.size(), static_cast<std::size_t>(k_options));
        EXPECT_EQ(m.options[m.correct_index], e.gold_answers[0]);
        EXPECT_EQ(build_mcq(e, pool, k_options, seed), m);
    }
}

TEST(Properties, ExamplesFileReserializesByteForByte) {
    const auto dir = fixture::fresh_dir("reser");
    const auto layout = fixture::write_pipeline(dir, 8, 1);
    const auto original = fixture::slurp(layout.examples);
    save_examples(dir / "again.jsonl", load_examples(layout.examples));
    EXPECT_EQ(fixture::slurp(dir / "again.jsonl"), original);
}

TEST(Properties, RetriesNeverExceedMaxAttempts) {
    std::mt19937_64 rng(3);
    const int statuses[] = {200, 429, 500, 503, 0};
    for (int trial = 0; trial < 200; ++trial) {
        auto stub = std::make_shared<StubTransport>();
        std::vector<ScriptedReply> replies;
        for (int k = 0; k < 6; ++k) replies.push_back({statuses[rng() % 5], "body"});
        stub->script("t", replies);
        const int max_attempts = 1 + static_cast<int>(rng() % 4);
        auto client = stub_client(stub, max_attempts);
        try {
            const auto r = client.complete(make_user_request("m", "p", 0.0, 8, "t"));
            EXPECT_LE(r.attempts, max_attempts);
        } catch (const EndpointError& e) {
            EXPECT_LE(e.attempts(), max_attempts);
        }
        EXPECT_LE(stub->requests_for("t"), static_cast<std::size_t>(max_attempts));
    }
}

TEST(Properties, PromptIsPureFunctionOfExample) {
    TrainingExample e{"x", "ctx", "q?", {"a"}, {}};
    EXPECT_EQ(render_sampling_prompt(e), render_sampling_prompt(e));
    auto f = e;
    f.id = "other";
    f.meta["source"] = "s";
    EXPECT_EQ(render_sampling_prompt(e), render_sampling_prompt(f));
}

TEST(Properties, ParseRenderRoundTrip) {
    std::mt19937_64 rng(4);
    const std::vector<std::string> pieces{"word", " ", "\n", "\"q\"", "\\", "{", "}", "\t", "\xC3\xA9", ",", ":"};
    for (int i = 0; i < 500; ++i) {
        std::string reasoning = "Step";
        std::vector<Excerpt> want;
        const auto n = rng() % 4;
        for (std::size_t k = 0; k < n; ++k) {
            std::string span = "span";
            for (std::size_t j = 0; j < rng() % 5; ++j) span += pieces[rng() % pieces.size()];
            if (span.back() == '`') span += 'x';
            const int label = 1 + static_cast<int>(rng() % 20);
            reasoning += " [Excerpt " + std::to_string(label) + "] `" + span + "` then";
            want.push_back({label, span});
        }
        const auto p = parse_response(fixture::response(reasoning, random_words(rng, 4)));
        ASSERT_EQ(p.parse_status, ParseStatus::kOk);
        EXPECT_EQ(p.excerpts, want);
        auto again = parse_response(fixture::response(p.reasoning, p.answer));
        EXPECT_EQ(again, p);
    }
}

TEST(Properties, F1IdentityRangeAndMax) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 3000; ++i) {
        const auto a = random_words(rng, 6);
        EXPECT_EQ(metrics::f1(a, {a}), 1.0);
        const auto b = random_words(rng, 6), c = random_words(rng, 6);
        const auto both = metrics::f1(a, {b, c});
        EXPECT_GE(both, 0.0);
        EXPECT_LE(both, 1.0);
        EXPECT_EQ(both, std::max(metrics::f1(a, {b}), metrics::f1(a, {c})));
    }
}

TEST(Properties, VoteWinnerIsMaximalAndPermutationInvariant) {
    std::mt19937_64 rng(6);
    const std::vector<std::string> alphabet{"Paris", "paris", "Rome", "Oslo", "oslo."};
    for (int i = 0; i < 2000; ++i) {
        std::vector<std::string> answers;
        for (std::size_t k = 0; k < 1 + rng() % 8; ++k) answers.push_back(alphabet[rng() % alphabet.size()]);
        const auto v = metrics::majority_vote(answers);
        const auto top = v.counts.at(v.winner_canonical);
        for (const auto& [k, c] : v.counts) EXPECT_GE(top, c);
        if (!v.tie_broken) {
            auto shuffled = answers;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            EXPECT_EQ(metrics::majority_vote(shuffled).winner_canonical, v.winner_canonical);
        }
    }
}

TEST(Properties, AssessmentInvariants) {
    auto stub = std::make_shared<StubTransport>();
    std::vector<TrainingExample> examples;
    std::vector<ReasoningPath> paths;
    for (int i = 0; i < 30; ++i) {
        examples.push_back({fixture::example_id(i), fixture::context(i), "Who?", {fixture::keeper(i)}, {}});
        for (int s = 0; s < 6; ++s) {
            paths.push_back(parse_path({fixture::example_id(i), s, fixture::sample_reply(i, s), "m", 0.7, std::nullopt}));
            const auto tag = judge_tag(fixture::example_id(i), s);
            // some judges need a retry before producing a rating
            if ((i + s) % 4 == 0) {
                stub->script(tag, {{200, "thinking"}, {200, "Rating: [[" + std::to_string(fixture::judge_rating(i, s)) + "]]"}});
            } else if (i % 7 == 3) {
                stub->script(tag, {{200, "no rating"}});
            } else {
                stub->script(tag, {{200, "Rating: [[" + std::to_string(fixture::judge_rating(i, s) % 3 + 70) + "]]"}});
            }
        }
    }
    const auto result = assess_all(paths, examples, AssessmentConfig{}, stub_client(stub));

    std::map<std::string, int> selected_per_example;
    std::size_t attempts = 0;
    std::map<std::pair<std::string, int>, const ReasoningPath*> by_key;
    for (const auto& p : paths) by_key[{p.example_id, p.sample_index}] = &p;
    std::map<std::string, std::vector<const AssessmentRecord*>> by_example;
    for (const auto& r : result.records) {
        by_example[r.example_id].push_back(&r);
        if (r.ic) attempts += static_cast<std::size_t>(r.ic->attempts);
        if (r.status == AssessStatus::kSelected) ++selected_per_example[r.example_id];
    }
    EXPECT_EQ(stub->requests(), attempts);
    EXPECT_EQ(result.funnel.judge_requests, attempts);
    for (const auto& [id, n] : selected_per_example) EXPECT_EQ(n, 1) << id;

    for (const auto& [id, recs] : by_example) {
        const AssessmentRecord* sel = nullptr;
        for (auto* r : recs) {
            if (r->status == AssessStatus::kSelected) sel = r;
        }
        if (!sel) continue;
        const auto* path = by_key.at({sel->example_id, sel->sample_index});
        for (const auto& x : path->excerpts) {
            EXPECT_TRUE(oracle::naive_contains(oracle::fold(fixture::context(std::stoi(id.substr(2)))), oracle::fold(x.text)));
        }
        for (auto* r : recs) {
            if (r->ic && r->ic->score) EXPECT_GE(*sel->ic->score, *r->ic->score);
        }
    }
    EXPECT_GT(selected_per_example.size(), 0u);
}

TEST(Properties, SftCardinalityAndGrounding) {
    auto stub = std::make_shared<StubTransport>();
    stub->script("judge/*", {{200, "Rating: [[50]]"}});
    std::vector<TrainingExample> examples;
    std::vector<ReasoningPath> paths;
    for (int i = 0; i < 20; ++i) {
        examples.push_back({fixture::example_id(i), fixture::context(i), "Who?", {fixture::keeper(i)}, {}});
        for (int s = 0; s < 4; ++s) {
            paths.push_back(parse_path({fixture::example_id(i), s, fixture::sample_reply(i, s), "m", 0.7, std::nullopt}));
        }
    }
    const auto result = assess_all(paths, examples, AssessmentConfig{}, stub_client(stub));
    const auto build = build_sft(result.selections, result.records, paths, examples);
    std::size_t selected = 0;
    for (const auto& r : result.records) selected += r.status == AssessStatus::kSelected;
    EXPECT_EQ(build.records.size(), result.selections.size());
    EXPECT_EQ(build.records.size(), selected);
    std::map<std::string, const TrainingExample*> ex;
    for (const auto& e : examples) ex[e.id] = &e;
    for (const auto& rec : build.records) {
        auto p = parse_response(rec.target);
        p.example_id = rec.example_id;
        EXPECT_TRUE(check_source_faithfulness(p, *ex.at(rec.example_id), AssessmentConfig{}).pass);
    }
    EXPECT_EQ(build_sft(result.selections, result.records, paths, examples).records, build.records);
}

TEST(Properties, EvalIsReproducibleWithDeterministicStub) {
    const auto dir = fixture::fresh_dir("evalrepro");
    const auto layout = fixture::write_pipeline(dir, 10, 1);
    auto make_stub = [] {
        auto stub = std::make_shared<StubTransport>();
        for (int i = 0; i < 10; ++i) {
            for (int v = 0; v < 3; ++v) {
                stub->script("eval/" + fixture::example_id(i) + "/" + std::to_string(v),
                             {{200, fixture::response("r", v == i % 3 ? fixture::keeper(i) : "other"), FinishReason::kStop, (i * v) % 4}});
            }
        }
        return stub;
    };
    EvalConfig cfg;
    cfg.votes = 3;
    cfg.temperature = 0.7;
    const auto items = load_eval_items(layout.examples);
    save_outcomes(dir / "a.jsonl", evaluate(items, stub_client(make_stub()), cfg).outcomes);
    save_outcomes(dir / "b.jsonl", evaluate(items, stub_client(make_stub()), cfg).outcomes);
    EXPECT_EQ(fixture::slurp(dir / "a.jsonl"), fixture::slurp(dir / "b.jsonl"));
}
