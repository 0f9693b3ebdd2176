#include <random>

#include <gtest/gtest.h>

#include "cotcurate/cot_parse.hpp"
#include "cotcurate/error.hpp"
#include "cotcurate/sampling.hpp"
#include "pipeline_fixture.hpp"

using namespace cotcurate;

TEST(CotParse, StrictObjectWithExcerpt) {
    const auto p = parse_response(
        R"({"reasoning": "The host says [Excerpt 1] `He is idle` so he is a guest.", "answer": "a guest"})");
    EXPECT_EQ(p.parse_status, ParseStatus::kOk);
    EXPECT_EQ(p.answer, "a guest");
    ASSERT_EQ(p.excerpts.size(), 1u);
    EXPECT_EQ(p.excerpts[0], (Excerpt{1, "He is idle"}));
    EXPECT_FALSE(p.parse_note.has_value());
}

TEST(CotParse, ProseWrappedIsRepaired) {
    const auto p = parse_response(
        "Sure! Here is my response: {\"reasoning\": \"[Excerpt 2] `was founded in 1960` gives the year.\", "
        "\"answer\": \"1960\"}");
    EXPECT_EQ(p.parse_status, ParseStatus::kRepaired);
    EXPECT_EQ(p.answer, "1960");
    ASSERT_EQ(p.excerpts.size(), 1u);
    EXPECT_EQ(p.excerpts[0].label, 2);
}

TEST(CotParse, LenientToleratesRawNewlinesAndTrailingComma) {
    const auto p = parse_response("{\"reasoning\": \"line one\nline two\", \"answer\": \"Orin\",}");
    EXPECT_EQ(p.parse_status, ParseStatus::kRepaired);
    EXPECT_EQ(p.reasoning, "line one\nline two");
    EXPECT_EQ(p.answer, "Orin");
}

TEST(CotParse, LenientKeepsInteriorQuotes) {
    const auto p = parse_response(R"({"reasoning": "He said "stop" twice.", "answer": "stop"})");
    EXPECT_EQ(p.parse_status, ParseStatus::kRepaired);
    EXPECT_EQ(p.reasoning, "He said \"stop\" twice.");
}

TEST(CotParse, Failures) {
    const auto p = parse_response("I cannot answer.");
    EXPECT_EQ(p.parse_status, ParseStatus::kFailed);
    EXPECT_TRUE(p.parse_note.has_value());
    EXPECT_EQ(parse_response(R"({"reasoning": "   ", "answer": "x"})").parse_status, ParseStatus::kFailed);
    EXPECT_EQ(parse_response(R"({"reasoning": "r"})").parse_status, ParseStatus::kFailed);
    EXPECT_EQ(parse_response("").parse_status, ParseStatus::kFailed);
}

TEST(CotParse, SampleErrorBecomesFailedPath) {
    RawSample s{"e1", 4, "", "m", 0.7, std::string("HTTP 500")};
    const auto p = parse_path(s);
    EXPECT_EQ(p.parse_status, ParseStatus::kFailed);
    EXPECT_EQ(p.example_id, "e1");
    EXPECT_EQ(p.sample_index, 4);
    EXPECT_NE(p.parse_note->find("HTTP 500"), std::string::npos);
}

TEST(Excerpts, MarkersAndSpans) {
    const auto x = extract_excerpts("[Excerpt 1] `a b`\n[Excerpt 12]\t``has ` tick``[Excerpt 3] no span [Excerpt 0] `zero`");
    ASSERT_EQ(x.excerpts.size(), 2u);
    EXPECT_EQ(x.excerpts[0], (Excerpt{1, "a b"}));
    EXPECT_EQ(x.excerpts[1], (Excerpt{12, "has ` tick"}));
    ASSERT_EQ(x.notes.size(), 2u);
    EXPECT_NE(x.notes[0].find("[Excerpt 3]"), std::string::npos);
    EXPECT_EQ(extract_excerpts("[Excerpt x] `a`").excerpts.size(), 0u);
    EXPECT_EQ(extract_excerpts("[Excerpt 4] `unterminated").excerpts.size(), 0u);
}

TEST(Excerpts, MarkerWithoutSpanKeepsPathWithNote) {
    const auto p = parse_response(R"({"reasoning": "see [Excerpt 1] and [Excerpt 2] `ok`", "answer": "x"})");
    EXPECT_EQ(p.parse_status, ParseStatus::kOk);
    EXPECT_EQ(p.excerpts.size(), 1u);
    ASSERT_TRUE(p.parse_note.has_value());
    EXPECT_NE(p.parse_note->find("[Excerpt 1]"), std::string::npos);
}

TEST(Excerpts, CountLimit) {
    auto with_n = [](int n) {
        std::string reasoning = "Cited:";
        for (int i = 1; i <= n; ++i) reasoning += "[Excerpt " + std::to_string(i) + "] `t" + std::to_string(i) + "` ";
        return parse_response(fixture::response(reasoning, "a"));
    };
    EXPECT_EQ(count_excerpts(with_n(0)).count, 0u);
    const auto ten = count_excerpts(with_n(10));
    EXPECT_EQ(ten.count, 10u);
    EXPECT_FALSE(ten.over_limit);
    const auto eleven = count_excerpts(with_n(11));
    EXPECT_EQ(eleven.count, 11u);
    EXPECT_TRUE(eleven.over_limit);
    EXPECT_THROW(count_excerpts(parse_response("nope")), DataError);
}

TEST(CotParse, NeverThrowsOnRandomBytes) {
    std::mt19937_64 rng(17);
    const std::string pieces[] = {"{", "}", "\"", "\\", ",", ":", "reasoning", "answer", "[Excerpt 1]", "`", "\n", "x", "\xff"};
    for (int i = 0; i < 5000; ++i) {
        std::string s;
        const auto n = rng() % 30;
        for (std::size_t k = 0; k < n; ++k) {
            if (rng() % 4 == 0) {
                s += static_cast<char>(rng() % 256);
            } else {
                s += pieces[rng() % std::size(pieces)];
            }
        }
        ReasoningPath p;
        ASSERT_NO_THROW(p = parse_response(s)) << s;
        if (p.parse_status != ParseStatus::kFailed) {
            EXPECT_FALSE(p.answer.empty());
            EXPECT_FALSE(p.reasoning.empty());
        } else {
            EXPECT_TRUE(p.parse_note.has_value());
        }
    }
}

TEST(CotParse, FileRoundTrip) {
    std::vector<ReasoningPath> paths;
    for (int i = 0; i < 6; ++i) {
        auto p = parse_path({"e" + std::to_string(i), i, fixture::sample_reply(i, i), "m", 0.7, std::nullopt});
        paths.push_back(p);
    }
    const auto dir = fixture::fresh_dir("paths");
    save_paths(dir / "p.jsonl", paths);
    EXPECT_EQ(load_paths(dir / "p.jsonl"), paths);
}
