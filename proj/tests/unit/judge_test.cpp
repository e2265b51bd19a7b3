#include <gtest/gtest.h>

#include <cstdlib>

#include "fakes.hpp"
#include "socratic/errors.hpp"
#include "socratic/judge.hpp"

using namespace socratic;
using namespace socratic::judge;

TEST(Orient, ExhaustiveAgainstSemanticOracle) {
    // d_raw < 0 means the question shown first won. Alpha wins exactly when
    // the winner's position is alpha's position.
    for (const int d : {-2, -1, 1, 2}) {
        for (const auto pos : {Position::Question1, Position::Question2}) {
            const Position winner = d < 0 ? Position::Question1 : Position::Question2;
            const bool alpha_wins = winner == pos;
            const int got = orient(d, pos);
            EXPECT_EQ(got > 0, alpha_wins) << d << " " << to_string(pos);
            EXPECT_EQ(std::abs(got), std::abs(d));
        }
    }
    EXPECT_THROW(orient(0, Position::Question1), ValidationError);
    EXPECT_THROW(orient(3, Position::Question2), ValidationError);
}

TEST(UnitScore, Values) {
    EXPECT_EQ(unit_score(-2), Rational(0));
    EXPECT_EQ(unit_score(-1), Rational(1, 4));
    EXPECT_EQ(unit_score(1), Rational(3, 4));
    EXPECT_EQ(unit_score(2), Rational(1));
    EXPECT_THROW(unit_score(0), ValidationError);
}

TEST(Assignment, LowBitDecides) {
    EXPECT_EQ(assign_positions("a", "b", std::uint64_t{4}).alpha_position, Position::Question1);
    EXPECT_EQ(assign_positions("a", "b", std::uint64_t{7}).alpha_position, Position::Question2);
    EXPECT_THROW(assign_positions("a", "a", std::uint64_t{0}), ValidationError);
}

TEST(Assignment, BalancedAndReproducible) {
    std::mt19937_64 rng(2024);
    std::mt19937_64 again(2024);
    int first = 0;
    const int n = 10'000;
    for (int i = 0; i < n; ++i) {
        const auto a = assign_positions("a", "b", rng);
        const auto b = assign_positions("a", "b", again);
        ASSERT_EQ(a.alpha_position, b.alpha_position);
        first += a.alpha_position == Position::Question1 ? 1 : 0;
    }
    const double freq = static_cast<double>(first) / n;
    EXPECT_GE(freq, 0.48);
    EXPECT_LE(freq, 0.52);
}

TEST(JudgeReply, Variants) {
    EXPECT_EQ(parse_judge_reply(R"({"score": -2, "justification": "clearer"})").d_raw, -2);
    EXPECT_EQ(parse_judge_reply(R"({"score": 1})").justification, "");
    EXPECT_EQ(parse_judge_reply("Here you go:\n```json\n{\"score\": 2, \"justification\": \"x\"}\n```").d_raw, 2);
    EXPECT_EQ(parse_judge_reply(R"({"score": "-1", "justification": "x"})").d_raw, -1);
    EXPECT_EQ(parse_judge_reply(R"({"score": 1.0})").d_raw, 1);
    EXPECT_EQ(parse_judge_reply(R"({"score": 2, "justification": "x"})").justification, "x");
}

TEST(JudgeReply, Rejections) {
    for (const char* bad : {"no json", R"({"score": 0})", R"({"score": 3})", R"({"score": -3})", R"({"score": 1.5})",
                            R"({"score": "high"})", R"({"justification": "x"})", R"({"score": null})", "{broken",
                            R"([1, 2])"}) {
        EXPECT_THROW(parse_judge_reply(bad), JudgeProtocolError) << bad;
    }
}

TEST(Elicit, RepromptsThenFails) {
    llm::ScriptedBackend b({{std::nullopt, "tie"}, {std::nullopt, R"({"score": 0})"}, {std::nullopt, "???"}});
    const auto a = assign_positions("a#1", "b#1", std::uint64_t{0});
    EXPECT_THROW(elicit_raw_score(a, "A?", "B?", Criterion::Clarity, "t", {"c"}, b), JudgeProtocolError);
    EXPECT_EQ(b.cursor(), 3u);
    const auto reqs = b.requests();
    EXPECT_EQ(reqs[0].request_tag, "judge/clarity/a#1_vs_b#1");
    EXPECT_EQ(reqs[2].request_tag, "judge/clarity/a#1_vs_b#1#retry2");
    EXPECT_EQ(reqs[1].last_user_message(), agents::judge_reprompt_note());
}

TEST(Elicit, RecoversOnSecondTry) {
    llm::ScriptedBackend b({{std::nullopt, R"({"score": 0})"}, {std::nullopt, R"({"score": 1})"}});
    const auto a = assign_positions("a", "b", std::uint64_t{1});
    const auto s = elicit_raw_score(a, "A?", "B?", Criterion::Depth, "t", {"c"}, b);
    EXPECT_EQ(s.d_raw, 1);
    EXPECT_EQ(s.rejected_replies.size(), 1u);
}

TEST(Elicit, DisplayOrderFollowsAssignment) {
    llm::ScriptedBackend b({{std::nullopt, R"({"score": 1})"}, {std::nullopt, R"({"score": 1})"}});
    elicit_raw_score(assign_positions("a", "b", std::uint64_t{0}), "ALPHA?", "BETA?", Criterion::Depth, "t", {"c"}, b);
    elicit_raw_score(assign_positions("a", "b", std::uint64_t{1}), "ALPHA?", "BETA?", Criterion::Depth, "t", {"c"}, b);
    const auto reqs = b.requests();
    EXPECT_EQ(fakes::displayed_questions(reqs[0]), std::make_pair(std::string("ALPHA?"), std::string("BETA?")));
    EXPECT_EQ(fakes::displayed_questions(reqs[1]), std::make_pair(std::string("BETA?"), std::string("ALPHA?")));
    EXPECT_EQ(reqs[0].model, "gpt-4");
    EXPECT_EQ(reqs[0].temperature, 0.0);
}

TEST(JudgePair, PositionIndependentPreferenceSurvivesRandomization) {
    // The judge always prefers the question owned by "A", wherever it is shown.
    auto backend = fakes::make_judge_backend([](const std::string& q1, const std::string&) {
        return q1.rfind("A", 0) == 0 ? -2 : 2;
    });
    std::mt19937_64 rng(9);
    const QuestionRef alpha{"A#1", fakes::marker("A", 1, 0) + " alpha?"};
    const QuestionRef beta{"B#1", fakes::marker("B", 1, 0) + " beta?"};
    int q1 = 0;
    for (int i = 0; i < 200; ++i) {
        const auto j = judge_pair(alpha, beta, Criterion::OverallQuality, "t", {"c"}, *backend, rng);
        EXPECT_EQ(j.d_oriented, 2);
        EXPECT_EQ(j.unit_score, Rational(1));
        EXPECT_NO_THROW(validate(j));
        q1 += j.alpha_position == Position::Question1 ? 1 : 0;
    }
    EXPECT_GT(q1, 0);
    EXPECT_LT(q1, 200);
}

TEST(JudgePair, PositionBiasedJudgeAveragesOut) {
    // Always prefers Question 1: under balanced positions alpha wins about half.
    auto backend = fakes::make_judge_backend([](const std::string&, const std::string&) { return -1; });
    std::mt19937_64 rng(3);
    int wins = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const auto j = judge_pair({"a", "[A#1 r0] a?"}, {"b", "[B#1 r0] b?"}, Criterion::Clarity, "t", {"c"}, *backend,
                                  rng);
        wins += j.d_oriented > 0 ? 1 : 0;
    }
    EXPECT_NEAR(static_cast<double>(wins) / n, 0.5, 0.04);
}

TEST(Record, RoundTripAndValidation) {
    JudgmentRecord r;
    r.judgment = {Criterion::Relevance, "DYN/L1/M1#1", "F05/L1/M1#2", Position::Question2, -1, -1, Rational(1, 4),
                  "x", "gpt-4"};
    r.alpha_config = "DYN/L1/M1";
    r.beta_config = "F05/L1/M1";
    r.seed_path = "rq1/relevance/cell:0:4/pair:1";
    r.timestamp_ms = 42;
    const auto back = record_from_json(to_json(r));
    EXPECT_EQ(back.judgment, r.judgment);
    EXPECT_EQ(back.seed_path, r.seed_path);
    EXPECT_EQ(back.timestamp_ms, 42);

    auto bad = to_json(r);
    bad["d_oriented"] = 1;
    EXPECT_THROW(record_from_json(bad), ValidationError);
}
