#include <doctest.h>

#include <algorithm>
#include <deque>
#include <fstream>

#include "audsem/caption_mining.hpp"
#include "audsem/stub_backends.hpp"
#include "audsem/text.hpp"
#include "support.hpp"

using namespace audsem;
using namespace audsem::mining;

namespace {

CaptionCandidate cand(const std::string& text, double start = 0.0, double end = 2.0, const std::string& vid = "v") {
    auto c = extract_bracketed({vid, start, end, text});
    REQUIRE(c.has_value());
    return *c;
}

struct FixedLearned : ClassifierBackend {
    bool vote;
    explicit FixedLearned(bool v) : vote(v) {}
    bool is_sound_description(const CaptionCandidate&) override { return vote; }
};

struct ScriptedJudge : JudgeBackend {
    std::deque<std::string> replies;
    int calls = 0;
    std::string complete(std::string_view) override {
        ++calls;
        if (replies.empty()) return "no";
        auto r = replies.front();
        replies.pop_front();
        return r;
    }
};

struct DownJudge : JudgeBackend {
    int calls = 0;
    std::string complete(std::string_view) override {
        ++calls;
        throw BackendError("timeout", true);
    }
};

}  // namespace

TEST_CASE("mining: extract_bracketed") {
    auto c = extract_bracketed({"v", 0.0, 1.5, "(laughs)"});
    REQUIRE(c);
    CHECK(c->bracket_style == BracketStyle::Round);
    CHECK(c->content() == "laughs");
    CHECK(c->duration_s == doctest::Approx(1.5));

    CHECK_FALSE(extract_bracketed({"v", 0.0, 1.5, "Hello there"}));
    auto x = extract_bracketed({"v", 0.0, 1.5, "[XBOX SOUND]"});
    REQUIRE(x);
    CHECK(x->bracket_style == BracketStyle::Square);
    CHECK(extract_bracketed({"v", 0.0, 1.5, "  {door creaks}  "})->bracket_style == BracketStyle::Curly);

    CHECK_FALSE(extract_bracketed({"v", 0.0, 1.5, "(text]"}));
    CHECK_FALSE(extract_bracketed({"v", 0.0, 1.5, "()"}));
    CHECK_FALSE(extract_bracketed({"v", 0.0, 1.5, "(   )"}));
    CHECK_FALSE(extract_bracketed({"v", 0.0, 1.5, "[A calm navy color] [TinyTAN character detail]"}));
    CHECK_FALSE(extract_bracketed({"v", 0.0, 1.5, "[JOHN] Where are you going?"}));
}

TEST_CASE("mining: extract_bracketed is idempotent on raw_text") {
    testsupport::Gen g(31);
    const std::vector<std::string> opens{"(", "[", "{"}, closes{")", "]", "}"};
    for (int i = 0; i < 500; ++i) {
        const auto b = g.index(3);
        const auto text = std::string(g.index(3), ' ') + opens[b] + g.words(g.index(5) + 1) + closes[b] + " ";
        auto c = extract_bracketed({"v", 1.0, 3.0, text});
        REQUIRE(c);
        auto again = extract_bracketed({"v", 1.0, 3.0, c->raw_text});
        REQUIRE(again);
        CHECK(again->raw_text == c->raw_text);
        CHECK(again->normalized_text == c->normalized_text);
    }
}

TEST_CASE("mining: normalize") {
    CHECK(normalize("(cereal\ngrains  smacking)") == "(cereal grains smacking)");
    CHECK(normalize("(\xE2\x80\x9C" "laughs" "\xE2\x80\x9D)") == "(\"laughs\")");
    CHECK(normalize("(\xE2\x80\x98hi\xE2\x80\x99)") == "('hi')");
    CHECK(normalize("(\xE6\x97\xA5\xE6\x9C\xAC\xE8\xAA\x9E)") == "()");
    CHECK(normalize("  a \t b  ") == "a b");
    CHECK(normalize("caf\xC3\xA9 music") == "caf music");
}

TEST_CASE("mining: non-ASCII-only content is dropped") {
    auto c = extract_bracketed({"v", 0.0, 2.0, "(\xE6\x97\xA5\xE6\x9C\xAC)"});
    if (c) CHECK(c->content().empty());
    ScriptedJudge judge;
    FixedLearned learned(true);
    auto r = mine({{"v", 0.0, 2.0, "(\xE6\x97\xA5\xE6\x9C\xAC)"}}, learned, judge);
    CHECK(r.kept.empty());
    CHECK(judge.calls == 0);
}

TEST_CASE("mining: duration gate is inclusive") {
    CHECK_FALSE(duration_gate(cand("(x)", 0.0, 12.0)));
    CHECK_FALSE(duration_gate(cand("(x)", 0.0, 0.5)));
    CHECK(duration_gate(cand("(x)", 0.0, 1.0)));
    CHECK(duration_gate(cand("(x)", 5.0, 15.0)));
    CHECK_FALSE(duration_gate(cand("(x)", 5.0, 15.001)));
}

TEST_CASE("mining: judge vote parsing") {
    CHECK(parse_judge_vote("Yes.") == true);
    CHECK(parse_judge_vote("  NO!") == false);
    CHECK(parse_judge_vote("yes, it describes a sound") == true);
    CHECK_FALSE(parse_judge_vote("Maybe").has_value());
    CHECK_FALSE(parse_judge_vote("").has_value());
    CHECK_FALSE(parse_judge_vote("yesterday").has_value());
}

TEST_CASE("mining: filter prompt") {
    const auto c = cand("[door slams]");
    const auto p = filter_prompt(c);
    CHECK(text::starts_with(p, "You are a friendly chatbot whose task it is to filter out bad data.\n"));
    CHECK(p.find("Is the following caption correct? Please only answer \"yes\" or \"no\"\n\"[door slams]\"") !=
          std::string::npos);
    CHECK(caption_from_filter_prompt(p) == "[door slams]");
    CHECK_FALSE(caption_from_filter_prompt("something else"));
}

TEST_CASE("mining: classify") {
    RuleReferenceClassifier rules;
    {
        ScriptedJudge j;
        j.replies = {"yes"};
        auto d = classify(cand("(collision)"), rules, j);
        CHECK(d.kept);
    }
    {
        ScriptedJudge j;
        j.replies = {"no"};
        FixedLearned yes(true);
        auto d = classify(cand("[ transport ]"), yes, j);
        CHECK(d.learned_vote);
        CHECK_FALSE(d.judge_vote);
        CHECK_FALSE(d.kept);
    }
    {
        ScriptedJudge j;
        j.replies = {"Yes."};
        FixedLearned yes(true);
        auto d = classify(cand("(music)"), yes, j);
        CHECK(d.judge_vote);
        CHECK(d.kept);
        CHECK(d.judge_raw_reply == "Yes.");
    }
    {
        ScriptedJudge j;
        j.replies = {"hmm", "well", "yes"};
        FixedLearned yes(true);
        RetryPolicy r;
        r.max_attempts = 3;
        auto d = classify(cand("(music)"), yes, j, r);
        CHECK(d.kept);
        CHECK(j.calls == 3);
    }
    {
        ScriptedJudge j;
        j.replies = {"hmm", "well", "unsure", "yes"};
        FixedLearned yes(true);
        RetryPolicy r;
        r.max_attempts = 3;
        auto d = classify(cand("(music)"), yes, j, r);
        CHECK(d.failed);
        CHECK_FALSE(d.kept);
        CHECK(d.failure == "judge-unparseable");
    }
    {
        DownJudge j;
        FixedLearned yes(true);
        RetryPolicy r;
        r.max_attempts = 3;
        auto d = classify(cand("(music)"), yes, j, r);
        CHECK(d.failed);
        CHECK_FALSE(d.kept);
        CHECK(j.calls == 3);
        CHECK(text::starts_with(d.failure, "judge-unavailable"));
    }
}

TEST_CASE("mining: rule reference classifier") {
    CHECK(rule_reference_classifier(cand("(chicken bocking imitation)")));
    CHECK_FALSE(rule_reference_classifier(cand("(Wishes are left to wither by time.)")));
    CHECK(rule_reference_classifier(cand("(music)")));
    CHECK(rule_reference_classifier(cand("(laughter)")));
    CHECK(rule_reference_classifier(cand("(humming)")));
    CHECK(rule_reference_classifier(cand("(giggling)")));
    CHECK_FALSE(rule_reference_classifier(cand("(in Spanish)")));
    RuleReferenceClassifier custom({"transport"});
    CHECK(custom.vote("transport"));
    CHECK_FALSE(custom.vote("music"));
}

TEST_CASE("mining: the listed prompt examples with the rule classifier and a prompt-following judge") {
    stub::StubWorld world({});
    auto& judge = world.mining_judge();
    RuleReferenceClassifier rules;
    const std::vector<std::string> good = {"(laughs)", "(laughter)", "[XBOX SOUND]", "[chicken bocking imitation]",
                                           "(cereal grains smacking onto wood)", "(collision)"};
    const std::vector<std::string> bad = {
        "[ transport ]", "(Wishes are left to wither by time.)",
        "(look, I like my nightmareless sleep; I'll play some scary games when I feel too peaceful)",
        "[A calm navy color] [TinyTAN character detail]", "[Haotian Sword Tower]"};
    for (const auto& t : good) {
        CAPTURE(t);
        auto c = extract_bracketed({"v", 0.0, 2.0, t});
        REQUIRE(c);
        CHECK(classify(*c, rules, judge).kept);
    }
    for (const auto& t : bad) {
        CAPTURE(t);
        auto c = extract_bracketed({"v", 0.0, 2.0, t});
        CHECK((!c || !classify(*c, rules, judge).kept));
    }
}

TEST_CASE("mining: mine is order independent") {
    testsupport::Gen g(32);
    std::vector<SubtitleLine> lines;
    const std::vector<std::string> texts = {"[door slams]", "(laughs)", "Hello", "[in Spanish]", "(music playing)",
                                            "{dog barking}", "(whispers)", "[ transport ]"};
    for (int i = 0; i < 60; ++i) {
        const double s = static_cast<double>(g.range(0, 500)) / 4.0;
        lines.push_back({"vid" + std::to_string(g.range(0, 5)), s, s + g.uniform(0.2, 14.0), g.pick(texts)});
    }
    lines.push_back({"", 0.0, 1.0, "(x)"});
    lines.push_back({"v", 2.0, 1.0, "(x)"});
    stub::StubWorld world({});
    RuleReferenceClassifier rules;
    const auto base = mine(lines, rules, world.mining_judge());
    CHECK(base.report.invalid_lines == 2);
    CHECK(base.report.kept == base.kept.size());
    for (const auto& c : base.kept) {
        CHECK(c.duration_s >= 1.0);
        CHECK(c.duration_s <= 10.0);
        CHECK(c.normalized_text.find('\n') == std::string::npos);
        CHECK(std::all_of(c.normalized_text.begin(), c.normalized_text.end(),
                          [](char ch) { return static_cast<unsigned char>(ch) < 128; }));
    }
    for (int round = 0; round < 10; ++round) {
        std::shuffle(lines.begin(), lines.end(), g.engine());
        MiningOptions opt;
        opt.workers = 3;
        const auto r = mine(lines, rules, world.mining_judge(), opt);
        REQUIRE(r.kept.size() == base.kept.size());
        for (std::size_t i = 0; i < r.kept.size(); ++i) CHECK(r.kept[i].sample_id() == base.kept[i].sample_id());
        CHECK(r.rejects.size() == base.rejects.size());
    }
}

TEST_CASE("mining: duplicate keys are dropped once") {
    stub::StubWorld world({});
    RuleReferenceClassifier rules;
    const auto r = mine({{"v", 1.0, 3.0, "(bang)"}, {"v", 1.0, 3.0, "(bang)"}, {"v", 1.0004, 2.5, "(boom)"}}, rules,
                        world.mining_judge());
    CHECK(r.kept.size() == 1);
    CHECK(r.report.dropped_duplicate == 2);
}

TEST_CASE("mining: sample ids") {
    auto c = cand("(x)", 12.3456, 14.0, "ab/c d");
    CHECK(c.sample_id() == "ab-c-d_000012346");
}

TEST_CASE("mining: subtitle readers") {
    const auto dir = testsupport::scratch_dir("srt");
    {
        std::ofstream f(dir / "subs.jsonl");
        f << R"J({"video_id":"a","start_s":1.0,"end_s":2.5,"text":"(laughs)"})J" << "\n\n";
        f << R"({"video_id":"b","start_s":1.0})" << "\n";
    }
    auto lines = read_subtitle_jsonl(dir / "subs.jsonl");
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].text == "(laughs)");
    CHECK(lines[1].video_id.empty());

    const auto srt = "1\n00:00:01,000 --> 00:00:02,500\n(door\ncreaks)\n\n2\r\n01:02:03,004 --> 01:02:04,000\r\nHi\r\n";
    auto s = parse_srt(srt, "vid");
    REQUIRE(s.size() == 2);
    CHECK(s[0].start_s == doctest::Approx(1.0));
    CHECK(s[0].end_s == doctest::Approx(2.5));
    CHECK(s[0].text == "(door\ncreaks)");
    CHECK(s[1].start_s == doctest::Approx(3723.004));
    CHECK(s[1].text == "Hi");
}

TEST_CASE("mining: candidate json round trip") {
    const auto c = cand("[door slams]", 3.25, 7.5, "vid");
    const auto back = candidate_from_json(to_json(c));
    CHECK(back.video_id == c.video_id);
    CHECK(back.start_s == c.start_s);
    CHECK(back.end_s == c.end_s);
    CHECK(back.normalized_text == c.normalized_text);
    CHECK(back.bracket_style == c.bracket_style);
    CHECK(back.sample_id() == c.sample_id());
}
