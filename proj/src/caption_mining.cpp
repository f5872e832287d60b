#include "audsem/caption_mining.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "audsem/parallel.hpp"
#include "audsem/text.hpp"

namespace audsem::mining {

namespace {

constexpr std::string_view kFilterPrompt =
    "You are a friendly chatbot whose task it is to filter out bad data.\n"
    "You will get a closed caption corresponding to a video clip.\n"
    "Your task is to state whether the caption is a correct subtitle for deaf or hard-of-hearing people.\n"
    "Correct captions in this task are those that correspond to words that could represent an actual sound being made.\n"
    "This could either include a verb that states an impact or sound types or properties like \"sound\", \"noise\" or \"music\".\n"
    "Incorrect closed captions include sentences that someone is saying in the video clip, or sentences that are not related to the video clip at all.\n"
    "All captions are in English. All captions are within curly brackets or square brackets [].\n"
    "Examples of correct captions include:\n"
    "- \"(laughs)\" or \"(laughter)\"\n"
    "- \"[XBOX SOUND]\"\n"
    "- \"[chicken bocking imitation]\"\n"
    "- \"(cereal grains smacking onto wood)\"\n"
    "- \"(collision)\"\n"
    "\n"
    "Examples of incorrect captions include:\n"
    "- \"[ transport ]\"\n"
    "- \"(Wishes are left to wither by time.)\"\n"
    "- \"(look, I like my nightmareless sleep; I'll play some scary games when I feel too peaceful)\"\n"
    "- \"[A calm navy color] [TinyTAN character detail]\"\n"
    "- \"[Haotian Sword Tower]\"\n"
    "\n"
    "Is the following caption correct? Please only answer \"yes\" or \"no\"";

std::optional<char> closing_for(char open) {
    switch (open) {
        case '(': return ')';
        case '[': return ']';
        case '{': return '}';
        default: return std::nullopt;
    }
}

BracketStyle style_for(char open) {
    if (open == '[') return BracketStyle::Square;
    if (open == '{') return BracketStyle::Curly;
    return BracketStyle::Round;
}

bool is_bracket(char c) { return std::string_view("()[]{}").find(c) != std::string_view::npos; }

// Decodes one UTF-8 sequence at s[i]; returns the code point and advances i.
// Malformed bytes decode to U+FFFD and advance by one.
char32_t next_code_point(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++i; return 0xFFFD; }
    if (i + static_cast<std::size_t>(len) > s.size()) { ++i; return 0xFFFD; }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) { ++i; return 0xFFFD; }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

// Replacement for a non-ASCII code point, or 0 to drop it.
char map_non_ascii(char32_t cp) {
    switch (cp) {
        case 0x201C: case 0x201D: case 0x201E: case 0x201F:
        case 0x00AB: case 0x00BB: case 0x2033: case 0x301D: case 0x301E:
            return '"';
        case 0x2018: case 0x2019: case 0x201A: case 0x201B: case 0x2032:
            return '\'';
        case 0x00A0: case 0x2002: case 0x2003: case 0x2009: case 0x200A: case 0x202F: case 0x3000:
            return ' ';
        default:
            return 0;
    }
}

bool is_consonant(char c) { return std::string_view("aeiouy").find(c) == std::string_view::npos; }

}  // namespace

bool SubtitleLine::valid() const noexcept {
    return !video_id.empty() && std::isfinite(start_s) && std::isfinite(end_s) && start_s >= 0.0 && end_s > start_s;
}

std::string_view bracket_style_name(BracketStyle s) noexcept {
    switch (s) {
        case BracketStyle::Round: return "round";
        case BracketStyle::Square: return "square";
        case BracketStyle::Curly: return "curly";
    }
    return "round";
}

std::string CaptionCandidate::content() const {
    std::string_view t = normalized_text;
    if (t.size() < 2) return {};
    return text::trim(t.substr(1, t.size() - 2));
}

std::string CaptionCandidate::sample_id() const {
    std::string id;
    id.reserve(video_id.size() + 10);
    for (char c : video_id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        id.push_back(ok ? c : '-');
    }
    char ms[32];
    std::snprintf(ms, sizeof(ms), "_%09lld", static_cast<long long>(std::llround(start_s * 1000.0)));
    return id + ms;
}

std::optional<CaptionCandidate> extract_bracketed(const SubtitleLine& line) {
    const std::string_view t = text::trim_view(line.text);
    if (t.size() < 2) return std::nullopt;
    const auto close = closing_for(t.front());
    if (!close || t.back() != *close) return std::nullopt;
    const std::string_view inner = t.substr(1, t.size() - 2);
    if (std::any_of(inner.begin(), inner.end(), is_bracket)) return std::nullopt;
    if (text::trim_view(inner).empty()) return std::nullopt;

    CaptionCandidate c;
    c.video_id = line.video_id;
    c.start_s = line.start_s;
    c.end_s = line.end_s;
    c.raw_text = std::string(t);
    c.normalized_text = normalize(c.raw_text);
    c.bracket_style = style_for(t.front());
    c.duration_s = line.end_s - line.start_s;
    return c;
}

std::string normalize(std::string_view raw) {
    std::string mapped;
    mapped.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
        const char32_t cp = next_code_point(raw, i);
        if (cp < 0x80) {
            const char c = static_cast<char>(cp);
            if (text::is_space(c)) mapped.push_back(' ');
            else if (cp >= 0x20 && cp < 0x7F) mapped.push_back(c);
        } else if (char r = map_non_ascii(cp)) {
            mapped.push_back(r);
        }
    }
    std::string out;
    out.reserve(mapped.size());
    for (auto w : text::split_words(mapped)) {
        if (!out.empty()) out.push_back(' ');
        out.append(w);
    }
    return out;
}

bool duration_gate(const CaptionCandidate& candidate, double min_s, double max_s) {
    return candidate.duration_s >= min_s && candidate.duration_s <= max_s;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& RuleReferenceClassifier::default_lexicon() {
    static const std::vector<std::string> kStems = {
        // sound types and properties
        "sound", "noise", "music", "musical", "melody", "tune", "tone", "audio", "instrumental", "static",
        "silence", "echo", "beat",
        // human
        "laugh", "chuckle", "giggle", "cackle", "snicker", "sob", "cry", "cries", "scream", "shriek", "yell",
        "shout", "gasp", "sigh", "groan", "moan", "grunt", "cough", "sneeze", "sniff", "sniffle", "snore",
        "breath", "breathe", "pant", "whisper", "hum", "whistle", "clap", "applause", "cheer", "footstep",
        "hiccup", "burp", "gulp", "yawn", "murmur", "chatter", "sing", "speak", "speaking", "inaudible",
        // animals
        "bark", "woof", "meow", "purr", "hiss", "growl", "howl", "roar", "chirp", "tweet", "squawk", "cluck",
        "bock", "moo", "oink", "neigh", "bleat", "quack", "buzz", "croak", "caw", "hoot", "squeal", "whimper",
        "yelp", "snarl",
        // impacts and mechanisms
        "bang", "boom", "thud", "thump", "crash", "smash", "shatter", "slam", "knock", "tap", "click", "clank",
        "clang", "clatter", "clink", "rattle", "creak", "squeak", "screech", "crack", "snap", "pop", "splash",
        "drip", "sizzle", "crackle", "rustle", "whoosh", "swoosh", "whir", "whirr", "rumble", "thunder",
        "explosion", "explode", "gunshot", "gunfire", "beep", "ring", "ding", "dong", "chime", "honk", "siren",
        "alarm", "horn", "engine", "rev", "smack", "collision", "collide", "impact", "stomp", "scrape", "scratch",
        "tick", "tock", "vibrate", "vroom", "zap", "whack", "thwack", "clack", "plop", "fizz", "slurp", "munch",
        "crunch", "chomp",
    };
    return kStems;
}

RuleReferenceClassifier::RuleReferenceClassifier() : stems_(default_lexicon()) {}

RuleReferenceClassifier::RuleReferenceClassifier(std::vector<std::string> stems) : stems_(std::move(stems)) {
    for (auto& s : stems_) s = text::to_lower(s);
}

void RuleReferenceClassifier::add_stems(const std::vector<std::string>& stems) {
    for (const auto& s : stems) stems_.push_back(text::to_lower(s));
}

bool RuleReferenceClassifier::token_matches(std::string_view token) const {
    static constexpr std::string_view kSuffixes[] = {"", "s", "es", "ed", "ing", "er", "ers", "ter", "y"};
    static constexpr std::string_view kDoubledSuffixes[] = {"ing", "ed", "er", "y"};
    static constexpr std::string_view kEDropSuffixes[] = {"ing", "ed", "er", "d", "s"};
    for (const auto& stem : stems_) {
        if (stem.empty() || !text::starts_with(token, stem.substr(0, stem.size() - 1))) continue;
        for (auto suf : kSuffixes) {
            if (token.size() == stem.size() + suf.size() && text::starts_with(token, stem) &&
                token.substr(stem.size()) == suf) {
                return true;
            }
        }
        if (is_consonant(stem.back()) && token.size() > stem.size() + 1 && text::starts_with(token, stem) &&
            token[stem.size()] == stem.back()) {
            for (auto suf : kDoubledSuffixes) {
                if (token.substr(stem.size() + 1) == suf) return true;
            }
        }
        if (stem.back() == 'e') {
            const std::string_view base(stem.data(), stem.size() - 1);
            for (auto suf : kEDropSuffixes) {
                if (token.size() == base.size() + suf.size() && token.substr(base.size()) == suf) return true;
            }
        }
    }
    return false;
}

bool RuleReferenceClassifier::vote(std::string_view content) const {
    for (const auto& tok : text::alnum_tokens(content)) {
        if (token_matches(tok)) return true;
    }
    return false;
}

bool RuleReferenceClassifier::is_sound_description(const CaptionCandidate& candidate) {
    return vote(candidate.content());
}

bool rule_reference_classifier(const CaptionCandidate& candidate) {
    static const RuleReferenceClassifier kDefault;
    return kDefault.vote(candidate.content());
}

std::string filter_prompt(const CaptionCandidate& candidate) {
    std::string p(kFilterPrompt);
    p += "\n\"";
    p += candidate.normalized_text;
    p += "\"";
    return p;
}

std::optional<std::string> caption_from_filter_prompt(std::string_view prompt) {
    if (!text::starts_with(prompt, kFilterPrompt)) return std::nullopt;
    std::string_view rest = prompt.substr(kFilterPrompt.size());
    if (rest.size() < 3 || rest.front() != '\n' || rest[1] != '"' || rest.back() != '"') return std::nullopt;
    return std::string(rest.substr(2, rest.size() - 3));
}

std::optional<bool> parse_judge_vote(std::string_view reply) {
    std::string cleaned;
    for (char c : text::to_lower(reply)) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || text::is_space(c);
        cleaned.push_back(keep ? c : ' ');
    }
    const auto words = text::split_words(cleaned);
    if (words.empty()) return std::nullopt;
    if (words.front() == "yes") return true;
    if (words.front() == "no") return false;
    return std::nullopt;
}

GateDecision classify(const CaptionCandidate& candidate, ClassifierBackend& learned, JudgeBackend& judge,
                      const RetryPolicy& retry) {
    GateDecision d;
    try {
        d.learned_vote = with_retry(retry, [&] { return learned.is_sound_description(candidate); });
    } catch (const BackendError& e) {
        d.failed = true;
        d.failure = std::string("classifier-unavailable: ") + e.what();
        return d;
    }
    const std::string prompt = filter_prompt(candidate);
    const int attempts = std::max(1, retry.max_attempts);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        try {
            d.judge_raw_reply = with_retry(retry, [&] { return judge.complete(prompt); });
        } catch (const BackendError& e) {
            d.failed = true;
            d.failure = std::string("judge-unavailable: ") + e.what();
            return d;
        }
        if (auto vote = parse_judge_vote(d.judge_raw_reply)) {
            d.judge_vote = *vote;
            d.kept = d.learned_vote && d.judge_vote;
            return d;
        }
    }
    d.failed = true;
    d.failure = "judge-unparseable";
    return d;
}

// ---------------------------------------------------------------------------

MiningResult mine(const std::vector<SubtitleLine>& lines, ClassifierBackend& learned, JudgeBackend& judge,
                  const MiningOptions& options) {
    MiningResult result;
    auto& rep = result.report;
    rep.lines_total = lines.size();

    std::vector<CaptionCandidate> pending;
    for (const auto& line : lines) {
        if (!line.valid()) {
            ++rep.invalid_lines;
            result.rejects.push_back({line, "invalid-line"});
            continue;
        }
        auto cand = extract_bracketed(line);
        if (!cand) continue;
        ++rep.bracketed;
        if (cand->content().empty()) {
            ++rep.dropped_empty;
            result.rejects.push_back({line, "empty-after-normalize"});
            continue;
        }
        if (!duration_gate(*cand, options.min_duration_s, options.max_duration_s)) {
            ++rep.dropped_duration;
            result.rejects.push_back({line, "duration"});
            continue;
        }
        pending.push_back(std::move(*cand));
    }

    auto key = [](const CaptionCandidate& c) { return std::tie(c.video_id, c.start_s, c.end_s, c.raw_text); };
    std::sort(pending.begin(), pending.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    std::vector<CaptionCandidate> unique;
    for (auto& c : pending) {
        if (!unique.empty() && unique.back().sample_id() == c.sample_id()) {
            ++rep.dropped_duplicate;
            result.rejects.push_back({{c.video_id, c.start_s, c.end_s, c.raw_text}, "duplicate-key"});
            continue;
        }
        unique.push_back(std::move(c));
    }

    std::vector<GateDecision> decisions(unique.size());
    parallel_for(unique.size(), options.workers,
                 [&](std::size_t i) { decisions[i] = classify(unique[i], learned, judge, options.retry); });

    for (std::size_t i = 0; i < unique.size(); ++i) {
        const auto& c = unique[i];
        const auto& d = decisions[i];
        SubtitleLine src{c.video_id, c.start_s, c.end_s, c.raw_text};
        if (d.failed) {
            ++rep.judge_failed;
            result.rejects.push_back({src, d.failure, true});
        } else if (!d.learned_vote) {
            ++rep.rejected_learned;
            result.rejects.push_back({src, "classifier-no"});
        } else if (!d.judge_vote) {
            ++rep.rejected_judge;
            result.rejects.push_back({src, "judge-no"});
        } else {
            result.kept.push_back(c);
            result.decisions.push_back(d);
        }
    }
    rep.kept = result.kept.size();

    std::sort(result.rejects.begin(), result.rejects.end(), [](const auto& a, const auto& b) {
        return std::tie(a.line.video_id, a.line.start_s, a.reason, a.line.text) <
               std::tie(b.line.video_id, b.line.start_s, b.reason, b.line.text);
    });
    return result;
}

// ---------------------------------------------------------------------------

std::vector<SubtitleLine> read_subtitle_jsonl(const std::filesystem::path& path) {
    std::vector<SubtitleLine> lines;
    for (const auto& j : io::read_jsonl(path)) {
        SubtitleLine l;
        try {
            l.video_id = j.at("video_id").get<std::string>();
            l.start_s = j.at("start_s").get<double>();
            l.end_s = j.at("end_s").get<double>();
            l.text = j.at("text").get<std::string>();
        } catch (const io::json::exception&) {
            l = SubtitleLine{};
            if (j.is_object() && j.contains("text") && j["text"].is_string()) l.text = j["text"].get<std::string>();
        }
        lines.push_back(std::move(l));
    }
    return lines;
}

namespace {

std::optional<double> parse_srt_time(std::string_view s) {
    s = text::trim_view(s);
    int h = 0, m = 0, sec = 0, ms = 0;
    char sep = 0;
    const std::string buf(s);
    if (std::sscanf(buf.c_str(), "%d:%d:%d%c%d", &h, &m, &sec, &sep, &ms) != 5) return std::nullopt;
    if (sep != ',' && sep != '.') return std::nullopt;
    return h * 3600.0 + m * 60.0 + sec + ms / 1000.0;
}

}  // namespace

std::vector<SubtitleLine> parse_srt(std::string_view srt, const std::string& video_id) {
    std::vector<SubtitleLine> out;
    std::vector<std::string> block;
    auto flush = [&] {
        // Optional numeric index line, then the timing line, then text.
        std::size_t t = 0;
        if (t < block.size() && block[t].find("-->") == std::string::npos) ++t;
        if (t < block.size()) {
            const auto& timing = block[t];
            const auto arrow = timing.find("-->");
            if (arrow != std::string::npos) {
                auto start = parse_srt_time(std::string_view(timing).substr(0, arrow));
                auto end = parse_srt_time(std::string_view(timing).substr(arrow + 3));
                if (start && end) {
                    std::vector<std::string> body(block.begin() + static_cast<std::ptrdiff_t>(t + 1), block.end());
                    out.push_back({video_id, *start, *end, text::join(body, "\n")});
                }
            }
        }
        block.clear();
    };
    std::size_t pos = 0;
    while (pos <= srt.size()) {
        auto nl = srt.find('\n', pos);
        if (nl == std::string_view::npos) nl = srt.size();
        std::string line(srt.substr(pos, nl - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim_view(line).empty()) {
            if (!block.empty()) flush();
        } else {
            block.push_back(std::move(line));
        }
        pos = nl + 1;
    }
    if (!block.empty()) flush();
    return out;
}

io::json to_json(const SubtitleLine& line) {
    return {{"video_id", line.video_id}, {"start_s", line.start_s}, {"end_s", line.end_s}, {"text", line.text}};
}

io::json to_json(const CaptionCandidate& c) {
    return {{"sample_id", c.sample_id()},
            {"video_id", c.video_id},
            {"start_s", c.start_s},
            {"end_s", c.end_s},
            {"raw_text", c.raw_text},
            {"normalized_text", c.normalized_text},
            {"bracket_style", bracket_style_name(c.bracket_style)},
            {"duration_s", c.duration_s}};
}

io::json to_json(const MiningReject& r) {
    auto j = to_json(r.line);
    j["reason"] = r.reason;
    if (r.error) j["error"] = true;
    return j;
}

io::json to_json(const MiningReport& r) {
    return {{"lines_total", r.lines_total},       {"invalid_lines", r.invalid_lines},
            {"bracketed", r.bracketed},           {"dropped_empty", r.dropped_empty},
            {"dropped_duration", r.dropped_duration}, {"dropped_duplicate", r.dropped_duplicate},
            {"rejected_learned", r.rejected_learned}, {"rejected_judge", r.rejected_judge},
            {"judge_failed", r.judge_failed},     {"kept", r.kept}};
}

CaptionCandidate candidate_from_json(const io::json& j) {
    CaptionCandidate c;
    c.video_id = j.at("video_id").get<std::string>();
    c.start_s = j.at("start_s").get<double>();
    c.end_s = j.at("end_s").get<double>();
    c.raw_text = j.at("raw_text").get<std::string>();
    c.normalized_text = j.at("normalized_text").get<std::string>();
    const auto style = j.at("bracket_style").get<std::string>();
    c.bracket_style = style == "square" ? BracketStyle::Square : style == "curly" ? BracketStyle::Curly : BracketStyle::Round;
    c.duration_s = j.at("duration_s").get<double>();
    return c;
}

}  // namespace audsem::mining
