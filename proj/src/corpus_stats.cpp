#include "audsem/corpus_stats.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "audsem/text.hpp"

namespace audsem::harness {

namespace {

struct CategoryRule {
    const char* category;
    std::vector<std::string_view> keywords;
};

const std::vector<CategoryRule>& category_rules() {
    // First matching rule wins, so more specific groups come first.
    static const std::vector<CategoryRule> rules = {
        {"Music", {"music", "song", "singing", "guitar", "piano", "drum", "violin", "orchestra", "melody", "tune",
                   "choir", "instrument", "bass", "trumpet", "flute", "jingle", "chant"}},
        {"Animal", {"dog", "bark", "cat", "meow", "bird", "chirp", "tweet", "cow", "moo", "horse", "neigh", "pig",
                    "oink", "rooster", "crow", "chicken", "cluck", "insect", "bee", "buzz", "frog", "roar", "lion",
                    "growl", "howl", "animal", "seal", "sheep", "bleat", "goat", "duck", "quack", "owl", "hoot"}},
        {"Human sounds", {"speech", "speak", "talk", "voice", "laugh", "giggle", "cry", "sob", "scream", "shout",
                          "yell", "whisper", "cough", "sneeze", "breath", "sigh", "gasp", "applause", "clap",
                          "cheer", "footstep", "whistl", "snor", "groan", "moan", "hum", "chatter", "crowd",
                          "baby", "kiss", "smack", "burp", "hiccup", "grunt"}},
        {"Natural sounds", {"rain", "thunder", "wind", "water", "wave", "ocean", "stream", "river", "fire",
                            "crackl", "storm", "splash", "drip", "waterfall"}},
        {"Sounds of things", {"car", "engine", "vehicle", "train", "plane", "aircraft", "motor", "horn", "siren",
                              "door", "knock", "bell", "alarm", "phone", "ring", "clock", "tick", "glass",
                              "shatter", "crash", "bang", "explosion", "gun", "shot", "click", "typing", "keyboard",
                              "tool", "drill", "hammer", "saw", "beep", "machine", "boom", "whoosh", "thud",
                              "collision", "slam", "squeak", "creak", "rattle", "bock"}},
        {"Channel, environment and background", {"silence", "static", "noise", "hiss", "echo", "reverb",
                                                 "ambience", "ambient", "background", "outside", "inside"}},
        {"Source-ambiguous sounds", {"sound", "effect", "tap", "rustl", "scrap", "rumbl", "pop", "snap", "crunch",
                                     "thump", "ding", "clatter", "clang", "clank", "sizzl"}},
    };
    return rules;
}

std::string share_text(double v) { return text::format_fixed(v, 6); }

}  // namespace

std::string top_level_category(std::string_view tag) {
    const auto lower = text::to_lower(tag);
    for (const auto& rule : category_rules()) {
        for (auto kw : rule.keywords) {
            if (lower.find(kw) != std::string::npos) return rule.category;
        }
    }
    return "Other";
}

std::string length_bin(std::size_t words) {
    const std::size_t top = 10 * kLengthBinWidth;
    if (words >= top) return std::to_string(top) + "+";
    const std::size_t lo = words / kLengthBinWidth * kLengthBinWidth;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02zu-%02zu", lo, lo + kLengthBinWidth - 1);
    return buf;
}

CorpusStats corpus_stats(const std::vector<StatsRecord>& records) {
    CorpusStats s;
    s.total_records = records.size();
    if (records.empty()) return s;
    for (auto k : synth::kAllTaskKinds) s.task_counts[std::string(synth::task_kind_name(k))] = 0;

    std::map<std::string, const StatsRecord*> first_by_sample;
    for (const auto& r : records) {
        ++s.task_counts[std::string(synth::task_kind_name(r.record.kind))];
        first_by_sample.emplace(r.record.sample_id, &r);
        if (r.record.kind == synth::TaskKind::Caption) {
            const auto parsed = synth::parse_serialized(r.record.target, false);
            const auto words = parsed ? text::word_count(parsed->answer) : 0;
            ++s.caption_length_histogram[length_bin(words)];
        }
    }
    for (const auto& [k, n] : s.task_counts) {
        s.task_shares[k] = static_cast<double>(n) / static_cast<double>(s.total_records);
    }
    s.total_samples = first_by_sample.size();
    for (const auto& [id, r] : first_by_sample) {
        ++s.category_histogram[r->tags.empty() ? std::string("Other") : top_level_category(r->tags.front())];
    }
    return s;
}

io::json to_json(const CorpusStats& s) {
    io::json shares = io::json::object();
    for (const auto& [k, v] : s.task_shares) shares[k] = share_text(v);
    return {{"total_records", s.total_records},
            {"total_samples", s.total_samples},
            {"task_counts", s.task_counts},
            {"task_shares", shares},
            {"category_histogram", s.category_histogram},
            {"caption_length_histogram", s.caption_length_histogram}};
}

std::string to_csv(const CorpusStats& s) {
    std::string out = "section,key,value\n";
    auto quote = [](const std::string& k) {
        return k.find(',') == std::string::npos ? k : "\"" + k + "\"";
    };
    out += "total,records," + std::to_string(s.total_records) + "\n";
    out += "total,samples," + std::to_string(s.total_samples) + "\n";
    for (const auto& [k, v] : s.task_counts) out += "task_count," + quote(k) + "," + std::to_string(v) + "\n";
    for (const auto& [k, v] : s.task_shares) out += "task_share," + quote(k) + "," + share_text(v) + "\n";
    for (const auto& [k, v] : s.category_histogram) out += "category," + quote(k) + "," + std::to_string(v) + "\n";
    for (const auto& [k, v] : s.caption_length_histogram) {
        out += "caption_length," + quote(k) + "," + std::to_string(v) + "\n";
    }
    return out;
}

}  // namespace audsem::harness
