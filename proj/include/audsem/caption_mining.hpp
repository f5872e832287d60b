#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "audsem/backends.hpp"
#include "audsem/io.hpp"

namespace audsem::mining {

struct SubtitleLine {
    std::string video_id;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string text;

    bool valid() const noexcept;
};

enum class BracketStyle { Round, Square, Curly };

std::string_view bracket_style_name(BracketStyle s) noexcept;

struct CaptionCandidate {
    std::string video_id;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string raw_text;         // trimmed source text, bracket pair included
    std::string normalized_text;  // normalize(raw_text), bracket pair included
    BracketStyle bracket_style = BracketStyle::Round;
    double duration_s = 0.0;

    // Normalized text between the brackets, trimmed.
    std::string content() const;
    // Run-unique sample key: "<video_id>_<start in ms, 9 digits>", restricted
    // to [A-Za-z0-9_-] so it is usable as a shard entry key.
    std::string sample_id() const;
};

struct GateDecision {
    bool learned_vote = false;
    bool judge_vote = false;
    bool kept = false;  // learned_vote && judge_vote
    std::string judge_raw_reply;
    bool failed = false;  // judge unreachable or reply never parsed
    std::string failure;
};

// Returns a candidate when the trimmed text is exactly one (), [] or {} pair
// around non-empty content with no further bracket characters inside.
std::optional<CaptionCandidate> extract_bracketed(const SubtitleLine& line);

// Newlines to spaces, curly quotes to straight quotes, non-ASCII removed,
// whitespace collapsed and trimmed. May return "" or an empty bracket pair;
// callers drop candidates with no content left.
std::string normalize(std::string_view raw);

// Inclusive bounds: keeps 1.0 s and 10.0 s captions.
bool duration_gate(const CaptionCandidate& candidate, double min_s = 1.0, double max_s = 10.0);

// Learned sound-description classifier. Training it is out of scope.
class ClassifierBackend {
public:
    virtual ~ClassifierBackend() = default;
    virtual bool is_sound_description(const CaptionCandidate& candidate) = 0;
};

// Offline stand-in for the learned filter: votes yes when any content token is
// a lexicon stem or an inflection of one (laugh -> laughs/laughter/laughing,
// hum -> humming, giggle -> giggling).
class RuleReferenceClassifier final : public ClassifierBackend {
public:
    RuleReferenceClassifier();
    explicit RuleReferenceClassifier(std::vector<std::string> stems);

    static const std::vector<std::string>& default_lexicon();

    bool vote(std::string_view content) const;
    bool is_sound_description(const CaptionCandidate& candidate) override;

    void add_stems(const std::vector<std::string>& stems);

private:
    bool token_matches(std::string_view token) const;

    std::vector<std::string> stems_;
};

bool rule_reference_classifier(const CaptionCandidate& candidate);

// The zero-shot filter prompt with the caption appended as a quoted line.
std::string filter_prompt(const CaptionCandidate& candidate);

// The quoted caption appended by filter_prompt, if the prompt has one.
std::optional<std::string> caption_from_filter_prompt(std::string_view prompt);

// Lowercases and strips punctuation; the first word must be "yes" or "no".
std::optional<bool> parse_judge_vote(std::string_view reply);

// Asks both classifiers. An unparseable judge reply is re-asked up to
// retry.max_attempts times; an unreachable judge marks the decision failed.
GateDecision classify(const CaptionCandidate& candidate, ClassifierBackend& learned, JudgeBackend& judge,
                      const RetryPolicy& retry = {});

struct MiningOptions {
    double min_duration_s = 1.0;
    double max_duration_s = 10.0;
    std::size_t workers = 1;
    RetryPolicy retry;
};

struct MiningReject {
    SubtitleLine line;
    std::string reason;
    bool error = false;  // backend failure rather than a policy rejection
};

struct MiningReport {
    std::size_t lines_total = 0;
    std::size_t invalid_lines = 0;
    std::size_t bracketed = 0;
    std::size_t dropped_empty = 0;
    std::size_t dropped_duration = 0;
    std::size_t dropped_duplicate = 0;
    std::size_t rejected_learned = 0;
    std::size_t rejected_judge = 0;
    std::size_t judge_failed = 0;
    std::size_t kept = 0;
};

struct MiningResult {
    std::vector<CaptionCandidate> kept;   // sorted by (video_id, start_s)
    std::vector<GateDecision> decisions;  // parallel to kept
    std::vector<MiningReject> rejects;    // sorted by (video_id, start_s, reason)
    MiningReport report;
};

// Full mining pass. The kept set does not depend on input order.
MiningResult mine(const std::vector<SubtitleLine>& lines, ClassifierBackend& learned, JudgeBackend& judge,
                  const MiningOptions& options = {});

// Line-delimited {video_id, start_s, end_s, text}. Records missing fields
// are returned with an empty video_id so mine() reports them as invalid.
std::vector<SubtitleLine> read_subtitle_jsonl(const std::filesystem::path& path);

// SubRip blocks ("1\n00:00:01,000 --> 00:00:02,500\ntext\n\n").
std::vector<SubtitleLine> parse_srt(std::string_view srt, const std::string& video_id);

io::json to_json(const SubtitleLine& line);
io::json to_json(const CaptionCandidate& c);
io::json to_json(const MiningReject& r);
io::json to_json(const MiningReport& r);
CaptionCandidate candidate_from_json(const io::json& j);

}  // namespace audsem::mining
