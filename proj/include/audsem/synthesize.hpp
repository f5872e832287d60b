#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "audsem/annotate.hpp"
#include "audsem/backends.hpp"
#include "audsem/caption_mining.hpp"
#include "audsem/io.hpp"

namespace audsem::synth {

inline constexpr std::size_t kSemanticFieldCount = 9;

// JSON keys of the nine descriptor fields, in output order.
inline constexpr std::array<std::string_view, kSemanticFieldCount> kSemanticKeys = {
    "agents_who",         "sources_what",       "mechanisms_how",
    "temporal_when",      "spatial_where",      "acoustic_surfaces",
    "signal_descriptors", "auditory_attributes", "non_auditory_sensation",
};

// Numbered headers used inside <semantic_elements>.
inline constexpr std::array<std::string_view, kSemanticFieldCount> kSemanticHeaders = {
    "1. Sound-generating animated beings with descriptive adjectives:",
    "2. Physical objects/substances generating sound:",
    "3. Actions/mechanisms of sound generation:",
    "4. Temporal context if present:",
    "5. Spatial context and environment:",
    "6. Acoustic surfaces and materials contributing to the sound:",
    "7. Signal-level sound descriptors:",
    "8. Auditory sensation attributes:",
    "9. Subjective/emotional descriptors:",
};

// Each field is a single line; empty means absent.
struct SemanticDescriptors {
    std::array<std::string, kSemanticFieldCount> fields;

    bool any() const noexcept;
    friend bool operator==(const SemanticDescriptors&, const SemanticDescriptors&) = default;
};

struct StructuredTriplet {
    std::string thinking;
    std::optional<SemanticDescriptors> semantic;
    std::string answer;

    friend bool operator==(const StructuredTriplet&, const StructuredTriplet&) = default;
};

struct McqaItem {
    std::string question;
    std::array<std::string, 4> choices;
    int correct_index = 0;
};

struct OpenQaItem {
    std::string question;
    std::string answer;
};

struct CreativeItem {
    std::string instruction;
    std::string answer;
};

// Everything one generator reply carries: the caption triplet plus the raw
// material for the other task types.
struct GeneratorReply {
    StructuredTriplet triplet;
    std::vector<McqaItem> mcqa;
    std::vector<OpenQaItem> open_qa;
    std::vector<CreativeItem> creative;
};

struct SchemaBounds {
    std::size_t min_thinking_words = 50;  // inclusive
    std::size_t max_answer_words = 50;    // exclusive, caption tasks only
};

// Parses and checks a generator reply. Throws ValidationError with one of:
// malformed-json, missing-key, wrong-type, thinking-too-short,
// answer-too-long, empty-answer, semantic-empty, tag-in-content, invalid-mcqa,
// invalid-task.
StructuredTriplet validate_triplet(std::string_view raw_json, bool semantic_mode, bool caption_task = true,
                                   const SchemaBounds& bounds = {});
GeneratorReply validate_reply(std::string_view raw_json, bool semantic_mode, const SchemaBounds& bounds = {});

// Fills the generation template. The music line is dropped when the bundle has
// no music caption. Throws std::invalid_argument when a mandatory field
// (video id, closed caption, audio caption, audio tags) is empty.
std::string build_prompt(const annotate::AnnotationBundle& bundle, const mining::CaptionCandidate& cc);

std::string judge_prompt(std::string_view generated_output);

// Instruction prepended to evaluation and training questions.
std::string_view prepended_prompt(bool semantic_mode) noexcept;

struct JudgeVerdict {
    bool valid = false;
    std::string reason;
};

// Reads the first JSON object in the reply; requires "valid" (bool) and
// "reason" (string). Throws ValidationError("malformed-verdict") otherwise.
// An invalid verdict without a reason gets "unspecified".
JudgeVerdict parse_verdict(std::string_view reply);

struct AttemptLog {
    int attempt = 0;
    std::string outcome;  // "ok", "schema:<category>", "judge:<reason>", "backend:<what>"
};

struct SynthesisOutcome {
    std::optional<GeneratorReply> reply;  // absent means skipped
    int generator_calls = 0;
    std::vector<AttemptLog> attempts;
};

struct SynthesisOptions {
    int max_attempts = 5;
    bool semantic_mode = false;
    SchemaBounds bounds;
};

// Generate, validate, judge; repeat until one attempt passes or max_attempts
// generator calls have been made. Backend errors count as failed attempts.
SynthesisOutcome judge_and_retry(GeneratorBackend& generator, JudgeBackend& judge, std::string_view prompt,
                                 const SynthesisOptions& options = {});

// <think>, optional <semantic_elements>, <answer>, each on its own lines.
std::string serialize_tagged(const StructuredTriplet& triplet, bool semantic_mode);

std::string encode_semantic(const SemanticDescriptors& s);
SemanticDescriptors decode_semantic(std::string_view span);

// Inverse of serialize_tagged; absent when the text does not parse.
std::optional<StructuredTriplet> parse_serialized(std::string_view text, bool semantic_mode);

enum class TaskKind { Caption, Mcqa, OpenQa, Creative };

inline constexpr std::array<TaskKind, 4> kAllTaskKinds = {TaskKind::Caption, TaskKind::Mcqa, TaskKind::OpenQa,
                                                          TaskKind::Creative};

std::string_view task_kind_name(TaskKind k) noexcept;
std::optional<TaskKind> task_kind_from_name(std::string_view name) noexcept;

inline constexpr std::string_view kCaptionInstruction = "Describe the audio in detail";

struct TaskRecord {
    std::string sample_id;
    TaskKind kind = TaskKind::Caption;
    std::string instruction;
    std::optional<std::array<std::string, 4>> choices;
    std::optional<int> correct_index;
    std::string target;  // serialize_tagged of the record's triplet

    friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

// Kind invariants; returns an empty string when valid, else the problem.
std::string check_record(const TaskRecord& r);

struct TaskSplit {
    double caption = 0.20;
    double mcqa = 0.25;
    double open_qa = 0.50;
    double creative = 0.05;
    std::size_t min_per_type = 2;
    std::size_t max_per_type = 3;

    // Throws ConfigError when shares are not a distribution or a type would
    // need a selection probability above 1.
    void validate() const;
    // Chance that a sample contributes records of kind k (1 for caption).
    double selection_probability(TaskKind k) const;
};

std::uint64_t sample_seed(std::string_view sample_id, std::uint64_t run_seed) noexcept;

// One caption record, then for each other kind a seeded draw decides whether
// the sample contributes it and how many records (min..max, capped by the
// material in the reply). Deterministic in (sample_id, reply, seed).
std::vector<TaskRecord> expand_tasks(std::string_view sample_id, const GeneratorReply& reply, std::uint64_t seed,
                                     bool semantic_mode = false, const TaskSplit& split = {});

io::json to_json(const TaskRecord& r);
TaskRecord record_from_json(const io::json& j);
io::json to_json(const GeneratorReply& r);

}  // namespace audsem::synth
