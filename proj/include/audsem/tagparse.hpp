#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace audsem::tagparse {

// Stable codes used in reports; order here is the order violations are listed.
enum class Violation {
    MissingTag,
    DuplicateTag,
    OutOfOrder,
    StrayContent,
    UnclosedTag,
};

std::string_view violation_code(Violation v) noexcept;
std::optional<Violation> violation_from_code(std::string_view code) noexcept;

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kThinkingOpen = "<thinking>";  // accepted alias, never emitted
inline constexpr std::string_view kThinkingClose = "</thinking>";
inline constexpr std::string_view kSemanticOpen = "<semantic_elements>";
inline constexpr std::string_view kSemanticClose = "</semantic_elements>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

struct ParsedResponse {
    // Spans hold the trimmed content of the first complete occurrence of each
    // section, even when the response as a whole is malformed.
    std::string think_span;
    std::optional<std::string> semantic_span;
    std::string answer_span;
    bool has_think = false;
    bool has_answer = false;
    bool well_formed = false;
    std::vector<Violation> violations;  // sorted, unique; empty iff well_formed
};

// Flat grammar: think -> [semantic_elements] -> answer, each exactly once,
// only whitespace outside the sections. Tags are exact and case-sensitive.
// Never throws; problems are reported as violations.
ParsedResponse parse_tagged(std::string_view text, bool require_semantic);

// Lenient answer extraction for evaluation. Returns the strict answer span when
// the response parses; otherwise the text after the last "<answer>" marker (up
// to a following "</answer>", if any), trimmed. Absent when there is no marker.
std::optional<std::string> extract_answer(std::string_view text);

// Whitespace-token count of the think span; 0 when there is none.
std::size_t think_word_count(std::string_view text);

}  // namespace audsem::tagparse
