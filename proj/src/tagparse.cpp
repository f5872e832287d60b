#include "audsem/tagparse.hpp"

#include <algorithm>
#include <array>

#include "audsem/text.hpp"

namespace audsem::tagparse {

namespace {

enum class Section { Think = 0, Semantic = 1, Answer = 2 };

struct TagSpelling {
    std::string_view text;
    Section section;
    bool closing;
    int spelling;  // distinguishes <think> from the <thinking> alias
};

constexpr std::array<TagSpelling, 8> kTags{{
    {kThinkOpen, Section::Think, false, 0},
    {kThinkClose, Section::Think, true, 0},
    {kThinkingOpen, Section::Think, false, 1},
    {kThinkingClose, Section::Think, true, 1},
    {kSemanticOpen, Section::Semantic, false, 0},
    {kSemanticClose, Section::Semantic, true, 0},
    {kAnswerOpen, Section::Answer, false, 0},
    {kAnswerClose, Section::Answer, true, 0},
}};

const TagSpelling* match_tag(std::string_view text, std::size_t pos) {
    for (const auto& tag : kTags) {
        if (text.compare(pos, tag.text.size(), tag.text) == 0) return &tag;
    }
    return nullptr;
}

bool blank(std::string_view s) { return text::trim_view(s).empty(); }

}  // namespace

std::string_view violation_code(Violation v) noexcept {
    switch (v) {
        case Violation::MissingTag: return "missing-tag";
        case Violation::DuplicateTag: return "duplicate-tag";
        case Violation::OutOfOrder: return "out-of-order";
        case Violation::StrayContent: return "stray-content";
        case Violation::UnclosedTag: return "unclosed-tag";
    }
    return "unknown";
}

std::optional<Violation> violation_from_code(std::string_view code) noexcept {
    for (auto v : {Violation::MissingTag, Violation::DuplicateTag, Violation::OutOfOrder,
                   Violation::StrayContent, Violation::UnclosedTag}) {
        if (violation_code(v) == code) return v;
    }
    return std::nullopt;
}

ParsedResponse parse_tagged(std::string_view text, bool require_semantic) {
    ParsedResponse out;
    std::vector<Violation> found;

    std::array<int, 3> opened{};         // occurrences per section
    std::array<bool, 3> captured{};      // first complete span stored
    std::vector<Section> first_order;    // sections by first opening

    const TagSpelling* open = nullptr;
    std::size_t content_start = 0;
    std::size_t outside_start = 0;

    auto store = [&](Section s, std::string_view content) {
        const auto idx = static_cast<std::size_t>(s);
        if (captured[idx]) return;
        captured[idx] = true;
        std::string span = text::trim(content);
        switch (s) {
            case Section::Think: out.think_span = std::move(span); out.has_think = true; break;
            case Section::Semantic: out.semantic_span = std::move(span); break;
            case Section::Answer: out.answer_span = std::move(span); out.has_answer = true; break;
        }
    };

    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '<') {
            ++i;
            continue;
        }
        const TagSpelling* tag = match_tag(text, i);
        if (!tag) {
            ++i;
            continue;
        }
        const std::size_t after = i + tag->text.size();
        if (!tag->closing) {
            if (open) {
                // A section opened inside another: the outer one never closed.
                found.push_back(Violation::UnclosedTag);
            } else if (!blank(text.substr(outside_start, i - outside_start))) {
                found.push_back(Violation::StrayContent);
            }
            const auto idx = static_cast<std::size_t>(tag->section);
            if (opened[idx]++ == 0) first_order.push_back(tag->section);
            else found.push_back(Violation::DuplicateTag);
            open = tag;
            content_start = after;
        } else {
            if (open && open->section == tag->section && open->spelling == tag->spelling) {
                store(tag->section, text.substr(content_start, i - content_start));
            } else if (open) {
                found.push_back(Violation::UnclosedTag);
            } else {
                found.push_back(Violation::StrayContent);
            }
            open = nullptr;
            outside_start = after;
        }
        i = after;
    }
    if (open) {
        found.push_back(Violation::UnclosedTag);
    } else if (!blank(text.substr(outside_start))) {
        found.push_back(Violation::StrayContent);
    }

    if (!std::is_sorted(first_order.begin(), first_order.end())) found.push_back(Violation::OutOfOrder);
    if (opened[0] == 0 || opened[2] == 0 || (require_semantic && opened[1] == 0)) {
        found.push_back(Violation::MissingTag);
    }

    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    out.violations = std::move(found);
    out.well_formed = out.violations.empty();
    return out;
}

std::optional<std::string> extract_answer(std::string_view text) {
    auto parsed = parse_tagged(text, false);
    if (parsed.well_formed) return parsed.answer_span;

    const auto marker = text.rfind(kAnswerOpen);
    if (marker == std::string_view::npos) return std::nullopt;
    std::string_view rest = text.substr(marker + kAnswerOpen.size());
    if (auto close = rest.find(kAnswerClose); close != std::string_view::npos) rest = rest.substr(0, close);
    return text::trim(rest);
}

std::size_t think_word_count(std::string_view text) {
    return text::word_count(parse_tagged(text, false).think_span);
}

}  // namespace audsem::tagparse
