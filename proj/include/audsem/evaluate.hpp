#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audsem/io.hpp"

namespace audsem::harness {

struct EvalItem {
    std::string item_id;
    std::string category;  // sound | music | speech
    std::string question;
    std::array<std::string, 4> choices;
    int gold_index = 0;
    std::string model_response;
};

// Throws std::invalid_argument for an unknown category, a gold index outside
// 0..3 or a missing field.
EvalItem eval_item_from_json(const io::json& j);
std::vector<EvalItem> read_eval_items(const std::filesystem::path& jsonl);

enum class MatchRule { None, Letter, Exact, Containment };

struct ItemResult {
    std::string item_id;
    std::string category;
    std::optional<int> predicted;
    MatchRule rule = MatchRule::None;
    bool correct = false;
    std::string flag;  // "unparseable", "ambiguous", "no-match" or empty
};

struct Accuracy {
    std::size_t correct = 0;
    std::size_t total = 0;
    double value() const noexcept { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct EvalReport {
    std::map<std::string, Accuracy> per_category;
    Accuracy overall;
    std::vector<ItemResult> items;  // sorted by item_id
};

// Leading choice letter: "B", "B)", "B.", "B:", "(B)" optionally followed by
// text. Uppercase only, so an answer starting with the article "A " is not a
// letter.
std::optional<int> leading_letter(std::string_view answer);

// Letter, then normalized exact match, then unique normalized containment.
ItemResult match_item(const EvalItem& item);

EvalReport evaluate_mcq(const std::vector<EvalItem>& items);

std::string_view rule_name(MatchRule r) noexcept;
io::json to_json(const EvalReport& r);

}  // namespace audsem::harness
