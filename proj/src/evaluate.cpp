#include "audsem/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

#include "audsem/reward.hpp"
#include "audsem/tagparse.hpp"
#include "audsem/text.hpp"

namespace audsem::harness {

EvalItem eval_item_from_json(const io::json& j) {
    EvalItem it;
    try {
        it.item_id = j.at("item_id").get<std::string>();
        it.category = j.at("category").get<std::string>();
        it.question = j.value("question", "");
        const auto choices = j.at("choices").get<std::vector<std::string>>();
        if (choices.size() != 4) throw std::invalid_argument("item " + it.item_id + ": need exactly 4 choices");
        std::copy(choices.begin(), choices.end(), it.choices.begin());
        it.gold_index = j.at("gold_index").get<int>();
        it.model_response = j.value("model_response", "");
    } catch (const io::json::exception& e) {
        throw std::invalid_argument(std::string("eval item: ") + e.what());
    }
    if (it.category != "sound" && it.category != "music" && it.category != "speech") {
        throw std::invalid_argument("item " + it.item_id + ": unknown category " + it.category);
    }
    if (it.gold_index < 0 || it.gold_index > 3) throw std::invalid_argument("item " + it.item_id + ": bad gold_index");
    return it;
}

std::vector<EvalItem> read_eval_items(const std::filesystem::path& jsonl) {
    std::vector<EvalItem> out;
    for (const auto& j : io::read_jsonl(jsonl)) out.push_back(eval_item_from_json(j));
    return out;
}

std::optional<int> leading_letter(std::string_view answer) {
    auto s = text::trim_view(answer);
    auto letter = [](char c) { return c >= 'A' && c <= 'D'; };
    if (s.size() >= 3 && s[0] == '(' && letter(s[1]) && s[2] == ')') return s[1] - 'A';
    if (s.empty() || !letter(s[0])) return std::nullopt;
    if (s.size() == 1 || s[1] == ')' || s[1] == '.' || s[1] == ':') return s[0] - 'A';
    return std::nullopt;
}

ItemResult match_item(const EvalItem& item) {
    ItemResult r;
    r.item_id = item.item_id;
    r.category = item.category;
    const auto answer = tagparse::extract_answer(item.model_response);
    if (!answer || text::trim_view(*answer).empty()) {
        r.flag = "unparseable";
        return r;
    }
    if (auto l = leading_letter(*answer)) {
        r.predicted = *l;
        r.rule = MatchRule::Letter;
    } else {
        const auto norm = reward::normalize_answer(*answer);
        for (int i = 0; i < 4; ++i) {
            if (reward::normalize_answer(item.choices[static_cast<std::size_t>(i)]) == norm) {
                r.predicted = i;
                r.rule = MatchRule::Exact;
                break;
            }
        }
        if (!r.predicted) {
            std::vector<int> hits;
            for (int i = 0; i < 4; ++i) {
                const auto c = reward::normalize_answer(item.choices[static_cast<std::size_t>(i)]);
                if (!c.empty() && norm.find(c) != std::string::npos) hits.push_back(i);
            }
            if (hits.size() == 1) {
                r.predicted = hits.front();
                r.rule = MatchRule::Containment;
            } else {
                r.flag = hits.empty() ? "no-match" : "ambiguous";
            }
        }
    }
    r.correct = r.predicted && *r.predicted == item.gold_index;
    return r;
}

EvalReport evaluate_mcq(const std::vector<EvalItem>& items) {
    EvalReport rep;
    for (const auto& it : items) {
        auto r = match_item(it);
        auto& acc = rep.per_category[it.category];
        ++acc.total;
        ++rep.overall.total;
        if (r.correct) {
            ++acc.correct;
            ++rep.overall.correct;
        }
        rep.items.push_back(std::move(r));
    }
    std::sort(rep.items.begin(), rep.items.end(), [](const ItemResult& a, const ItemResult& b) {
        return a.item_id < b.item_id;
    });
    return rep;
}

std::string_view rule_name(MatchRule r) noexcept {
    switch (r) {
        case MatchRule::None: return "none";
        case MatchRule::Letter: return "letter";
        case MatchRule::Exact: return "exact";
        case MatchRule::Containment: return "containment";
    }
    return "none";
}

io::json to_json(const EvalReport& r) {
    auto acc = [](const Accuracy& a) {
        return io::json{{"correct", a.correct}, {"total", a.total}, {"accuracy", a.value()}};
    };
    io::json cats = io::json::object();
    for (const auto& [k, v] : r.per_category) cats[k] = acc(v);
    io::json items = io::json::array();
    for (const auto& it : r.items) {
        io::json j = {{"item_id", it.item_id},
                      {"category", it.category},
                      {"rule", std::string(rule_name(it.rule))},
                      {"correct", it.correct}};
        j["predicted"] = it.predicted ? io::json(*it.predicted) : io::json(nullptr);
        if (!it.flag.empty()) j["flag"] = it.flag;
        items.push_back(std::move(j));
    }
    return {{"overall", acc(r.overall)}, {"per_category", cats}, {"items", items}};
}

}  // namespace audsem::harness
