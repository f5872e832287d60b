#include "audsem/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "audsem/tagparse.hpp"
#include "audsem/text.hpp"

namespace audsem::reward {

void LengthParams::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be >= 0");
    if (n_gold < 1) throw std::invalid_argument("n_gold must be >= 1");
}

void RewardWeights::validate() const {
    for (double w : {accuracy, format, length}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("reward weights must be non-negative");
    }
}

std::string normalize_answer(std::string_view answer) {
    std::string s = text::to_lower(text::trim_view(answer));
    while (!s.empty() && std::string_view(".,;:!?").find(s.back()) != std::string_view::npos) {
        s.pop_back();
        while (!s.empty() && text::is_space(s.back())) s.pop_back();
    }
    return s;
}

double accuracy_reward(std::string_view response, std::string_view gold_choice) {
    const auto parsed = tagparse::parse_tagged(response, false);
    if (!parsed.well_formed) return 0.0;
    return normalize_answer(parsed.answer_span) == normalize_answer(gold_choice) ? 1.0 : 0.0;
}

double format_reward(std::string_view response, bool require_semantic) {
    return tagparse::parse_tagged(response, require_semantic).well_formed ? 1.0 : 0.0;
}

double length_reward(long n_y, const LengthParams& params) {
    if (n_y < 0) throw std::invalid_argument("n_y must be >= 0");
    const double gap = static_cast<double>(params.n_gold - n_y);
    const double raw = n_y <= params.n_gold ? 1.0 - params.alpha * gap + params.delta
                                            : params.alpha * gap + params.delta;
    return std::clamp(raw, 0.0, 1.0);
}

RewardBreakdown combine(double accuracy, double format, double length, const RewardWeights& weights) {
    weights.validate();
    RewardBreakdown r;
    r.accuracy = accuracy;
    r.format = format;
    r.length = length;
    r.weights = weights;
    r.total = weights.accuracy * accuracy + weights.format * format + weights.length * length;
    return r;
}

RewardBreakdown score_response(std::string_view response, std::string_view gold_choice, bool require_semantic,
                               const LengthParams& params, const RewardWeights& weights) {
    params.validate();
    const auto n_y = static_cast<long>(tagparse::think_word_count(response));
    auto r = combine(accuracy_reward(response, gold_choice), format_reward(response, require_semantic),
                     length_reward(n_y, params), weights);
    r.n_y = n_y;
    return r;
}

GroupAdvantages group_advantages(std::span<const double> totals, bool normalize) {
    if (totals.size() < 2) throw std::invalid_argument("group_advantages needs at least two generations");
    for (double t : totals) {
        if (!std::isfinite(t)) throw std::invalid_argument("group_advantages: non-finite total");
    }
    GroupAdvantages g;
    g.totals.assign(totals.begin(), totals.end());
    const auto n = static_cast<double>(totals.size());

    // Shifted by the first element so an all-equal group has an exact mean.
    const double anchor = totals.front();
    double shifted_sum = 0.0;
    for (double t : totals) shifted_sum += t - anchor;
    g.mean = anchor + shifted_sum / n;

    double sq = 0.0;
    for (double t : totals) sq += (t - g.mean) * (t - g.mean);
    g.stddev = std::sqrt(sq / n);

    g.advantages.reserve(totals.size());
    const bool divide = normalize && g.stddev > 0.0;
    for (double t : totals) g.advantages.push_back(divide ? (t - g.mean) / g.stddev : t - g.mean);
    g.normalized = normalize;

    // Re-centre so rounding in mean/division cannot leave a residual drift.
    double drift = 0.0;
    for (double a : g.advantages) drift += a;
    drift /= n;
    if (drift != 0.0) {
        for (double& a : g.advantages) a -= drift;
    }
    return g;
}

}  // namespace audsem::reward
