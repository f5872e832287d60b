#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace audsem::reward {

// Thinking-budget parameters. alpha is the penalty strength per word, delta the
// tolerance margin, n_gold the target number of thinking words.
struct LengthParams {
    double alpha = 0.1;
    double delta = 0.5;
    long n_gold = 25;

    void validate() const;  // throws std::invalid_argument
};

struct RewardWeights {
    double accuracy = 1.0;
    double format = 1.0;
    double length = 1.0;

    void validate() const;
};

struct RewardBreakdown {
    double accuracy = 0.0;
    double format = 0.0;
    double length = 0.0;
    RewardWeights weights;
    double total = 0.0;
    long n_y = 0;  // thinking word count
};

struct GroupAdvantages {
    std::vector<double> totals;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    std::vector<double> advantages;
    bool normalized = false;
};

// Lowercase, trim, strip terminal ".,;:!?" then trim again.
std::string normalize_answer(std::string_view answer);

// 1.0 when the strictly parsed answer matches the gold choice after
// normalize_answer, 0.0 otherwise (including unparseable responses).
double accuracy_reward(std::string_view response, std::string_view gold_choice);

// 1.0 iff the response is well formed for the required tag set.
double format_reward(std::string_view response, bool require_semantic);

// Piecewise clipped length reward:
//   n_y <= n_gold: clip(1 - alpha*(n_gold - n_y) + delta, 0, 1)
//   otherwise:     clip(alpha*(n_gold - n_y) + delta, 0, 1)
// Positive on (n_gold - (1+delta)/alpha, n_gold + delta/alpha).
double length_reward(long n_y, const LengthParams& params);

RewardBreakdown combine(double accuracy, double format, double length, const RewardWeights& weights = {});

// Scores one rollout with all three rewards.
RewardBreakdown score_response(std::string_view response, std::string_view gold_choice, bool require_semantic,
                               const LengthParams& params, const RewardWeights& weights = {});

// advantage_i = total_i - mean, divided by the population std when normalize
// is set and std > 0. A zero-spread group yields all-zero advantages.
// Throws std::invalid_argument for groups smaller than two.
GroupAdvantages group_advantages(std::span<const double> totals, bool normalize);

}  // namespace audsem::reward
