#pragma once

#include "pcc/metrics.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcc {

inline constexpr double kAlpha = 0.05;

/// Paired exact-match outcomes of models A and B.
struct PairedOutcome {
    std::size_t n11 = 0;  // both correct
    std::size_t n10 = 0;  // only A
    std::size_t n01 = 0;  // only B
    std::size_t n00 = 0;  // neither

    [[nodiscard]] std::size_t total() const noexcept { return n11 + n10 + n01 + n00; }
};

enum class StatTest { mcnemar, wilcoxon };
enum class Direction { a, b, none };

std::string_view to_string(StatTest t);
std::string_view to_string(Direction d);

struct StatResult {
    StatTest test = StatTest::mcnemar;
    double p_value = 1.0;
    double effect = 0.0;  // odds ratio for McNemar, paired Cliff's delta for Wilcoxon
    bool effect_infinite = false;
    bool significant = false;
    Direction direction = Direction::none;
    std::string method;  // "exact", "chi-square" or "normal"
    std::size_t sample_size = 0;
    bool all_zero_differences = false;
};

/// JSON form; an infinite odds ratio is written as the string "∞".
void to_json(nlohmann::json& j, const StatResult& r);

/// Two-sided exact binomial p at p = 0.5: min(1, 2 P(X <= min(k, n - k))).
double binomial_two_sided_p(std::size_t k, std::size_t n);

/// McNemar on the discordant pairs. Exact binomial below 25 discordant pairs,
/// otherwise chi-square with continuity correction (clamped at zero) and one
/// degree of freedom. Odds ratio n10 / n01.
StatResult mcnemar(const PairedOutcome& outcome);

enum class WilcoxonMethod { automatic, exact, normal };

/// Two-sided Wilcoxon signed-rank p for a - b. Zero differences are dropped
/// and ties get midranks. The automatic method enumerates the null
/// distribution up to 20 non-zero pairs and uses the tie-corrected normal
/// approximation with continuity correction beyond that.
StatResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                WilcoxonMethod method = WilcoxonMethod::automatic);

/// (#{a_i > b_i} - #{a_i < b_i}) / n.
double cliffs_delta_paired(std::span<const double> a, std::span<const double> b);

struct Comparison {
    std::string model_a;
    std::string model_b;
    PairedOutcome outcome;
    double em_percent_a = 0.0;
    double em_percent_b = 0.0;
    double cb_mean_a = 0.0;  // over the instances entering the CrystalBLEU test
    double cb_mean_b = 0.0;
    StatResult em;
    StatResult cb;  // p from Wilcoxon, effect is the paired Cliff's delta
};

void to_json(nlohmann::json& j, const Comparison& c);

/// EM via McNemar over every instance; CrystalBLEU via Wilcoxon and paired
/// Cliff's delta over instances where not both models hit an exact match.
/// Throws Error(instance_set_mismatch) unless both reports cover the same ids.
Comparison compare_models(const ModelReport& a, const ModelReport& b);

}  // namespace pcc
