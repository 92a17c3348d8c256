#include "pcc/stats.hpp"

#include "pcc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace pcc {

std::string_view to_string(StatTest t) { return t == StatTest::mcnemar ? "mcnemar" : "wilcoxon"; }

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::a: return "A";
        case Direction::b: return "B";
        case Direction::none: return "none";
    }
    return "none";
}

void to_json(nlohmann::json& j, const StatResult& r) {
    j = nlohmann::json{{"test", std::string(to_string(r.test))},
                       {"p_value", r.p_value},
                       {"effect", r.effect_infinite ? nlohmann::json("∞") : nlohmann::json(r.effect)},
                       {"effect_infinite", r.effect_infinite},
                       {"significant", r.significant},
                       {"direction", std::string(to_string(r.direction))},
                       {"method", r.method},
                       {"sample_size", r.sample_size},
                       {"all_zero_differences", r.all_zero_differences}};
}

double binomial_two_sided_p(std::size_t k, std::size_t n) {
    if (n == 0) return 1.0;
    std::size_t lo = std::min(k, n - k);
    double tail = 0.0;
    if (n <= 60) {
        // Integer binomial coefficients keep small cases exact.
        unsigned long long c = 1;
        unsigned long long sum = 0;
        for (std::size_t i = 0; i <= lo; ++i) {
            sum += c;
            c = c * (n - i) / (i + 1);
        }
        tail = std::ldexp(static_cast<double>(sum), -static_cast<int>(n));
    } else {
        auto nn = static_cast<double>(n);
        for (std::size_t i = 0; i <= lo; ++i) {
            auto ii = static_cast<double>(i);
            tail += std::exp(std::lgamma(nn + 1) - std::lgamma(ii + 1) - std::lgamma(nn - ii + 1) - nn * std::log(2.0));
        }
    }
    return std::min(1.0, 2.0 * tail);
}

StatResult mcnemar(const PairedOutcome& o) {
    StatResult r;
    r.test = StatTest::mcnemar;
    r.sample_size = o.total();
    std::size_t disc = o.n10 + o.n01;
    if (o.n01 == 0) {
        r.effect_infinite = o.n10 > 0;
        r.effect = o.n10 > 0 ? std::numeric_limits<double>::infinity() : 1.0;
    } else {
        r.effect = static_cast<double>(o.n10) / static_cast<double>(o.n01);
    }
    if (disc < 25) {
        r.method = "exact";
        r.p_value = binomial_two_sided_p(o.n10, disc);
    } else {
        r.method = "chi-square";
        double diff = std::abs(static_cast<double>(o.n10) - static_cast<double>(o.n01)) - 1.0;
        double x = std::pow(std::max(diff, 0.0), 2) / static_cast<double>(disc);
        r.p_value = std::erfc(std::sqrt(x / 2.0));
    }
    r.significant = r.p_value < kAlpha;
    r.direction = o.n10 > o.n01 ? Direction::a : o.n01 > o.n10 ? Direction::b : Direction::none;
    return r;
}

namespace {

void check_paired(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorCode::instance_set_mismatch, "paired samples need equal, non-zero lengths (" +
                                                          std::to_string(a.size()) + " vs " +
                                                          std::to_string(b.size()) + ")");
    }
}

}  // namespace

double cliffs_delta_paired(std::span<const double> a, std::span<const double> b) {
    check_paired(a, b);
    long long score = 0;
    for (std::size_t i = 0; i < a.size(); ++i) score += (a[i] > b[i]) - (a[i] < b[i]);
    return static_cast<double>(score) / static_cast<double>(a.size());
}

StatResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, WilcoxonMethod method) {
    check_paired(a, b);
    StatResult r;
    r.test = StatTest::wilcoxon;
    r.sample_size = a.size();
    r.effect = cliffs_delta_paired(a, b);
    r.direction = r.effect > 0 ? Direction::a : r.effect < 0 ? Direction::b : Direction::none;

    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) d.push_back(a[i] - b[i]);
    }
    if (d.empty()) {
        r.all_zero_differences = true;
        r.method = "exact";
        r.p_value = 1.0;
        return r;
    }

    // Midranks of |d|, kept doubled so they stay integral.
    std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });
    std::vector<std::size_t> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = i + j + 2;  // 2 * mean of ranks i+1..j+1
        double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    std::size_t w2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] > 0) w2 += rank2[i];
    }

    bool exact = method == WilcoxonMethod::exact || (method == WilcoxonMethod::automatic && n <= 20);
    if (exact) {
        r.method = "exact";
        std::size_t max_sum = std::accumulate(rank2.begin(), rank2.end(), std::size_t{0});
        std::vector<double> dist(max_sum + 1, 0.0);
        dist[0] = 1.0;
        std::size_t reach = 0;
        for (auto rk : rank2) {
            reach += rk;
            for (std::size_t s = reach + 1; s-- > 0;) {
                double with = s >= rk ? dist[s - rk] : 0.0;
                dist[s] = 0.5 * dist[s] + 0.5 * with;
            }
        }
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t s = 0; s <= max_sum; ++s) {
            if (s <= w2) lower += dist[s];
            if (s >= w2) upper += dist[s];
        }
        r.p_value = std::min(1.0, 2.0 * std::min(lower, upper));
    } else {
        r.method = "normal";
        double nn = static_cast<double>(n);
        double mean = nn * (nn + 1) / 4.0;
        double var = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0;
        double w = static_cast<double>(w2) / 2.0;
        if (var <= 0.0) {
            r.p_value = 1.0;
        } else {
            double z = std::max(std::abs(w - mean) - 0.5, 0.0) / std::sqrt(var);
            r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
        }
    }
    r.significant = r.p_value < kAlpha;
    return r;
}

void to_json(nlohmann::json& j, const Comparison& c) {
    j = nlohmann::json{{"model_a", c.model_a},
                       {"model_b", c.model_b},
                       {"outcome", {{"n11", c.outcome.n11}, {"n10", c.outcome.n10}, {"n01", c.outcome.n01},
                                    {"n00", c.outcome.n00}}},
                       {"em_percent_a", c.em_percent_a},
                       {"em_percent_b", c.em_percent_b},
                       {"em_delta", c.em_percent_a - c.em_percent_b},
                       {"cb_percent_a", 100.0 * c.cb_mean_a},
                       {"cb_percent_b", 100.0 * c.cb_mean_b},
                       {"cb_delta", 100.0 * (c.cb_mean_a - c.cb_mean_b)},
                       {"odds_ratio", c.em},
                       {"crystal_bleu", c.cb},
                       {"abs_effect_size", std::abs(c.cb.effect)}};
}

Comparison compare_models(const ModelReport& a, const ModelReport& b) {
    std::map<std::string, const ScoreRow*> rows_b;
    for (const auto& r : b.rows) rows_b[r.instance_id] = &r;
    if (a.rows.size() != b.rows.size()) {
        throw Error(ErrorCode::instance_set_mismatch, "reports cover " + std::to_string(a.rows.size()) + " and " +
                                                          std::to_string(b.rows.size()) + " instances");
    }
    Comparison c;
    c.model_a = a.model_id;
    c.model_b = b.model_id;
    std::vector<double> cb_a;
    std::vector<double> cb_b;
    for (const auto& ra : a.rows) {
        auto it = rows_b.find(ra.instance_id);
        if (it == rows_b.end()) {
            throw Error(ErrorCode::instance_set_mismatch, "instance '" + ra.instance_id + "' missing from " + b.model_id);
        }
        const auto& rb = *it->second;
        if (ra.em && rb.em) {
            ++c.outcome.n11;
            continue;
        }
        if (ra.em) ++c.outcome.n10;
        else if (rb.em) ++c.outcome.n01;
        else ++c.outcome.n00;
        cb_a.push_back(ra.crystal_bleu);
        cb_b.push_back(rb.crystal_bleu);
    }
    std::size_t total = c.outcome.total();
    if (total > 0) {
        c.em_percent_a = 100.0 * static_cast<double>(c.outcome.n11 + c.outcome.n10) / static_cast<double>(total);
        c.em_percent_b = 100.0 * static_cast<double>(c.outcome.n11 + c.outcome.n01) / static_cast<double>(total);
    }
    c.em = mcnemar(c.outcome);
    if (cb_a.empty()) {
        c.cb.test = StatTest::wilcoxon;
        c.cb.all_zero_differences = true;
        c.cb.method = "exact";
    } else {
        c.cb = wilcoxon_signed_rank(cb_a, cb_b);
        c.cb_mean_a = std::accumulate(cb_a.begin(), cb_a.end(), 0.0) / static_cast<double>(cb_a.size());
        c.cb_mean_b = std::accumulate(cb_b.begin(), cb_b.end(), 0.0) / static_cast<double>(cb_b.size());
    }
    return c;
}

}  // namespace pcc
