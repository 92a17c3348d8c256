#include "pcc/error.hpp"
#include "pcc/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pcc;

namespace {

// Brute force over all 2^n sign assignments of the non-zero |differences|.
double brute_force_wilcoxon(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) d.push_back(a[i] - b[i]);
    }
    std::size_t n = d.size();
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) {
        double less = 0;
        double equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(d[j]) < std::abs(d[i])) ++less;
            else if (std::abs(d[j]) == std::abs(d[i])) ++equal;
        }
        ranks[i] = less + (equal + 1) / 2.0;
    }
    double observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] > 0) observed += ranks[i];
    }
    double lower = 0;
    double upper = 0;
    double total = std::ldexp(1.0, static_cast<int>(n));
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double w = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) w += ranks[i];
        }
        if (w <= observed + 1e-9) lower += 1;
        if (w >= observed - 1e-9) upper += 1;
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

ModelReport report(const std::string& model, const std::vector<std::pair<bool, double>>& rows) {
    ModelReport r;
    r.model_id = model;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ScoreRow row;
        row.instance_id = "i" + std::to_string(i);
        row.em = rows[i].first;
        row.crystal_bleu = rows[i].second;
        r.rows.push_back(row);
    }
    r.total = rows.size();
    return r;
}

}  // namespace

TEST(Mcnemar, ExactSmallExample) {
    auto r = mcnemar({0, 9, 1, 0});
    EXPECT_EQ(r.method, "exact");
    EXPECT_NEAR(r.p_value, 0.021484375, 1e-15);
    EXPECT_TRUE(r.significant);
    EXPECT_EQ(r.direction, Direction::a);
    EXPECT_DOUBLE_EQ(r.effect, 9.0);
}

TEST(Mcnemar, BalancedDiscordantPairs) {
    auto r = mcnemar({3, 15, 15, 7});
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
    EXPECT_DOUBLE_EQ(r.effect, 1.0);
    EXPECT_EQ(r.direction, Direction::none);
    EXPECT_FALSE(r.significant);
}

TEST(Mcnemar, OddsRatioAndInfinity) {
    EXPECT_DOUBLE_EQ(mcnemar({0, 20, 10, 0}).effect, 2.0);
    auto inf = mcnemar({5, 4, 0, 5});
    EXPECT_TRUE(inf.effect_infinite);
    nlohmann::json j = inf;
    EXPECT_EQ(j.at("effect"), "∞");
    auto none = mcnemar({5, 0, 0, 5});
    EXPECT_FALSE(none.effect_infinite);
    EXPECT_DOUBLE_EQ(none.p_value, 1.0);
}

TEST(Mcnemar, BoundaryAgreementBetweenExactAndChiSquare) {
    for (std::size_t n : {24u, 25u, 26u}) {
        for (std::size_t b = 0; b <= n; ++b) {
            double exact = binomial_two_sided_p(b, n);
            double diff = std::max(std::abs(double(b) - double(n - b)) - 1.0, 0.0);
            double chi = std::erfc(std::sqrt(diff * diff / double(n) / 2.0));
            EXPECT_NEAR(exact, chi, 0.01) << "n=" << n << " b=" << b;
            double used = mcnemar({0, b, n - b, 0}).p_value;
            EXPECT_DOUBLE_EQ(used, n < 25 ? exact : chi);
        }
    }
}

TEST(Mcnemar, SwapAntisymmetry) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 1000; ++i) {
        PairedOutcome o{rng() % 50, rng() % 50, rng() % 50, rng() % 50};
        auto ab = mcnemar(o);
        auto ba = mcnemar({o.n11, o.n01, o.n10, o.n00});
        EXPECT_DOUBLE_EQ(ab.p_value, ba.p_value);
        if (o.n10 > 0 && o.n01 > 0) EXPECT_NEAR(ab.effect * ba.effect, 1.0, 1e-12);
        if (ab.direction == Direction::a) EXPECT_EQ(ba.direction, Direction::b);
        if (ab.direction == Direction::none) EXPECT_EQ(ba.direction, Direction::none);
        EXPECT_GE(ab.p_value, 0.0);
        EXPECT_LE(ab.p_value, 1.0);
    }
}

TEST(Binomial, LargeNPathMatchesSmallNPath) {
    // Both code paths evaluated at n = 60 against a high-n neighbour sanity check.
    EXPECT_NEAR(binomial_two_sided_p(30, 60), 1.0, 1e-12);
    EXPECT_LT(binomial_two_sided_p(10, 100), 1e-10);
    EXPECT_NEAR(binomial_two_sided_p(50, 100), 1.0, 1e-12);
    EXPECT_NEAR(binomial_two_sided_p(40, 100), 0.056887933, 1e-6);
}

TEST(Wilcoxon, FivePositiveDifferences) {
    std::vector<double> a{1, 2, 3, 4, 5};
    std::vector<double> b{0, 0, 0, 0, 0};
    auto r = wilcoxon_signed_rank(a, b);
    EXPECT_NEAR(r.p_value, 0.0625, 1e-15);
    EXPECT_DOUBLE_EQ(r.effect, 1.0);
    EXPECT_EQ(r.direction, Direction::a);
    EXPECT_FALSE(r.significant);
}

TEST(Wilcoxon, IdenticalSamples) {
    std::vector<double> a{0.1, 0.5, 0.7};
    auto r = wilcoxon_signed_rank(a, a);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
    EXPECT_TRUE(r.all_zero_differences);
    EXPECT_DOUBLE_EQ(r.effect, 0.0);
}

TEST(Wilcoxon, MismatchedLengthsThrow) {
    std::vector<double> a{1, 2};
    std::vector<double> b{1};
    try {
        wilcoxon_signed_rank(a, b);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::instance_set_mismatch);
    }
}

TEST(Wilcoxon, ExactMatchesBruteForceWithTies) {
    std::mt19937_64 rng(77);
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t n = 1 + rng() % 14;
        std::vector<double> a(n);
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = double(rng() % 5) / 4.0;
            b[i] = double(rng() % 5) / 4.0;
        }
        EXPECT_NEAR(wilcoxon_signed_rank(a, b, WilcoxonMethod::exact).p_value, brute_force_wilcoxon(a, b), 1e-12);
    }
}

TEST(Wilcoxon, NormalApproximationCloseToExactAtTwentyPairs) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.0);
    double worst = 0.0;
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<double> a(20);
        std::vector<double> b(20);
        double shift = double(iter % 6) * 0.15;
        for (std::size_t i = 0; i < 20; ++i) {
            a[i] = noise(rng) + shift;
            b[i] = noise(rng);
        }
        double exact = wilcoxon_signed_rank(a, b, WilcoxonMethod::exact).p_value;
        double normal = wilcoxon_signed_rank(a, b, WilcoxonMethod::normal).p_value;
        worst = std::max(worst, std::abs(exact - normal));
    }
    EXPECT_LT(worst, 0.01);
}

TEST(Wilcoxon, AutomaticSwitchesAboveTwenty) {
    std::vector<double> a(21, 1.0);
    std::vector<double> b(21, 0.0);
    EXPECT_EQ(wilcoxon_signed_rank(std::span(a).first(20), std::span(b).first(20)).method, "exact");
    EXPECT_EQ(wilcoxon_signed_rank(a, b).method, "normal");
}

TEST(CliffsDelta, BruteForceAndInvariance) {
    std::mt19937_64 rng(12);
    for (int iter = 0; iter < 500; ++iter) {
        std::size_t n = 1 + rng() % 30;
        std::vector<double> a(n);
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = double(rng() % 4);
            b[i] = double(rng() % 4);
        }
        int gt = 0;
        int lt = 0;
        for (std::size_t i = 0; i < n; ++i) {
            gt += a[i] > b[i];
            lt += a[i] < b[i];
        }
        double d = cliffs_delta_paired(a, b);
        EXPECT_DOUBLE_EQ(d, double(gt - lt) / double(n));
        EXPECT_DOUBLE_EQ(cliffs_delta_paired(b, a), -d);
        std::vector<double> ta(n);
        std::vector<double> tb(n);
        for (std::size_t i = 0; i < n; ++i) {
            ta[i] = std::exp(a[i]) * 3 + 1;
            tb[i] = std::exp(b[i]) * 3 + 1;
        }
        EXPECT_DOUBLE_EQ(cliffs_delta_paired(ta, tb), d);
    }
}

TEST(CompareModels, ContingencyAndCrystalSample) {
    auto a = report("A", {{true, 1.0}, {true, 1.0}, {false, 0.4}, {false, 0.2}, {true, 1.0}});
    auto b = report("B", {{true, 1.0}, {false, 0.5}, {true, 1.0}, {false, 0.1}, {false, 0.3}});
    auto c = compare_models(a, b);
    EXPECT_EQ(c.outcome.n11, 1u);
    EXPECT_EQ(c.outcome.n10, 2u);
    EXPECT_EQ(c.outcome.n01, 1u);
    EXPECT_EQ(c.outcome.n00, 1u);
    EXPECT_DOUBLE_EQ(c.em_percent_a, 60.0);
    EXPECT_DOUBLE_EQ(c.em_percent_b, 40.0);
    EXPECT_EQ(c.cb.sample_size, 4u);
    // Pairs: (1,.5) (.4,1) (.2,.1) (1,.3) -> +1 -1 +1 +1.
    EXPECT_DOUBLE_EQ(c.cb.effect, 0.5);
    EXPECT_DOUBLE_EQ(c.em.effect, 2.0);
}

TEST(CompareModels, AllExactMatchesLeavesNoCrystalSample) {
    auto a = report("A", {{true, 1.0}, {true, 1.0}});
    auto c = compare_models(a, report("B", {{true, 1.0}, {true, 1.0}}));
    EXPECT_TRUE(c.cb.all_zero_differences);
    EXPECT_DOUBLE_EQ(c.cb.p_value, 1.0);
    EXPECT_DOUBLE_EQ(c.em.p_value, 1.0);
}

TEST(CompareModels, DifferentInstanceSetsThrow) {
    auto a = report("A", {{true, 1.0}, {false, 0.0}});
    auto b = report("B", {{true, 1.0}});
    EXPECT_THROW(compare_models(a, b), Error);
    auto c = report("C", {{true, 1.0}, {false, 0.0}});
    c.rows[1].instance_id = "other";
    try {
        compare_models(a, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::instance_set_mismatch);
    }
}

TEST(CompareModels, JsonShape) {
    auto a = report("A", {{true, 1.0}, {false, 0.4}});
    auto b = report("B", {{false, 0.2}, {false, 0.4}});
    nlohmann::json j = compare_models(a, b);
    for (const char* key : {"model_a", "model_b", "outcome", "em_delta", "cb_delta", "odds_ratio", "crystal_bleu",
                            "abs_effect_size"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j.at("odds_ratio").at("effect"), "∞");
}
