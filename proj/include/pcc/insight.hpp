#pragma once

#include "pcc/instance_forge.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace pcc {

struct CoverageOptions {
    // Count element occurrences instead of distinct elements.
    bool occurrence_weighted = false;
};

struct CoverageReport {
    double signature_coverage = 0.0;
    double vocab_coverage = 0.0;
    double training_relevance = 0.0;
    std::size_t test_instances = 0;
    std::size_t train_instances = 0;
    std::size_t test_signatures_seen = 0;
    std::size_t test_elements = 0;
    std::size_t train_elements = 0;
    std::size_t shared_elements = 0;
};

void to_json(nlohmann::json& j, const CoverageReport& r);

/// Identifiers and string, char and number literals of a source fragment,
/// by exact text.
std::vector<std::string> vocabulary_elements(std::string_view source);

/// Share of test instances whose method signature occurs among the training
/// signatures. Throws Error(empty_test_set) for an empty test set.
double signature_coverage(const std::vector<CompletionInstance>& test, const std::vector<CompletionInstance>& train);

/// Share of the test methods' identifiers and literals that also occur in
/// the training methods. Throws Error(empty_test_set).
double vocab_coverage(const std::vector<CompletionInstance>& test, const std::vector<CompletionInstance>& train,
                      const CoverageOptions& opts = {});

/// Share of the training methods' identifiers and literals that also occur
/// in the test methods. Throws Error(empty_train_set).
double training_relevance(const std::vector<CompletionInstance>& train, const std::vector<CompletionInstance>& test,
                          const CoverageOptions& opts = {});

/// All three measures plus the counts behind them. An empty train set gives
/// zero coverage and zero relevance rather than an error.
CoverageReport coverage_report(const std::vector<CompletionInstance>& test,
                               const std::vector<CompletionInstance>& train, const CoverageOptions& opts = {});

struct CostScenario {
    std::string name;
    double training_cost = 0.0;
    double inference_cost_small = 0.0;
    double inference_cost_large = 0.0;
    std::size_t developers = 1;
    double weekly_rate = 1.0;  // predictions per developer per week
};

void to_json(nlohmann::json& j, const CostScenario& s);
void from_json(const nlohmann::json& j, CostScenario& s);

/// Reads {"scenarios": [CostScenario, ...]}. Throws Error(config_error).
std::vector<CostScenario> load_cost_scenarios(const std::filesystem::path& path);

/// training_cost / (inference_cost_large - inference_cost_small).
/// Throws Error(non_positive_delta) when the large model is not dearer.
double breakeven_inferences(const CostScenario& s);

struct WeeksToBreakeven {
    double raw = 0.0;
    long long whole = 0;  // rounded up
};

WeeksToBreakeven weeks_to_breakeven(double n_star, const CostScenario& s);

struct CostPoint {
    double inferences = 0.0;
    double cost_small = 0.0;  // personalized model, training cost included
    double cost_large = 0.0;  // generic model
};

/// `steps + 1` evenly spaced points over [0, max_inferences].
std::vector<CostPoint> cost_curve(const CostScenario& s, double max_inferences, std::size_t steps = 100);

/// Where the two cumulative cost lines meet, interpolated between samples.
/// Returns a negative value if they never cross inside the curve.
double curve_crossing(const std::vector<CostPoint>& curve);

void write_cost_curve_csv(const std::vector<CostPoint>& curve, const std::filesystem::path& path);

}  // namespace pcc
