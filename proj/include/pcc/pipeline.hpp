#pragma once

#include "pcc/insight.hpp"
#include "pcc/instance_forge.hpp"
#include "pcc/java_methods.hpp"
#include "pcc/metrics.hpp"
#include "pcc/stats.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pcc {

struct RepoSpec {
    std::string id;
    std::filesystem::path path;
    std::string branch = "main";
};

struct RunCaps {
    std::size_t top_contributors = 1000;  // identities kept after mining, by added lines
    std::size_t top_developers = 100;     // eligible developers that anchor datasets
    std::size_t methods_per_repo = 1500;  // generic corpus
    std::size_t test_size = 500;
    std::size_t min_train = 1000;
};

struct RunConfig {
    std::string organization;
    std::uint64_t seed = 0;
    std::vector<RepoSpec> repos;          // organization repositories
    std::vector<RepoSpec> generic_repos;  // outside the organization
    RunCaps caps;
    MethodFilterLimits method_limits;
    MetricOptions crystal_bleu;
    MaskLengthDistribution mask_lengths;
    std::optional<std::filesystem::path> identity_overrides;
    std::optional<std::filesystem::path> cost_scenario;
    std::filesystem::path output_dir = "out";
    nlohmann::json source;  // the parsed file, paths as written
};

/// Parses a JSON run configuration. Relative paths are resolved against the
/// directory of `path`. Throws Error(config_error) on missing or invalid
/// fields.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// The configuration as hashed: every field except the output directory,
/// with repository paths as written.
nlohmann::json config_identity(const RunConfig& config);
std::string config_hash(const RunConfig& config);

enum class StageStatus { ran, skipped };

struct StageOutcome {
    std::string stage;
    StageStatus status = StageStatus::ran;
    nlohmann::json report;  // attrition counts and notes
};

/// Stage output locations below the output directory.
namespace layout {
inline constexpr const char* kMine = "mine";
inline constexpr const char* kAssemble = "assemble";
inline constexpr const char* kInsight = "insight";
inline constexpr const char* kStageFile = "stage.json";
}  // namespace layout

/// Mines the organization repositories into commit, identity and instance
/// stores and builds the generic corpus from the outside repositories.
StageOutcome cmd_mine(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

/// Builds developer, organization, organization-subset and baseline+ datasets
/// for every selected eligible developer. Requires a mine stage produced by
/// the same configuration.
StageOutcome cmd_assemble(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

/// Coverage reports for every assembled dataset plus the cost analysis.
StageOutcome cmd_insight(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

/// Leak audit and invariant checks over an output directory. Returns the
/// violations found; empty means the tree is clean.
std::vector<std::string> cmd_verify(const std::filesystem::path& out);

/// Runs mine, assemble and insight in order, then verifies. `only` restricts
/// the run to one named stage.
std::vector<StageOutcome> cmd_run(const RunConfig& config, const std::filesystem::path& out, std::ostream& log,
                                  const std::optional<std::string>& only = std::nullopt);

struct ScoreInputs {
    std::filesystem::path dataset;                   // directory with manifest.json and test.jsonl
    std::vector<std::filesystem::path> predictions;  // JSONL files
    std::optional<std::filesystem::path> ngram_corpus;  // dataset whose train targets seed CrystalBLEU
    MetricOptions options;
};

/// Scores predictions and returns {"dataset", "models": {...}} with per-model
/// aggregates and rows.
nlohmann::json cmd_score(const ScoreInputs& inputs);

/// Compares two models found in one or more score reports.
Comparison cmd_compare(const std::vector<nlohmann::json>& reports, const std::string& model_a,
                       const std::string& model_b);

/// Plain-text table of a comparison.
std::string format_comparison(const Comparison& c);

/// Lowercase filesystem-safe name for an author id.
std::string path_slug(std::string_view text);

}  // namespace pcc
