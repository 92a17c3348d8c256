#pragma once

#include "pcc/hash.hpp"
#include "pcc/instance_forge.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pcc {

enum class DatasetRole { developer, organization, org_subset, baseline_plus, generic_finetune, pretrain };

std::string_view to_string(DatasetRole role);
DatasetRole dataset_role_from_string(std::string_view text);

struct SplitCounts {
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;

    friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

struct DatasetManifest {
    std::string dataset_id;
    DatasetRole role = DatasetRole::developer;
    std::optional<std::string> anchor_developer;
    std::optional<std::int64_t> cutoff_ts;
    SplitCounts counts;
    std::uint64_t seed = 0;
    std::vector<std::string> source_hashes;
};

void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

struct Dataset {
    DatasetManifest manifest;
    std::vector<CompletionInstance> train;
    std::vector<CompletionInstance> val;
    std::vector<CompletionInstance> test;

    void refresh_counts() { manifest.counts = {train.size(), val.size(), test.size()}; }
};

struct SplitOptions {
    std::size_t test_size = 500;
    std::size_t min_train = 1000;
};

/// Result of the per-developer recency split.
struct DeveloperSplit {
    std::vector<CompletionInstance> train;
    std::vector<CompletionInstance> val;
    std::vector<CompletionInstance> test;
    std::size_t dropped_duplicates = 0;  // train items equal to a holdout item
    std::size_t dropped_ties = 0;        // train items sharing the earliest holdout timestamp
};

/// Orders by (timestamp, commit sha, instance id).
void sort_chronologically(std::vector<CompletionInstance>& instances);

/// Whitespace-collapsed token text of context and target, the equality used
/// for deduplication.
std::string dedup_key(const CompletionInstance& inst);

/// Train items whose dedup_key matches any holdout item are removed.
std::vector<CompletionInstance> dedup(std::vector<CompletionInstance> train,
                                      const std::vector<CompletionInstance>& holdout);

/// Most recent `test_size` instances become test; of the rest the oldest 90%
/// (floor) are train and the remainder val. Train is then deduplicated
/// against val and test, and train items tied with the earliest holdout
/// timestamp are dropped so training strictly predates evaluation. Throws
/// Error(too_few_instances) below test_size + 1 instances.
DeveloperSplit split_developer(std::vector<CompletionInstance> instances, const SplitOptions& opts = {});

bool eligible(const DeveloperSplit& split, const SplitOptions& opts = {});

Dataset make_developer_dataset(const std::string& author_id, const DeveloperSplit& split, std::uint64_t seed);

/// Organization dataset anchored at `anchor`: every listed developer's
/// instances up to the anchor's training cutoff, minus duplicates of the
/// anchor's holdout, split 90/10 by recency. The test set is the anchor's.
/// Throws Error(anchor_ineligible) when the anchor has no usable split.
Dataset build_org_dataset(const std::map<std::string, std::vector<CompletionInstance>>& per_author,
                          const Dataset& anchor, std::uint64_t seed);

[[noreturn]] void throw_target_too_large(std::size_t target, std::size_t available);

/// Uniform sample without replacement of exactly `target_size` items; input
/// order is preserved. Throws Error(target_too_large).
template <class T>
std::vector<T> sample_exact(const std::vector<T>& items, std::size_t target_size, std::uint64_t seed) {
    if (target_size > items.size()) {
        throw_target_too_large(target_size, items.size());
    }
    std::vector<T> out;
    out.reserve(target_size);
    std::mt19937_64 rng(seed);
    std::sample(items.begin(), items.end(), std::back_inserter(out), target_size, rng);
    return out;
}

/// Organization subset sized like the anchor's developer dataset
/// (train + val), drawn from the organization pool and split 90/10.
Dataset build_org_subset(const Dataset& org, const Dataset& anchor, std::uint64_t seed);

/// Generic dataset sized like the organization dataset, drawn from instances
/// of non-organization repositories older than the anchor's first test item.
/// Throws Error(data_error) if the pool shares a repository with `org_repos`.
Dataset build_baseline_plus(const std::vector<CompletionInstance>& generic_pool, const Dataset& org,
                            const Dataset& anchor, const std::vector<std::string>& org_repos, std::uint64_t seed);

/// Caps every repository at `cap` items by seeded uniform sampling.
template <class T>
std::map<std::string, std::vector<T>> cap_per_repo(const std::map<std::string, std::vector<T>>& by_repo,
                                                   std::size_t cap, std::uint64_t seed) {
    std::map<std::string, std::vector<T>> out;
    for (const auto& [repo, items] : by_repo) {
        out[repo] = items.size() <= cap ? items : sample_exact(items, cap, sub_seed(seed, "cap/" + repo));
    }
    return out;
}

/// Temporal-leak and overlap checks for one dataset. `anchor` is the anchor's
/// developer dataset (the dataset itself for the developer role). Returns
/// human-readable violations; empty means clean.
std::vector<std::string> audit_dataset(const Dataset& ds, const Dataset& anchor);

/// Writes manifest.json plus train/val/test.jsonl into `dir` and returns the
/// sha256 of each written file keyed by file name.
std::map<std::string, std::string> write_dataset(const Dataset& ds, const std::filesystem::path& dir,
                                                 const std::string& config_hash);

Dataset read_dataset(const std::filesystem::path& dir);

std::vector<CompletionInstance> read_instances(const std::filesystem::path& jsonl);
void write_instances(const std::vector<CompletionInstance>& instances, const std::filesystem::path& jsonl);

}  // namespace pcc
