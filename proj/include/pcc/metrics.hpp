#pragma once

#include "pcc/instance_forge.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pcc {

using Tokens = std::vector<std::string>;
using NGram = std::vector<std::string>;
using NGramSet = std::set<NGram>;

/// Token-level equality, ignoring whitespace and comments.
bool exact_match(std::string_view prediction, std::string_view target);

/// The k most frequent n-grams of orders 1..max_order in `corpus`. Ties go
/// to the lexicographically smaller n-gram.
NGramSet trivially_shared_ngrams(const std::vector<Tokens>& corpus, std::size_t k, std::size_t max_order);

inline constexpr double kBleuEpsilon = 1e-9;

struct BleuScore {
    double score = 0.0;
    bool degenerate = false;  // every reference n-gram was excluded; plain BLEU was used
};

/// Sentence BLEU with uniform weights over orders 1..max_order. Orders with no
/// reference n-grams are left out of the geometric mean and a zero precision
/// becomes epsilon / max(candidate n-grams, 1). An empty candidate scores 0.
double bleu(const Tokens& candidate, const Tokens& reference, std::size_t max_order = 4);

/// BLEU after deleting every occurrence of the `trivial` n-grams from the
/// candidate and reference counts. The brevity penalty still uses the raw
/// lengths.
BleuScore crystal_bleu_scored(const Tokens& candidate, const Tokens& reference, const NGramSet& trivial,
                              std::size_t max_order = 4);

inline double crystal_bleu(const Tokens& candidate, const Tokens& reference, const NGramSet& trivial,
                           std::size_t max_order = 4) {
    return crystal_bleu_scored(candidate, reference, trivial, max_order).score;
}

struct PredictionRecord {
    std::string instance_id;
    std::string model_id;
    std::string text;
};

/// Reads JSONL lines of {id, model, text}.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

struct ScoreRow {
    std::string instance_id;
    bool em = false;
    double crystal_bleu = 0.0;
    double bleu = 0.0;
    bool missing = false;
    bool degenerate = false;

    friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

void to_json(nlohmann::json& j, const ScoreRow& r);
void from_json(const nlohmann::json& j, ScoreRow& r);

struct ModelReport {
    std::string model_id;
    std::size_t total = 0;
    std::size_t em_count = 0;
    std::size_t missing = 0;
    std::size_t degenerate = 0;
    double em_percent = 0.0;
    double mean_crystal_bleu = 0.0;
    double mean_bleu = 0.0;
    std::vector<ScoreRow> rows;  // sorted by instance id
};

void to_json(nlohmann::json& j, const ModelReport& r);
void from_json(const nlohmann::json& j, ModelReport& r);

struct MetricOptions {
    std::size_t k = 500;
    std::size_t max_order = 4;
};

/// Scores every model's predictions on `test`. Instances without a
/// prediction count as em = false, crystal_bleu = 0 and are tallied as
/// missing. An unknown instance id or a second prediction for the same
/// (model, instance) throws Error(dataset_mismatch). `models` lists models to
/// report even if they have no predictions at all.
std::map<std::string, ModelReport> corpus_report(const std::vector<CompletionInstance>& test,
                                                 const std::vector<PredictionRecord>& predictions,
                                                 const NGramSet& trivial, const MetricOptions& opts = {},
                                                 const std::vector<std::string>& models = {});

/// Writes one CSV line per (model, instance) score.
void write_score_rows_csv(const std::map<std::string, ModelReport>& reports, const std::filesystem::path& path);

}  // namespace pcc
