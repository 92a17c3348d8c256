#pragma once

#include "pcc/java_methods.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace pcc {

inline constexpr std::string_view kFillSentinel = "<FILL_ME>";

enum class SegmentKind { isolated_line, block };

std::string_view to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view text);

struct MaskSegment {
    std::vector<std::size_t> line_numbers;  // ascending
    std::size_t counted_line_count = 0;     // lines with at least two tokens
    SegmentKind kind = SegmentKind::block;

    friend bool operator==(const MaskSegment&, const MaskSegment&) = default;
};

struct Provenance {
    std::string repo_id;
    std::string commit_sha;
    std::string author_id;
    std::int64_t timestamp = 0;
    std::string file;
};

struct CompletionInstance {
    std::string instance_id;
    std::string context;  // method text with one sentinel in place of the target
    std::string target;
    std::size_t n = 0;  // masked tokens
    std::size_t N = 0;  // tokens in the segment
    SegmentKind kind = SegmentKind::block;
    std::string repo_id;
    std::string commit_sha;
    std::string author_id;
    std::int64_t timestamp = 0;
    std::string file;
    std::string signature;

    /// The method text the instance was cut from.
    [[nodiscard]] std::string reconstruct() const;

    friend bool operator==(const CompletionInstance&, const CompletionInstance&) = default;
};

/// Sets instance_id from the content and provenance fields.
void assign_instance_id(CompletionInstance& inst);

void to_json(nlohmann::json& j, const CompletionInstance& c);
void from_json(const nlohmann::json& j, CompletionInstance& c);

struct MaskLengthDistribution {
    double mean = 11.0;
    double median = 8.0;
    std::size_t min = 3;
    std::size_t max = 50;
};

void to_json(nlohmann::json& j, const MaskLengthDistribution& d);
void from_json(const nlohmann::json& j, MaskLengthDistribution& d);

/// Splits the added lines of one method into maskable segments. Runs of
/// contiguous line numbers are cut greedily so that no block holds more than
/// three counted lines; empty and single-token lines ride along uncounted.
/// A run of one line is an isolated line. Runs without any counted line are
/// dropped since there is nothing worth completing in them.
std::vector<MaskSegment> segment(const std::vector<std::size_t>& lines, const MethodUnit& method);

/// Masks the last n tokens of the segment, n uniform in [3, min(50, N-1)].
/// Returns nullopt when N <= 3 or the method text already holds a sentinel.
std::optional<CompletionInstance> mask(const MaskSegment& seg, const MethodUnit& method, const Provenance& prov,
                                       std::mt19937_64& rng);

/// Discretized, shifted log-normal sampler for mask lengths:
/// n = clamp(min + floor(Y), min, max) with Y log-normal. The location comes
/// from the target median and the scale is solved so the clamped mean hits
/// the target mean.
class MaskLengthSampler {
public:
    explicit MaskLengthSampler(const MaskLengthDistribution& dist);

    std::size_t operator()(std::mt19937_64& rng) const;

    /// Mean of the clamped discrete distribution.
    [[nodiscard]] double expected_mean() const;
    [[nodiscard]] double mu() const noexcept { return mu_; }
    [[nodiscard]] double sigma() const noexcept { return sigma_; }

private:
    [[nodiscard]] double mean_for(double sigma) const;

    MaskLengthDistribution dist_;
    double mu_ = 0.0;
    double sigma_ = 0.0;
    bool constant_ = false;
};

/// Up to three instances for a method of the generic corpus, each masking the
/// end of a distinct line or block with a length drawn from `sampler`.
std::vector<CompletionInstance> generate_generic(const MethodUnit& method, const MaskLengthSampler& sampler,
                                                 const Provenance& prov, std::mt19937_64& rng);

/// T5-style masked-language-model record.
struct MlmRecord {
    std::string input;   // tokens with masked positions replaced by <extra_id_k>
    std::string target;  // <extra_id_k> followed by the original token, in order
    std::size_t masked = 0;
};

/// Masks ceil(15% of the method's tokens), chosen uniformly.
MlmRecord mlm_pretrain_instances(const MethodUnit& method, std::mt19937_64& rng);

}  // namespace pcc
