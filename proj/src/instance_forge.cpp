#include "pcc/instance_forge.hpp"

#include "pcc/error.hpp"
#include "pcc/hash.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pcc {

std::string_view to_string(SegmentKind kind) {
    return kind == SegmentKind::isolated_line ? "isolated-line" : "block";
}

SegmentKind segment_kind_from_string(std::string_view text) {
    if (text == "isolated-line") return SegmentKind::isolated_line;
    if (text == "block") return SegmentKind::block;
    throw Error(ErrorCode::data_error, "unknown segment kind '" + std::string(text) + "'");
}

void assign_instance_id(CompletionInstance& inst) {
    inst.instance_id = hash_fields({inst.context, inst.target, inst.repo_id, inst.commit_sha, inst.author_id,
                                    std::to_string(inst.timestamp), inst.file, inst.signature})
                           .substr(0, 32);
}

std::string CompletionInstance::reconstruct() const {
    std::string out = context;
    auto pos = out.find(kFillSentinel);
    if (pos != std::string::npos) out.replace(pos, kFillSentinel.size(), target);
    return out;
}

void to_json(nlohmann::json& j, const CompletionInstance& c) {
    j = nlohmann::json{{"id", c.instance_id},   {"context", c.context},
                       {"target", c.target},     {"n", c.n},
                       {"N", c.N},               {"kind", std::string(to_string(c.kind))},
                       {"repo", c.repo_id},      {"sha", c.commit_sha},
                       {"author", c.author_id},  {"ts", c.timestamp},
                       {"file", c.file},         {"signature", c.signature}};
}

void from_json(const nlohmann::json& j, CompletionInstance& c) {
    j.at("id").get_to(c.instance_id);
    j.at("context").get_to(c.context);
    j.at("target").get_to(c.target);
    j.at("n").get_to(c.n);
    j.at("N").get_to(c.N);
    c.kind = segment_kind_from_string(j.at("kind").get<std::string>());
    j.at("repo").get_to(c.repo_id);
    j.at("sha").get_to(c.commit_sha);
    j.at("author").get_to(c.author_id);
    j.at("ts").get_to(c.timestamp);
    j.at("file").get_to(c.file);
    j.at("signature").get_to(c.signature);
}

void to_json(nlohmann::json& j, const MaskLengthDistribution& d) {
    j = nlohmann::json{{"mean", d.mean}, {"median", d.median}, {"min", d.min}, {"max", d.max}};
}

void from_json(const nlohmann::json& j, MaskLengthDistribution& d) {
    j.at("mean").get_to(d.mean);
    j.at("median").get_to(d.median);
    j.at("min").get_to(d.min);
    j.at("max").get_to(d.max);
    if (d.min > d.max || d.median < static_cast<double>(d.min) || d.median > static_cast<double>(d.max)) {
        throw Error(ErrorCode::config_error, "mask distribution needs min <= median <= max");
    }
}

std::vector<MaskSegment> segment(const std::vector<std::size_t>& lines, const MethodUnit& method) {
    std::vector<std::size_t> sorted = lines;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<MaskSegment> out;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[j - 1] + 1) ++j;

        auto counted = [&](std::size_t line) { return method.tokens_on_line(line) >= 2; };
        if (j - i == 1) {
            out.push_back({{sorted[i]}, counted(sorted[i]) ? 1u : 0u, SegmentKind::isolated_line});
        } else {
            MaskSegment current;
            for (std::size_t k = i; k < j; ++k) {
                bool c = counted(sorted[k]);
                if (c && current.counted_line_count == 3) {
                    out.push_back(std::move(current));
                    current = MaskSegment{};
                }
                current.line_numbers.push_back(sorted[k]);
                if (c) ++current.counted_line_count;
            }
            if (current.counted_line_count > 0) out.push_back(std::move(current));
        }
        i = j;
    }
    return out;
}

namespace {

std::vector<const SourceToken*> segment_tokens(const MaskSegment& seg, const MethodUnit& method) {
    std::vector<const SourceToken*> out;
    for (const auto& t : method.tokens) {
        if (std::binary_search(seg.line_numbers.begin(), seg.line_numbers.end(), t.line)) out.push_back(&t);
    }
    return out;
}

CompletionInstance cut(const MethodUnit& method, const std::vector<const SourceToken*>& toks, std::size_t n,
                       SegmentKind kind, const Provenance& prov) {
    std::size_t big_n = toks.size();
    std::size_t begin = toks[big_n - n]->offset - method.start_offset;
    std::size_t end = toks[big_n - 1]->end() - method.start_offset;

    CompletionInstance inst;
    inst.target = method.text.substr(begin, end - begin);
    inst.context = method.text.substr(0, begin);
    inst.context += kFillSentinel;
    inst.context += method.text.substr(end);
    inst.n = n;
    inst.N = big_n;
    inst.kind = kind;
    inst.repo_id = prov.repo_id;
    inst.commit_sha = prov.commit_sha;
    inst.author_id = prov.author_id;
    inst.timestamp = prov.timestamp;
    inst.file = prov.file;
    inst.signature = method.signature;
    assign_instance_id(inst);
    return inst;
}

}  // namespace

std::optional<CompletionInstance> mask(const MaskSegment& seg, const MethodUnit& method, const Provenance& prov,
                                       std::mt19937_64& rng) {
    if (method.text.find(kFillSentinel) != std::string::npos) return std::nullopt;
    auto toks = segment_tokens(seg, method);
    if (toks.size() <= 3) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(3, std::min<std::size_t>(50, toks.size() - 1));
    return cut(method, toks, pick(rng), seg.kind, prov);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

MaskLengthSampler::MaskLengthSampler(const MaskLengthDistribution& dist) : dist_(dist) {
    if (dist.max <= dist.min) {
        constant_ = true;
        return;
    }
    // floor(Y) has median m - min when Y's median sits inside [m - min, m - min + 1).
    mu_ = std::log(dist.median - static_cast<double>(dist.min) + 0.5);
    double lo = 1e-6;
    double hi = 8.0;
    if (mean_for(lo) >= dist.mean) {
        sigma_ = lo;
    } else if (mean_for(hi) <= dist.mean) {
        sigma_ = hi;
    } else {
        for (int iter = 0; iter < 200; ++iter) {
            double mid = 0.5 * (lo + hi);
            (mean_for(mid) < dist.mean ? lo : hi) = mid;
        }
        sigma_ = 0.5 * (lo + hi);
    }
}

double MaskLengthSampler::mean_for(double sigma) const {
    std::size_t span = dist_.max - dist_.min;
    auto cdf = [&](double y) { return y <= 0.0 ? 0.0 : normal_cdf((std::log(y) - mu_) / sigma); };
    double mean = static_cast<double>(dist_.min);
    for (std::size_t k = 1; k <= span; ++k) {
        // P(floor(Y) >= k), clamped at the top bucket.
        mean += 1.0 - cdf(static_cast<double>(k));
    }
    return mean;
}

double MaskLengthSampler::expected_mean() const {
    return constant_ ? static_cast<double>(dist_.min) : mean_for(sigma_);
}

std::size_t MaskLengthSampler::operator()(std::mt19937_64& rng) const {
    if (constant_) return dist_.min;
    std::lognormal_distribution<double> y(mu_, sigma_);
    double v = std::floor(y(rng));
    double span = static_cast<double>(dist_.max - dist_.min);
    return dist_.min + static_cast<std::size_t>(std::clamp(v, 0.0, span));
}

std::vector<CompletionInstance> generate_generic(const MethodUnit& method, const MaskLengthSampler& sampler,
                                                 const Provenance& prov, std::mt19937_64& rng) {
    std::vector<CompletionInstance> out;
    if (method.text.find(kFillSentinel) != std::string::npos) return out;

    // Candidate spans: every counted body line on its own, plus the greedy
    // blocks over the lines between the braces. One-line methods fall back to
    // their only line.
    std::size_t brace_line = method.tokens[method.tokens.size() - method.body_token_count - 2].line;
    std::vector<std::size_t> body_lines;
    for (std::size_t l = brace_line + 1; l < method.end_line; ++l) body_lines.push_back(l);
    if (body_lines.empty()) body_lines.assign(1, method.start_line);

    using Span = std::vector<const SourceToken*>;
    std::vector<std::pair<SegmentKind, Span>> spans;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    auto add = [&](const MaskSegment& seg) {
        auto toks = segment_tokens(seg, method);
        if (toks.size() <= 3 || !seen.insert({toks.front()->offset, toks.back()->end()}).second) return;
        spans.emplace_back(seg.kind, std::move(toks));
    };
    for (std::size_t l : body_lines) {
        if (method.tokens_on_line(l) >= 2) add({{l}, 1, SegmentKind::isolated_line});
    }
    for (const auto& seg : segment(body_lines, method)) {
        if (seg.line_numbers.size() >= 2) add(seg);
    }

    std::vector<bool> used(spans.size(), false);
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::size_t n = sampler(rng);
        std::vector<std::size_t> fitting;
        std::optional<std::size_t> largest;
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (used[i]) continue;
            if (spans[i].second.size() - 1 >= n) fitting.push_back(i);
            if (!largest || spans[i].second.size() > spans[*largest].second.size()) largest = i;
        }
        if (!largest) break;
        std::size_t chosen =
            fitting.empty() ? *largest
                            : fitting[std::uniform_int_distribution<std::size_t>(0, fitting.size() - 1)(rng)];
        used[chosen] = true;
        const auto& [kind, toks] = spans[chosen];
        n = std::clamp<std::size_t>(n, 3, std::min<std::size_t>(50, toks.size() - 1));
        out.push_back(cut(method, toks, n, kind, prov));
    }
    return out;
}

MlmRecord mlm_pretrain_instances(const MethodUnit& method, std::mt19937_64& rng) {
    MlmRecord rec;
    std::size_t total = method.tokens.size();
    if (total == 0) return rec;
    rec.masked = (15 * total + 99) / 100;

    std::vector<std::size_t> positions(total);
    for (std::size_t i = 0; i < total; ++i) positions[i] = i;
    std::vector<std::size_t> chosen;
    std::sample(positions.begin(), positions.end(), std::back_inserter(chosen), rec.masked, rng);

    std::size_t next = 0;
    for (std::size_t i = 0; i < total; ++i) {
        if (!rec.input.empty()) rec.input += ' ';
        if (next < chosen.size() && chosen[next] == i) {
            auto sentinel = "<extra_id_" + std::to_string(next) + ">";
            rec.input += sentinel;
            if (!rec.target.empty()) rec.target += ' ';
            rec.target += sentinel + " " + method.tokens[i].text;
            ++next;
        } else {
            rec.input += method.tokens[i].text;
        }
    }
    return rec;
}

}  // namespace pcc
