#include "pcc/metrics.hpp"

#include "pcc/error.hpp"
#include "pcc/java_lexer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>

namespace pcc {

bool exact_match(std::string_view prediction, std::string_view target) {
    return token_texts(prediction) == token_texts(target);
}

namespace {

using Counts = std::map<NGram, std::size_t>;

Counts ngram_counts(const Tokens& tokens, std::size_t order) {
    Counts out;
    if (tokens.size() < order) return out;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
        ++out[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + order))];
    }
    return out;
}

void drop_trivial(Counts& counts, const NGramSet& trivial) {
    if (trivial.empty()) return;
    std::erase_if(counts, [&](const auto& kv) { return trivial.count(kv.first) != 0; });
}

std::size_t total(const Counts& c) {
    std::size_t t = 0;
    for (const auto& [g, n] : c) t += n;
    return t;
}

// Geometric-mean BLEU over the orders whose reference side is non-empty.
// Returns nullopt when no order survives.
std::optional<double> bleu_core(const Tokens& candidate, const Tokens& reference, const NGramSet& trivial,
                                std::size_t max_order) {
    double log_sum = 0.0;
    std::size_t used = 0;
    for (std::size_t order = 1; order <= max_order; ++order) {
        auto ref = ngram_counts(reference, order);
        drop_trivial(ref, trivial);
        if (ref.empty()) continue;
        auto cand = ngram_counts(candidate, order);
        drop_trivial(cand, trivial);
        std::size_t matches = 0;
        for (const auto& [g, n] : cand) {
            auto it = ref.find(g);
            if (it != ref.end()) matches += std::min(n, it->second);
        }
        std::size_t cand_total = total(cand);
        double p = matches > 0 ? static_cast<double>(matches) / static_cast<double>(cand_total)
                               : kBleuEpsilon / static_cast<double>(std::max<std::size_t>(cand_total, 1));
        log_sum += std::log(p);
        ++used;
    }
    if (used == 0) return std::nullopt;
    double c = static_cast<double>(candidate.size());
    double r = static_cast<double>(reference.size());
    double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / static_cast<double>(used));
}

}  // namespace

NGramSet trivially_shared_ngrams(const std::vector<Tokens>& corpus, std::size_t k, std::size_t max_order) {
    if (k == 0) return {};
    Counts freq;
    for (const auto& tokens : corpus) {
        for (std::size_t order = 1; order <= max_order; ++order) {
            for (const auto& [g, n] : ngram_counts(tokens, order)) freq[g] += n;
        }
    }
    std::vector<std::pair<NGram, std::size_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    NGramSet out;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.insert(ranked[i].first);
    return out;
}

double bleu(const Tokens& candidate, const Tokens& reference, std::size_t max_order) {
    if (candidate.empty()) return 0.0;
    return bleu_core(candidate, reference, {}, max_order).value_or(0.0);
}

BleuScore crystal_bleu_scored(const Tokens& candidate, const Tokens& reference, const NGramSet& trivial,
                              std::size_t max_order) {
    if (candidate.empty()) return {0.0, false};
    if (auto s = bleu_core(candidate, reference, trivial, max_order)) return {*s, false};
    return {bleu(candidate, reference, max_order), true};
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::data_error, "cannot read predictions " + path.string());
    std::vector<PredictionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            out.push_back({j.at("id").get<std::string>(), j.at("model").get<std::string>(),
                           j.at("text").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::data_error, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void to_json(nlohmann::json& j, const ScoreRow& r) {
    j = nlohmann::json{{"id", r.instance_id}, {"em", r.em},           {"crystal_bleu", r.crystal_bleu},
                       {"bleu", r.bleu},       {"missing", r.missing}, {"degenerate", r.degenerate}};
}

void from_json(const nlohmann::json& j, ScoreRow& r) {
    j.at("id").get_to(r.instance_id);
    j.at("em").get_to(r.em);
    j.at("crystal_bleu").get_to(r.crystal_bleu);
    j.at("bleu").get_to(r.bleu);
    j.at("missing").get_to(r.missing);
    j.at("degenerate").get_to(r.degenerate);
}

void to_json(nlohmann::json& j, const ModelReport& r) {
    j = nlohmann::json{{"model", r.model_id},
                       {"total", r.total},
                       {"em_count", r.em_count},
                       {"em_percent", r.em_percent},
                       {"missing", r.missing},
                       {"degenerate", r.degenerate},
                       {"mean_crystal_bleu", r.mean_crystal_bleu},
                       {"mean_bleu", r.mean_bleu},
                       {"rows", r.rows}};
}

void from_json(const nlohmann::json& j, ModelReport& r) {
    j.at("model").get_to(r.model_id);
    j.at("total").get_to(r.total);
    j.at("em_count").get_to(r.em_count);
    j.at("em_percent").get_to(r.em_percent);
    j.at("missing").get_to(r.missing);
    j.at("degenerate").get_to(r.degenerate);
    j.at("mean_crystal_bleu").get_to(r.mean_crystal_bleu);
    j.at("mean_bleu").get_to(r.mean_bleu);
    j.at("rows").get_to(r.rows);
}

std::map<std::string, ModelReport> corpus_report(const std::vector<CompletionInstance>& test,
                                                 const std::vector<PredictionRecord>& predictions,
                                                 const NGramSet& trivial, const MetricOptions& opts,
                                                 const std::vector<std::string>& models) {
    std::map<std::string, const CompletionInstance*> by_id;
    for (const auto& inst : test) by_id[inst.instance_id] = &inst;

    std::map<std::string, std::map<std::string, const PredictionRecord*>> per_model;
    for (const auto& m : models) per_model[m];
    for (const auto& p : predictions) {
        if (by_id.count(p.instance_id) == 0) {
            throw Error(ErrorCode::dataset_mismatch, "prediction for unknown instance '" + p.instance_id + "'");
        }
        if (!per_model[p.model_id].emplace(p.instance_id, &p).second) {
            throw Error(ErrorCode::dataset_mismatch,
                        "model '" + p.model_id + "' has two predictions for '" + p.instance_id + "'");
        }
    }

    std::map<std::string, ModelReport> out;
    for (const auto& [model, preds] : per_model) {
        ModelReport rep;
        rep.model_id = model;
        rep.total = by_id.size();
        for (const auto& [id, inst] : by_id) {
            ScoreRow row;
            row.instance_id = id;
            auto it = preds.find(id);
            if (it == preds.end()) {
                row.missing = true;
                ++rep.missing;
            } else {
                auto cand = token_texts(it->second->text);
                auto ref = token_texts(inst->target);
                row.em = cand == ref;
                auto cb = crystal_bleu_scored(cand, ref, trivial, opts.max_order);
                row.crystal_bleu = cb.score;
                row.degenerate = cb.degenerate;
                row.bleu = bleu(cand, ref, opts.max_order);
            }
            rep.em_count += row.em ? 1 : 0;
            rep.degenerate += row.degenerate ? 1 : 0;
            rep.mean_crystal_bleu += row.crystal_bleu;
            rep.mean_bleu += row.bleu;
            rep.rows.push_back(std::move(row));
        }
        if (rep.total > 0) {
            auto n = static_cast<double>(rep.total);
            rep.em_percent = 100.0 * static_cast<double>(rep.em_count) / n;
            rep.mean_crystal_bleu /= n;
            rep.mean_bleu /= n;
        }
        out[model] = std::move(rep);
    }
    return out;
}

void write_score_rows_csv(const std::map<std::string, ModelReport>& reports, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::data_error, "cannot write " + path.string());
    out << "model,instance_id,em,crystal_bleu,bleu,missing,degenerate\n";
    out << std::setprecision(17);
    for (const auto& [model, rep] : reports) {
        for (const auto& r : rep.rows) {
            out << model << ',' << r.instance_id << ',' << (r.em ? 1 : 0) << ',' << r.crystal_bleu << ',' << r.bleu
                << ',' << (r.missing ? 1 : 0) << ',' << (r.degenerate ? 1 : 0) << '\n';
        }
    }
}

}  // namespace pcc
