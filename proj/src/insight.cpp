#include "pcc/insight.hpp"

#include "pcc/error.hpp"
#include "pcc/java_lexer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

namespace pcc {

std::vector<std::string> vocabulary_elements(std::string_view source) {
    std::vector<std::string> out;
    for (auto& tok : significant_tokens(source)) {
        switch (tok.kind) {
            case TokenKind::identifier:
            case TokenKind::string_literal:
            case TokenKind::char_literal:
            case TokenKind::number_literal:
                out.push_back(std::move(tok.text));
                break;
            default:
                break;
        }
    }
    return out;
}

namespace {

// Element -> occurrence count over the reconstructed methods.
std::map<std::string, std::size_t> element_counts(const std::vector<CompletionInstance>& instances) {
    std::map<std::string, std::size_t> out;
    for (const auto& inst : instances) {
        for (auto& e : vocabulary_elements(inst.reconstruct())) ++out[std::move(e)];
    }
    return out;
}

struct Overlap {
    std::size_t shared = 0;
    std::size_t total = 0;

    [[nodiscard]] double ratio() const { return total == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(total); }
};

Overlap overlap(const std::map<std::string, std::size_t>& from, const std::map<std::string, std::size_t>& in,
                bool weighted) {
    Overlap o;
    for (const auto& [e, n] : from) {
        std::size_t w = weighted ? n : 1;
        o.total += w;
        if (in.count(e)) o.shared += w;
    }
    return o;
}

void require_nonempty(const std::vector<CompletionInstance>& xs, ErrorCode code, const char* what) {
    if (xs.empty()) throw Error(code, std::string(what) + " set is empty");
}

}  // namespace

double signature_coverage(const std::vector<CompletionInstance>& test, const std::vector<CompletionInstance>& train) {
    require_nonempty(test, ErrorCode::empty_test_set, "test");
    std::set<std::string> seen;
    for (const auto& t : train) seen.insert(t.signature);
    std::size_t hits = 0;
    for (const auto& t : test) hits += seen.count(t.signature);
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

double vocab_coverage(const std::vector<CompletionInstance>& test, const std::vector<CompletionInstance>& train,
                      const CoverageOptions& opts) {
    require_nonempty(test, ErrorCode::empty_test_set, "test");
    return overlap(element_counts(test), element_counts(train), opts.occurrence_weighted).ratio();
}

double training_relevance(const std::vector<CompletionInstance>& train, const std::vector<CompletionInstance>& test,
                          const CoverageOptions& opts) {
    require_nonempty(train, ErrorCode::empty_train_set, "train");
    return overlap(element_counts(train), element_counts(test), opts.occurrence_weighted).ratio();
}

CoverageReport coverage_report(const std::vector<CompletionInstance>& test,
                               const std::vector<CompletionInstance>& train, const CoverageOptions& opts) {
    require_nonempty(test, ErrorCode::empty_test_set, "test");
    CoverageReport r;
    r.test_instances = test.size();
    r.train_instances = train.size();
    r.signature_coverage = signature_coverage(test, train);
    r.test_signatures_seen =
        static_cast<std::size_t>(std::llround(r.signature_coverage * static_cast<double>(test.size())));
    auto test_elems = element_counts(test);
    auto train_elems = element_counts(train);
    auto forward = overlap(test_elems, train_elems, opts.occurrence_weighted);
    auto backward = overlap(train_elems, test_elems, opts.occurrence_weighted);
    r.vocab_coverage = forward.ratio();
    r.training_relevance = backward.ratio();
    r.test_elements = test_elems.size();
    r.train_elements = train_elems.size();
    r.shared_elements = overlap(test_elems, train_elems, false).shared;
    return r;
}

void to_json(nlohmann::json& j, const CoverageReport& r) {
    j = nlohmann::json{{"signature_coverage", r.signature_coverage},
                       {"vocab_coverage", r.vocab_coverage},
                       {"training_relevance", r.training_relevance},
                       {"test_instances", r.test_instances},
                       {"train_instances", r.train_instances},
                       {"test_signatures_seen", r.test_signatures_seen},
                       {"test_elements", r.test_elements},
                       {"train_elements", r.train_elements},
                       {"shared_elements", r.shared_elements}};
}

void to_json(nlohmann::json& j, const CostScenario& s) {
    j = nlohmann::json{{"name", s.name},
                       {"training_cost", s.training_cost},
                       {"inference_cost_small", s.inference_cost_small},
                       {"inference_cost_large", s.inference_cost_large},
                       {"developers", s.developers},
                       {"weekly_rate", s.weekly_rate}};
}

void from_json(const nlohmann::json& j, CostScenario& s) {
    s.name = j.value("name", std::string{});
    j.at("training_cost").get_to(s.training_cost);
    j.at("inference_cost_small").get_to(s.inference_cost_small);
    j.at("inference_cost_large").get_to(s.inference_cost_large);
    j.at("developers").get_to(s.developers);
    j.at("weekly_rate").get_to(s.weekly_rate);
}

std::vector<CostScenario> load_cost_scenarios(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config_error, "cannot read cost scenario " + path.string());
    try {
        auto j = nlohmann::json::parse(in);
        auto out = j.at("scenarios").get<std::vector<CostScenario>>();
        for (const auto& s : out) {
            if (s.developers == 0 || s.weekly_rate <= 0.0 || s.training_cost < 0.0) {
                throw Error(ErrorCode::config_error, "scenario '" + s.name + "' has non-positive rates");
            }
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
    }
}

double breakeven_inferences(const CostScenario& s) {
    double delta = s.inference_cost_large - s.inference_cost_small;
    if (!(delta > 0.0)) {
        throw Error(ErrorCode::non_positive_delta,
                    "scenario '" + s.name + "': the large model must cost more per inference than the small one");
    }
    return s.training_cost / delta;
}

WeeksToBreakeven weeks_to_breakeven(double n_star, const CostScenario& s) {
    WeeksToBreakeven w;
    w.raw = n_star / (static_cast<double>(s.developers) * s.weekly_rate);
    w.whole = static_cast<long long>(std::ceil(w.raw));
    return w;
}

std::vector<CostPoint> cost_curve(const CostScenario& s, double max_inferences, std::size_t steps) {
    if (steps == 0) steps = 1;
    std::vector<CostPoint> out;
    out.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        double x = max_inferences * static_cast<double>(i) / static_cast<double>(steps);
        out.push_back({x, s.training_cost + s.inference_cost_small * x, s.inference_cost_large * x});
    }
    return out;
}

double curve_crossing(const std::vector<CostPoint>& curve) {
    for (std::size_t i = 0; i < curve.size(); ++i) {
        double d0 = curve[i].cost_small - curve[i].cost_large;
        if (d0 == 0.0) return curve[i].inferences;
        if (i + 1 == curve.size()) break;
        double d1 = curve[i + 1].cost_small - curve[i + 1].cost_large;
        if ((d0 > 0.0) != (d1 > 0.0) && d1 != 0.0) {
            double span = curve[i + 1].inferences - curve[i].inferences;
            return curve[i].inferences + span * d0 / (d0 - d1);
        }
    }
    return -1.0;
}

void write_cost_curve_csv(const std::vector<CostPoint>& curve, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::data_error, "cannot write " + path.string());
    out << "inferences,cost_small,cost_large\n" << std::setprecision(17);
    for (const auto& p : curve) out << p.inferences << ',' << p.cost_small << ',' << p.cost_large << '\n';
}

}  // namespace pcc
