// pcc: command-line driver for the completion-dataset pipeline.

#include "pcc/error.hpp"
#include "pcc/insight.hpp"
#include "pcc/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;

namespace {

struct StageFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_stage_flags(CLI::App* cmd, StageFlags& flags) {
    cmd->add_option("--config", flags.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "Override the configured seed");
    cmd->add_option("--out", flags.out, "Output directory (default: config output_dir)");
}

pcc::RunConfig resolve(const StageFlags& flags) {
    auto config = pcc::load_config(flags.config);
    if (flags.seed) config.seed = *flags.seed;
    if (!flags.out.empty()) config.output_dir = flags.out;
    return config;
}

void print_outcome(const pcc::StageOutcome& o) {
    std::cout << o.stage << ": " << (o.status == pcc::StageStatus::ran ? "done" : "skipped (up to date)") << '\n';
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pcc::Error(pcc::ErrorCode::data_error, "cannot write " + path.string());
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized code-completion dataset pipeline"};
    app.require_subcommand(1);

    StageFlags mine_flags;
    auto* mine = app.add_subcommand("mine", "Mine repositories into commit, identity and instance stores");
    add_stage_flags(mine, mine_flags);

    StageFlags assemble_flags;
    auto* assemble = app.add_subcommand("assemble", "Build developer, organization, subset and baseline+ datasets");
    add_stage_flags(assemble, assemble_flags);

    StageFlags insight_flags;
    auto* insight = app.add_subcommand("insight", "Coverage reports and cost analysis over assembled datasets");
    add_stage_flags(insight, insight_flags);

    StageFlags run_flags;
    std::optional<std::string> run_stage;
    auto* run = app.add_subcommand("run", "Run mine, assemble and insight, then verify");
    add_stage_flags(run, run_flags);
    run->add_option("--stage", run_stage, "Run only this stage")->check(CLI::IsMember({"mine", "assemble", "insight"}));

    std::string verify_out;
    auto* verify = app.add_subcommand("verify", "Leak audit and invariant checks over an output directory");
    verify->add_option("--out", verify_out, "Output directory")->required()->check(CLI::ExistingDirectory);

    pcc::ScoreInputs score_inputs;
    std::string score_out;
    std::string ngram_corpus;
    auto* score = app.add_subcommand("score", "Score model predictions against a dataset's test split");
    score->add_option("--dataset", score_inputs.dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    score->add_option("--predictions", score_inputs.predictions, "Prediction JSONL files")->required()->check(CLI::ExistingFile);
    score->add_option("--ngram-corpus", ngram_corpus, "Dataset whose train targets define trivial n-grams")
        ->check(CLI::ExistingDirectory);
    score->add_option("--k", score_inputs.options.k, "Number of trivially shared n-grams")->capture_default_str();
    score->add_option("--max-order", score_inputs.options.max_order, "Highest n-gram order")->capture_default_str();
    score->add_option("--out", score_out, "Directory for report.json and scores.csv")->required();

    std::vector<std::string> compare_reports;
    std::string model_a;
    std::string model_b;
    std::string compare_out;
    auto* compare = app.add_subcommand("compare", "Paired statistical comparison of two scored models");
    compare->add_option("--report", compare_reports, "Score report(s) holding both models")->required()->check(CLI::ExistingFile);
    compare->add_option("--model-a", model_a, "First model id")->required();
    compare->add_option("--model-b", model_b, "Second model id")->required();
    compare->add_option("--out", compare_out, "Write the comparison JSON here");

    std::string scenario_file;
    auto* cost = app.add_subcommand("cost", "Breakeven inferences and weeks for cost scenarios");
    cost->add_option("--scenario", scenario_file, "Scenario JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (mine->parsed()) {
            auto c = resolve(mine_flags);
            print_outcome(pcc::cmd_mine(c, c.output_dir, std::cerr));
        } else if (assemble->parsed()) {
            auto c = resolve(assemble_flags);
            print_outcome(pcc::cmd_assemble(c, c.output_dir, std::cerr));
        } else if (insight->parsed()) {
            auto c = resolve(insight_flags);
            print_outcome(pcc::cmd_insight(c, c.output_dir, std::cerr));
        } else if (run->parsed()) {
            auto c = resolve(run_flags);
            for (const auto& o : pcc::cmd_run(c, c.output_dir, std::cerr, run_stage)) print_outcome(o);
            std::cout << "config hash " << pcc::config_hash(c) << '\n';
        } else if (verify->parsed()) {
            auto violations = pcc::cmd_verify(verify_out);
            for (const auto& v : violations) std::cout << "violation: " << v << '\n';
            std::cout << (violations.empty() ? "verify: clean\n" : "verify: " + std::to_string(violations.size()) + " violations\n");
            return violations.empty() ? 0 : 3;
        } else if (score->parsed()) {
            if (!ngram_corpus.empty()) score_inputs.ngram_corpus = ngram_corpus;
            auto report = pcc::cmd_score(score_inputs);
            fs::create_directories(score_out);
            write_file(fs::path(score_out) / "report.json", report.dump(2) + "\n");
            std::map<std::string, pcc::ModelReport> reports;
            for (const auto& [model, rep] : report.at("models").items()) reports[model] = rep.get<pcc::ModelReport>();
            pcc::write_score_rows_csv(reports, fs::path(score_out) / "scores.csv");
            std::cout << "dataset " << report.at("dataset").get<std::string>() << ", "
                      << report.at("test_instances").get<std::size_t>() << " test instances\n";
            std::cout << std::fixed << std::setprecision(2);
            for (const auto& [model, rep] : reports) {
                std::cout << model << ": EM " << rep.em_percent << "%  CrystalBLEU " << 100.0 * rep.mean_crystal_bleu
                          << "%  missing " << rep.missing << '\n';
            }
        } else if (compare->parsed()) {
            std::vector<nlohmann::json> reports;
            for (const auto& path : compare_reports) {
                std::ifstream in(path);
                reports.push_back(nlohmann::json::parse(in));
            }
            auto c = pcc::cmd_compare(reports, model_a, model_b);
            std::cout << pcc::format_comparison(c);
            if (!compare_out.empty()) write_file(compare_out, nlohmann::json(c).dump(2) + "\n");
        } else if (cost->parsed()) {
            std::cout << std::fixed;
            for (const auto& s : pcc::load_cost_scenarios(scenario_file)) {
                double n_star = pcc::breakeven_inferences(s);
                auto weeks = pcc::weeks_to_breakeven(n_star, s);
                std::cout << s.name << ": breakeven " << std::setprecision(0) << n_star << " inferences, "
                          << std::setprecision(2) << weeks.raw << " weeks (" << weeks.whole << " whole) at "
                          << s.developers << " developers x " << std::setprecision(0) << s.weekly_rate << "/week\n";
            }
        }
    } catch (const pcc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pcc::exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
