#include "pcc/dataset.hpp"
#include "pcc/error.hpp"
#include "pcc/pipeline.hpp"

#include "corpus.hpp"
#include "support/temp_dir.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <memory>
#include <sstream>

using namespace pcc;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_config() {
    return {{"seed", 1}, {"repos", {{{"id", "r"}, {"path", "repos/r"}}}}};
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::data_error;
}

void write_predictions(const fs::path& path, const std::string& model, const std::vector<CompletionInstance>& test,
                       bool copy_target) {
    std::ofstream out(path);
    for (const auto& inst : test) {
        nlohmann::json row{{"id", inst.instance_id}, {"model", model}, {"text", copy_target ? inst.target : "x"}};
        out << row.dump() << '\n';
    }
}

// One fixture corpus and one pipeline run shared by the whole suite.
class PipelineFixture : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        tmp_ = std::make_unique<pcc::testing::TempDir>();
        fixtures::build_fixture_corpus(tmp_->path() / "corpus");
        config_ = std::make_unique<RunConfig>(load_config(tmp_->path() / "corpus" / "config.json"));
        std::ostringstream log;
        cmd_run(*config_, out(), log);
    }
    static void TearDownTestSuite() {
        config_.reset();
        tmp_.reset();
    }

    static fs::path out() { return tmp_->path() / "out"; }
    static fs::path dataset_dir(const std::string& role) {
        std::ifstream in(out() / "assemble" / "index.json");
        auto index = nlohmann::json::parse(in);
        for (const auto& m : index.at("manifests")) {
            if (m.at("role") == role) return out() / m.at("dir").get<std::string>();
        }
        return {};
    }

    static std::unique_ptr<pcc::testing::TempDir> tmp_;
    static std::unique_ptr<RunConfig> config_;
};

std::unique_ptr<pcc::testing::TempDir> PipelineFixture::tmp_;
std::unique_ptr<RunConfig> PipelineFixture::config_;

}  // namespace

TEST(RunConfigParsing, DefaultsAndResolution) {
    auto c = parse_config(minimal_config(), "/base");
    EXPECT_EQ(c.seed, 1u);
    EXPECT_EQ(c.repos.at(0).path, fs::path("/base/repos/r"));
    EXPECT_EQ(c.repos.at(0).branch, "main");
    EXPECT_EQ(c.caps.test_size, 500u);
    EXPECT_EQ(c.caps.min_train, 1000u);
    EXPECT_EQ(c.caps.top_developers, 100u);
    EXPECT_EQ(c.caps.methods_per_repo, 1500u);
    EXPECT_EQ(c.crystal_bleu.k, 500u);
}

TEST(RunConfigParsing, RejectsBadConfigs) {
    auto no_seed = minimal_config();
    no_seed.erase("seed");
    EXPECT_EQ(code_of([&] { parse_config(no_seed, "."); }), ErrorCode::config_error);

    auto dup = minimal_config();
    dup["repos"].push_back({{"id", "r"}, {"path", "other"}});
    EXPECT_EQ(code_of([&] { parse_config(dup, "."); }), ErrorCode::config_error);

    auto zero_cap = minimal_config();
    zero_cap["caps"] = {{"test_size", 0}};
    EXPECT_EQ(code_of([&] { parse_config(zero_cap, "."); }), ErrorCode::config_error);

    auto overlap = minimal_config();
    overlap["generic_repos"] = {{{"id", "r"}, {"path", "x"}}};
    EXPECT_EQ(code_of([&] { parse_config(overlap, "."); }), ErrorCode::config_error);

    EXPECT_EQ(code_of([] { load_config("/nonexistent/config.json"); }), ErrorCode::config_error);
}

TEST(RunConfigParsing, HashIgnoresOutputDirButNotSeed) {
    auto j = minimal_config();
    auto a = parse_config(j, ".");
    j["output_dir"] = "elsewhere";
    auto b = parse_config(j, ".");
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(PathSlug, SafeNames) {
    EXPECT_EQ(path_slug("dev-AB12"), "dev-ab12");
    EXPECT_EQ(path_slug("Jane Doe/x"), "jane_doe_x");
    EXPECT_EQ(path_slug(".."), "_..");
}

TEST_F(PipelineFixture, ProducesVerifiedDatasetsForEveryRole) {
    EXPECT_TRUE(cmd_verify(out()).empty());
    for (const char* role : {"developer", "organization", "org-subset", "baseline-plus"}) {
        EXPECT_FALSE(dataset_dir(role).empty()) << role;
    }
    auto dev = read_dataset(dataset_dir("developer"));
    EXPECT_EQ(dev.test.size(), 20u);
    EXPECT_GE(dev.train.size(), 40u);
    std::ifstream in(out() / "mine" / "report.json");
    auto report = nlohmann::json::parse(in);
    EXPECT_EQ(report.at("funnel").at("commits_total").get<int>() - report.at("funnel").at("commits_after_bot_filter").get<int>(), 1);
    EXPECT_EQ(report.at("funnel").at("undecodable_files"), 1);
    EXPECT_LT(report.at("funnel").at("commits_after_outlier_filter"), report.at("funnel").at("commits_after_bot_filter"));
    EXPECT_EQ(report.at("generic").at("methods_after_cap"), 120);
}

TEST_F(PipelineFixture, ByteIdenticalAcrossRunsAndSkipsWhenCurrent) {
    pcc::testing::TempDir other;
    std::ostringstream log;
    cmd_run(*config_, other.path(), log);
    EXPECT_EQ(fixtures::snapshot_tree(out()), fixtures::snapshot_tree(other.path()));

    auto again = cmd_run(*config_, other.path(), log);
    ASSERT_EQ(again.size(), 3u);
    for (const auto& o : again) EXPECT_EQ(o.status, StageStatus::skipped) << o.stage;
}

TEST_F(PipelineFixture, RefusesStagesFromAnotherConfig) {
    pcc::testing::TempDir other;
    std::ostringstream log;
    EXPECT_EQ(code_of([&] { cmd_assemble(*config_, other.path(), log); }), ErrorCode::missing_stage);
    fs::copy(out() / "mine", other.path() / "mine", fs::copy_options::recursive);
    auto changed = *config_;
    changed.seed += 1;
    EXPECT_EQ(code_of([&] { cmd_assemble(changed, other.path(), log); }), ErrorCode::config_hash_mismatch);
}

TEST_F(PipelineFixture, VerifyDetectsTampering) {
    pcc::testing::TempDir copy;
    fs::copy(out(), copy.path(), fs::copy_options::recursive);
    auto rel = fs::relative(dataset_dir("organization"), out());
    auto dev = read_dataset(dataset_dir("developer"));
    // Leak one anchor test instance into the organization training split.
    {
        std::ofstream train(copy.path() / rel / "train.jsonl", std::ios::app);
        train << nlohmann::json(dev.test.front()).dump() << '\n';
    }
    auto violations = cmd_verify(copy.path());
    EXPECT_FALSE(violations.empty());
}

TEST_F(PipelineFixture, ScoreAndCompare) {
    pcc::testing::TempDir tmp;
    auto dev = read_dataset(dataset_dir("developer"));
    write_predictions(tmp / "oracle.jsonl", "oracle", dev.test, true);
    write_predictions(tmp / "junk.jsonl", "junk", dev.test, false);
    write_predictions(tmp / "oracle2.jsonl", "oracle2", dev.test, true);
    ScoreInputs in{dataset_dir("developer"), {tmp / "oracle.jsonl", tmp / "junk.jsonl", tmp / "oracle2.jsonl"}, {}, {}};
    auto report = cmd_score(in);
    EXPECT_DOUBLE_EQ(report.at("models").at("oracle").at("em_percent").get<double>(), 100.0);
    EXPECT_DOUBLE_EQ(report.at("models").at("junk").at("em_percent").get<double>(), 0.0);

    auto better = cmd_compare({report}, "oracle", "junk");
    EXPECT_TRUE(better.em.effect_infinite);
    EXPECT_TRUE(better.em.significant);
    EXPECT_EQ(better.em.direction, Direction::a);

    auto same = cmd_compare({report}, "oracle", "oracle2");
    EXPECT_DOUBLE_EQ(same.em.effect, 1.0);
    EXPECT_DOUBLE_EQ(same.cb.effect, 0.0);
    EXPECT_DOUBLE_EQ(same.em.p_value, 1.0);
    EXPECT_FALSE(format_comparison(same).empty());
    EXPECT_THROW(cmd_compare({report}, "oracle", "nobody"), Error);
}

TEST_F(PipelineFixture, IneligibleOnlyCorpusYieldsNoManifests) {
    auto strict = *config_;
    strict.source["caps"]["test_size"] = 500;
    strict.caps.test_size = 500;
    pcc::testing::TempDir other;
    std::ostringstream log;
    auto outcomes = cmd_run(strict, other.path(), log);
    ASSERT_EQ(outcomes.size(), 3u);
    EXPECT_EQ(outcomes[1].report.at("manifests"), 0);
    EXPECT_EQ(outcomes[1].report.at("eligible"), 0);
    EXPECT_EQ(outcomes[1].report.at("too_few_instances"), 4);
}

TEST_F(PipelineFixture, InsightOutputs) {
    std::ifstream cost_in(out() / "insight" / "cost.json");
    auto cost = nlohmann::json::parse(cost_in);
    EXPECT_EQ(cost.at("scenarios").at(0).at("weeks"), 4);
    EXPECT_EQ(cost.at("scenarios").at(1).at("weeks"), 24);
    EXPECT_TRUE(fs::exists(out() / "insight" / "cost_curve_best-case.csv"));
    std::ifstream cov_in(out() / "insight" / "coverage.json");
    auto cov = nlohmann::json::parse(cov_in);
    for (const auto& r : cov.at("reports")) {
        for (const char* key : {"signature_coverage", "vocab_coverage", "training_relevance"}) {
            double v = r.at("coverage").at(key);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}
