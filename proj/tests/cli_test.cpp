#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "qcra/commands.hpp"
#include "test_support.hpp"

namespace qcra {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kSamples = QCRA_SAMPLES_DIR;

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("qcra_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                 "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

    std::string write(const std::string& name, const json& doc) const {
        std::ofstream(file(name)) << doc.dump(2);
        return file(name);
    }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

json sample_doc() { return json::parse(slurp(kSamples + "/two_asset.json")); }

std::string config_errors(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TEST(Config, SampleParsesWithDefaults) {
    const AnalysisConfig cfg = load_config(kSamples + "/two_asset.json");
    EXPECT_EQ(cfg.num_factors, 2);
    EXPECT_EQ(cfg.assets.size(), 2u);
    EXPECT_EQ(cfg.assets[1].lgd, 2000.5);
    EXPECT_EQ(*cfg.epsilon, 0.002);
    EXPECT_EQ(cfg.seed, 7u);
    EXPECT_EQ(cfg.max_rounds, 64);
    EXPECT_EQ(cfg.mc_paths, 1'000'000u);

    json doc = sample_doc();
    doc.erase("analysis");
    doc["analysis"] = {{"alpha", 0.9}};
    const AnalysisConfig d = parse_config(doc);
    EXPECT_EQ(d.bound_sigmas, 3.0);
    EXPECT_EQ(d.shots_per_round, 100u);
    EXPECT_EQ(d.estimator, EstimatorKind::Iqae);
    EXPECT_EQ(d.variant, ModelVariant::MultiRotation);
    EXPECT_EQ(d.encoding, Encoding::Linear);
    EXPECT_EQ(d.mode, ObjectiveMode::SFree);
}

TEST(Config, EchoRoundTrips) {
    const AnalysisConfig cfg = load_config(kSamples + "/two_asset.json");
    const AnalysisConfig again = parse_config(json::parse(cfg.to_json().dump()));
    EXPECT_EQ(cfg.to_json().dump(), again.to_json().dump());
}

TEST(Config, WeightCountMismatchNamesAsset) {
    json doc = sample_doc();
    doc["assets"][1]["alphas"] = {0.1};
    const std::string err = config_errors(doc);
    EXPECT_NE(err.find("assets[1].alphas"), std::string::npos) << err;
}

TEST(Config, ReportsEveryProblem) {
    json doc = sample_doc();
    doc["assets"][0]["p0"] = 1.5;
    doc["assets"][1]["rho"] = "high";
    doc["analysis"]["colour"] = "blue";
    doc["analysis"]["estimator"] = "guess";
    const std::string err = config_errors(doc);
    EXPECT_NE(err.find("assets[0].p0"), std::string::npos) << err;
    EXPECT_NE(err.find("assets[1].rho"), std::string::npos) << err;
    EXPECT_NE(err.find("analysis.colour"), std::string::npos) << err;
    EXPECT_NE(err.find("analysis.estimator"), std::string::npos) << err;
}

TEST(Config, MissingSectionsRejected) {
    EXPECT_NE(config_errors(json::object()).find("risk_factors"), std::string::npos);
    EXPECT_NE(config_errors(json::array()), "");
    json doc = sample_doc();
    doc["assets"] = json::array();
    EXPECT_NE(config_errors(doc).find("assets"), std::string::npos);
}

TEST(Config, UnreadableFile) {
    EXPECT_THROW(load_config("/nonexistent/qcra.json"), ConfigError);
}

TEST(Commands, AnalyzeExampleWithExactEstimator) {
    TempDir tmp;
    CommandOptions o;
    o.config_path = kSamples + "/two_asset.json";
    o.output_path = tmp.file("report.json");
    o.estimator = "exact";
    o.encoding = "exact";
    std::ostringstream out;
    std::ostringstream err;
    ASSERT_EQ(cmd_analyze(o, out, err), 0) << err.str();
    const json rep = json::parse(slurp(*o.output_path));
    EXPECT_EQ(rep["result"]["var"].get<double>(), 2000.5);
    EXPECT_NEAR(rep["result"]["expected_loss"].get<double>(), testing::kTwoAssetExpectedLoss, 1e-9);
    EXPECT_EQ(rep["config"]["analysis"]["estimator"], "exact");
    EXPECT_EQ(rep["resources"]["width_paper_layout"], 9);
    EXPECT_FALSE(rep["bisection_trace"].empty());
}

TEST(Commands, AnalyzeIsByteIdenticalAcrossRuns) {
    TempDir tmp;
    CommandOptions o;
    o.config_path = kSamples + "/two_asset.json";
    std::ostringstream sink;
    o.output_path = tmp.file("a.json");
    ASSERT_EQ(cmd_analyze(o, sink, sink), 0) << sink.str();
    o.output_path = tmp.file("b.json");
    ASSERT_EQ(cmd_analyze(o, sink, sink), 0) << sink.str();
    EXPECT_EQ(slurp(tmp.file("a.json")), slurp(tmp.file("b.json")));

    o.output_path = tmp.file("c.json");
    o.seed = 8;
    ASSERT_EQ(cmd_analyze(o, sink, sink), 0);
    EXPECT_NE(slurp(tmp.file("a.json")), slurp(tmp.file("c.json")));
}

TEST(Commands, DistributionCsv) {
    CommandOptions o;
    o.config_path = kSamples + "/two_asset.json";
    std::ostringstream out;
    std::ostringstream err;
    ASSERT_EQ(cmd_distribution(o, out, err), 0) << err.str();
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "loss,probability,cdf");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream fields(line);
        std::string cell;
        while (std::getline(fields, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        rows.push_back(row);
    }
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(rows[i][0], testing::kTwoAssetLosses[i]);
        EXPECT_NEAR(rows[i][1], testing::kTwoAssetProbs[i], 1e-11);
        EXPECT_NEAR(rows[i][2], testing::kTwoAssetCdf[i], 1e-11);
    }
    EXPECT_EQ(out.str().find('\r'), std::string::npos);
}

TEST(Commands, ResourcesReport) {
    CommandOptions o;
    o.config_path = kSamples + "/two_asset.json";
    std::ostringstream out;
    std::ostringstream err;
    ASSERT_EQ(cmd_resources(o, out, err), 0) << err.str();
    const json rep = json::parse(out.str());
    EXPECT_EQ(rep["resources"]["width_paper_layout"], 9);
    EXPECT_EQ(rep["resources"]["rotation_count"], 4);
}

TEST(Commands, CompareExampleIsConsistent) {
    TempDir tmp;
    json doc = sample_doc();
    doc["analysis"]["mc_paths"] = 200000;
    CommandOptions o;
    o.config_path = tmp.write("cfg.json", doc);
    o.output_path = tmp.file("compare.json");
    std::ostringstream out;
    std::ostringstream err;
    EXPECT_EQ(cmd_compare(o, out, err), 0) << out.str() << err.str();
    const json rep = json::parse(slurp(*o.output_path));
    EXPECT_TRUE(rep["all_consistent"].get<bool>());
    EXPECT_EQ(rep["rows"].size(), 4u);
}

TEST(Commands, WeightedSumRejectsRealLgd) {
    CommandOptions o;
    o.config_path = kSamples + "/two_asset.json";
    o.mode = "weighted_sum";
    o.estimator = "exact";
    std::ostringstream out;
    std::ostringstream err;
    EXPECT_EQ(cmd_analyze(o, out, err), 1);
    EXPECT_NE(err.str().find("asset 0"), std::string::npos) << err.str();
    EXPECT_NE(err.str().find("integer"), std::string::npos) << err.str();
}

TEST(Commands, LegacySampleRunsInWeightedSumMode) {
    CommandOptions o;
    o.config_path = kSamples + "/integer_legacy.json";
    std::ostringstream out;
    std::ostringstream err;
    ASSERT_EQ(cmd_analyze(o, out, err), 0) << err.str();
    const json rep = json::parse(out.str());
    EXPECT_EQ(rep["result"]["var"].get<double>(), 2.0);
    EXPECT_EQ(rep["resources"]["sum_register_width"], 2);
}

TEST(Commands, SingleRotationNeedsSharedWeights) {
    CommandOptions o;
    o.config_path = kSamples + "/two_asset.json";
    o.variant = "single_rotation";
    std::ostringstream out;
    std::ostringstream err;
    EXPECT_EQ(cmd_analyze(o, out, err), 1);
    EXPECT_NE(err.str().find("assets[1].alphas"), std::string::npos) << err.str();
}

TEST(Commands, UnknownOverrideValue) {
    CommandOptions o;
    o.config_path = kSamples + "/two_asset.json";
    o.encoding = "cubic";
    std::ostringstream out;
    std::ostringstream err;
    EXPECT_EQ(cmd_resources(o, out, err), 1);
    EXPECT_NE(err.str().find("--encoding"), std::string::npos);
}

TEST(Commands, EstimatorFailureKeepsPartialReport) {
    TempDir tmp;
    json doc = sample_doc();
    doc["analysis"]["max_rounds"] = 1;
    CommandOptions o;
    o.config_path = tmp.write("cfg.json", doc);
    std::ostringstream out;
    std::ostringstream err;
    EXPECT_EQ(cmd_analyze(o, out, err), 2);
    const json rep = json::parse(out.str());
    EXPECT_FALSE(rep["result"]["success"].get<bool>());
    EXPECT_FALSE(rep["bisection_trace"].empty());
}

} // namespace
} // namespace qcra
