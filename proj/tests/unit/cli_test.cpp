#include "infobound/cli/commands.hpp"
#include "infobound/cli/config.hpp"
#include "infobound/cli/json_io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace infobound;
using namespace infobound::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("infobound_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write_config(const std::string& name, const json& doc) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << doc.dump();
        return p.string();
    }

    std::string out(const std::string& sub) const { return (dir_ / sub).string(); }
    std::string read(const std::string& sub, const std::string& file) const {
        return oracle::read_file((dir_ / sub / file).string());
    }

    fs::path dir_;
};

json bernoulli_config() {
    return {{"model_id", "bernoulli"}, {"prior", {{"id", "uniform"}}}, {"theta", 0.5}};
}

json small_sweep_config() {
    return {{"model_id", "pulse"},
            {"model_params", {{"d", 16}, {"sigma", 1.0}}},
            {"sweep", {{"eps_out", {0.01, 0.3}}, {"theta", 8.0}}},
            {"barankin", {{"n_max", 2}, {"restarts", 2}}},
            {"mc", {{"trials", 300}, {"seed", 5}, {"estimator", "mle"}}}};
}

}  // namespace

TEST_F(CliTest, FimReportsFourForBernoulliAtHalf) {
    ASSERT_EQ(run({"fim", "--config", write_config("c.json", bernoulli_config()), "--out", out("o")}), kOk);
    const json doc = json::parse(read("o", "fim.json"));
    EXPECT_NEAR(doc.at("fisher")[0][0].get<double>(), 4.0, 1e-12);
    EXPECT_NEAR(doc.at("bayesian")[0][0].get<double>(), 4.0, 1e-9);
    EXPECT_NEAR(doc.at("divergence_metric")[0][0].get<double>(), 4.0, 1e-4);
}

TEST_F(CliTest, UnknownModelIsConfigError) {
    json c = bernoulli_config();
    c["model_id"] = "poisson";
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"fim", "--config", write_config("c.json", c), "--out", out("o")}), kConfigError);
    EXPECT_NE(::testing::internal::GetCapturedStderr().find("unknown model"), std::string::npos);
}

TEST_F(CliTest, MissingModelIsConfigError) {
    json c = bernoulli_config();
    c.erase("model_id");
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"fim", "--config", write_config("c.json", c), "--out", out("o")}), kConfigError);
    EXPECT_NE(::testing::internal::GetCapturedStderr().find("unknown model"), std::string::npos);
}

TEST_F(CliTest, BoundaryThetaIsNumericalError) {
    json c = bernoulli_config();
    c["theta"] = 1.0;
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"fim", "--config", write_config("c.json", c), "--out", out("o")}), kNumericalError);
    EXPECT_NE(::testing::internal::GetCapturedStderr().find("OutOfDomain"), std::string::npos);
}

TEST_F(CliTest, UnknownKeysAreRejected) {
    json c = bernoulli_config();
    c["tolerence"] = 1e-3;
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"fim", "--config", write_config("c.json", c), "--out", out("o")}), kConfigError);
    EXPECT_NE(::testing::internal::GetCapturedStderr().find("tolerence"), std::string::npos);
    json nested = bernoulli_config();
    nested["mc"] = {{"trails", 10}};
    EXPECT_THROW(parse_config(nested), ConfigError);
}

TEST_F(CliTest, BadFlagsAreConfigErrors) {
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"simulate"}), kConfigError);
    EXPECT_EQ(run({"bounds", "--format", "xml"}), kConfigError);
    EXPECT_EQ(run({"fim", "--config", (dir_ / "missing.json").string()}), kConfigError);
    ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, CrlbOverThetaGrid) {
    json c = bernoulli_config();
    c.erase("theta");
    c["theta_grid"] = {{"lower", 0.1}, {"upper", 0.9}, {"step", 0.1}};
    c["bounds"] = {"crlb_unbiased"};
    ASSERT_EQ(run({"bounds", "--config", write_config("c.json", c), "--out", out("o")}), kOk);
    std::istringstream in(read("o", "bounds.csv"));
    const BoundsTable t = read_bounds_csv(in);
    ASSERT_EQ(t.rows.size(), 9u);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double th = 0.1 * static_cast<double>(i + 1);
        ASSERT_TRUE(t.rows[i].theta[0].has_value());
        EXPECT_NEAR(*t.rows[i].theta[0], th, 1e-12);
        EXPECT_EQ(t.rows[i].bound_kind, "crlb_unbiased");
        EXPECT_NEAR(t.rows[i].value, th * (1.0 - th), 1e-9);
    }
}

TEST_F(CliTest, BayesianBoundIsOneRowSet) {
    json c = bernoulli_config();
    c.erase("theta");
    c["theta_grid"] = {0.2, 0.4, 0.6};
    c["bounds"] = {"bayesian_crlb"};
    ASSERT_EQ(run({"bounds", "--config", write_config("c.json", c), "--out", out("o")}), kOk);
    std::istringstream in(read("o", "bounds.csv"));
    const BoundsTable t = read_bounds_csv(in);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_FALSE(t.rows[0].theta[0].has_value());
    EXPECT_NE(read("o", "bounds.csv").find("prior_averaged"), std::string::npos);
}

TEST_F(CliTest, BiasedAndBarankinRows) {
    json c = bernoulli_config();
    c["bounds"] = {"crlb_biased", "barankin"};
    c["bias"] = "shrink:0.5";
    ASSERT_EQ(run({"bounds", "--config", write_config("c.json", c), "--out", out("o"), "--format", "json"}), kOk);
    const json doc = json::parse(read("o", "bounds.json"));
    std::map<std::string, double> by_kind;
    for (const auto& r : doc.at("rows")) by_kind[r.at("bound_kind").get<std::string>()] = r.at("value").get<double>();
    EXPECT_NEAR(by_kind.at("crlb_biased"), 0.125, 1e-9);
    EXPECT_NEAR(by_kind.at("barankin"), 0.25, 1e-6);
}

TEST_F(CliTest, EmptyBoundListIsConfigError) {
    json c = bernoulli_config();
    c["bounds"] = json::array();
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"bounds", "--config", write_config("c.json", c), "--out", out("o")}), kConfigError);
    ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, BoundsCsvRoundTrips) {
    json c = {{"model_id", "categorical"},
              {"model_params", {{"d", 3}}},
              {"prior", {{"id", "uniform"}}},
              {"theta_grid", {{0.2, 0.3}, {1.0 / 3.0, 1.0 / 7.0}}},
              {"bounds", {"crlb_unbiased", "bayesian_crlb"}}};
    ASSERT_EQ(run({"bounds", "--config", write_config("c.json", c), "--out", out("o")}), kOk);
    const std::string text = read("o", "bounds.csv");
    std::istringstream in(text);
    std::ostringstream again;
    write_bounds_csv(again, read_bounds_csv(in));
    EXPECT_EQ(again.str(), text);
    EXPECT_EQ(text.substr(0, text.find('\n')), "theta_1,theta_2,bound_kind,entry_i,entry_j,value");
}

TEST_F(CliTest, JsonNumbersCarrySeventeenDigits) {
    EXPECT_EQ(format_json_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_json_number(2.0), "2");
    EXPECT_EQ(format_json_number(std::numeric_limits<double>::quiet_NaN()), "null");
    EXPECT_EQ(format_csv_number(-std::numeric_limits<double>::infinity()), "-Infinity");
    EXPECT_EQ(format_csv_number(0.1), "0.1");
    EXPECT_EQ(format_csv_number(1.0 / 3.0), "0.333333333333");
    const json back = json::parse(dump_json(json{{"x", 1.0 / 3.0}}));
    EXPECT_EQ(back.at("x").get<double>(), 1.0 / 3.0);
}

TEST_F(CliTest, VerifyDefaultPasses) {
    ASSERT_EQ(run({"verify", "--out", out("o")}), kOk);
    const json doc = json::parse(read("o", "verify.json"));
    EXPECT_TRUE(doc.at("pass").get<bool>());
    EXPECT_GE(doc.at("checks").size(), 8u);
}

TEST_F(CliTest, VerifyNamesCorruptedTable) {
    json c = {{"model_id", "table"},
              {"model_params",
               {{"rows", {{0.9, 0.1}, {0.7, 0.3}, {0.3, 0.6}, {0.3, 0.7}, {0.1, 0.9}}}}},
              {"prior", {{"id", "uniform"}}}};
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"verify", "--config", write_config("c.json", c), "--out", out("o")}), kPropertyFailure);
    EXPECT_NE(::testing::internal::GetCapturedStderr().find("DegeneratePmf"), std::string::npos);
    EXPECT_FALSE(json::parse(read("o", "verify.json")).at("pass").get<bool>());
}

TEST_F(CliTest, VerifyNamesCoarseMetricStep) {
    const json c = {{"numerics", {{"h_fd", 0.1}}}};
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"verify", "--config", write_config("c.json", c), "--out", out("o")}), kPropertyFailure);
    EXPECT_NE(::testing::internal::GetCapturedStderr().find("metric_consistency"), std::string::npos);
}

TEST_F(CliTest, SweepRowsAndThreadIndependence) {
    const std::string cfg = write_config("c.json", small_sweep_config());
    ASSERT_EQ(run({"sweep", "--config", cfg, "--out", out("a"), "--threads", "1"}), kOk);
    ASSERT_EQ(run({"sweep", "--config", cfg, "--out", out("b"), "--threads", "3"}), kOk);
    EXPECT_EQ(read("a", "sweep.csv"), read("b", "sweep.csv"));
    std::istringstream in(read("a", "sweep.csv"));
    const auto rows = read_sweep_csv(in);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
        EXPECT_GE(r.barankin, r.crlb * (1.0 - 1e-9));
        EXPECT_GT(r.mc_ci, 0.0);
    }
}

TEST_F(CliTest, SweepNeedsSeed) {
    json c = small_sweep_config();
    c["mc"].erase("seed");
    ::testing::internal::CaptureStderr();
    EXPECT_EQ(run({"sweep", "--config", write_config("c.json", c), "--out", out("o")}), kConfigError);
    ::testing::internal::GetCapturedStderr();
    EXPECT_EQ(run({"sweep", "--config", write_config("c.json", c), "--out", out("o"), "--seed", "3"}), kOk);
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
    const std::string cfg = write_config("c.json", bernoulli_config());
    ::setenv("INFOBOUND_OUT_DIR", out("env").c_str(), 1);
    const int code = run({"fim", "--config", cfg});
    ::unsetenv("INFOBOUND_OUT_DIR");
    ASSERT_EQ(code, kOk);
    EXPECT_TRUE(fs::exists(dir_ / "env" / "fim.json"));
}

TEST_F(CliTest, BinaryExitCodes) {
    const std::string tool = INFOBOUND_TOOL;
    const auto status = [&](const std::string& args) {
        const int raw = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    json bad = bernoulli_config();
    bad["theta"] = 1.0;
    EXPECT_EQ(status("fim --config " + write_config("ok.json", bernoulli_config()) + " --out " + out("o")), 0);
    EXPECT_EQ(status("fim --config " + write_config("bad.json", bad) + " --out " + out("o")), 3);
    EXPECT_EQ(status("fim --config " + (dir_ / "nope.json").string()), 2);
    EXPECT_EQ(status("--help"), 0);
}
