/**
 * @file test_cli.cpp
 * @brief End-to-end runs of the va_engine binary: exit codes and CSV output.
 */
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

using Table = std::vector<std::vector<std::string>>;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("va_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    /// Writes `text` as a config file in the scratch directory and returns its path.
    std::string config(const std::string& text) const {
        const fs::path p = dir_ / "run.yaml";
        std::ofstream(p) << text;
        return p.string();
    }

    /// Runs the binary with `args`, output into the scratch directory; returns the exit code.
    int run(const std::string& args) const {
        const std::string cmd = std::string(VA_ENGINE_PATH) + " " + args + " --out " + dir_.string() + " > " +
                                (dir_ / "log.txt").string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    Table csv(const std::string& name) const {
        std::ifstream in(dir_ / name);
        EXPECT_TRUE(in.good()) << "missing " << name;
        Table rows;
        std::string line;
        while (std::getline(in, line)) {
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string f;
            while (std::getline(ss, f, ',')) fields.push_back(f);
            rows.push_back(fields);
        }
        return rows;
    }

    std::string log() const {
        std::ifstream in(dir_ / "log.txt");
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    /// Value column of the row whose first field is `item`.
    static std::string lookup(const Table& t, const std::string& item, std::size_t column) {
        for (const auto& row : t) {
            if (!row.empty() && row[0] == item && row.size() > column) return row[column];
        }
        return {};
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, CheckOnTheBenchmarkPasses) {
    EXPECT_EQ(run("check"), 0) << log();
    const Table t = csv("check.csv");
    ASSERT_FALSE(t.empty());
    EXPECT_EQ(t[0], (std::vector<std::string>{"item", "passed", "required", "value", "detail"}));
    EXPECT_EQ(lookup(t, "t_star", 3), "0");
    EXPECT_EQ(lookup(t, "clause_i_or_ii", 1), "1");
    EXPECT_NE(log().find("Lambda"), std::string::npos);
}

TEST_F(CliTest, CheckReportsTStarForSteeperPenalty) {
    EXPECT_EQ(run("check --config " + config("penalty.K: 0.022\n")), 0) << log();
    EXPECT_NEAR(std::stod(lookup(csv("check.csv"), "t_star", 3)), 1.5, 0.05);
}

TEST_F(CliTest, FailedAssumptionsExitWithTwo) {
    EXPECT_EQ(run("check --config " + config("penalty.kind: cubic\npenalty.knots: [[0, 0], [10, 0]]\n")), 2) << log();
    EXPECT_EQ(lookup(csv("check.csv"), "clause_i_or_ii", 1), "0");
}

TEST_F(CliTest, ConfigurationErrorsExitWithOne) {
    EXPECT_EQ(run("check --config " + config("penalty.kind: cubic\npenalty.knots: [[0, 0.05], [5, 0.08], [10, 0]]\n")), 1);
    EXPECT_EQ(run("check --config " + config("contract.colour: blue\n")), 1);
    EXPECT_NE(log().find("line 1"), std::string::npos) << log();
    EXPECT_EQ(run("check --config " + (dir_ / "absent.yaml").string()), 1);
    EXPECT_EQ(run("price --sweep penalty.K=0.02:0.01:0.001"), 1);
    EXPECT_EQ(run("boundary --n -3"), 1);
    EXPECT_EQ(run(""), 1);
}

TEST_F(CliTest, BoundaryEndsAtTheGuarantee) {
    EXPECT_EQ(run("boundary --n 50 --plot"), 0) << log();
    const Table t = csv("boundary.csv");
    ASSERT_EQ(t.size(), 52u);
    EXPECT_EQ(t[0], (std::vector<std::string>{"t", "b", "beta", "ell", "h"}));
    EXPECT_EQ(t.back()[0], "10");
    EXPECT_EQ(t.back()[1], "1");
    EXPECT_EQ(t.back()[3], "100");
    for (const char* f : {"plot_b.csv", "plot_ell.csv", "plot_beta.csv", "plot_h.csv"}) {
        EXPECT_TRUE(fs::exists(dir_ / f)) << f;
    }
}

TEST_F(CliTest, BoundaryBeforeTStarIsNeverSurrender) {
    EXPECT_EQ(run("boundary --n 50 --config " + config("penalty.K: 0.022\n")), 0) << log();
    const Table t = csv("boundary.csv");
    EXPECT_EQ(t[1][1], "0");
    EXPECT_EQ(t[1][3], "inf");
}

TEST_F(CliTest, SolverBudgetExhaustionExitsWithThree) {
    EXPECT_EQ(run("boundary --n 30 --config " + config("solver.max_sweeps: 1\n")), 3) << log();
    EXPECT_TRUE(fs::exists(dir_ / "boundary_last_iterate.csv"));
    const Table diag = csv("boundary_diagnostics.csv");
    ASSERT_EQ(diag.size(), 2u);
    EXPECT_EQ(diag[0], (std::vector<std::string>{"sweep", "sup_change"}));
}

TEST_F(CliTest, BoundarySweepWritesOneFilePerValue) {
    EXPECT_EQ(run("boundary --n 30 --sweep penalty.K=0.014:0.018:0.002"), 0) << log();
    for (const char* f : {"boundary_penalty_K_0.014.csv", "boundary_penalty_K_0.016.csv",
                          "boundary_penalty_K_0.018.csv", "boundary_sweep.csv"}) {
        EXPECT_TRUE(fs::exists(dir_ / f)) << f;
    }
}

TEST_F(CliTest, PriceWithoutSurrenderIncentive) {
    EXPECT_EQ(run("price --n 50 --config " + config("penalty.K: 0.025\n")), 0) << log();
    const Table t = csv("price.csv");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0][0], "V0");
    EXPECT_EQ(t[0][2], "V_SO");
    EXPECT_EQ(t[1][2], "0");
    EXPECT_EQ(t[1][0], t[1][1]);
}

TEST_F(CliTest, PriceSweepAndVerification) {
    const std::string cfg = config("mc.n_paths: 4000\nmc.n_steps: 50\ndp.n_time: 100\ndp.n_space: 200\n");
    EXPECT_EQ(run("price --n 50 --verify --config " + cfg + " --sweep penalty.K=0.014:0.016:0.002"), 0) << log();
    const Table t = csv("price.csv");
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].front(), "penalty.K");
    EXPECT_EQ(t[0].back(), "dp_w01");
    EXPECT_EQ(t[1][0], "0.014");
    EXPECT_GT(std::stod(t[1][3]), std::stod(t[2][3]));  // V_SO falls as the penalty rises
}

TEST_F(CliTest, FairFeeAndCalibrationFailure) {
    EXPECT_EQ(run("fair-fee --n 30"), 0) << log();
    const Table t = csv("fair_fee.csv");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0][0], "fee");
    const double fee = std::stod(t[1][0]);
    EXPECT_GT(fee, 0.001);
    EXPECT_LT(fee, 0.10);
    EXPECT_EQ(run("fair-fee --n 30 --config " + config("contract.g: 0.08\n")), 5) << log();
}
