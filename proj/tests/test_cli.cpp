#include "cli.hpp"

#include "oracles.hpp"

#include "rslq/instances.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rslq;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("rslq_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path problem(const std::string& name, std::size_t paths = 200)
    {
        auto file = instances::find(name).file();
        file.paths = paths;
        const auto path = dir_ / (name + ".yaml");
        save_problem(path, file);
        return path;
    }

    int run(std::vector<std::string> args)
    {
        args.insert(args.begin(), "rslq");
        out_.str("");
        err_.str("");
        return cli::run(args, out_, err_);
    }

    fs::path out(const std::string& sub) const { return dir_ / sub; }

    static std::string read(const fs::path& p)
    {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static std::string body(const fs::path& p)
    {
        std::istringstream in(read(p));
        std::string line, rest;
        while (std::getline(in, line)) {
            if (line.rfind("#", 0) != 0) rest += line + "\n";
        }
        return rest;
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, SolveWritesTablesAndClassification)
{
    ASSERT_EQ(run({"solve", "--problem", problem("scalar_analytic").string(), "--out", out("s").string()}), 0)
        << err_.str();
    const auto cls = read(out("s") / "classification.txt");
    EXPECT_NE(cls.find("strongly_regular"), std::string::npos);
    const auto ric = read(out("s") / "riccati.csv");
    EXPECT_EQ(ric.rfind("# rslq solve", 0), 0u);
    EXPECT_NE(ric.find("t,regime,P_0_0,min_eig_R_hat"), std::string::npos);
    EXPECT_TRUE(fs::exists(out("s") / "affine.csv"));
}

TEST_F(Cli, SolveScalarValuesMatchAnalytic)
{
    ASSERT_EQ(run({"solve", "--problem", problem("scalar_analytic").string(), "--out", out("s").string()}), 0);
    std::istringstream in(body(out("s") / "riccati.csv"));
    std::string line;
    std::getline(in, line);
    double worst = 0.0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string t, regime, p;
        std::getline(fields, t, ',');
        std::getline(fields, regime, ',');
        std::getline(fields, p, ',');
        worst = std::max(worst, std::abs(std::stod(p) - oracle::scalar_riccati(std::stod(t), 1.0)));
        ++rows;
    }
    EXPECT_EQ(rows, 1001u);
    EXPECT_LE(worst, 1e-8);
}

TEST_F(Cli, ZeroProblemHasZeroRiccati)
{
    ASSERT_EQ(run({"solve", "--problem", problem("zero_problem").string(), "--out", out("z").string()}), 0);
    std::istringstream in(body(out("z") / "riccati.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string cell;
        std::getline(fields, cell, ',');
        std::getline(fields, cell, ',');
        std::getline(fields, cell, ',');
        EXPECT_EQ(std::stod(cell), 0.0);
    }
}

TEST_F(Cli, BlowupExitsWithDivergence)
{
    EXPECT_EQ(run({"solve", "--problem", problem("blowup").string(), "--out", out("b").string()}), cli::kDivergence);
    EXPECT_NE(err_.str().find("node"), std::string::npos);
}

TEST_F(Cli, IterateRejectsIndefiniteWeight)
{
    EXPECT_EQ(run({"iterate", "--problem", problem("negative_weight").string(), "--out", out("n").string()}),
              cli::kNotRegular);
}

TEST_F(Cli, IterateWritesTrace)
{
    ASSERT_EQ(run({"iterate", "--problem", problem("standard_two_regime").string(), "--out", out("i").string()}), 0);
    EXPECT_NE(read(out("i") / "iteration.csv").find("iteration"), std::string::npos);
}

TEST_F(Cli, IterateNonConvergence)
{
    EXPECT_EQ(run({"iterate", "--problem", problem("standard_two_regime").string(), "--out", out("i").string(),
                   "--max-iter", "1", "--conv-tol", "1e-15"}),
              cli::kDivergence);
}

TEST_F(Cli, ParseErrorsExitOne)
{
    const auto bad = dir_ / "bad.yaml";
    std::ofstream(bad) << "dimensions: {n: 1, m: 1, regimes: 1}\ngrid: {T: 1, steps: 10}\nregimes: [{Q: [[1, 2]]}]\n";
    EXPECT_EQ(run({"solve", "--problem", bad.string(), "--out", out("x").string()}), cli::kParseError);
    EXPECT_NE(err_.str().find("bad.yaml:3:"), std::string::npos);
    EXPECT_EQ(run({"solve", "--problem", (dir_ / "missing.yaml").string()}), cli::kParseError);
    EXPECT_EQ(run({"solve"}), cli::kParseError);
    EXPECT_EQ(run({"frobnicate"}), cli::kParseError);
}

TEST_F(Cli, StepsOverrideRejectedForPerNodeData)
{
    EXPECT_EQ(run({"solve", "--problem", problem("time_varying").string(), "--out", out("t").string(), "--steps",
                   "50"}),
              cli::kParseError);
    EXPECT_EQ(run({"solve", "--problem", problem("standard_two_regime").string(), "--out", out("t").string(),
                   "--steps", "50"}),
              0);
}

TEST_F(Cli, SimulateDeterministicHasZeroError)
{
    ASSERT_EQ(run({"simulate", "--problem", problem("noise_free").string(), "--out", out("m").string(),
                   "--dump-paths", "2"}),
              0)
        << err_.str();
    std::istringstream in(body(out("m") / "value_mc.csv"));
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header.rfind("mean,std_error,paths,seed", 0), 0u);
    std::istringstream fields(row);
    std::string mean, se;
    std::getline(fields, mean, ',');
    std::getline(fields, se, ',');
    EXPECT_EQ(std::stod(se), 0.0);
    EXPECT_TRUE(fs::exists(out("m") / "paths" / "path_0.csv"));
    EXPECT_TRUE(fs::exists(out("m") / "paths" / "path_1.csv"));
    EXPECT_FALSE(fs::exists(out("m") / "paths" / "path_2.csv"));
}

TEST_F(Cli, VerifyPassesOnRegularProblem)
{
    EXPECT_EQ(run({"verify", "--problem", problem("scalar_analytic").string(), "--out", out("v").string()}), 0)
        << out_.str();
    EXPECT_NE(read(out("v") / "verify.txt").find("all checks passed"), std::string::npos);
}

TEST_F(Cli, VerifyFlagsNonConvexProblem)
{
    EXPECT_EQ(run({"verify", "--problem", problem("negative_weight").string(), "--out", out("v").string()}),
              cli::kVerificationFailure);
    const auto csv = read(out("v") / "verify.csv");
    EXPECT_NE(csv.find("riccati_regular"), std::string::npos);
    EXPECT_NE(csv.find(",fail,"), std::string::npos);
}

TEST_F(Cli, VerifyReproducibleAcrossRunsAndThreads)
{
    const auto p = problem("inhomogeneous_two_regime", 300).string();
    ASSERT_EQ(run({"verify", "--problem", p, "--out", out("a").string(), "--seed", "11", "--threads", "1"}), 0);
    ASSERT_EQ(run({"verify", "--problem", p, "--out", out("b").string(), "--seed", "11", "--threads", "3"}), 0);
    const auto a = body(out("a") / "verify.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, body(out("b") / "verify.csv"));
    ASSERT_EQ(run({"verify", "--problem", p, "--out", out("c").string(), "--seed", "12", "--threads", "1"}), 0);
    EXPECT_NE(a, body(out("c") / "verify.csv"));
}

TEST_F(Cli, MetadataRecordsSettings)
{
    ASSERT_EQ(run({"solve", "--problem", problem("standard_two_regime").string(), "--out", out("s").string(),
                   "--seed", "42"}),
              0);
    const auto text = read(out("s") / "riccati.csv");
    const auto first = text.substr(0, text.find('\n'));
    for (const char* key : {"seed=42", "steps=200", "pinv_tol=", "strong_tol=", "timestamp="}) {
        EXPECT_NE(first.find(key), std::string::npos) << key;
    }
}

TEST_F(Cli, ReportSummarizesDirectory)
{
    const auto p = problem("scalar_analytic", 100).string();
    ASSERT_EQ(run({"solve", "--problem", p, "--out", out("r").string()}), 0);
    ASSERT_EQ(run({"verify", "--problem", p, "--out", out("r").string()}), 0);
    ASSERT_EQ(run({"report", "--out", out("r").string()}), 0);
    EXPECT_NE(out_.str().find("checks passed"), std::string::npos);
    EXPECT_TRUE(fs::exists(out("r") / "summary.txt"));
}
