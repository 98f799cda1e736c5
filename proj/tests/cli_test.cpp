#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "snl/cli.hpp"
#include "snl/graph.hpp"
#include "snl/io.hpp"

namespace snl {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("snl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    cloud_ = (dir_ / "cloud.csv").string();
    io::write_csv_matrix(cloud_, sample_sphere(12, 4).points);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string cloud_;
};

std::string read_file(const std::string& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST_F(Cli, UnknownFlagIsAUsageError) {
  const Outcome o = invoke({"spectrum", "--bogus"});
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(io::json::parse(o.err).at("error"), "usage");
}

TEST_F(Cli, MissingSubcommandIsAUsageError) { EXPECT_EQ(invoke({}).code, 1); }

TEST_F(Cli, GraphBuildThenSpectrumTop) {
  const std::string op = path("op.json");
  ASSERT_EQ(invoke({"graph", "build", "--input", cloud_, "--rule", "knn", "--k", "4", "--out", op}).code, 0);
  const io::json j = io::read_json(op);
  EXPECT_EQ(j.at("rule"), "knn");
  EXPECT_TRUE(j.contains("provenance"));
  const Outcome o = invoke({"spectrum", "--operator", op, "--top", "5"});
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream lines(o.out);
  std::vector<double> vals;
  for (std::string line; std::getline(lines, line);) vals.push_back(std::stod(line));
  ASSERT_EQ(vals.size(), 5u);
  for (std::size_t i = 1; i < vals.size(); ++i) EXPECT_GE(vals[i - 1], vals[i]);
  EXPECT_NEAR(vals[0], 2.5, 1e-10);
}

TEST_F(Cli, PipedGraphEqualsOneShotSpectrum) {
  const Outcome built = invoke({"graph", "build", "--input", cloud_, "--eps", "0.8"});
  ASSERT_EQ(built.code, 0) << built.err;
  const Outcome piped = invoke({"spectrum", "--operator", "-"}, built.out);
  const Outcome direct = invoke({"spectrum", "--input", cloud_, "--eps", "0.8"});
  ASSERT_EQ(piped.code, 0) << piped.err;
  ASSERT_EQ(direct.code, 0) << direct.err;
  EXPECT_EQ(piped.out, direct.out);
}

TEST_F(Cli, SpectrumNeedsExactlyOneSource) {
  EXPECT_EQ(invoke({"spectrum"}).code, 1);
  const Outcome o = invoke({"spectrum", "--operator", path("missing.json")});
  EXPECT_EQ(o.code, 1);
  EXPECT_FALSE(o.err.empty());
}

TEST_F(Cli, KernelRuleNeedsPositiveEps) {
  EXPECT_EQ(invoke({"graph", "build", "--input", cloud_}).code, 1);
}

TEST_F(Cli, AmbientTrainWritesTrajectoryWithProvenance) {
  const std::string op = path("op.json");
  ASSERT_EQ(invoke({"graph", "build", "--input", cloud_, "--rule", "knn", "--k", "4", "--out", op}).code, 0);
  const std::string traj = path("traj.csv");
  const Outcome o = invoke({"ambient-train", "--operator", op, "--r", "2", "--init", "optimal",
                            "--perturb", "0.01", "--lr", "0.05", "--iters", "200", "--seed", "9",
                            "--out", traj});
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string csv = read_file(traj);
  EXPECT_EQ(csv.rfind("# seed=9,", 0), 0u);
  EXPECT_NE(csv.find("iter,loss,grad_norm,dist,labels,step,escape_event"), std::string::npos);
  EXPECT_LT(io::json::parse(o.out).at("dist").get<double>(), 0.01);
}

TEST_F(Cli, ClassifyOptimumAndSaddles) {
  const std::string op = path("op.json");
  ASSERT_EQ(invoke({"graph", "build", "--input", cloud_, "--rule", "knn", "--k", "4", "--out", op}).code, 0);
  const std::string out = path("saddles");
  const Outcome s = invoke({"landscape", "saddles", "--operator", op, "--r", "1", "--subset", "1",
                            "--subset", "3", "--out", out});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(fs::exists(fs::path(out) / "saddle_1.csv"));
  EXPECT_TRUE(fs::exists(fs::path(out) / "saddle_3.csv"));
  EXPECT_TRUE(fs::exists(fs::path(out) / "index.json"));

  const Outcome c = invoke({"landscape", "classify", "--factor", (fs::path(out) / "saddle_1.csv").string(),
                            "--operator", op, "--json"});
  ASSERT_EQ(c.code, 0) << c.err;
  const io::json j = io::json::parse(c.out);
  EXPECT_EQ(j.at("labels")[0], "R1");
  EXPECT_LT(j.at("distance_to_opt").get<double>(), 1e-10);
  EXPECT_EQ(invoke({"landscape", "saddles", "--operator", op, "--r", "1", "--subset", "0"}).code, 1);
}

TEST_F(Cli, ExperimentsRequireSeed) {
  const Outcome o = invoke({"experiment", "fig1", "--out", path("f1")});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("seed"), std::string::npos);
}

TEST_F(Cli, SmallFig1Run) {
  const Outcome o = invoke({"experiment", "fig1", "--seed", "2", "--n", "30", "--k", "5", "--width",
                            "16", "--iters", "50", "--out", path("f1")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(path("f1/fig1_summary.json")));
}

TEST_F(Cli, ConfigFileSuppliesOptions) {
  const std::string op = path("op.json");
  ASSERT_EQ(invoke({"graph", "build", "--input", cloud_, "--rule", "knn", "--k", "4", "--out", op}).code, 0);
  const std::string ini = path("run.ini");
  std::ofstream(ini) << "[ambient-train]\noperator=" << op << "\nr=2\ninit=optimal\niters=5\nout=" << path("t.csv") << "\n";
  const Outcome o = invoke({"ambient-train", "--config", ini});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(path("t.csv")));
}

TEST_F(Cli, VersionFlag) {
  const Outcome o = invoke({"--version"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find(SNL_VERSION), std::string::npos);
}

}  // namespace
}  // namespace snl
