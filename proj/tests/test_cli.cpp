#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("pmc_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const json& j, const std::string& name = "config.json") const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  Outcome run(const std::string& command, const fs::path& config) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(PMC_CLI_PATH) + " " + command + " --config " + config.string() + " --out " +
                            dir_.string() + " 2> " + err.string();
    Outcome r;
    const int status = std::system(cmd.c_str());
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  json report(const std::string& name = "report.json") const { return json::parse(slurp(dir_ / name)); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static json base(const std::string& F, int K, double r = 0.05) {
    return json{{"F", F}, {"K", K}, {"r", r}, {"bracket", {-4.0, 0.0}}, {"outputs", {{"report_path", "report.json"}}}};
  }

  fs::path dir_;
};

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_F(Cli, MomentsBalancedCenter) {
  json c = base("rotating_drop(-1)", 3);
  c["outputs"]["csv_path"] = "grid.csv";
  c["resolution"] = {{"n_profile", 40}};
  ASSERT_EQ(run("moments", write_config(c)).code, 0);
  const json r = report();
  EXPECT_NEAR(r["results"]["s0"].get<double>(), -2.0, 1e-8);
  EXPECT_NEAR(std::abs(r["results"]["dsum"].get<double>()), 8.0 * M_PI, 1e-6);
  EXPECT_EQ(r["exit_code"], 0);
  const auto rows = lines(slurp(dir_ / "grid.csv"));
  ASSERT_EQ(rows.size(), 41u);
  EXPECT_EQ(rows.front(), "s,mu_1,mu_2,mu_3,total");
}

TEST_F(Cli, MomentsNoRoot) {
  const Outcome r = run("moments", write_config(base("1", 3)));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no balanced center in bracket"), std::string::npos) << r.err;
  EXPECT_EQ(report()["error"]["kind"], "NoRoot");
}

TEST_F(Cli, BalanceFeasibleFamily) {
  const json c = base("rotating_drop(1)", 3);
  ASSERT_EQ(run("balance", write_config(c)).code, 0);
  const json r = report();
  EXPECT_EQ(r["config"], c);
  const json& st = r["results"];
  EXPECT_TRUE(st["feasible"].get<bool>());
  EXPECT_TRUE(st["converged"].get<bool>());
  const auto eps = st["eps"].get<std::vector<double>>();
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_NEAR(eps[0] / eps[1], 1.0, 1e-6);
}

TEST_F(Cli, BalanceInfeasibleFamily) {
  const Outcome r = run("balance", write_config(base("rotating_drop(-1)", 3)));
  EXPECT_EQ(r.code, 3);
  const json rep = report();
  EXPECT_EQ(rep["error"]["kind"], "Infeasible");
  ASSERT_TRUE(rep["results"].contains("partial_sums"));
  EXPECT_EQ(rep["results"]["partial_sums"].size(), 2u);
}

TEST_F(Cli, ConfigErrors) {
  json c = base("rotating_drop(1)", 3);
  c["extra"] = 1;
  EXPECT_EQ(run("balance", write_config(c)).code, 1);
  c = base("rotating_drop(1)", 3);
  c.erase("bracket");
  EXPECT_EQ(run("balance", write_config(c)).code, 1);
  c = base("rotating_drop(1)", 3);
  c["F"] = "p0 +* 2";
  EXPECT_EQ(run("moments", write_config(c)).code, 1);
  std::ofstream(dir_ / "bad.json") << "{ not json";
  EXPECT_EQ(run("moments", dir_ / "bad.json").code, 1);
  EXPECT_EQ(run("frobnicate", write_config(base("1", 1))).code, 1);
}

TEST_F(Cli, AssembleSingleSphere) {
  json c = base("rotating_drop(1)", 1, 0.1);
  c["bracket"] = {-1.0, 1.0};
  c["outputs"]["mesh_path"] = "sphere.obj";
  ASSERT_EQ(run("assemble", write_config(c)).code, 0);
  std::ifstream obj(dir_ / "sphere.obj");
  int vertices = 0;
  for (std::string l; std::getline(obj, l);) {
    if (l.rfind("v ", 0) != 0) continue;
    std::istringstream in(l.substr(2));
    double x, y, z;
    in >> x >> y >> z;
    EXPECT_NEAR(std::sqrt(x * x + y * y + z * z), 1.0, 1e-10);
    ++vertices;
  }
  EXPECT_GT(vertices, 100);
  EXPECT_EQ(report()["results"]["euler_characteristic"], 2);
}

TEST_F(Cli, AssembleBalancedChain) {
  json c = base("rotating_drop(1)", 3);
  c["outputs"]["mesh_path"] = "chain.obj";
  c["outputs"]["csv_path"] = "regions.csv";
  ASSERT_EQ(run("assemble", write_config(c)).code, 0);
  const json r = report();
  EXPECT_EQ(r["results"]["euler_characteristic"], 2);

  const auto rows = lines(slurp(dir_ / "regions.csv"));
  ASSERT_GT(rows.size(), 1u);
  EXPECT_EQ(rows.front(), "index,t,x0,rho,region,H,zeta");
  std::vector<std::string> runs;
  std::vector<double> waist(2, INFINITY);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> f;
    std::istringstream in(rows[i]);
    for (std::string x; std::getline(in, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 7u) << rows[i];
    if (runs.empty() || runs.back() != f[4]) runs.push_back(f[4]);
    if (f[4] == "Neck(1)" || f[4] == "Neck(2)") {
      double& w = waist[f[4] == "Neck(1)" ? 0 : 1];
      w = std::min(w, std::stod(f[3]));
    }
  }
  int spheres = 0, necks = 0;
  for (const auto& s : runs) {
    spheres += s.rfind("Sphere", 0) == 0;
    necks += s.rfind("Neck", 0) == 0;
  }
  EXPECT_EQ(spheres, 3);
  EXPECT_EQ(necks, 2);
  const auto eps = r["results"]["balance"]["eps"].get<std::vector<double>>();
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(waist[k] / eps[k], 1.0, 0.02);
}

TEST_F(Cli, ReportsAreDeterministic) {
  json c = base("rotating_drop(1)", 3);
  c["outputs"]["report_path"] = "a.json";
  ASSERT_EQ(run("balance", write_config(c)).code, 0);
  c["outputs"]["report_path"] = "b.json";
  ASSERT_EQ(run("balance", write_config(c)).code, 0);
  json a = report("a.json"), b = report("b.json");
  a.erase("config");
  b.erase("config");
  EXPECT_EQ(a.dump(), b.dump());
}
