#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(UAVEC_BIN) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "uavec_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

const std::string kFig1 = std::string("--config ") + UAVEC_CONFIG_DIR + "/fig1.ini";

}  // namespace

TEST(Cli, SimulateFourSchemes) {
  const auto r = run("simulate " + kFig1 + " --runs 100");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[0].rfind("scheme,n,beta,epsilon,n_s,n_f,p_b,mdp,half_width", 0), 0u);
  EXPECT_EQ(ls[1].rfind("fountain,", 0), 0u);
  EXPECT_EQ(ls[2].rfind("replication,", 0), 0u);
  EXPECT_EQ(ls[3].rfind("baseline,", 0), 0u);
  EXPECT_EQ(ls[4].rfind("tdma,", 0), 0u);
  for (std::size_t k = 1; k < ls.size(); ++k) {
    const auto f = fields(ls[k]);
    EXPECT_EQ(f[f.size() - 2], "1");          // seed
    EXPECT_EQ(f.back().size(), 16u);          // config hash
  }
}

TEST(Cli, SameSeedSameBytes) {
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  ASSERT_EQ(run("simulate " + kFig1 + " --runs 200 --seed 42 --out " + a.string()).status, 0);
  ASSERT_EQ(run("simulate " + kFig1 + " --runs 200 --seed 42 --out " + b.string()).status, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
  const auto c = scratch("c.csv");
  ASSERT_EQ(run("simulate " + kFig1 + " --runs 200 --seed 43 --out " + c.string()).status, 0);
  EXPECT_NE(slurp(a), slurp(c));
}

TEST(Cli, MissingBetaIsNamed) {
  const auto path = scratch("nobeta.ini");
  std::ofstream(path) << "[scenario]\nn = 3\nepsilon = 1\nn_s = 10\nn_f = 2\nsf_set = 7\np_b = 0.5\n";
  const auto r = run("simulate --config " + path.string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find("beta"), std::string::npos) << r.out;
}

TEST(Cli, MalformedConfigIsLineAnchored) {
  const auto path = scratch("bad.ini");
  std::ofstream(path) << "[scenario]\nn = 3\nbeta 5\n";
  const auto r = run("analyze --config " + path.string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find("bad.ini:3"), std::string::npos) << r.out;
}

TEST(Cli, AnalyzeRowsAndConstantLossFactor) {
  const auto curves = scratch("curves.csv");
  const auto r = run("analyze --preset fig1 --curves " + curves.string());
  ASSERT_EQ(r.status, 0) << r.out;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 1u + 10 * 4);
  const auto header = fields(ls[0]);
  const auto col = static_cast<std::size_t>(std::find(header.begin(), header.end(), "f_factor") - header.begin());
  ASSERT_LT(col, header.size());
  for (std::size_t k = 2; k < ls.size(); ++k) EXPECT_EQ(fields(ls[k])[col], fields(ls[1])[col]);
  EXPECT_EQ(lines(slurp(curves)).size(), 1u + 10 * 3 * 30);
}

TEST(Cli, AnalyzeZeroRedundancyMatchesAcrossSchemes) {
  const auto r = run("analyze " + kFig1 + " --set scenario.epsilon=0 --scheme fountain,replication");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto ls = lines(r.out);
  const auto header = fields(ls[0]);
  const auto col = static_cast<std::size_t>(std::find(header.begin(), header.end(), "mdp") - header.begin());
  for (std::size_t k = 1; k + 1 < ls.size(); k += 2)
    EXPECT_EQ(fields(ls[k])[col], fields(ls[k + 1])[col]) << ls[k] << "\n" << ls[k + 1];
}

TEST(Cli, SweepHasSideBySideColumns) {
  const auto r = run("sweep --preset fig2 --runs 50 --scheme baseline");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto ls = lines(r.out);
  EXPECT_EQ(ls.size(), 1u + 7 * 2);
  EXPECT_NE(ls[0].find("sim_mdp,sim_half_width,analysis_mdp,abs_diff"), std::string::npos);
  EXPECT_EQ(fields(ls[1])[1], "n_s");
  EXPECT_EQ(fields(ls[1])[3], "epsilon");
}

TEST(Cli, Nmax) {
  const auto r = run("nmax --preset appendix_a");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.rfind("n_max = 9\n", 0), 0u) << r.out;
  const auto a = run("nmax --preset appendix_a --airtime 0.1");
  const auto b = run("nmax --preset appendix_a --airtime 0.1");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("n_max = 19\n", 0), 0u) << a.out;
  EXPECT_NE(run("nmax --preset appendix_a --payload-bytes 10").out, r.out);
}

TEST(Cli, NmaxInfeasible) {
  const auto path = scratch("poor.ini");
  std::ofstream(path) << "[energy]\nbattery_mah = 1\nlifetime_days = 730\nvisits_per_day = 12\n"
                         "compute_s_per_day = 20\ntx_current_ma = 83\ncompute_current_ma = 50\n"
                         "payload_bytes = 50\nsf_set = 7, 8, 9\n";
  const auto r = run("nmax --config " + path.string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find("infeasible"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("simulate").status, 0);
  EXPECT_NE(run("simulate --preset nosuch").status, 0);
  EXPECT_NE(run("simulate " + kFig1 + " --scheme carrier_pigeon").status, 0);
}
