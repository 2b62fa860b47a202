#include "diph/io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace diph;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string tmp(const std::string& name) { return ::testing::TempDir() + "diph_cli_" + name; }

Invocation cli(const std::string& args) {
  const std::string err_path = tmp("stderr.txt");
  const std::string cmd = std::string(DIPH_CLI_PATH) + " " + args + " 2>" + err_path;
  Invocation r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// Three nodes a, b, c with L = [[1, 0, 0], [0, 1, 0.5], [0, 0.5, 1]].
std::string small_model() {
  ModelFile m;
  m.config.V = Matrix(3, 2);
  m.config.V << 1, 0, 0, 1, 0, 1;
  m.config.beta = 0.5;
  m.config.alpha = Vector::Constant(3, 0.5);
  m.vocab = {"a", "b", "c"};
  const std::string path = tmp("small.model");
  write_model(m, path);
  return path;
}

std::string edge_file() {
  const std::string path = tmp("edges.csv");
  std::ostringstream text;
  for (int r = 0; r < 40; ++r) {
    text << "x,y\n" << "y,z\n" << "z\n" << "x,w\n" << "w,y,z\n" << "x\n";
  }
  write_file(path, text.str());
  return path;
}

}  // namespace

TEST(Cli, ProbeSmallModel) {
  const Invocation r = cli("probe " + small_model() + " --edge a");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["schema_version"], kCsvSchemaVersion);
  EXPECT_EQ(doc["edge"], nlohmann::json::array({"a"}));
  // det(L + I) = 2 * (4 - 0.25) = 7.5 and det(L_{a}) = 1.
  EXPECT_NEAR(doc["prob"].get<double>(), 1.0 / 7.5, 1e-12);
  EXPECT_NEAR(doc["log_prob"].get<double>(), -std::log(7.5), 1e-12);
  EXPECT_NEAR(doc["inclusion"]["a"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(doc["joint_inclusion"].get<double>(), 0.5, 1e-12);
}

TEST(Cli, ProbeJointInclusion) {
  // K restricted to {b, c} is I - (L + I)^{-1} there: [[7, 2], [2, 7]] / 15.
  const Invocation r = cli("probe " + small_model() + " --edge 'c, b'");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["edge"], nlohmann::json::array({"b", "c"}));
  EXPECT_NEAR(doc["joint_inclusion"].get<double>(), 0.2, 1e-12);
  EXPECT_NEAR(doc["prob"].get<double>(), 0.75 / 7.5, 1e-12);
}

TEST(Cli, UnknownLabelIsDataError) {
  const Invocation r = cli("probe " + small_model() + " --edge a,zz");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'zz'"), std::string::npos) << r.err;
}

TEST(Cli, SampleIsDeterministicGivenSeed) {
  const std::string model = small_model();
  const Invocation a = cli("sample " + model + " --n 200 --seed 5");
  const Invocation b = cli("sample " + model + " --n 200 --seed 5");
  const Invocation c = cli("sample " + model + " --n 200 --seed 6");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 200);

  const Invocation k = cli("sample " + model + " --n 50 --size 2 --seed 1");
  ASSERT_EQ(k.code, 0) << k.err;
  std::istringstream lines(k.out);
  std::string line;
  while (std::getline(lines, line)) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 1);
}

TEST(Cli, FitThenUseModel) {
  const std::string edges = edge_file();
  const std::string model = tmp("fit.model");
  const Invocation f = cli("fit " + edges + " --out " + model +
                    " --d 1 --n-inits 2 --batch-size full --seed 3");
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_NE(f.out.find("n_v 4"), std::string::npos);
  EXPECT_NE(f.out.find("n_e 240"), std::string::npos);
  const ModelFile m = read_model(model);
  EXPECT_EQ(m.vocab, (std::vector<std::string>{"x", "y", "z", "w"}));
  const std::string first = slurp(model);
  ASSERT_EQ(cli("fit " + edges + " --out " + model +
                " --d 1 --n-inits 2 --batch-size full --seed 3").code, 0);
  EXPECT_EQ(slurp(model), first);

  const Invocation comp = cli("complete " + model + " --given x --top 2");
  ASSERT_EQ(comp.code, 0) << comp.err;
  EXPECT_EQ(comp.out.rfind("schema_version,rank,node,log_prob\n1,1,", 0), 0u) << comp.out;

  const Invocation cl = cli("cluster " + model + " --k 2");
  ASSERT_EQ(cl.code, 0) << cl.err;
  EXPECT_EQ(std::count(cl.out.begin(), cl.out.end(), '\n'), 5);
  EXPECT_EQ(cli("cluster " + model + " --k 2 --method score --edges " + edges).code, 0);
  EXPECT_EQ(cli("cluster " + model + " --k 2 --method nsc --tau 0.5 --edges " + edges).code, 0);

  const Invocation ev = cli("eval --model-hat " + model + " --model-star " + model);
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto doc = nlohmann::json::parse(ev.out);
  EXPECT_NEAR(doc["relative"]["L"].get<double>(), 0.0, 1e-12);

  const Invocation sel = cli("select-d " + edges + " --d-min 1 --d-max 2 --n-inits 1 --batch-size full");
  ASSERT_EQ(sel.code, 0) << sel.err;
  EXPECT_EQ(sel.out.rfind("schema_version,d,", 0), 0u);
}

TEST(Cli, SimulateWritesReport) {
  const std::string out = tmp("sim.csv");
  const std::string json = tmp("sim.json");
  const Invocation r = cli("simulate sim2 --n-v 12 --dims 2 --n-edges 100,200 --replicates 2 "
                    "--clusters 2 --n-inits 1 --max-iters 100 --out " + out + " --json " + json);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(nlohmann::json::parse(slurp(json))["records"].size(), 4u);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("probe").code, 1);
  EXPECT_EQ(cli("sample " + small_model() + " --n notanumber").code, 1);
  EXPECT_EQ(cli("fit " + edge_file() + " --out " + tmp("x.model") + " --batch-size huge").code, 1);
  EXPECT_EQ(cli("cluster " + small_model() + " --k 2 --method nsc").code, 1);
  EXPECT_EQ(cli("cluster " + small_model() + " --k 2 --edges " + edge_file()).code, 1);
  EXPECT_EQ(cli("cluster " + small_model() + " --k 2 --tau 0.3").code, 1);
  EXPECT_EQ(cli("simulate sim1 --kappa 3 --out " + tmp("s.csv")).code, 1);
  EXPECT_EQ(cli("fit " + edge_file() + " --out " + tmp("x.model") + " --d 0").code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, DataErrors) {
  EXPECT_EQ(cli("probe " + tmp("does-not-exist") + " --edge a").code, 2);
  const std::string text = slurp(small_model());
  const std::string cut = tmp("cut.model");
  write_file(cut, text.substr(0, text.size() / 2));
  const Invocation r = cli("probe " + cut + " --edge a");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("checksum"), std::string::npos) << r.err;
  const std::string bad = tmp("bad.csv");
  write_file(bad, "a,\xFF\n");
  EXPECT_EQ(cli("fit " + bad + " --out " + tmp("y.model")).code, 2);
}

TEST(Cli, NumericalErrors) {
  // Finite parameters whose kernel overflows.
  ModelFile m;
  m.config.V = Matrix(3, 1);
  m.config.V << 1, 1, 1;
  m.config.beta = 1.5e308;
  m.config.alpha = Vector::Constant(3, 1.5e308);
  const std::string path = tmp("huge.model");
  write_model(m, path);
  EXPECT_EQ(cli("probe " + path + " --edge 0").code, 3);
}
