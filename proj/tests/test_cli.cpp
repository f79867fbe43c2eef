#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <regex>
#include <string>

#include "lpit/bench.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(LPIT_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("lpit_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double parse_re(const std::string& out) {
  std::smatch m;
  if (!std::regex_search(out, m, std::regex("re=([0-9.eE+-]+)"))) return -1.0;
  return std::stod(m[1]);
}

std::size_t parse_iterations(const std::string& out) {
  std::smatch m;
  if (!std::regex_search(out, m, std::regex("iterations=([0-9]+)"))) return 0;
  return std::stoul(m[1]);
}

}  // namespace

TEST(CliSolve, OnTheFlyInstance) {
  const auto r = run("solve --m 64 --n 256 --r 5 --seed 3 --alg it --p 0.7");
  ASSERT_EQ(r.code, 0) << r.out;
  const double re = parse_re(r.out);
  EXPECT_GE(re, 0.0);
  EXPECT_LE(re, 1e-3) << r.out;
  EXPECT_NE(r.out.find("termination=converged"), std::string::npos);
}

TEST(CliSolve, MissingInstanceSource) {
  EXPECT_EQ(run("solve --alg it").code, 1);
  EXPECT_EQ(run("solve --m 64 --n 256 --alg it").code, 1);
}

TEST(CliSolve, BadFlags) {
  EXPECT_EQ(run("solve --m 64 --n 256 --r 5 --seed 3 --bogus").code, 1);
  EXPECT_EQ(run("solve --m 64 --n 256 --r 5 --seed 3 --alg nope").code, 1);
  EXPECT_EQ(run("solve --m 64 --n 256 --r 5 --seed 3 --p 1.5").code, 1);
  EXPECT_EQ(run("").code, 1);
}

TEST(CliSolve, TraceRowsEqualIterations) {
  const auto dir = scratch("trace");
  const auto trace = dir / "t.csv";
  const auto r = run("solve --m 32 --n 96 --r 3 --seed 1 --alg half --trace " + trace.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string csv = lpit::read_file(trace);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,h1,step_norm,lambda,support");
  const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
  EXPECT_EQ(rows, parse_iterations(r.out));
  fs::remove_all(dir);
}

TEST(CliSolve, UnreadableInstanceIsIoError) {
  EXPECT_EQ(run("solve /nonexistent/instance.bin").code, 2);
}

TEST(CliGen, RoundTripAndChecksum) {
  const auto dir = scratch("gen");
  const auto file = (dir / "i.bin").string();
  const auto g1 = run("gen --m 4 --n 8 --r 2 --seed 7 --out " + file);
  ASSERT_EQ(g1.code, 0) << g1.out;
  const auto g2 = run("gen --m 4 --n 8 --r 2 --seed 7 --out " + (dir / "j.bin").string());
  std::smatch m1, m2;
  ASSERT_TRUE(std::regex_search(g1.out, m1, std::regex("checksum=(\\S+)")));
  ASSERT_TRUE(std::regex_search(g2.out, m2, std::regex("checksum=(\\S+)")));
  EXPECT_EQ(m1[1].str(), m2[1].str());

  const auto s = run("solve " + file + " --alg it");
  EXPECT_EQ(s.code, 0) << s.out;
  EXPECT_NE(s.out.find("m=4 n=8 r=2"), std::string::npos);

  EXPECT_EQ(run("gen --m 4 --n 8 --r 5 --seed 7 --out " + file).code, 1);
  EXPECT_EQ(run("gen --m 8 --n 8 --r 2 --seed 7 --out " + file).code, 1);
  fs::remove_all(dir);
}

TEST(CliBench, SmokeRunAndReproducible) {
  const auto dir = scratch("bench");
  const std::string flags = "--m 16 --n 32 --r 1,2 --trials 2 --no-wall-time --seed 9";
  const auto t0 = std::chrono::steady_clock::now();
  const auto r1 = run("bench " + flags + " --jobs 1 --out " + (dir / "a").string());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_EQ(r1.code, 0) << r1.out;
  EXPECT_LT(secs, 5.0);
  for (const char* f : {"trials.csv", "aggregate.csv", "metadata.json"}) EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  EXPECT_NE(r1.out.find("success"), std::string::npos);

  const auto r2 = run("bench " + flags + " --jobs 3 --out " + (dir / "b").string());
  ASSERT_EQ(r2.code, 0) << r2.out;
  EXPECT_EQ(lpit::read_file(dir / "a" / "trials.csv"), lpit::read_file(dir / "b" / "trials.csv"));
  fs::remove_all(dir);
}

TEST(CliBench, ConfigFileAndErrors) {
  const auto dir = scratch("benchcfg");
  lpit::write_file(dir / "sweep.cfg", "m = 16\nn = 32\nr = 1\ntrials = 2\nalgorithms = it,soft\n");
  const auto ok = run("bench --config " + (dir / "sweep.cfg").string() + " --out " + (dir / "o").string());
  EXPECT_EQ(ok.code, 0) << ok.out;
  const std::string agg = lpit::read_file(dir / "o" / "aggregate.csv");
  EXPECT_EQ(std::count(agg.begin(), agg.end(), '\n'), 3);

  EXPECT_EQ(run("bench --m 16 --n 32 --r 1").code, 1);                                       // no --out
  EXPECT_EQ(run("bench --m 16 --n 32 --r 16 --out " + (dir / "x").string()).code, 1);       // r = m
  EXPECT_EQ(run("bench --config /nonexistent.cfg --out " + (dir / "x").string()).code, 2);  // unreadable
  lpit::write_file(dir / "bad.cfg", "colour = blue\n");
  const auto bad = run("bench --config " + (dir / "bad.cfg").string() + " --out " + (dir / "x").string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("colour"), std::string::npos);
  fs::remove_all(dir);
}

TEST(CliSweepP, ReportsBestP) {
  const auto dir = scratch("sweepp");
  const auto r = run("sweep-p --m 16 --n 32 --r 1,2 --p 0.5,0.7 --trials 2 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("best p ="), std::string::npos);
  const auto meta = nlohmann::json::parse(lpit::read_file(dir / "metadata.json"));
  EXPECT_TRUE(meta.contains("best_p"));
  EXPECT_EQ(run("sweep-p --m 16 --n 32 --r 1 --p \"\" --out " + dir.string()).code, 1);
  fs::remove_all(dir);
}

TEST(CliHelp, ListsDefaults) {
  const auto top = run("--help");
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"solve", "bench", "sweep-p", "gen"}) EXPECT_NE(top.out.find(sub), std::string::npos) << sub;

  const auto solve = run("solve --help");
  EXPECT_EQ(solve.code, 0);
  for (const char* s : {"--tol", "1e-08", "--eta", "0.01", "--epsilon-scale", "0.7", "--epsilon-floor", "0.001"})
    EXPECT_NE(solve.out.find(s), std::string::npos) << s;

  const auto bench = run("bench --help");
  for (const char* s : {"--trials", "[default: 20]", "--jobs", "--no-wall-time", "--tol", "[default: 1e-8]"})
    EXPECT_NE(bench.out.find(s), std::string::npos) << s;
}
