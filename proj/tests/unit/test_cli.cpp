#include "cli.hpp"

#include "spod/io.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

using namespace spod;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "spod");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> report(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.cfg") {
      files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
  }
  return files;
}

class CliTest : public ::testing::Test {
 protected:
  test::TempDir dir{"cli"};
  std::string p(const std::string& name) const { return (dir / name).string(); }

  void generate_small_wave() {
    const auto r = run({"generate", "wave", "--m", "256", "--n", "65", "-o", p("w.snap"), "--shifts-out",
                        p("w.csv"), "--config-out", p("w.cfg")});
    ASSERT_EQ(r.code, 0) << r.err;
  }
};

}  // namespace

TEST_F(CliTest, UsageErrorsExitWithOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"pod"}).code, 1);
  EXPECT_EQ(run({"generate", "tornado", "-o", p("x")}).code, 1);
  EXPECT_EQ(run({"--error-measure", "cubic", "pod", "--snapshots", p("x")}).code, 1);
  EXPECT_EQ(run({"track", "--block", "q"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, DataErrorsExitWithTwo) {
  EXPECT_EQ(run({"pod", "--snapshots", p("missing.snap")}).code, 2);
  std::ofstream(dir / "bad.cfg") << "[input]\nsnapshots = w.snap\n[wrong]\n";
  const auto r = run({"spod", "-c", p("bad.cfg")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  std::ofstream(dir / "junk.snap") << "spod-snapshots 1\nm=4 n=2 h=0.25 boundary=periodic\ndata=float64-le-colmajor\n";
  EXPECT_EQ(run({"pod", "--snapshots", p("junk.snap")}).code, 2);
}

TEST_F(CliTest, UnmetToleranceExitsWithThree) {
  generate_small_wave();
  // Only one frame and no greedy iterations cannot represent both pulses.
  std::ofstream(dir / "one.cfg") << "[input]\nsnapshots = w.snap\n[spod]\nr0 = 1\ntol = 1e-6\np_max = 0\n"
                                    "[frame left]\nshift_file = w.csv\n[output]\ndir = one-out\n";
  const auto r = run({"-q", "spod", "-c", p("one.cfg")});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_EQ(report(r.out)["termination"], "iteration-cap");
  EXPECT_TRUE(fs::exists(dir / "one-out" / "report.txt"));
}

TEST_F(CliTest, WaveRunMeetsTheToleranceWithTwoModes) {
  generate_small_wave();
  const auto r = run({"-q", "spod", "-c", p("w.cfg")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto kv = report(r.out);
  kv.erase("output");
  EXPECT_EQ(kv["termination"], "tolerance-met");
  EXPECT_EQ(kv["total_modes"], "2");
  EXPECT_EQ(kv["greedy_iterations"], "0");
  EXPECT_LT(std::stod(kv["error"]), 1e-6);
  const fs::path out = dir / "w-out";
  EXPECT_EQ(report(slurp(out / "report.txt")), kv);
  EXPECT_TRUE(fs::exists(out / "decomposition" / "decomposition.txt"));

  const auto rec = run({"reconstruct", "--decomposition", (out / "decomposition").string(), "-o", p("rec.snap")});
  ASSERT_EQ(rec.code, 0) << rec.err;
  const auto e = run({"error", "--snapshots", p("w.snap"), "--approx", p("rec.snap")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_LT(std::stod(report(e.out)["squared_ratio"]), 1e-12);
  const auto e2 = run({"error", "--snapshots", p("w.snap"), "--decomposition", (out / "decomposition").string()});
  EXPECT_EQ(report(e2.out)["squared_ratio"], report(e.out)["squared_ratio"]);
  EXPECT_EQ(run({"error", "--snapshots", p("w.snap")}).code, 1);
}

TEST_F(CliTest, ManifestReproducesTheRunByteForByte) {
  generate_small_wave();
  ASSERT_EQ(run({"-q", "spod", "-c", p("w.cfg")}).code, 0);
  const auto first = tree(dir / "w-out");
  ASSERT_EQ(run({"-q", "spod", "-c", (dir / "w-out" / "manifest.cfg").string(), "--out-dir", p("again")}).code, 0);
  const auto second = tree(dir / "again");
  ASSERT_EQ(first.size(), second.size());
  for (const auto& [name, bytes] : first) {
    ASSERT_TRUE(second.count(name)) << name;
    EXPECT_TRUE(second.at(name) == bytes) << name;
  }
}

TEST_F(CliTest, PodNeedsManyModesForTheWave) {
  ASSERT_EQ(run({"generate", "wave", "-o", p("big.snap")}).code, 0);
  const auto r = run({"pod", "--snapshots", p("big.snap"), "--tol", "0.01", "--sv-out", p("sv.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto modes = std::stol(r.out.substr(r.out.find("modes ") + 6));
  EXPECT_GT(modes, 100);
  EXPECT_EQ(slurp(dir / "sv.csv").rfind("modes[count],sigma[data],error_squared[ratio],error_root[ratio]", 0), 0u);
}

TEST_F(CliTest, TrackerFollowsBothWavesWithTwoWindows) {
  ASSERT_EQ(run({"generate", "wave", "-o", p("big.snap"), "--shifts-out", p("truth.csv")}).code, 0);
  auto r = run({"track", "--snapshots", p("big.snap"), "--block", "density+velocity", "--statistic", "peak",
                "--windows", "0:127:500:1023,128:256:0:530", "--boundary", "periodic", "--name", "right", "-o",
                p("right.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"track", "--snapshots", p("big.snap"), "--block", "density-velocity", "--statistic", "peak", "--windows",
           "0:128:0:524,129:256:490:1023", "--boundary", "periodic", "--name", "left", "-o", p("left.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto truth = io::read_shifts_csv(dir / "truth.csv");
  const double h = 1.0 / 1024;
  for (const std::string name : {"left", "right"}) {
    const auto got = io::read_shifts_csv(dir / (name + ".csv"));
    const auto want = truth.d.row(truth.column(name));
    ASSERT_EQ(got.d.cols(), want.cols());
    for (Index j = 0; j < want.cols(); ++j) {
      const double diff = std::fmod(std::abs(got.d(0, j) - want(j)), 1.0);
      EXPECT_LE(std::min(diff, 1.0 - diff), h) << name << ' ' << j;
    }
  }
}

TEST_F(CliTest, TrackFromConfigWritesOneFilePerTrackedFrame) {
  generate_small_wave();
  std::ofstream(dir / "t.cfg") << "[input]\nsnapshots = w.snap\n"
                                  "[frame right]\ntrack = density+velocity\nstatistic = peak\n"
                                  "windows = 0:31:100:255, 32:64:0:160\n"
                                  "[frame rest]\ntrack = zero\n";
  const auto r = run({"track", "--config", p("t.cfg"), "--out-dir", p("tracked")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "tracked" / "right.csv"));
  EXPECT_FALSE(fs::exists(dir / "tracked" / "rest.csv"));
}

TEST_F(CliTest, ExportCurvesListsAllMethods) {
  ASSERT_EQ(run({"generate", "three-signal", "--m", "64", "--n", "33", "-o", p("t.snap"), "--shifts-out", p("t.csv"),
                 "--config-out", p("t.cfg")})
                .code,
            0);
  const auto r = run({"-q", "export-curves", "-c", p("t.cfg"), "--max-modes", "5", "-o", p("curves.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = slurp(dir / "curves.csv");
  EXPECT_EQ(text.rfind("method[name],modes[count],error_squared[ratio],error_root[ratio]", 0), 0u);
  for (const char* m : {"\npod,", "\npod-centered,", "\nspod,"}) EXPECT_NE(text.find(m), std::string::npos) << m;
}

TEST_F(CliTest, GenerateWritesCsvAndRejectsConfigWithoutShifts) {
  ASSERT_EQ(run({"generate", "crossing", "--m", "64", "--n", "17", "-o", p("c.snap"), "--csv", p("c.csv")}).code, 0);
  const auto a = io::read_snapshots(dir / "c.snap");
  const auto b = io::read_snapshots_csv(dir / "c.csv", Boundary::non_periodic);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(run({"generate", "wave", "-o", p("x.snap"), "--config-out", p("x.cfg")}).code, 2);
}
