#include "spod/config.hpp"
#include "spod/errors.hpp"
#include "spod/io.hpp"
#include "spod/synthgen.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace spod;

namespace {

const char* kFull = R"(# wave run
[input]
snapshots = wave.snap
scale = true
center = false

[spod]
r0 = 2 1
tol = 1e-6
p_max = 7
error_measure = squared
rank_tol = 1e-12
warm_start = false
threads = 2
boundary = constant-extrapolation
interp_degree = 1

[optimizer]
memory = 5
grad_tol = 1e-8
relative_grad_tol = false
max_iters = 80
c1 = 1e-3
c2 = 0.8
max_line_search = 25

[frame left]
shift_file = shifts.csv
shift_column = l
mask = velocity

[frame right]
track = density + velocity   # characteristic
statistic = peak
windows = 0:9:0:99, 10:20:50:99
smoothing = 3

[output]
dir = out
)";

RunConfig parse(const std::string& text, const std::filesystem::path& base = "/base") {
  std::istringstream in(text);
  return parse_config(in, base, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const std::string kMinimal = "[input]\nsnapshots = a.snap\n[frame a]\ntrack = zero\n";

}  // namespace

TEST(Config, ParsesEverySetting) {
  const auto c = parse(kFull);
  EXPECT_EQ(c.snapshots, std::filesystem::path("/base/wave.snap"));
  EXPECT_TRUE(c.scale);
  EXPECT_FALSE(c.center);
  EXPECT_EQ(c.r0, (std::vector<Index>{2, 1}));
  EXPECT_EQ(c.tol, 1e-6);
  EXPECT_EQ(c.p_max, 7);
  EXPECT_EQ(c.measure, ErrorMeasure::squared_ratio);
  EXPECT_EQ(c.rank_tol, 1e-12);
  EXPECT_FALSE(c.warm_start);
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.shift_spec.boundary, ShiftBoundary::constant_extrapolation);
  EXPECT_EQ(c.shift_spec.interp_degree, 1);
  EXPECT_EQ(c.optimizer.memory, 5);
  EXPECT_EQ(c.optimizer.grad_tol, 1e-8);
  EXPECT_FALSE(c.optimizer.relative_grad_tol);
  EXPECT_EQ(c.optimizer.max_iters, 80);
  EXPECT_EQ(c.optimizer.sufficient_decrease, 1e-3);
  EXPECT_EQ(c.optimizer.curvature, 0.8);
  EXPECT_EQ(c.optimizer.max_line_search, 25);
  ASSERT_EQ(c.frames.size(), 2u);
  EXPECT_EQ(c.frames[0].name, "left");
  EXPECT_EQ(*c.frames[0].shift_file, std::filesystem::path("/base/shifts.csv"));
  EXPECT_EQ(c.frames[0].shift_column, "l");
  EXPECT_EQ(c.frames[0].mask_blocks, (std::vector<std::string>{"velocity"}));
  ASSERT_TRUE(c.frames[1].track);
  EXPECT_EQ(c.frames[1].track->block, "density + velocity");
  EXPECT_EQ(c.frames[1].track->statistic, TrackStatistic::peak);
  ASSERT_TRUE(c.frames[1].track->windows);
  EXPECT_EQ(c.frames[1].track->windows->windows.size(), 2u);
  EXPECT_EQ(c.frames[1].track->smoothing, 3);
  EXPECT_EQ(c.output_dir, std::filesystem::path("/base/out"));
}

TEST(Config, DefaultsAndColumnFallback) {
  const auto c = parse(kMinimal + "[frame b]\nshift_file = s.csv\n");
  EXPECT_EQ(c.r0, (std::vector<Index>{1, 1}));
  EXPECT_EQ(c.tol, 0.01);
  EXPECT_FALSE(c.p_max);
  EXPECT_EQ(c.measure, ErrorMeasure::root);
  EXPECT_EQ(c.rank_tol, kDefaultRankTol);
  EXPECT_TRUE(c.frames[0].zero);
  EXPECT_EQ(c.frames[1].shift_column, "b");
  EXPECT_EQ(parse(kMinimal + "[spod]\np_max = n\n").p_max, std::nullopt);
}

TEST(Config, WriteThenParseIsIdentity) {
  const auto c = parse(kFull);
  std::ostringstream first;
  write_config(c, first);
  const auto again = parse(first.str(), "/elsewhere");
  std::ostringstream second;
  write_config(again, second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(again.snapshots, c.snapshots);
  EXPECT_EQ(again.frames[1].track->block, c.frames[1].track->block);
}

TEST(Config, ErrorsCarryLineNumbers) {
  auto msg = error_of("[input]\nsnapshots = a\n[bogus]\n");
  EXPECT_NE(msg.find("test.cfg: line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
  msg = error_of("[input]\nsnapshots = a\ncolour = red\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("colour"), std::string::npos) << msg;
  msg = error_of("snapshots = a\n");
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
  msg = error_of(kMinimal + "[spod]\ntol = fast\n");
  EXPECT_NE(msg.find("line 6"), std::string::npos) << msg;
  msg = error_of(kMinimal + "statistic = peak\n");
  EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
  msg = error_of("[input\n");
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
  msg = error_of(kMinimal + "[frame a]\ntrack = zero\n");
  EXPECT_NE(msg.find("duplicate frame"), std::string::npos) << msg;
}

TEST(Config, ValidationRejectsInconsistentRuns) {
  EXPECT_NE(error_of("[frame a]\ntrack = zero\n").find("snapshots"), std::string::npos);
  EXPECT_NE(error_of("[input]\nsnapshots = a\n").find("frame"), std::string::npos);
  EXPECT_NE(error_of(kMinimal + "[spod]\nr0 = 1 1\n").find("r0"), std::string::npos);
  EXPECT_NE(error_of(kMinimal + "[frame b]\n").find("exactly one"), std::string::npos);
  EXPECT_NE(error_of(kMinimal + "[frame b]\nshift_file = s.csv\ntrack = density\n").find("exactly one"),
            std::string::npos);
  EXPECT_NE(error_of(kMinimal + "[spod]\ntol = 0\n").find("tol"), std::string::npos);
}

TEST(Windows, ParseAndFormat) {
  const auto s = parse_windows(" 0:4:0:10 ,5:9:3:7");
  ASSERT_EQ(s.windows.size(), 2u);
  EXPECT_EQ(s.windows[1].t_begin, 5);
  EXPECT_EQ(s.windows[1].x_end, 7);
  EXPECT_EQ(format_windows(s), "0:4:0:10, 5:9:3:7");
  EXPECT_THROW(parse_windows("0:4:0"), ConfigError);
  EXPECT_THROW(parse_windows(""), ConfigError);
  EXPECT_THROW(parse_windows("0:a:0:1"), ConfigError);
}

TEST(ResolveShifts, ReadsTracksAndZeroes) {
  test::TempDir dir("cfg");
  synth::WaveParams p;
  p.m = 256;
  p.n = 33;
  p.pulse_width = 0.03;
  const auto X = synth::wave_snapshots(p);
  const auto truth = synth::wave_frame_shifts(p, X.time);
  io::ShiftTable table{X.time.t, {"left", "right"}, truth.d};
  io::write_shifts_csv(table, dir / "shifts.csv");
  const auto c = parse("[input]\nsnapshots = w.snap\n[spod]\nr0 = 1 1 0\n"
                       "[frame l]\nshift_file = shifts.csv\nshift_column = left\nmask = velocity\n"
                       "[frame r]\ntrack = density+velocity\nstatistic = peak\n"
                       "windows = 0:15:100:255, 16:32:0:160\n"
                       "[frame s]\ntrack = zero\n",
                       dir.path());
  const auto d = resolve_shifts(c, X);
  ASSERT_EQ(d.frames(), 3);
  EXPECT_EQ(d.d.row(0), truth.d.row(0));
  for (Index j = 0; j < p.n; ++j) {
    const double diff = std::fmod(std::abs(d.d(1, j) - truth.d(1, j)), 1.0);
    EXPECT_LE(std::min(diff, 1.0 - diff), X.grid.h) << j;
  }
  EXPECT_EQ(d.d.row(2).cwiseAbs().maxCoeff(), 0.0);

  const auto masks = resolve_masks(c, X);
  ASSERT_EQ(masks.size(), 3u);
  EXPECT_FALSE(masks[0][0]);
  EXPECT_TRUE(masks[0][static_cast<std::size_t>(p.m)]);
  EXPECT_TRUE(std::none_of(masks[1].begin(), masks[1].end(), [](bool b) { return b; }));

  const auto g = make_greedy_config(c, X);
  EXPECT_EQ(g.p_max, p.n);
  EXPECT_EQ(g.r0, c.r0);
  EXPECT_EQ(g.masks.size(), 3u);
}

TEST(ResolveShifts, RejectsMismatchedShiftFiles) {
  test::TempDir dir("cfg-bad");
  synth::WaveParams p;
  p.m = 64;
  p.n = 9;
  const auto X = synth::wave_snapshots(p);
  io::ShiftTable shorter{{0.0, 1.0}, {"a"}, Eigen::MatrixXd::Zero(1, 2)};
  io::write_shifts_csv(shorter, dir / "short.csv");
  auto times = X.time.t;
  times[3] += 1e-3;
  io::ShiftTable shifted{times, {"a"}, Eigen::MatrixXd::Zero(1, p.n)};
  io::write_shifts_csv(shifted, dir / "shifted.csv");
  EXPECT_THROW(resolve_shifts(parse("[input]\nsnapshots = w\n[frame a]\nshift_file = short.csv\n", dir.path()), X),
               InputError);
  EXPECT_THROW(resolve_shifts(parse("[input]\nsnapshots = w\n[frame a]\nshift_file = shifted.csv\n", dir.path()), X),
               InputError);
  EXPECT_THROW(resolve_shifts(parse("[input]\nsnapshots = w\n[frame b]\nshift_file = shifted.csv\n", dir.path()), X),
               InputError);
  EXPECT_TRUE(resolve_masks(parse(kMinimal), X).empty());
}

TEST(Config, LoadResolvesRelativeToTheFile) {
  test::TempDir dir("cfg-load");
  std::ofstream(dir / "run.cfg") << kMinimal;
  const auto c = load_config(dir / "run.cfg");
  EXPECT_EQ(c.snapshots, dir / "a.snap");
  EXPECT_THROW(load_config(dir / "missing.cfg"), ConfigError);
}
