#pragma once

#include "spod/greedy.hpp"
#include "spod/shift.hpp"
#include "spod/tracking.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spod {

/// How a frame's shifts are obtained from the snapshots.
struct TrackRecipe {
  std::string block;
  TrackStatistic statistic = TrackStatistic::temporal_difference;
  std::optional<WindowSchedule> windows;
  Index smoothing = 0;
};

struct FrameConfig {
  std::string name;
  std::optional<std::filesystem::path> shift_file;
  std::string shift_column;  ///< defaults to the frame name
  std::optional<TrackRecipe> track;
  bool zero = false;
  std::vector<std::string> mask_blocks;
};

/// Line-oriented configuration:
///
///     # comment
///     [input]
///     snapshots = wave.snap      # relative to the config file
///     scale = false
///     center = false
///
///     [spod]
///     r0 = 1 1
///     tol = 1e-6
///     p_max = n                  # or an integer
///     error_measure = root       # or squared
///     rank_tol = 1e-10
///     warm_start = true
///     threads = 1
///     boundary = periodic        # or constant-extrapolation
///     interp_degree = 3
///
///     [optimizer]
///     memory = 10
///     grad_tol = 1e-6
///     relative_grad_tol = true
///     max_iters = 500
///     c1 = 1e-4
///     c2 = 0.9
///     max_line_search = 40
///
///     [frame right]
///     shift_file = shifts.csv    # column `right` unless shift_column is set
///     mask = velocity
///
///     [frame shock]
///     track = density            # or `zero`
///     statistic = temporal-difference
///     windows = 0:120:0:511, 121:255:400:1023
///     smoothing = 0
///
///     [output]
///     dir = out
///
/// Frames keep the order of their sections.
struct RunConfig {
  std::filesystem::path snapshots;
  bool scale = false;
  bool center = false;

  std::vector<Index> r0;
  double tol = 0.01;
  std::optional<Index> p_max;  ///< nullopt: number of snapshots
  ErrorMeasure measure = ErrorMeasure::root;
  double rank_tol = kDefaultRankTol;
  bool warm_start = true;
  int threads = 1;
  ShiftSpec shift_spec;

  OptimizerOptions optimizer;
  std::vector<FrameConfig> frames;
  std::filesystem::path output_dir = "spod-out";

  void validate() const;
};

/// Relative paths are resolved against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {},
                       std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Writes every setting explicitly with absolute paths; parsing the output
/// yields an identical configuration.
void write_config(const RunConfig& config, std::ostream& out);

/// Shift sequences of every frame: read from shift files, tracked on the
/// snapshots (a `track` value may combine blocks, e.g. `density+velocity`),
/// or zero.
FrameShifts resolve_shifts(const RunConfig& config, const SnapshotSet& snapshots);

/// Mask blocks named per frame turned into row masks.
std::vector<ZeroMask> resolve_masks(const RunConfig& config, const SnapshotSet& snapshots);

GreedyConfig make_greedy_config(const RunConfig& config, const SnapshotSet& snapshots);

WindowSchedule parse_windows(std::string_view text);
std::string format_windows(const WindowSchedule& schedule);

}  // namespace spod
