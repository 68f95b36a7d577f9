#pragma once

#include "spod/shift.hpp"
#include "spod/snapshot.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spod {

/// Restricts the tracked maximum to grid indices [x_begin, x_end] while the
/// tracked column index lies in [t_begin, t_end] (both inclusive).
struct TrackWindow {
  Index t_begin = 0, t_end = 0;
  Index x_begin = 0, x_end = 0;
};

/// Windows ordered in time, non-overlapping, and together covering every
/// tracked column.
struct WindowSchedule {
  std::vector<TrackWindow> windows;

  void validate(Index tracked_columns, Index m) const;
  const TrackWindow& at(Index column) const;
};

enum class TrackStatistic {
  temporal_difference,  ///< argmax of X_{j+1} - X_j
  spatial_gradient,     ///< argmax of |dX_j/dx| (central differences)
  peak,                 ///< argmax of X_j
};

std::string_view to_string(TrackStatistic s);
TrackStatistic parse_track_statistic(std::string_view text);

struct TrackOptions {
  TrackStatistic statistic = TrackStatistic::temporal_difference;
  std::optional<WindowSchedule> windows;
  Index smoothing = 0;  ///< moving-average width in snapshots; 0 or 1 disables
};

/// Front positions x_front(j), j = 0..n-1, in space units. For the temporal
/// difference the n-1 difference columns are tracked and the last value is
/// repeated. Ties pick the smallest grid index.
std::vector<double> track_front(const Eigen::MatrixXd& block, const Grid1D& grid,
                                 const TrackOptions& options = {});

/// d_j = x_front(j) - L/2, so T(-d_j) with constant extrapolation moves the
/// front to the middle of the domain.
std::vector<double> center_shifts(const std::vector<double>& positions, const Grid1D& grid);

/// Shifts that move a mode centred at L/2 onto the tracked front under the
/// given operator: center_shifts() for constant extrapolation, its negation
/// for the periodic operator (which samples f(x + d) rather than f(x - d)).
std::vector<double> frame_shifts_from_positions(const std::vector<double>& positions,
                                                const Grid1D& grid, ShiftBoundary boundary);

/// One term of a tracking signal built from variable blocks.
struct BlockTerm {
  std::string block;
  double weight = 1.0;
};

/// Parses `density`, `density+velocity`, `species-0.4*density`, ...
std::vector<BlockTerm> parse_block_combination(std::string_view text);
std::string format_block_combination(const std::vector<BlockTerm>& terms);

/// Sum of weight * block over the terms (an m x n matrix).
Eigen::MatrixXd combine_blocks(const SnapshotSet& X, const std::vector<BlockTerm>& terms);

/// All-zero shift sequence of length n (a frame at rest).
std::vector<double> zero_frame(Index n);

/// Centred moving average; the window is truncated at both ends.
std::vector<double> moving_average(const std::vector<double>& values, Index width);

}  // namespace spod
