#pragma once

#include "spod/lbfgs.hpp"
#include "spod/objective.hpp"
#include "spod/snapshot.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace spod {

struct GreedyProgress {
  Index iteration = 0;                   ///< 0 for the initial solve
  std::vector<double> candidate_errors;  ///< empty for the initial solve
  Index chosen = -1;
  double error = 0.0;
  std::vector<Index> r;
};

struct GreedyConfig {
  std::vector<Index> r0;
  double tol = 0.01;
  Index p_max = 0;
  ErrorMeasure measure = ErrorMeasure::root;
  OptimizerOptions optimizer;
  double rank_tol = kDefaultRankTol;
  bool warm_start = true;
  int threads = 1;
  std::vector<ZeroMask> masks;  ///< empty, or one (possibly empty) mask per frame
  std::function<void(const GreedyProgress&)> progress;

  void validate(Index frames) const;
};

struct SolveDiagnostics {
  OptimizerStatus status = OptimizerStatus::converged;
  int iterations = 0;
  long evaluations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int rank_changes = 0;  ///< accepted iterates where sum_j rank(K_j) changed
};

struct GreedyIteration {
  Index p = 0;
  std::vector<double> candidate_errors;  ///< measured error per frame candidate
  std::vector<SolveDiagnostics> solves;
  Index chosen = 0;
  double error = 0.0;
  std::vector<Index> r;
};

enum class Termination { tolerance_met, iteration_cap };
std::string_view to_string(Termination t);

struct GreedyReport {
  SolveDiagnostics initial_solve;
  double initial_error = 0.0;
  std::vector<GreedyIteration> iterations;
  std::vector<double> error_history;  ///< initial error, then one per iteration
  std::vector<Index> final_r;
  double final_error = 0.0;           ///< under `measure`
  double final_squared_error = 0.0;   ///< relative_error(), unmeasured
  ErrorMeasure measure = ErrorMeasure::root;
  Termination termination = Termination::tolerance_met;
  bool optimizer_failed = false;
};

struct SpodResult {
  Decomposition decomposition;
  GreedyReport report;
};

/// Matrix whose columns are T(-d^l_j) x_j for one frame l.
Eigen::MatrixXd back_shifted_snapshots(const Eigen::MatrixXd& X, const FrameShifts& shifts,
                                       Index frame, const Grid1D& grid);

/// Leading r0[l] left singular vectors of each frame's back-shifted snapshot
/// matrix, masked afterwards.
std::vector<FrameBasis> initialize_frames(const Eigen::MatrixXd& X, const FrameShifts& shifts,
                                          const Grid1D& grid, const std::vector<Index>& r0,
                                          const std::vector<ZeroMask>& masks = {});

/// Minimizes the reduced objective starting from `frames` (updated in
/// place) and returns the optimizer diagnostics.
SolveDiagnostics optimize_modes(const Eigen::MatrixXd& X, const FrameShifts& shifts,
                                const Grid1D& grid, std::vector<FrameBasis>& frames,
                                const OptimizerOptions& options, double rank_tol, int threads = 1);

/// Greedy mode addition: solve with r0, then repeatedly try one more mode in
/// every frame and keep the frame with the smallest error until the error
/// drops to `tol` or `p_max` iterations have run.
SpodResult spod_decompose(const SnapshotSet& X, const FrameShifts& shifts, const GreedyConfig& config);

}  // namespace spod
