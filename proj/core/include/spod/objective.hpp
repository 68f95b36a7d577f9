#pragma once

#include "spod/shift.hpp"
#include "spod/snapshot.hpp"

#include <Eigen/Dense>

#include <vector>

namespace spod {

/// Entries flagged true are pinned to zero in every mode of a frame.
using ZeroMask = std::vector<bool>;

/// Shifts d(l, j) of every frame l at every snapshot j, in space units.
struct FrameShifts {
  Eigen::MatrixXd d;  ///< Ns x n
  ShiftSpec spec;

  Index frames() const { return d.rows(); }
  Index snapshots() const { return d.cols(); }
};

struct FrameBasis {
  Eigen::MatrixXd modes;  ///< m_total x r, columns stacked over variable blocks
  ZeroMask mask;          ///< empty, or one flag per row

  Index rank() const { return modes.cols(); }
  void apply_mask();
};

struct Decomposition {
  std::vector<FrameBasis> frames;
  std::vector<Eigen::MatrixXd> amplitudes;  ///< per frame, r_l x n
  FrameShifts shifts;

  std::vector<Index> mode_counts() const;
  Index total_modes() const;
  void validate(Index rows, Index n) const;
};

inline constexpr double kDefaultRankTol = 1e-10;

/// K_j = [T(d^1_j) w^1_1 ... T(d^Ns_j) w^Ns_{r_Ns}], shifting every variable
/// block of a mode with the same stencil.
Eigen::MatrixXd assemble_frame_matrix(const std::vector<FrameBasis>& frames,
                                      const FrameShifts& shifts, const Grid1D& grid, Index j);

/// Minimum-norm least-squares solution of K a = x. Singular values at or
/// below rank_tol * sigma_max count as zero; an all-zero K yields zeros.
Eigen::VectorXd optimal_amplitudes(const Eigen::MatrixXd& K, const Eigen::VectorXd& x,
                                   double rank_tol = kDefaultRankTol);

struct ObjectiveOptions {
  double rank_tol = kDefaultRankTol;
  int threads = 1;
  bool gradient = true;
};

struct ObjectiveResult {
  double value = 0.0;                        ///< -sum_j ||U_{j,1}^T x_j||^2
  std::vector<Eigen::MatrixXd> gradients;    ///< per frame, shaped like the modes
  std::vector<Eigen::MatrixXd> amplitudes;   ///< per frame, r_l x n
  Index rank_sum = 0;                        ///< sum_j numerical rank of K_j
};

/// Reduced objective with the amplitudes eliminated, its gradient with
/// respect to every mode entry, and the minimum-norm amplitudes.
///
/// Shift stencils are built once at construction; evaluate() may be called
/// repeatedly with different modes of the same shapes. Snapshots are
/// processed in fixed-size chunks and reduced in chunk order, so the result
/// is bitwise independent of the thread count.
class ReducedObjective {
 public:
  ReducedObjective(const Eigen::MatrixXd& X, const FrameShifts& shifts, const Grid1D& grid,
                   ObjectiveOptions options = {});

  ObjectiveResult evaluate(const std::vector<FrameBasis>& frames) const;

  Index frames() const { return static_cast<Index>(stencils_.size()); }

 private:
  const Eigen::MatrixXd& X_;
  Grid1D grid_;
  ObjectiveOptions options_;
  std::vector<std::vector<ShiftStencil>> stencils_;  // [frame][snapshot]
};

ObjectiveResult objective_and_gradient(const Eigen::MatrixXd& X,
                                       const std::vector<FrameBasis>& frames,
                                       const FrameShifts& shifts, const Grid1D& grid,
                                       const ObjectiveOptions& options = {});

/// X~_j = sum_l T(d^l_j) sum_k a^l_{k,j} w^l_k
Eigen::MatrixXd reconstruct(const Decomposition& dec, const Grid1D& grid);

/// Full residual sum_j ||X_j - K_j a_j||^2 with the decomposition's amplitudes.
double residual(const Eigen::MatrixXd& X, const Decomposition& dec, const Grid1D& grid);

/// Flattens modes frame-major, then mode-major, then row-minor.
Eigen::VectorXd flatten_modes(const std::vector<FrameBasis>& frames);
/// Inverse of flatten_modes; shapes are taken from `frames`.
void unflatten_modes(const Eigen::VectorXd& flat, std::vector<FrameBasis>& frames);
Eigen::VectorXd flatten_gradients(const std::vector<Eigen::MatrixXd>& gradients);

}  // namespace spod
