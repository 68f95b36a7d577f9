#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace spod {

using Index = Eigen::Index;

enum class Boundary { periodic, non_periodic };

/// Uniform 1D grid with nodes x_i = i*h, i = 0..m-1.
struct Grid1D {
  Index m = 0;
  double h = 0.0;
  Boundary boundary = Boundary::periodic;

  /// Periodic: m*h. Non-periodic: (m-1)*h.
  double length() const;
  double x(Index i) const { return static_cast<double>(i) * h; }
  void validate() const;

  static Grid1D periodic(Index m, double length);
  static Grid1D non_periodic(Index m, double length);
};

struct TimeAxis {
  std::vector<double> t;

  Index n() const { return static_cast<Index>(t.size()); }
  double final_time() const { return t.back(); }
  void validate() const;

  /// n equispaced values on [0, T], both ends included.
  static TimeAxis uniform(Index n, double final_time);
};

/// Contiguous row range [begin, begin + size) of the snapshot matrix.
struct VariableBlock {
  std::string name;
  Index begin = 0;
  Index size = 0;

  Index end() const { return begin + size; }
};

/// Snapshot matrix plus the grid, time axis and variable layout it was
/// sampled on. Every block has grid.m rows and blocks tile the rows in order.
struct SnapshotSet {
  Eigen::MatrixXd X;
  Grid1D grid;
  TimeAxis time;
  std::vector<VariableBlock> blocks;

  Index rows() const { return X.rows(); }
  Index cols() const { return X.cols(); }
  Index block_count() const { return static_cast<Index>(blocks.size()); }
  const VariableBlock& block(std::string_view name) const;
  void validate() const;

  /// Builds the block list for equally sized blocks named `names`.
  static std::vector<VariableBlock> stacked_blocks(const std::vector<std::string>& names,
                                                   Index height);
};

/// Relative approximation error: sum_j ||X_j - Xt_j||^2 / sum_j ||X_j||^2.
/// No square root is taken.
double relative_error(const Eigen::MatrixXd& X, const Eigen::MatrixXd& approx);
double relative_error(const SnapshotSet& X, const Eigen::MatrixXd& approx);

/// How a relative error is compared against a tolerance. `squared_ratio` is
/// the value returned by relative_error(); `root` is its square root, i.e.
/// ||X - Xt||_F / ||X||_F.
enum class ErrorMeasure { squared_ratio, root };

double apply_measure(double squared_ratio, ErrorMeasure measure);
std::string_view to_string(ErrorMeasure measure);
ErrorMeasure parse_error_measure(std::string_view text);

struct ScaledSnapshots {
  SnapshotSet set;
  std::vector<double> factors;  ///< one positive factor per block
};

/// Scales every block so that all blocks share the Frobenius norm of the
/// first block. Throws DegenerateDataError on a zero-norm block.
ScaledSnapshots scale_variables(const SnapshotSet& X);

/// Divides each block of `X` by its factor (inverse of scale_variables).
Eigen::MatrixXd unscale_variables(const Eigen::MatrixXd& X,
                                  const std::vector<VariableBlock>& blocks,
                                  const std::vector<double>& factors);

struct CenteredSnapshots {
  SnapshotSet set;
  Eigen::VectorXd mean;
};

/// Subtracts the mean of every row.
CenteredSnapshots center_rows(const SnapshotSet& X);
Eigen::MatrixXd center_rows(const Eigen::MatrixXd& X, Eigen::VectorXd* mean = nullptr);

}  // namespace spod
