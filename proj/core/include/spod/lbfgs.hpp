#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace spod {

struct OptimizerOptions {
  int memory = 10;            ///< stored (s, y) correction pairs
  double grad_tol = 1e-6;     ///< stop when ||g|| <= grad_tol * ||g_0|| (or absolute, see below)
  bool relative_grad_tol = true;
  int max_iters = 500;
  double sufficient_decrease = 1e-4;  ///< c1
  double curvature = 0.9;             ///< c2
  int max_line_search = 40;           ///< trial evaluations per line search

  void validate() const;
};

enum class OptimizerStatus { converged, max_iterations, line_search_failed, non_finite };

std::string_view to_string(OptimizerStatus status);

/// One callback evaluation inside a line search, with the bracket
/// [lower, upper] the trial step was chosen from (upper is +inf while
/// the step is still being extrapolated).
struct LineSearchTrial {
  double step = 0.0;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double value = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  double previous_value = 0.0;
  double value = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  double slope = 0.0;  ///< g_k^T p_k at the start of the line search
  bool wolfe = true;   ///< false if only sufficient decrease was met
  std::vector<LineSearchTrial> trials;
};

struct OptimizerTrace {
  double initial_value = 0.0;
  double initial_grad_norm = 0.0;
  std::vector<IterationRecord> iterations;
  OptimizerStatus status = OptimizerStatus::max_iterations;
  std::string message;
  long evaluations = 0;

  std::vector<double> values() const;
  double final_grad_norm() const;
};

/// Returns f(x) and writes the gradient into `grad` (already sized).
using ObjectiveFunction = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
using IterationObserver = std::function<void(const IterationRecord&)>;

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  OptimizerTrace trace;
};

/// Limited-memory BFGS with a strong Wolfe line search.
///
/// Accepted iterates strictly satisfy the sufficient-decrease condition, so
/// the traced objective values are nonincreasing. On a line-search failure
/// or a non-finite evaluation the best iterate so far is returned with the
/// corresponding status.
OptimizerResult minimize(const ObjectiveFunction& fn, Eigen::VectorXd x0,
                         const OptimizerOptions& options = {},
                         const IterationObserver& observer = {});

}  // namespace spod
