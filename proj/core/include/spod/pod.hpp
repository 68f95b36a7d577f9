#pragma once

#include "spod/snapshot.hpp"

#include <Eigen/Dense>

#include <vector>

namespace spod {

struct PodResult {
  Eigen::MatrixXd modes;            ///< m x r, orthonormal columns
  Eigen::MatrixXd amplitudes;       ///< r x n, modes^T X
  Eigen::VectorXd singular_values;  ///< all singular values, nonincreasing

  Eigen::MatrixXd reconstruct() const { return modes * amplitudes; }
};

/// Truncated SVD of X keeping the leading r left singular vectors.
PodResult pod_truncate(const Eigen::MatrixXd& X, Index r);

Eigen::VectorXd singular_values(const Eigen::MatrixXd& X);

/// Squared-ratio error of the best rank-r approximation for r = 0..max_rank,
/// computed from the singular value tail.
std::vector<double> pod_error_curve(const Eigen::VectorXd& singular_values, Index max_rank);

/// Smallest r whose rank-r truncation has error strictly below `tol` under
/// `measure`. X must be nonzero.
Index modes_for_tolerance(const Eigen::MatrixXd& X, double tol,
                          ErrorMeasure measure = ErrorMeasure::root);
Index modes_for_tolerance(const Eigen::VectorXd& singular_values, double tol,
                          ErrorMeasure measure = ErrorMeasure::root);

}  // namespace spod
