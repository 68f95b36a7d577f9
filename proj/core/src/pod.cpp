#include "spod/pod.hpp"

#include "spod/errors.hpp"

#include <string>

namespace spod {

PodResult pod_truncate(const Eigen::MatrixXd& X, Index r) {
  const Index kmax = std::min(X.rows(), X.cols());
  if (r < 0 || r > kmax) {
    throw InputError("pod_truncate: rank " + std::to_string(r) + " outside [0, " +
                     std::to_string(kmax) + "]");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
  PodResult out;
  out.singular_values = svd.singularValues();
  out.modes = svd.matrixU().leftCols(r);
  out.amplitudes = out.modes.transpose() * X;
  return out;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& X) {
  return Eigen::BDCSVD<Eigen::MatrixXd>(X).singularValues();
}

std::vector<double> pod_error_curve(const Eigen::VectorXd& sv, Index max_rank) {
  const Index k = sv.size();
  max_rank = std::min(max_rank, k);
  const double total = sv.squaredNorm();
  if (total == 0.0) throw DegenerateDataError("pod_error_curve: snapshot matrix is zero");
  // Tail sums accumulated from the smallest singular value upwards.
  std::vector<double> tail(static_cast<std::size_t>(k + 1), 0.0);
  for (Index i = k - 1; i >= 0; --i) tail[i] = tail[i + 1] + sv[i] * sv[i];
  std::vector<double> curve;
  for (Index r = 0; r <= max_rank; ++r) curve.push_back(tail[r] / total);
  return curve;
}

Index modes_for_tolerance(const Eigen::VectorXd& sv, double tol, ErrorMeasure measure) {
  if (!(tol > 0.0)) throw InputError("modes_for_tolerance: tol must be positive");
  const auto curve = pod_error_curve(sv, sv.size());
  for (std::size_t r = 0; r < curve.size(); ++r) {
    if (apply_measure(curve[r], measure) < tol) return static_cast<Index>(r);
  }
  return sv.size();
}

Index modes_for_tolerance(const Eigen::MatrixXd& X, double tol, ErrorMeasure measure) {
  return modes_for_tolerance(singular_values(X), tol, measure);
}

}  // namespace spod
