#include "spod/errors.hpp"
#include "spod/pod.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace spod;

TEST(Pod, TruncationErrorEqualsSingularValueTail) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = test::uniform_index(rng, 5, 30), n = test::uniform_index(rng, 3, 20);
    const Eigen::MatrixXd X = test::random_matrix(rng, m, n);
    const Eigen::VectorXd sv = singular_values(X);
    const auto curve = pod_error_curve(sv, sv.size());
    ASSERT_EQ(static_cast<Index>(curve.size()), sv.size() + 1);
    for (Index r = 0; r <= sv.size(); ++r) {
      const auto pod = pod_truncate(X, r);
      const double direct = relative_error(X, pod.reconstruct());
      double tail = 0.0;
      for (Index k = r; k < sv.size(); ++k) tail += sv(k) * sv(k);
      const double oracle = tail / X.squaredNorm();
      EXPECT_NEAR(direct, oracle, 1e-12);
      EXPECT_NEAR(curve[static_cast<std::size_t>(r)], oracle, 1e-12);
    }
  }
}

TEST(Pod, ModesAreOrthonormalAndNonincreasingSpectrum) {
  std::mt19937_64 rng(22);
  const Eigen::MatrixXd X = test::random_matrix(rng, 40, 12);
  const auto pod = pod_truncate(X, 7);
  EXPECT_LT((pod.modes.transpose() * pod.modes - Eigen::MatrixXd::Identity(7, 7)).cwiseAbs().maxCoeff(), 1e-12);
  for (Index k = 1; k < pod.singular_values.size(); ++k) EXPECT_LE(pod.singular_values(k), pod.singular_values(k - 1));
  EXPECT_THROW(pod_truncate(X, 13), InputError);
  EXPECT_THROW(pod_truncate(X, -1), InputError);
}

TEST(Pod, ModesForToleranceUsesTheRequestedMeasure) {
  Eigen::VectorXd sv(4);
  sv << 10, 1, 0.1, 0.01;
  const double total = sv.squaredNorm();
  // squared tail after r = 1 is 1.0101 / total ~ 1.0e-2, root ~ 0.1
  EXPECT_EQ(modes_for_tolerance(sv, 0.011, ErrorMeasure::squared_ratio), 1);
  EXPECT_EQ(modes_for_tolerance(sv, 0.011, ErrorMeasure::root), 2);
  EXPECT_GT(std::sqrt(1.0101 / total), 0.011);
  EXPECT_EQ(modes_for_tolerance(sv, 2.0), 0);
  EXPECT_THROW(modes_for_tolerance(sv, 0.0), InputError);
  EXPECT_THROW(modes_for_tolerance(Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 3)), 0.1), DegenerateDataError);
}

TEST(Pod, ErrorCurveIsNonincreasing) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto curve = pod_error_curve(singular_values(test::random_matrix(rng, 20, 15)), 15);
    for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_LE(curve[k], curve[k - 1]);
    EXPECT_DOUBLE_EQ(curve.front(), 1.0);
  }
}
