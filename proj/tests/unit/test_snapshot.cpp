#include "spod/errors.hpp"
#include "spod/snapshot.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace spod;

namespace {

SnapshotSet two_block_set(std::mt19937_64& rng, Index m, Index n) {
  SnapshotSet s;
  s.grid = Grid1D::periodic(m, 1.0);
  s.time = TimeAxis::uniform(n, 1.0);
  s.blocks = SnapshotSet::stacked_blocks({"a", "b"}, m);
  s.X = test::random_matrix(rng, 2 * m, n);
  s.X.bottomRows(m) *= 1e3;
  return s;
}

}  // namespace

TEST(Grid, PeriodicAndNonPeriodicSpacing) {
  const auto p = Grid1D::periodic(4, 1.0);
  EXPECT_DOUBLE_EQ(p.h, 0.25);
  EXPECT_DOUBLE_EQ(p.length(), 1.0);
  const auto q = Grid1D::non_periodic(5, 1.0);
  EXPECT_DOUBLE_EQ(q.h, 0.25);
  EXPECT_DOUBLE_EQ(q.length(), 1.0);
  EXPECT_DOUBLE_EQ(q.x(4), 1.0);
  EXPECT_THROW(Grid1D::periodic(1, 1.0), InputError);
  Grid1D bad{4, -1.0, Boundary::periodic};
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(TimeAxis, UniformAndMonotone) {
  const auto t = TimeAxis::uniform(5, 2.0);
  ASSERT_EQ(t.n(), 5);
  EXPECT_DOUBLE_EQ(t.t[0], 0.0);
  EXPECT_DOUBLE_EQ(t.final_time(), 2.0);
  TimeAxis bad{{0.0, 0.5, 0.5}};
  EXPECT_THROW(bad.validate(), InputError);
}

TEST(SnapshotSet, ValidateChecksLayout) {
  std::mt19937_64 rng(1);
  auto s = two_block_set(rng, 8, 3);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.block("b").begin, 8);
  EXPECT_THROW(s.block("c"), InputError);
  auto short_time = s;
  short_time.time = TimeAxis::uniform(2, 1.0);
  EXPECT_THROW(short_time.validate(), InputError);
  auto gap = s;
  gap.blocks[1].begin = 9;
  EXPECT_THROW(gap.validate(), InputError);
}

TEST(RelativeError, SquaredRatioWithoutRoot) {
  Eigen::MatrixXd X(2, 1), Y(2, 1);
  X << 3, 4;
  Y << 3, 3;
  EXPECT_DOUBLE_EQ(relative_error(X, Y), 1.0 / 25.0);
  EXPECT_DOUBLE_EQ(apply_measure(1.0 / 25.0, ErrorMeasure::root), 0.2);
  EXPECT_DOUBLE_EQ(apply_measure(1.0 / 25.0, ErrorMeasure::squared_ratio), 0.04);
  EXPECT_THROW(relative_error(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)), DegenerateDataError);
  EXPECT_THROW(relative_error(X, Eigen::MatrixXd::Zero(3, 1)), InputError);
}

TEST(RelativeError, ExactReconstructionIsZeroAndScaleInvariant) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd X = test::random_matrix(rng, 7, 5);
    const Eigen::MatrixXd Y = test::random_matrix(rng, 7, 5);
    EXPECT_EQ(relative_error(X, X), 0.0);
    const double c = test::uniform(rng, 0.1, 10.0);
    EXPECT_NEAR(relative_error(c * X, c * Y), relative_error(X, Y), 1e-12 * relative_error(X, Y));
  }
}

TEST(ErrorMeasure, Names) {
  EXPECT_EQ(parse_error_measure("root"), ErrorMeasure::root);
  EXPECT_EQ(parse_error_measure("squared"), ErrorMeasure::squared_ratio);
  EXPECT_EQ(parse_error_measure(to_string(ErrorMeasure::squared_ratio)), ErrorMeasure::squared_ratio);
  EXPECT_THROW(parse_error_measure("l1"), ConfigError);
}

TEST(Scaling, BlocksShareTheFirstBlockNormAndRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = two_block_set(rng, 6, 4);
    const auto scaled = scale_variables(s);
    const double n0 = scaled.set.X.topRows(6).norm();
    EXPECT_NEAR(scaled.set.X.bottomRows(6).norm(), n0, 1e-12 * n0);
    EXPECT_DOUBLE_EQ(scaled.factors[0], 1.0);
    const Eigen::MatrixXd back = unscale_variables(scaled.set.X, s.blocks, scaled.factors);
    EXPECT_LT((back - s.X).cwiseAbs().maxCoeff(), 1e-12 * s.X.cwiseAbs().maxCoeff());
  }
  std::mt19937_64 rng2(4);
  auto z = two_block_set(rng2, 6, 4);
  z.X.bottomRows(6).setZero();
  EXPECT_THROW(scale_variables(z), DegenerateDataError);
}

TEST(Centering, RowsHaveZeroTemporalMean) {
  std::mt19937_64 rng(5);
  const auto s = two_block_set(rng, 5, 9);
  const auto c = center_rows(s);
  EXPECT_LT(c.set.X.rowwise().mean().cwiseAbs().maxCoeff(), 1e-9);
  Eigen::MatrixXd restored = c.set.X;
  restored.colwise() += c.mean;
  EXPECT_LT((restored - s.X).cwiseAbs().maxCoeff(), 1e-9);
}
