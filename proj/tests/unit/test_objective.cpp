#include "spod/errors.hpp"
#include "spod/objective.hpp"
#include "spod/pod.hpp"
#include "spod/synthgen.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace spod;

namespace {

struct Instance {
  Eigen::MatrixXd X;
  Grid1D grid;
  FrameShifts shifts;
  std::vector<FrameBasis> frames;
};

Instance random_instance(std::mt19937_64& rng, ShiftBoundary boundary) {
  Instance in;
  const Index m = test::uniform_index(rng, 12, 64);
  const Index n = test::uniform_index(rng, 4, 12);
  const Index ns = test::uniform_index(rng, 1, 3);
  in.grid = boundary == ShiftBoundary::periodic ? Grid1D::periodic(m, 1.0) : Grid1D::non_periodic(m, 1.0);
  in.X = test::random_matrix(rng, m, n);
  in.shifts.spec = {boundary, 3};
  in.shifts.d.resize(ns, n);
  for (Index l = 0; l < ns; ++l) {
    for (Index j = 0; j < n; ++j) in.shifts.d(l, j) = test::uniform(rng, -0.3, 0.3);
  }
  for (Index l = 0; l < ns; ++l) {
    FrameBasis f;
    f.modes = test::random_matrix(rng, m, test::uniform_index(rng, 1, 2));
    in.frames.push_back(f);
  }
  return in;
}

// Minimum-norm solution through the complete orthogonal decomposition.
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& K, const Eigen::VectorXd& x) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K);
  cod.setThreshold(1e-10);
  return cod.solve(x);
}

}  // namespace

TEST(OptimalAmplitudes, DuplicateColumnsSplitEvenly) {
  Eigen::VectorXd u(3);
  u << 1, 2, 2;
  Eigen::MatrixXd K(3, 2);
  K << u, u;
  const Eigen::VectorXd a = optimal_amplitudes(K, u);
  EXPECT_NEAR(a(0), 0.5, 1e-12);
  EXPECT_NEAR(a(1), 0.5, 1e-12);
}

TEST(OptimalAmplitudes, MatchNormalEquationsAndPseudoinverse) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = test::uniform_index(rng, 6, 40);
    const Index r = test::uniform_index(rng, 1, 5);
    Eigen::MatrixXd K = test::random_matrix(rng, m, r);
    const bool deficient = trial % 2 == 1 && r > 1;
    if (deficient) {
      const Index dup = test::uniform_index(rng, 1, r - 1);
      K.col(dup) = K.col(0) * test::uniform(rng, -2.0, 2.0);
    }
    const Eigen::VectorXd x = test::random_vector(rng, m);
    const Eigen::VectorXd a = optimal_amplitudes(K, x);
    const Eigen::VectorXd oracle = pinv_solve(K, x);
    EXPECT_LT((a - oracle).cwiseAbs().maxCoeff(), 1e-10) << "trial " << trial;
    if (!deficient) {
      const Eigen::VectorXd normal = (K.transpose() * K).ldlt().solve(K.transpose() * x);
      EXPECT_LT((a - normal).cwiseAbs().maxCoeff(), 1e-10);
    }
    // Residual is orthogonal to the range of K.
    EXPECT_LT((K.transpose() * (x - K * a)).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + x.norm() * K.norm()));
  }
}

TEST(OptimalAmplitudes, ZeroMatrixGivesZeroAmplitudes) {
  const Eigen::VectorXd a = optimal_amplitudes(Eigen::MatrixXd::Zero(5, 2), Eigen::VectorXd::Ones(5));
  EXPECT_EQ(a, Eigen::VectorXd::Zero(2));
}

TEST(ReducedObjective, ValueIsResidualMinusSnapshotEnergy) {
  std::mt19937_64 rng(42);
  for (auto b : {ShiftBoundary::periodic, ShiftBoundary::constant_extrapolation}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto in = random_instance(rng, b);
      const auto res = objective_and_gradient(in.X, in.frames, in.shifts, in.grid);
      Decomposition dec{in.frames, res.amplitudes, in.shifts};
      const double J = residual(in.X, dec, in.grid);
      EXPECT_NEAR(res.value + in.X.squaredNorm(), J, 1e-9 * in.X.squaredNorm());
      const Eigen::MatrixXd Xt = reconstruct(dec, in.grid);
      EXPECT_NEAR((in.X - Xt).squaredNorm(), J, 1e-9 * in.X.squaredNorm());
    }
  }
}

TEST(ReducedObjective, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(43);
  for (auto b : {ShiftBoundary::periodic, ShiftBoundary::constant_extrapolation}) {
    for (int inst = 0; inst < 3; ++inst) {
      auto in = random_instance(rng, b);
      const auto base = objective_and_gradient(in.X, in.frames, in.shifts, in.grid);
      const Eigen::VectorXd g = flatten_gradients(base.gradients);
      const Eigen::VectorXd w0 = flatten_modes(in.frames);
      auto value_at = [&](const Eigen::VectorXd& w) {
        auto f = in.frames;
        unflatten_modes(w, f);
        ObjectiveOptions o;
        o.gradient = false;
        return objective_and_gradient(in.X, f, in.shifts, in.grid, o).value;
      };
      for (int dir = 0; dir < 20; ++dir) {
        Eigen::VectorXd v = test::random_vector(rng, w0.size());
        v.normalize();
        const double eps = 1e-5;
        const double fd = (value_at(w0 + eps * v) - value_at(w0 - eps * v)) / (2 * eps);
        const double an = g.dot(v);
        EXPECT_LT(std::abs(fd - an), 1e-5 * std::max(std::abs(an), 1e-3 * g.norm()))
            << "instance " << inst << " direction " << dir;
      }
    }
  }
}

TEST(ReducedObjective, ThreadCountDoesNotChangeBits) {
  std::mt19937_64 rng(44);
  auto in = random_instance(rng, ShiftBoundary::periodic);
  in.X = test::random_matrix(rng, in.X.rows(), 37);
  in.shifts.d = Eigen::MatrixXd::Random(in.shifts.frames(), 37) * 0.2;
  ObjectiveOptions one, four;
  four.threads = 4;
  const auto a = objective_and_gradient(in.X, in.frames, in.shifts, in.grid, one);
  const auto b = objective_and_gradient(in.X, in.frames, in.shifts, in.grid, four);
  EXPECT_EQ(a.value, b.value);
  for (std::size_t l = 0; l < a.gradients.size(); ++l) EXPECT_EQ(a.gradients[l], b.gradients[l]);
}

TEST(ReducedObjective, MaskedRowsHaveZeroGradient) {
  std::mt19937_64 rng(45);
  auto in = random_instance(rng, ShiftBoundary::constant_extrapolation);
  ZeroMask mask(static_cast<std::size_t>(in.X.rows()), false);
  for (Index i = 0; i < in.X.rows(); i += 3) mask[static_cast<std::size_t>(i)] = true;
  in.frames[0].mask = mask;
  in.frames[0].apply_mask();
  const auto res = objective_and_gradient(in.X, in.frames, in.shifts, in.grid);
  for (Index i = 0; i < in.X.rows(); i += 3) {
    EXPECT_EQ(in.frames[0].modes.row(i).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(res.gradients[0].row(i).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(ReducedObjective, SingleFrameEqualsPodOfBackShiftedSnapshots) {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 5; ++trial) {
    const Index m = 48, n = 10;
    const auto grid = Grid1D::periodic(m, 1.0);
    FrameShifts shifts;
    shifts.spec = {ShiftBoundary::periodic, 3};
    shifts.d.resize(1, n);
    for (Index j = 0; j < n; ++j) shifts.d(0, j) = static_cast<double>(test::uniform_index(rng, -20, 20)) * grid.h;
    const Eigen::MatrixXd X = test::random_matrix(rng, m, n);
    Eigen::MatrixXd back(m, n);
    for (Index j = 0; j < n; ++j) back.col(j) = apply_shift(X.col(j), -shifts.d(0, j), grid, shifts.spec);
    for (Index r = 1; r <= 4; ++r) {
      const auto pod = pod_truncate(back, r);
      std::vector<FrameBasis> frames{{pod.modes, {}}};
      const auto res = objective_and_gradient(X, frames, shifts, grid);
      const double spod_residual = res.value + X.squaredNorm();
      const double pod_residual = (back - pod.reconstruct()).squaredNorm();
      EXPECT_NEAR(spod_residual, pod_residual, 1e-8) << "rank " << r;
    }
  }
}

TEST(ReducedObjective, BothThreeSignalSolutionsHaveZeroResidual) {
  const auto c = synth::three_signal_default();
  const auto& s = c.snapshots;
  const Index m = s.grid.m, n = s.cols();
  for (bool recombined : {false, true}) {
    Decomposition dec;
    dec.shifts = c.shifts;
    const synth::Profile q[3] = {c.q1, c.q2, c.q3};
    for (int l = 0; l < 3; ++l) {
      FrameBasis f;
      f.modes.resize(m, 1);
      for (Index i = 0; i < m; ++i) {
        const double x = s.grid.x(i);
        double extra = 0.0;
        if (recombined) extra = l < 2 ? std::sin(x) : -2.0 * std::sin(x);
        f.modes(i, 0) = q[l](x) + extra;
      }
      dec.frames.push_back(f);
      Eigen::MatrixXd a(1, n);
      for (Index j = 0; j < n; ++j) a(0, j) = l < 2 ? 1.0 : std::cos(s.time.t[static_cast<std::size_t>(j)]);
      dec.amplitudes.push_back(a);
    }
    EXPECT_LT(residual(s.X, dec, s.grid), 1e-10) << (recombined ? "recombined" : "plain");
  }
}

TEST(FlattenModes, RoundTrip) {
  std::mt19937_64 rng(47);
  auto in = random_instance(rng, ShiftBoundary::periodic);
  const Eigen::VectorXd flat = flatten_modes(in.frames);
  auto copy = in.frames;
  for (auto& f : copy) f.modes.setZero();
  unflatten_modes(flat, copy);
  for (std::size_t l = 0; l < copy.size(); ++l) EXPECT_EQ(copy[l].modes, in.frames[l].modes);
  EXPECT_THROW(unflatten_modes(Eigen::VectorXd::Zero(flat.size() + 1), copy), InputError);
}

TEST(ReducedObjective, RejectsShapeMismatch) {
  std::mt19937_64 rng(48);
  auto in = random_instance(rng, ShiftBoundary::periodic);
  FrameShifts wrong = in.shifts;
  wrong.d.conservativeResize(in.shifts.frames(), in.X.cols() + 1);
  EXPECT_THROW(ReducedObjective(in.X, wrong, in.grid), InputError);
  auto frames = in.frames;
  frames[0].modes = Eigen::MatrixXd::Zero(in.X.rows() + 1, 1);
  ReducedObjective obj(in.X, in.shifts, in.grid);
  EXPECT_THROW(obj.evaluate(frames), InputError);
}
