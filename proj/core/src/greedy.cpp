#include "spod/greedy.hpp"

#include "spod/errors.hpp"
#include "spod/parallel.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace spod {

std::string_view to_string(Termination t) {
  return t == Termination::tolerance_met ? "tolerance-met" : "iteration-cap";
}

void GreedyConfig::validate(Index frames) const {
  if (static_cast<Index>(r0.size()) != frames) {
    throw InputError("r0 has " + std::to_string(r0.size()) + " entries for " + std::to_string(frames) +
                     " frames");
  }
  for (Index r : r0) {
    if (r < 0) throw InputError("r0 entries must be nonnegative");
  }
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (p_max < 0) throw InputError("p_max must be nonnegative");
  if (!masks.empty() && static_cast<Index>(masks.size()) != frames) {
    throw InputError("need one mask per frame");
  }
  optimizer.validate();
}

Eigen::MatrixXd back_shifted_snapshots(const Eigen::MatrixXd& X, const FrameShifts& shifts, Index frame,
                                       const Grid1D& grid) {
  if (shifts.snapshots() != X.cols()) throw InputError("shift count differs from snapshot count");
  Eigen::MatrixXd B(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const auto st = build_stencil(-shifts.d(frame, j), grid, shifts.spec);
    apply_stencil_blocks(st, grid.m, X.col(j), B.col(j));
  }
  return B;
}

namespace {

Eigen::MatrixXd leading_left_vectors(const Eigen::MatrixXd& B, Index r) {
  if (r == 0) return Eigen::MatrixXd(B.rows(), 0);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(r);
}

const ZeroMask& mask_of(const std::vector<ZeroMask>& masks, std::size_t l) {
  static const ZeroMask none;
  return masks.empty() ? none : masks[l];
}

struct Candidate {
  std::vector<FrameBasis> frames;
  SolveDiagnostics solve;
  Eigen::MatrixXd approx;
  std::vector<Eigen::MatrixXd> amplitudes;
  double squared_error = std::numeric_limits<double>::infinity();
};

Candidate solve_candidate(const SnapshotSet& X, const FrameShifts& shifts, const GreedyConfig& cfg,
                          std::vector<FrameBasis> frames, int threads) {
  Candidate c;
  c.solve = optimize_modes(X.X, shifts, X.grid, frames, cfg.optimizer, cfg.rank_tol, threads);
  ObjectiveOptions opts{cfg.rank_tol, threads, false};
  const auto eval = ReducedObjective(X.X, shifts, X.grid, opts).evaluate(frames);
  Decomposition dec{frames, eval.amplitudes, shifts};
  c.approx = reconstruct(dec, X.grid);
  c.squared_error = relative_error(X.X, c.approx);
  c.amplitudes = eval.amplitudes;
  c.frames = std::move(frames);
  return c;
}

}  // namespace

std::vector<FrameBasis> initialize_frames(const Eigen::MatrixXd& X, const FrameShifts& shifts,
                                          const Grid1D& grid, const std::vector<Index>& r0,
                                          const std::vector<ZeroMask>& masks) {
  if (static_cast<Index>(r0.size()) != shifts.frames()) throw InputError("r0 length differs from frame count");
  const Index kmax = std::min(X.rows(), X.cols());
  std::vector<FrameBasis> frames(r0.size());
  for (std::size_t l = 0; l < r0.size(); ++l) {
    if (r0[l] < 0 || r0[l] > kmax) {
      throw InputError("r0[" + std::to_string(l) + "] = " + std::to_string(r0[l]) + " exceeds min(m, n) = " +
                       std::to_string(kmax));
    }
    frames[l].mask = mask_of(masks, l);
    if (r0[l] == 0) {
      frames[l].modes.resize(X.rows(), 0);
      continue;
    }
    frames[l].modes =
        leading_left_vectors(back_shifted_snapshots(X, shifts, static_cast<Index>(l), grid), r0[l]);
    frames[l].apply_mask();
  }
  return frames;
}

SolveDiagnostics optimize_modes(const Eigen::MatrixXd& X, const FrameShifts& shifts, const Grid1D& grid,
                                std::vector<FrameBasis>& frames, const OptimizerOptions& options,
                                double rank_tol, int threads) {
  for (auto& f : frames) f.apply_mask();
  const ReducedObjective objective(X, shifts, grid, {rank_tol, threads, true});
  std::vector<FrameBasis> work = frames;
  std::vector<Index> ranks;  // numerical rank sum of every evaluation
  const auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    unflatten_modes(x, work);
    const auto r = objective.evaluate(work);
    grad = flatten_gradients(r.gradients);
    ranks.push_back(r.rank_sum);
    return r.value;
  };
  SolveDiagnostics diag;
  Index accepted_rank = -1;
  const auto observer = [&](const IterationRecord& rec) {
    const auto first = ranks.size() - rec.trials.size();
    std::size_t k = rec.trials.size();
    while (k > 0 && rec.trials[k - 1].step != rec.step) --k;
    if (k == 0) return;
    if (accepted_rank < 0) accepted_rank = ranks.front();
    const Index rank = ranks[first + k - 1];
    if (rank != accepted_rank) ++diag.rank_changes;
    accepted_rank = rank;
  };
  OptimizerResult res = minimize(fn, flatten_modes(frames), options, observer);
  unflatten_modes(res.x, frames);
  for (auto& f : frames) f.apply_mask();
  diag.status = res.trace.status;
  diag.iterations = static_cast<int>(res.trace.iterations.size());
  diag.evaluations = res.trace.evaluations;
  diag.objective = res.value;
  diag.grad_norm = res.gradient.norm();
  return diag;
}

SpodResult spod_decompose(const SnapshotSet& X, const FrameShifts& shifts, const GreedyConfig& cfg) {
  X.validate();
  const Index Ns = shifts.frames();
  if (Ns < 1) throw InputError("need at least one frame");
  if (shifts.snapshots() != X.cols()) throw InputError("shift count differs from snapshot count");
  cfg.validate(Ns);
  const int threads = std::max(1, cfg.threads);

  SpodResult result;
  GreedyReport& report = result.report;
  report.measure = cfg.measure;

  // Initial solve with r0.
  Candidate best = solve_candidate(X, shifts, cfg, initialize_frames(X.X, shifts, X.grid, cfg.r0, cfg.masks),
                                   threads);
  report.initial_solve = best.solve;
  report.optimizer_failed = best.solve.status == OptimizerStatus::non_finite;
  double error = apply_measure(best.squared_error, cfg.measure);
  report.initial_error = error;
  report.error_history.push_back(error);
  std::vector<Index> r = cfg.r0;
  if (cfg.progress) cfg.progress({0, {}, -1, error, r});

  Index p = 0;
  while (error > cfg.tol && p < cfg.p_max && !report.optimizer_failed) {
    ++p;
    // Candidates run in parallel across frames when threads allow; each
    // candidate then evaluates its objective on one thread.
    const int inner = Ns > 1 && threads > 1 ? 1 : threads;
    // A frame cannot hold more modes than min(rows, n); such candidates are
    // skipped and reported with infinite error.
    const Index cap = std::min(X.rows(), X.cols());
    std::vector<bool> feasible(static_cast<std::size_t>(Ns));
    for (Index i = 0; i < Ns; ++i) feasible[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] + 1 <= cap;
    if (std::none_of(feasible.begin(), feasible.end(), [](bool f) { return f; })) {
      --p;
      break;
    }
    std::vector<Candidate> cands(static_cast<std::size_t>(Ns));
    parallel_for(Ns, threads, [&](std::ptrdiff_t i) {
      if (!feasible[static_cast<std::size_t>(i)]) return;
      std::vector<FrameBasis> start;
      std::vector<Index> ri = r;
      ++ri[static_cast<std::size_t>(i)];
      if (cfg.warm_start) {
        start = best.frames;
        const Eigen::MatrixXd resid = X.X - best.approx;
        Eigen::MatrixXd fresh = leading_left_vectors(back_shifted_snapshots(resid, shifts, i, X.grid), 1);
        auto& f = start[static_cast<std::size_t>(i)];
        Eigen::MatrixXd grown(X.rows(), f.rank() + 1);
        grown << f.modes, fresh;
        f.modes = std::move(grown);
        f.apply_mask();
      } else {
        start = initialize_frames(X.X, shifts, X.grid, ri, cfg.masks);
      }
      cands[static_cast<std::size_t>(i)] = solve_candidate(X, shifts, cfg, std::move(start), inner);
    });

    GreedyIteration iter;
    iter.p = p;
    Index q = 0;
    for (Index i = 0; i < Ns; ++i) {
      const auto& c = cands[static_cast<std::size_t>(i)];
      iter.candidate_errors.push_back(feasible[static_cast<std::size_t>(i)]
                                          ? apply_measure(c.squared_error, cfg.measure)
                                          : std::numeric_limits<double>::infinity());
      iter.solves.push_back(c.solve);
      if (!feasible[static_cast<std::size_t>(q)] ||
          iter.candidate_errors[static_cast<std::size_t>(i)] < iter.candidate_errors[static_cast<std::size_t>(q)]) {
        if (feasible[static_cast<std::size_t>(i)]) q = i;
      }
    }
    iter.chosen = q;
    error = iter.candidate_errors[static_cast<std::size_t>(q)];
    ++r[static_cast<std::size_t>(q)];
    iter.error = error;
    iter.r = r;
    best = std::move(cands[static_cast<std::size_t>(q)]);
    if (best.solve.status == OptimizerStatus::non_finite) report.optimizer_failed = true;
    report.error_history.push_back(error);
    if (cfg.progress) cfg.progress({p, iter.candidate_errors, q, error, r});
    report.iterations.push_back(std::move(iter));
  }

  report.final_r = r;
  report.final_error = error;
  report.final_squared_error = best.squared_error;
  report.termination = error <= cfg.tol ? Termination::tolerance_met : Termination::iteration_cap;
  result.decomposition = Decomposition{std::move(best.frames), std::move(best.amplitudes), shifts};
  return result;
}

}  // namespace spod
