#include "spod/objective.hpp"

#include "spod/errors.hpp"
#include "spod/parallel.hpp"

#include <sstream>

namespace spod {

namespace {

constexpr Index kChunk = 8;

struct SnapshotSolve {
  Eigen::MatrixXd U1;  // m_total x rank
  Eigen::VectorXd coeff;  // U1^T x
  Eigen::VectorXd amplitudes;
  Index rank = 0;
};

SnapshotSolve solve_snapshot(const Eigen::MatrixXd& K, const Eigen::Ref<const Eigen::VectorXd>& x,
                             double rank_tol) {
  SnapshotSolve out;
  out.amplitudes = Eigen::VectorXd::Zero(K.cols());
  if (K.cols() == 0) return out;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  if (!(smax > 0.0)) return out;
  while (out.rank < sv.size() && sv[out.rank] > rank_tol * smax) ++out.rank;
  out.U1 = svd.matrixU().leftCols(out.rank);
  out.coeff = out.U1.transpose() * x;
  out.amplitudes = svd.matrixV().leftCols(out.rank) *
                   (out.coeff.array() / sv.head(out.rank).array()).matrix();
  return out;
}

Index total_columns(const std::vector<FrameBasis>& frames) {
  Index total = 0;
  for (const auto& f : frames) total += f.rank();
  return total;
}

void check_frames(const std::vector<FrameBasis>& frames, Index rows, const Grid1D& grid) {
  if (grid.m <= 0 || rows % grid.m != 0) {
    throw InputError("snapshot rows are not a multiple of the grid size");
  }
  for (std::size_t l = 0; l < frames.size(); ++l) {
    const auto& f = frames[l];
    if (f.modes.rows() != rows && f.rank() > 0) {
      std::ostringstream msg;
      msg << "frame " << l << " modes have " << f.modes.rows() << " rows, expected " << rows;
      throw InputError(msg.str());
    }
    if (!f.mask.empty() && static_cast<Index>(f.mask.size()) != rows) {
      throw InputError("frame " + std::to_string(l) + " mask length differs from snapshot rows");
    }
  }
}

void fill_frame_matrix(const std::vector<FrameBasis>& frames,
                       const std::vector<std::vector<ShiftStencil>>& stencils, Index m, Index j,
                       Eigen::MatrixXd& K) {
  Index col = 0;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    const auto& st = stencils[l][static_cast<std::size_t>(j)];
    for (Index k = 0; k < frames[l].rank(); ++k, ++col) {
      apply_stencil_blocks(st, m, frames[l].modes.col(k), K.col(col));
    }
  }
}

std::vector<std::vector<ShiftStencil>> build_stencils(const FrameShifts& shifts, const Grid1D& grid) {
  shifts.spec.validate();
  std::vector<std::vector<ShiftStencil>> out(static_cast<std::size_t>(shifts.frames()));
  for (Index l = 0; l < shifts.frames(); ++l) {
    auto& row = out[static_cast<std::size_t>(l)];
    row.reserve(static_cast<std::size_t>(shifts.snapshots()));
    for (Index j = 0; j < shifts.snapshots(); ++j) row.push_back(build_stencil(shifts.d(l, j), grid, shifts.spec));
  }
  return out;
}

}  // namespace

void FrameBasis::apply_mask() {
  if (mask.empty()) return;
  for (Index i = 0; i < modes.rows(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) modes.row(i).setZero();
  }
}

std::vector<Index> Decomposition::mode_counts() const {
  std::vector<Index> r;
  for (const auto& f : frames) r.push_back(f.rank());
  return r;
}

Index Decomposition::total_modes() const { return total_columns(frames); }

void Decomposition::validate(Index rows, Index n) const {
  if (static_cast<Index>(frames.size()) != shifts.frames()) {
    throw InputError("decomposition has " + std::to_string(frames.size()) + " frames but shifts for " +
                     std::to_string(shifts.frames()));
  }
  if (amplitudes.size() != frames.size()) throw InputError("decomposition amplitude count mismatch");
  if (shifts.snapshots() != n) throw InputError("shift count differs from snapshot count");
  for (std::size_t l = 0; l < frames.size(); ++l) {
    if (frames[l].rank() > 0 && frames[l].modes.rows() != rows) {
      throw InputError("frame " + std::to_string(l) + " mode length differs from snapshot rows");
    }
    if (amplitudes[l].rows() != frames[l].rank() || amplitudes[l].cols() != n) {
      throw InputError("frame " + std::to_string(l) + " amplitudes have the wrong shape");
    }
  }
}

Eigen::MatrixXd assemble_frame_matrix(const std::vector<FrameBasis>& frames,
                                      const FrameShifts& shifts, const Grid1D& grid, Index j) {
  if (static_cast<Index>(frames.size()) != shifts.frames()) {
    throw InputError("assemble_frame_matrix: frame count differs from shift rows");
  }
  if (j < 0 || j >= shifts.snapshots()) throw InputError("assemble_frame_matrix: snapshot index out of range");
  Index rows = 0;
  for (const auto& f : frames) rows = std::max(rows, f.modes.rows());
  check_frames(frames, rows, grid);
  Eigen::MatrixXd K(rows, total_columns(frames));
  Index col = 0;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    const auto st = build_stencil(shifts.d(static_cast<Index>(l), j), grid, shifts.spec);
    for (Index k = 0; k < frames[l].rank(); ++k, ++col) {
      apply_stencil_blocks(st, grid.m, frames[l].modes.col(k), K.col(col));
    }
  }
  return K;
}

Eigen::VectorXd optimal_amplitudes(const Eigen::MatrixXd& K, const Eigen::VectorXd& x, double rank_tol) {
  if (K.rows() != x.size()) throw InputError("optimal_amplitudes: K rows differ from snapshot length");
  return solve_snapshot(K, x, rank_tol).amplitudes;
}

ReducedObjective::ReducedObjective(const Eigen::MatrixXd& X, const FrameShifts& shifts,
                                   const Grid1D& grid, ObjectiveOptions options)
    : X_(X), grid_(grid), options_(options), stencils_(build_stencils(shifts, grid)) {
  grid_.validate();
  if (shifts.snapshots() != X.cols()) throw InputError("shift count differs from snapshot count");
  if (X.rows() % grid.m != 0) throw InputError("snapshot rows are not a multiple of the grid size");
}

ObjectiveResult ReducedObjective::evaluate(const std::vector<FrameBasis>& frames) const {
  if (static_cast<Index>(frames.size()) != this->frames()) {
    throw InputError("objective: expected " + std::to_string(this->frames()) + " frames");
  }
  check_frames(frames, X_.rows(), grid_);
  const Index n = X_.cols();
  const Index rows = X_.rows();
  const Index R = total_columns(frames);
  const Index chunks = (n + kChunk - 1) / kChunk;

  struct Partial {
    double value = 0.0;
    Index rank = 0;
    std::vector<Eigen::MatrixXd> grads;
  };
  std::vector<Partial> partial(static_cast<std::size_t>(chunks));
  Eigen::MatrixXd amps(R, n);

  parallel_for(chunks, options_.threads, [&](std::ptrdiff_t c) {
    Partial& p = partial[static_cast<std::size_t>(c)];
    if (options_.gradient) {
      for (const auto& f : frames) p.grads.push_back(Eigen::MatrixXd::Zero(rows, f.rank()));
    }
    Eigen::MatrixXd K(rows, R);
    Eigen::VectorXd resid(rows), back(rows);
    const Index j_end = std::min<Index>(n, (c + 1) * kChunk);
    for (Index j = c * kChunk; j < j_end; ++j) {
      fill_frame_matrix(frames, stencils_, grid_.m, j, K);
      const auto x = X_.col(j);
      const SnapshotSolve s = solve_snapshot(K, x, options_.rank_tol);
      amps.col(j) = s.amplitudes;
      p.rank += s.rank;
      if (s.rank == 0) {
        resid = x;
      } else {
        p.value -= s.coeff.squaredNorm();
        resid = x - s.U1 * s.coeff;
      }
      if (!options_.gradient) continue;
      // d/dw^l_k of ||x - K a||^2 at the optimal a is -2 a^l_k T(d^l_j)^T resid.
      Index col = 0;
      for (std::size_t l = 0; l < frames.size(); ++l) {
        const Index r = frames[l].rank();
        if (r == 0) continue;
        apply_stencil_transpose_blocks(stencils_[l][static_cast<std::size_t>(j)], grid_.m, resid, back);
        for (Index k = 0; k < r; ++k, ++col) {
          p.grads[l].col(k).noalias() += (-2.0 * s.amplitudes[col]) * back;
        }
      }
    }
  });

  ObjectiveResult out;
  if (options_.gradient) {
    for (const auto& f : frames) out.gradients.push_back(Eigen::MatrixXd::Zero(rows, f.rank()));
  }
  for (const auto& p : partial) {
    out.value += p.value;
    out.rank_sum += p.rank;
    for (std::size_t l = 0; l < p.grads.size(); ++l) out.gradients[l] += p.grads[l];
  }
  for (std::size_t l = 0; l < out.gradients.size(); ++l) {
    const auto& mask = frames[l].mask;
    if (mask.empty()) continue;
    for (Index i = 0; i < rows; ++i) {
      if (mask[static_cast<std::size_t>(i)]) out.gradients[l].row(i).setZero();
    }
  }
  Index row = 0;
  for (const auto& f : frames) {
    out.amplitudes.push_back(amps.middleRows(row, f.rank()));
    row += f.rank();
  }
  return out;
}

ObjectiveResult objective_and_gradient(const Eigen::MatrixXd& X, const std::vector<FrameBasis>& frames,
                                       const FrameShifts& shifts, const Grid1D& grid,
                                       const ObjectiveOptions& options) {
  return ReducedObjective(X, shifts, grid, options).evaluate(frames);
}

Eigen::MatrixXd reconstruct(const Decomposition& dec, const Grid1D& grid) {
  const Index n = dec.shifts.snapshots();
  Index rows = 0;
  for (const auto& f : dec.frames) rows = std::max(rows, f.modes.rows());
  if (rows == 0) throw InputError("reconstruct: decomposition has no modes");
  dec.validate(rows, n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, n);
  Eigen::VectorXd combo(rows), shifted(rows);
  for (std::size_t l = 0; l < dec.frames.size(); ++l) {
    if (dec.frames[l].rank() == 0) continue;
    for (Index j = 0; j < n; ++j) {
      combo.noalias() = dec.frames[l].modes * dec.amplitudes[l].col(j);
      const auto st = build_stencil(dec.shifts.d(static_cast<Index>(l), j), grid, dec.shifts.spec);
      apply_stencil_blocks(st, grid.m, combo, shifted);
      out.col(j) += shifted;
    }
  }
  return out;
}

double residual(const Eigen::MatrixXd& X, const Decomposition& dec, const Grid1D& grid) {
  const Eigen::MatrixXd approx = reconstruct(dec, grid);
  if (approx.rows() != X.rows() || approx.cols() != X.cols()) throw InputError("residual: shape mismatch");
  return (X - approx).squaredNorm();
}

Eigen::VectorXd flatten_modes(const std::vector<FrameBasis>& frames) {
  Index size = 0;
  for (const auto& f : frames) size += f.modes.size();
  Eigen::VectorXd flat(size);
  Index pos = 0;
  for (const auto& f : frames) {
    // Eigen storage is column-major, i.e. mode-major / row-minor.
    flat.segment(pos, f.modes.size()) = Eigen::Map<const Eigen::VectorXd>(f.modes.data(), f.modes.size());
    pos += f.modes.size();
  }
  return flat;
}

void unflatten_modes(const Eigen::VectorXd& flat, std::vector<FrameBasis>& frames) {
  Index pos = 0;
  for (auto& f : frames) {
    if (pos + f.modes.size() > flat.size()) throw InputError("unflatten_modes: vector too short");
    Eigen::Map<Eigen::VectorXd>(f.modes.data(), f.modes.size()) = flat.segment(pos, f.modes.size());
    pos += f.modes.size();
  }
  if (pos != flat.size()) throw InputError("unflatten_modes: vector too long");
}

Eigen::VectorXd flatten_gradients(const std::vector<Eigen::MatrixXd>& gradients) {
  Index size = 0;
  for (const auto& g : gradients) size += g.size();
  Eigen::VectorXd flat(size);
  Index pos = 0;
  for (const auto& g : gradients) {
    flat.segment(pos, g.size()) = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
    pos += g.size();
  }
  return flat;
}

}  // namespace spod
