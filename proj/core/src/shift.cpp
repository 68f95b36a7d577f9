#include "spod/shift.hpp"

#include "spod/errors.hpp"

#include <cmath>
#include <string>

namespace spod {

namespace {

inline Index wrap(Index i, Index m) {
  Index r = i % m;
  return r < 0 ? r + m : r;
}

inline Index clamp(Index i, Index m) { return i < 0 ? 0 : (i >= m ? m - 1 : i); }

inline Index resolve(Index i, Index m, ShiftBoundary boundary) {
  return boundary == ShiftBoundary::periodic ? wrap(i, m) : clamp(i, m);
}

}  // namespace

std::string_view to_string(ShiftBoundary boundary) {
  return boundary == ShiftBoundary::periodic ? "periodic" : "constant-extrapolation";
}

ShiftBoundary parse_shift_boundary(std::string_view text) {
  if (text == "periodic") return ShiftBoundary::periodic;
  if (text == "constant-extrapolation" || text == "constant") {
    return ShiftBoundary::constant_extrapolation;
  }
  throw ConfigError("unknown shift boundary '" + std::string(text) +
                    "' (expected periodic|constant-extrapolation)");
}

void ShiftSpec::validate() const {
  if (interp_degree != 1 && interp_degree != 3) {
    throw ConfigError("unsupported interpolation degree " + std::to_string(interp_degree) +
                      " (supported: 1, 3)");
  }
}

std::vector<double> lagrange_weights(double rho, int degree) {
  if (degree == 1) return {1.0 - rho, rho};
  if (degree == 3) {
    const double a = rho + 1.0, b = rho, c = rho - 1.0, e = rho - 2.0;
    return {-b * c * e / 6.0, a * c * e / 2.0, -a * b * e / 2.0, a * b * c / 6.0};
  }
  throw ConfigError("unsupported interpolation degree " + std::to_string(degree));
}

ShiftStencil build_stencil(double d, const Grid1D& grid, const ShiftSpec& spec) {
  spec.validate();
  grid.validate();
  if (!std::isfinite(d)) throw InputError("shift must be finite");

  // Displacement of the sampled source position relative to the target node.
  const double source = (spec.boundary == ShiftBoundary::periodic ? d : -d) / grid.h;
  const double nearest = std::round(source);

  ShiftStencil st;
  st.boundary = spec.boundary;
  if (std::abs(source - nearest) <= kGridSnapTolerance * std::max(1.0, std::abs(source))) {
    st.cells = static_cast<Index>(nearest);
    st.first = st.cells;
    st.weights = {1.0};
    return st;
  }
  const double k = std::floor(source);
  st.cells = static_cast<Index>(k);
  st.weights = lagrange_weights(source - k, spec.interp_degree);
  st.first = spec.interp_degree == 3 ? st.cells - 1 : st.cells;
  return st;
}

void apply_stencil(const ShiftStencil& st, Eigen::Ref<const Eigen::VectorXd> v,
                   Eigen::Ref<Eigen::VectorXd> out) {
  const Index m = v.size();
  const auto nw = static_cast<Index>(st.weights.size());
  if (nw == 1) {
    for (Index i = 0; i < m; ++i) out[i] = v[resolve(i + st.first, m, st.boundary)];
    return;
  }
  for (Index i = 0; i < m; ++i) {
    double acc = 0.0;
    for (Index s = 0; s < nw; ++s) acc += st.weights[s] * v[resolve(i + st.first + s, m, st.boundary)];
    out[i] = acc;
  }
}

void apply_stencil_transpose(const ShiftStencil& st, Eigen::Ref<const Eigen::VectorXd> v,
                             Eigen::Ref<Eigen::VectorXd> out) {
  const Index m = v.size();
  const auto nw = static_cast<Index>(st.weights.size());
  out.setZero();
  for (Index i = 0; i < m; ++i) {
    for (Index s = 0; s < nw; ++s) out[resolve(i + st.first + s, m, st.boundary)] += st.weights[s] * v[i];
  }
}

void apply_stencil_blocks(const ShiftStencil& st, Index m, Eigen::Ref<const Eigen::VectorXd> v,
                          Eigen::Ref<Eigen::VectorXd> out) {
  if (m <= 0 || v.size() % m != 0) throw InputError("stacked vector length is not a multiple of m");
  for (Index b = 0; b < v.size(); b += m) apply_stencil(st, v.segment(b, m), out.segment(b, m));
}

void apply_stencil_transpose_blocks(const ShiftStencil& st, Index m,
                                    Eigen::Ref<const Eigen::VectorXd> v,
                                    Eigen::Ref<Eigen::VectorXd> out) {
  if (m <= 0 || v.size() % m != 0) throw InputError("stacked vector length is not a multiple of m");
  for (Index b = 0; b < v.size(); b += m) {
    apply_stencil_transpose(st, v.segment(b, m), out.segment(b, m));
  }
}

Eigen::VectorXd apply_shift(const Eigen::VectorXd& v, double d, const Grid1D& grid,
                            const ShiftSpec& spec) {
  if (v.size() != grid.m) throw InputError("apply_shift: vector length differs from grid size");
  Eigen::VectorXd out(v.size());
  apply_stencil(build_stencil(d, grid, spec), v, out);
  return out;
}

Eigen::VectorXd apply_shift_transpose(const Eigen::VectorXd& v, double d, const Grid1D& grid,
                                      const ShiftSpec& spec) {
  if (v.size() != grid.m) throw InputError("apply_shift_transpose: vector length differs from grid size");
  Eigen::VectorXd out(v.size());
  apply_stencil_transpose(build_stencil(d, grid, spec), v, out);
  return out;
}

Eigen::MatrixXd shift_matrix(double d, const Grid1D& grid, const ShiftSpec& spec) {
  const ShiftStencil st = build_stencil(d, grid, spec);
  const Index m = grid.m;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index s = 0; s < static_cast<Index>(st.weights.size()); ++s) {
      T(i, resolve(i + st.first + s, m, st.boundary)) += st.weights[s];
    }
  }
  return T;
}

}  // namespace spod
