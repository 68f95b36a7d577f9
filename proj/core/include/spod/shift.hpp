#pragma once

#include "spod/snapshot.hpp"

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace spod {

enum class ShiftBoundary { periodic, constant_extrapolation };

std::string_view to_string(ShiftBoundary boundary);
ShiftBoundary parse_shift_boundary(std::string_view text);

/// Boundary handling and interpolation degree of the discrete shift T(d).
///
/// Sign conventions follow the two continuous operators:
///   periodic:                (T(d) f)(x) = f((x + d) mod L)
///   constant extrapolation:  (T(d) f)(x) = f(x - d), clamped to f(0), f(L)
/// so on a grid T(+h) maps [1,2,3,4] to [2,3,4,1] (periodic) and to
/// [1,1,2,3] (constant extrapolation).
struct ShiftSpec {
  ShiftBoundary boundary = ShiftBoundary::periodic;
  int interp_degree = 3;  ///< 1 (linear) or 3 (cubic Lagrange)

  void validate() const;
};

/// Grid-index form of T(d): (T v)_i = sum_s weights[s] * v[i + first + s],
/// with indices wrapped (periodic) or clamped to [0, m-1].
struct ShiftStencil {
  Index cells = 0;  ///< integer part k of the source displacement k + rho
  Index first = 0;  ///< offset of the first stencil node relative to i
  std::vector<double> weights;
  ShiftBoundary boundary = ShiftBoundary::periodic;
};

/// Source displacements within this many cells of an integer are treated as
/// grid multiples.
inline constexpr double kGridSnapTolerance = 1e-9;

ShiftStencil build_stencil(double d, const Grid1D& grid, const ShiftSpec& spec);

/// Lagrange weights for evaluating at `rho` in [0,1) from the nodes
/// {0,1} (degree 1) or {-1,0,1,2} (degree 3).
std::vector<double> lagrange_weights(double rho, int degree);

void apply_stencil(const ShiftStencil& stencil, Eigen::Ref<const Eigen::VectorXd> v,
                   Eigen::Ref<Eigen::VectorXd> out);
void apply_stencil_transpose(const ShiftStencil& stencil, Eigen::Ref<const Eigen::VectorXd> v,
                             Eigen::Ref<Eigen::VectorXd> out);

/// T(d) v for a length-m vector, matrix-free.
Eigen::VectorXd apply_shift(const Eigen::VectorXd& v, double d, const Grid1D& grid,
                            const ShiftSpec& spec);
/// T(d)^T v, the exact transpose of apply_shift for the same arguments.
Eigen::VectorXd apply_shift_transpose(const Eigen::VectorXd& v, double d, const Grid1D& grid,
                                      const ShiftSpec& spec);

/// Applies the stencil independently to each consecutive length-m segment of
/// a stacked multi-variable vector (one segment per variable block).
void apply_stencil_blocks(const ShiftStencil& stencil, Index m, Eigen::Ref<const Eigen::VectorXd> v,
                          Eigen::Ref<Eigen::VectorXd> out);
void apply_stencil_transpose_blocks(const ShiftStencil& stencil, Index m,
                                    Eigen::Ref<const Eigen::VectorXd> v,
                                    Eigen::Ref<Eigen::VectorXd> out);

/// Dense m x m matrix of T(d). Intended for tests and small diagnostics.
Eigen::MatrixXd shift_matrix(double d, const Grid1D& grid, const ShiftSpec& spec);

}  // namespace spod
