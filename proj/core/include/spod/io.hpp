#pragma once

#include "spod/objective.hpp"
#include "spod/snapshot.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spod::io {

/// Snapshot files: a text header of whitespace-separated key=value tokens,
/// then raw little-endian float64 values in column-major order.
///
///     spod-snapshots 1
///     m=4 n=2 h=0.25 boundary=periodic
///     block=q:4
///     time=0,0.5
///     data=float64-le-colmajor
///     <rows * n * 8 bytes>
///
/// `block=name:height` may repeat (row order); without it the file holds one
/// block "q". Without `time` the axis is 0, 1, ..., n-1. The binary section
/// starts right after the newline that ends the `data=` line.
inline constexpr std::string_view kSnapshotMagic = "spod-snapshots 1";
inline constexpr std::string_view kMatrixMagic = "spod-matrix 1";
inline constexpr std::string_view kDataLayout = "float64-le-colmajor";

void write_snapshots(const SnapshotSet& set, std::ostream& out);
void write_snapshots(const SnapshotSet& set, const std::filesystem::path& path);
SnapshotSet read_snapshots(std::istream& in, std::string_view source = "<stream>");
SnapshotSet read_snapshots(const std::filesystem::path& path);

/// Plain matrices (modes, amplitudes) in the same binary layout with a
/// `rows=R cols=C` header.
void write_matrix(const Eigen::MatrixXd& M, std::ostream& out);
void write_matrix(const Eigen::MatrixXd& M, const std::filesystem::path& path);
Eigen::MatrixXd read_matrix(std::istream& in, std::string_view source = "<stream>");
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// CSV interchange: header `block,x,<t_0>,...,<t_n-1>`, one row per grid
/// node and block. Values are written with 17 significant digits.
void write_snapshots_csv(const SnapshotSet& set, const std::filesystem::path& path);
SnapshotSet read_snapshots_csv(const std::filesystem::path& path, Boundary boundary);

/// Shift tables: header `t[time],<frame>[space],...`, one row per snapshot.
struct ShiftTable {
  std::vector<double> t;
  std::vector<std::string> names;
  Eigen::MatrixXd d;  ///< frames x snapshots

  Index column(std::string_view name) const;
};

void write_shifts_csv(const ShiftTable& table, const std::filesystem::path& path);
ShiftTable read_shifts_csv(const std::filesystem::path& path);

/// Metadata stored next to a decomposition so it can be reconstructed
/// without the original snapshots.
struct DecompositionMeta {
  Grid1D grid;
  TimeAxis time;
  std::vector<VariableBlock> blocks;
  std::vector<std::string> frame_names;
  std::vector<std::vector<std::string>> mask_blocks;
  std::vector<double> scale_factors;  ///< empty if unscaled
  Eigen::VectorXd row_mean;           ///< empty if not centred
};

void write_decomposition(const Decomposition& dec, const DecompositionMeta& meta,
                         const std::filesystem::path& dir);
std::pair<Decomposition, DecompositionMeta> read_decomposition(const std::filesystem::path& dir);

/// Shortest decimal representation that reads back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

}  // namespace spod::io
