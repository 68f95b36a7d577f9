#include "spod/snapshot.hpp"

#include "spod/errors.hpp"

#include <cmath>
#include <sstream>

namespace spod {

double Grid1D::length() const {
  return boundary == Boundary::periodic ? static_cast<double>(m) * h
                                        : static_cast<double>(m - 1) * h;
}

void Grid1D::validate() const {
  if (m < 2) throw InputError("grid needs at least 2 nodes, got " + std::to_string(m));
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("grid mesh width must be positive");
}

Grid1D Grid1D::periodic(Index m, double length) {
  Grid1D g{m, length / static_cast<double>(m), Boundary::periodic};
  g.validate();
  return g;
}

Grid1D Grid1D::non_periodic(Index m, double length) {
  if (m < 2) throw InputError("grid needs at least 2 nodes");
  Grid1D g{m, length / static_cast<double>(m - 1), Boundary::non_periodic};
  g.validate();
  return g;
}

void TimeAxis::validate() const {
  if (t.empty()) throw InputError("time axis is empty");
  for (std::size_t j = 1; j < t.size(); ++j) {
    if (!(t[j] > t[j - 1])) {
      throw InputError("time axis is not strictly increasing at index " + std::to_string(j));
    }
  }
}

TimeAxis TimeAxis::uniform(Index n, double final_time) {
  if (n < 1) throw InputError("time axis needs at least one value");
  TimeAxis axis;
  axis.t.resize(static_cast<std::size_t>(n));
  if (n == 1) {
    axis.t[0] = 0.0;
    return axis;
  }
  const double dt = final_time / static_cast<double>(n - 1);
  for (Index j = 0; j < n; ++j) axis.t[static_cast<std::size_t>(j)] = static_cast<double>(j) * dt;
  axis.validate();
  return axis;
}

const VariableBlock& SnapshotSet::block(std::string_view name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return b;
  }
  throw InputError("unknown variable block '" + std::string(name) + "'");
}

void SnapshotSet::validate() const {
  grid.validate();
  time.validate();
  if (blocks.empty()) throw InputError("snapshot set has no variable blocks");
  Index next = 0;
  for (const auto& b : blocks) {
    if (b.begin != next) throw InputError("variable blocks do not tile the rows at '" + b.name + "'");
    if (b.size != grid.m) {
      std::ostringstream msg;
      msg << "block '" << b.name << "' has " << b.size << " rows, grid has " << grid.m;
      throw InputError(msg.str());
    }
    next = b.end();
  }
  if (next != X.rows()) throw InputError("variable blocks do not cover all snapshot rows");
  if (X.cols() != time.n()) throw InputError("snapshot column count differs from time axis length");
}

std::vector<VariableBlock> SnapshotSet::stacked_blocks(const std::vector<std::string>& names,
                                                       Index height) {
  std::vector<VariableBlock> out;
  Index begin = 0;
  for (const auto& name : names) {
    out.push_back({name, begin, height});
    begin += height;
  }
  return out;
}

double relative_error(const Eigen::MatrixXd& X, const Eigen::MatrixXd& approx) {
  if (X.rows() != approx.rows() || X.cols() != approx.cols()) {
    std::ostringstream msg;
    msg << "relative_error: shape " << X.rows() << "x" << X.cols() << " vs " << approx.rows() << "x"
        << approx.cols();
    throw InputError(msg.str());
  }
  const double denom = X.squaredNorm();
  if (denom == 0.0) throw DegenerateDataError("relative_error: snapshot matrix is zero");
  return (X - approx).squaredNorm() / denom;
}

double relative_error(const SnapshotSet& X, const Eigen::MatrixXd& approx) {
  return relative_error(X.X, approx);
}

double apply_measure(double squared_ratio, ErrorMeasure measure) {
  return measure == ErrorMeasure::root ? std::sqrt(squared_ratio) : squared_ratio;
}

std::string_view to_string(ErrorMeasure measure) {
  return measure == ErrorMeasure::root ? "root" : "squared";
}

ErrorMeasure parse_error_measure(std::string_view text) {
  if (text == "root") return ErrorMeasure::root;
  if (text == "squared" || text == "squared-ratio") return ErrorMeasure::squared_ratio;
  throw ConfigError("unknown error measure '" + std::string(text) + "' (expected root|squared)");
}

ScaledSnapshots scale_variables(const SnapshotSet& X) {
  ScaledSnapshots out{X, {}};
  if (X.blocks.empty()) throw InputError("scale_variables: no blocks");
  std::vector<double> norms;
  for (const auto& b : X.blocks) {
    const double nrm = X.X.middleRows(b.begin, b.size).norm();
    if (nrm == 0.0) throw DegenerateDataError("scale_variables: block '" + b.name + "' has zero norm");
    norms.push_back(nrm);
  }
  for (std::size_t k = 0; k < X.blocks.size(); ++k) {
    const double factor = k == 0 ? 1.0 : norms[0] / norms[k];
    const auto& b = X.blocks[k];
    out.set.X.middleRows(b.begin, b.size) *= factor;
    out.factors.push_back(factor);
  }
  return out;
}

Eigen::MatrixXd unscale_variables(const Eigen::MatrixXd& X, const std::vector<VariableBlock>& blocks,
                                  const std::vector<double>& factors) {
  if (blocks.size() != factors.size()) throw InputError("unscale_variables: factor count mismatch");
  Eigen::MatrixXd out = X;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].end() > X.rows()) throw InputError("unscale_variables: block exceeds matrix rows");
    out.middleRows(blocks[k].begin, blocks[k].size) /= factors[k];
  }
  return out;
}

Eigen::MatrixXd center_rows(const Eigen::MatrixXd& X, Eigen::VectorXd* mean) {
  if (X.cols() < 1) throw InputError("center_rows: need at least one column");
  Eigen::VectorXd mu = X.rowwise().mean();
  Eigen::MatrixXd out = X.colwise() - mu;
  if (mean) *mean = std::move(mu);
  return out;
}

CenteredSnapshots center_rows(const SnapshotSet& X) {
  CenteredSnapshots out{X, {}};
  out.set.X = center_rows(X.X, &out.mean);
  return out;
}

}  // namespace spod
