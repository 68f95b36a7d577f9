#include "spod/tracking.hpp"

#include "spod/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace spod {

std::string_view to_string(TrackStatistic s) {
  switch (s) {
    case TrackStatistic::temporal_difference: return "temporal-difference";
    case TrackStatistic::spatial_gradient: return "spatial-gradient";
    case TrackStatistic::peak: return "peak";
  }
  return "unknown";
}

TrackStatistic parse_track_statistic(std::string_view text) {
  if (text == "temporal-difference") return TrackStatistic::temporal_difference;
  if (text == "spatial-gradient") return TrackStatistic::spatial_gradient;
  if (text == "peak") return TrackStatistic::peak;
  throw ConfigError("unknown tracking statistic '" + std::string(text) +
                    "' (expected temporal-difference|spatial-gradient|peak)");
}

void WindowSchedule::validate(Index tracked_columns, Index m) const {
  if (windows.empty()) throw ConfigError("window schedule is empty");
  Index next = 0;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto& w = windows[k];
    std::ostringstream where;
    where << "window " << k << ": ";
    if (w.x_begin > w.x_end || w.t_begin > w.t_end) throw ConfigError(where.str() + "empty interval");
    if (w.x_begin < 0 || w.x_end >= m) throw ConfigError(where.str() + "space interval outside the grid");
    if (w.t_begin != next) {
      throw ConfigError(where.str() + "time intervals must be ordered, contiguous and start at 0");
    }
    next = w.t_end + 1;
  }
  if (next < tracked_columns) throw ConfigError("window schedule does not cover all tracked columns");
}

const TrackWindow& WindowSchedule::at(Index column) const {
  for (const auto& w : windows) {
    if (column >= w.t_begin && column <= w.t_end) return w;
  }
  throw ConfigError("no window covers column " + std::to_string(column));
}

namespace {

double statistic_at(const Eigen::MatrixXd& X, const Grid1D& grid, TrackStatistic stat, Index i, Index j) {
  switch (stat) {
    case TrackStatistic::temporal_difference: return X(i, j + 1) - X(i, j);
    case TrackStatistic::peak: return X(i, j);
    case TrackStatistic::spatial_gradient: {
      const Index m = grid.m;
      if (grid.boundary == Boundary::periodic) {
        return std::abs(X((i + 1) % m, j) - X((i + m - 1) % m, j)) / (2.0 * grid.h);
      }
      if (i == 0) return std::abs(X(1, j) - X(0, j)) / grid.h;
      if (i == m - 1) return std::abs(X(m - 1, j) - X(m - 2, j)) / grid.h;
      return std::abs(X(i + 1, j) - X(i - 1, j)) / (2.0 * grid.h);
    }
  }
  return 0.0;
}

}  // namespace

std::vector<double> track_front(const Eigen::MatrixXd& block, const Grid1D& grid, const TrackOptions& opt) {
  grid.validate();
  if (block.rows() != grid.m) throw InputError("track_front: block rows differ from grid size");
  const Index n = block.cols();
  if (n < 2) throw InputError("track_front: need at least two snapshots");
  const Index columns = opt.statistic == TrackStatistic::temporal_difference ? n - 1 : n;
  if (opt.windows) opt.windows->validate(columns, grid.m);

  std::vector<double> pos(static_cast<std::size_t>(n));
  for (Index j = 0; j < columns; ++j) {
    Index lo = 0, hi = grid.m - 1;
    if (opt.windows) {
      const auto& w = opt.windows->at(j);
      lo = w.x_begin;
      hi = w.x_end;
    }
    Index best = lo;
    double best_value = statistic_at(block, grid, opt.statistic, lo, j);
    for (Index i = lo + 1; i <= hi; ++i) {
      const double v = statistic_at(block, grid, opt.statistic, i, j);
      if (v > best_value) {
        best_value = v;
        best = i;
      }
    }
    pos[static_cast<std::size_t>(j)] = grid.x(best);
  }
  if (columns < n) pos.back() = pos[static_cast<std::size_t>(columns - 1)];
  if (opt.smoothing > 1) pos = moving_average(pos, opt.smoothing);
  return pos;
}

std::vector<double> center_shifts(const std::vector<double>& positions, const Grid1D& grid) {
  const double half = 0.5 * grid.length();
  std::vector<double> d;
  d.reserve(positions.size());
  for (double x : positions) d.push_back(x - half);
  return d;
}

std::vector<double> frame_shifts_from_positions(const std::vector<double>& positions, const Grid1D& grid,
                                                ShiftBoundary boundary) {
  auto d = center_shifts(positions, grid);
  if (boundary == ShiftBoundary::periodic) {
    for (double& v : d) v = -v;
  }
  return d;
}

std::vector<double> zero_frame(Index n) {
  if (n < 1) throw InputError("zero_frame: n must be >= 1");
  return std::vector<double>(static_cast<std::size_t>(n), 0.0);
}

std::vector<double> moving_average(const std::vector<double>& values, Index width) {
  if (width <= 1 || values.empty()) return values;
  const auto n = static_cast<Index>(values.size());
  const Index left = (width - 1) / 2, right = width / 2;
  std::vector<double> out(values.size());
  for (Index j = 0; j < n; ++j) {
    const Index a = std::max<Index>(0, j - left), b = std::min(n - 1, j + right);
    double sum = 0.0;
    for (Index k = a; k <= b; ++k) sum += values[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(j)] = sum / static_cast<double>(b - a + 1);
  }
  return out;
}

std::vector<BlockTerm> parse_block_combination(std::string_view text) {
  std::vector<BlockTerm> terms;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  const std::string bad = "malformed block combination '" + std::string(text) + "'";
  skip();
  while (pos < text.size()) {
    double sign = 1.0;
    if (text[pos] == '+' || text[pos] == '-') {
      if (text[pos] == '-') sign = -1.0;
      ++pos;
      skip();
    } else if (!terms.empty()) {
      throw ConfigError(bad);
    }
    double weight = 1.0;
    if (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) {
      const auto res = std::from_chars(text.data() + pos, text.data() + text.size(), weight);
      if (res.ec != std::errc{}) throw ConfigError(bad);
      pos = static_cast<std::size_t>(res.ptr - text.data());
      skip();
      if (pos >= text.size() || text[pos] != '*') throw ConfigError(bad);
      ++pos;
      skip();
    }
    const auto begin = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) ++pos;
    if (pos == begin) throw ConfigError(bad);
    terms.push_back({std::string(text.substr(begin, pos - begin)), sign * weight});
    skip();
  }
  if (terms.empty()) throw ConfigError("empty block combination");
  return terms;
}

std::string format_block_combination(const std::vector<BlockTerm>& terms) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double w = terms[k].weight;
    if (k) out << (w < 0 ? '-' : '+');
    else if (w < 0) out << '-';
    if (std::abs(w) != 1.0) out << std::abs(w) << '*';
    out << terms[k].block;
  }
  return out.str();
}

Eigen::MatrixXd combine_blocks(const SnapshotSet& X, const std::vector<BlockTerm>& terms) {
  if (terms.empty()) throw ConfigError("empty block combination");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.grid.m, X.cols());
  for (const auto& t : terms) {
    const auto& b = X.block(t.block);
    out += t.weight * X.X.middleRows(b.begin, b.size);
  }
  return out;
}

}  // namespace spod
