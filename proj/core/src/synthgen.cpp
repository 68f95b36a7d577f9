#include "spod/synthgen.hpp"

#include "spod/errors.hpp"
#include "spod/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace spod::synth {

namespace {

double wrap(double x, double L) {
  double r = std::fmod(x, L);
  if (r < 0.0) r += L;
  return r;
}

}  // namespace

void WaveParams::validate() const {
  if (!(c > 0.0)) throw InputError("wave: c must be positive");
  if (!(rho_ref > 0.0)) throw InputError("wave: rho_ref must be positive");
  if (!(pulse_width > 0.0)) throw InputError("wave: pulse width must be positive");
  if (!(length > 0.0) || m < 2 || n < 1) throw InputError("wave: invalid discretization");
}

double wave_initial_density(const WaveParams& p, double x) {
  const double z = (wrap(x, p.length) - p.pulse_center) / p.pulse_width;
  return std::exp(-z * z);
}

SnapshotSet wave_snapshots(const WaveParams& p) {
  p.validate();
  SnapshotSet s;
  s.grid = Grid1D::periodic(p.m, p.length);
  s.time = TimeAxis::uniform(p.n, p.final_time);
  s.blocks = SnapshotSet::stacked_blocks({"density", "velocity"}, p.m);
  s.X.resize(2 * p.m, p.n);
  const double uscale = p.c / (2.0 * p.rho_ref);
  for (Index j = 0; j < p.n; ++j) {
    const double ct = p.c * s.time.t[static_cast<std::size_t>(j)];
    for (Index i = 0; i < p.m; ++i) {
      const double x = s.grid.x(i);
      const double left = wave_initial_density(p, x + ct);   // q_-(x + ct)
      const double right = wave_initial_density(p, x - ct);  // q_+(x - ct)
      s.X(i, j) = 0.5 * left + 0.5 * right;
      s.X(p.m + i, j) = uscale * (right - left);
    }
  }
  return s;
}

FrameShifts wave_frame_shifts(const WaveParams& p, const TimeAxis& time, int interp_degree) {
  FrameShifts f;
  f.spec = {ShiftBoundary::periodic, interp_degree};
  f.d.resize(2, time.n());
  for (Index j = 0; j < time.n(); ++j) {
    const double ct = p.c * time.t[static_cast<std::size_t>(j)];
    f.d(0, j) = ct;
    f.d(1, j) = -ct;
  }
  return f;
}

SnapshotSet three_signal_snapshots(const Profile& q1, const Profile& q2, const Profile& q3,
                                   const Grid1D& grid, const TimeAxis& time) {
  grid.validate();
  time.validate();
  if (grid.boundary != Boundary::periodic) throw ConfigError("three_signal_snapshots needs a periodic grid");
  const double L = grid.length();
  SnapshotSet s;
  s.grid = grid;
  s.time = time;
  s.blocks = SnapshotSet::stacked_blocks({"q"}, grid.m);
  s.X.resize(grid.m, time.n());
  for (Index j = 0; j < time.n(); ++j) {
    const double t = time.t[static_cast<std::size_t>(j)];
    for (Index i = 0; i < grid.m; ++i) {
      const double x = grid.x(i);
      s.X(i, j) = q1(wrap(x + t, L)) + q2(wrap(x - t, L)) + std::cos(t) * q3(x);
    }
  }
  return s;
}

ThreeSignalCase three_signal_default(Index m, Index n) {
  const double two_pi = 2.0 * std::numbers::pi;
  ThreeSignalCase c;
  c.q1 = [](double x) { return std::exp(-4.0 * (x - 2.0) * (x - 2.0)); };
  c.q2 = [](double x) { return 0.5 * std::exp(-(x - 4.0) * (x - 4.0)) * std::cos(3.0 * x); };
  c.q3 = [](double x) { return 0.3 * std::cos(2.0 * x) + 0.2 * std::sin(5.0 * x); };
  const Grid1D grid = Grid1D::periodic(m, two_pi);
  const TimeAxis time = TimeAxis::uniform(n, two_pi);
  c.snapshots = three_signal_snapshots(c.q1, c.q2, c.q3, grid, time);
  c.shifts.spec = {ShiftBoundary::periodic, 3};
  c.shifts.d = Eigen::MatrixXd::Zero(3, n);
  for (Index j = 0; j < n; ++j) {
    c.shifts.d(0, j) = time.t[static_cast<std::size_t>(j)];
    c.shifts.d(1, j) = -time.t[static_cast<std::size_t>(j)];
  }
  c.frame_names = {"plus", "minus", "standing"};
  return c;
}

double PiecewiseLinear::operator()(double t) const {
  if (times.empty()) return 0.0;
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
  return (1.0 - w) * values[k - 1] + w * values[k];
}

void CrossingParams::validate() const {
  if (m < 2 || n < 2) throw InputError("crossing_fronts: need m >= 2 and n >= 2");
  if (!(length > 0.0) || !(final_time > 0.0)) throw InputError("crossing_fronts: invalid domain or time");
  if (blocks.empty()) throw InputError("crossing_fronts: no variable blocks");
  auto check = [&](const Transport& tr) {
    if (tr.block_weights.size() != blocks.size()) {
      throw ConfigError("transport '" + tr.name + "' needs one weight per block");
    }
    if (tr.position.times.size() != tr.position.values.size() || tr.position.times.empty()) {
      throw ConfigError("transport '" + tr.name + "' has an invalid trajectory");
    }
    if (!std::is_sorted(tr.position.times.begin(), tr.position.times.end())) {
      throw ConfigError("transport '" + tr.name + "' trajectory knots are not ordered in time");
    }
    if (tr.width.times.empty()) throw ConfigError("transport '" + tr.name + "' has no width");
    for (double w : tr.width.values) {
      if (!(w > 0.0)) throw ConfigError("transport '" + tr.name + "' width must be positive");
    }
    if (!periodic) {
      for (double x : tr.position.values) {
        if (x < 0.0 || x > length) {
          throw ConfigError("transport '" + tr.name + "' leaves the non-periodic domain [0, L]");
        }
      }
    }
  };
  for (const auto& tr : transports) check(tr);
  for (const auto& tr : stationary) check(tr);
}

CrossingParams CrossingParams::detonation_like(Index m, Index n) {
  CrossingParams p;
  p.m = m;
  p.n = n;
  const double h = p.length / static_cast<double>(p.m - 1);
  // Reaction front and leading shock diverge, then merge at t = 0.3 and
  // continue together as one detonation wave.
  Transport front{"reaction-front", ProfileKind::step, {{0.0, 0.3, 1.0}, {0.10, 0.28, 0.875}},
                  {{0.0, 1.0}, {2.5 * h, 4.0 * h}}, PiecewiseLinear::constant(1.0), {-0.4, 1.0}};
  Transport shock{"leading-shock", ProfileKind::step, {{0.0, 0.15, 0.3, 1.0}, {0.12, 0.24, 0.28, 0.875}},
                  PiecewiseLinear::constant(2.0 * h), {{0.0, 0.3, 0.35, 1.0}, {0.6, 0.6, 1.0, 1.0}},
                  {1.0, 0.0}};
  // Reflected wave leaves the merge point, bounces off x = 0 at t ~ 0.611 and
  // reaches the nozzle at x = 0.2 at t ~ 0.833, where the re-reflected wave
  // starts moving left again.
  const double t_wall = 0.3 + 0.28 / 0.9;
  const double t_nozzle = t_wall + 0.2 / 0.9;
  Transport reflected{"reflected-wave", ProfileKind::pulse,
                      {{0.0, 0.3, t_wall, 1.0}, {0.28, 0.28, 0.0, 0.9 * (1.0 - t_wall)}},
                      PiecewiseLinear::constant(3.0 * h), {{0.0, 0.3, 0.35, 1.0}, {0.0, 0.0, 0.5, 0.4}},
                      {1.0, 0.0}};
  Transport rereflected{"re-reflected-wave", ProfileKind::pulse,
                        {{0.0, t_nozzle, 1.0}, {0.2, 0.2, 0.2 - 0.9 * (1.0 - t_nozzle)}},
                        PiecewiseLinear::constant(3.0 * h),
                        {{0.0, t_nozzle, t_nozzle + 0.03, 1.0}, {0.0, 0.0, 0.25, 0.2}}, {1.0, 0.0}};
  p.transports = {front, shock, reflected, rereflected};
  Transport nozzle{"nozzle", ProfileKind::pulse, PiecewiseLinear::constant(0.2),
                   PiecewiseLinear::constant(0.03), {{0.0, 0.3, 1.0}, {0.0, 0.3, 0.15}}, {1.0, 0.0}};
  p.stationary = {nozzle};
  return p;
}

CrossingScenario crossing_fronts(const CrossingParams& p) {
  p.validate();
  CrossingScenario out;
  SnapshotSet& s = out.snapshots;
  s.grid = p.periodic ? Grid1D::periodic(p.m, p.length) : Grid1D::non_periodic(p.m, p.length);
  s.time = TimeAxis::uniform(p.n, p.final_time);
  s.blocks = SnapshotSet::stacked_blocks(p.blocks, p.m);
  const auto nb = static_cast<Index>(p.blocks.size());
  s.X = Eigen::MatrixXd::Zero(nb * p.m, p.n);
  const double L = s.grid.length();

  auto profile = [&](const Transport& tr, double xi, double width) {
    if (p.periodic) xi = wrap(xi + 0.5 * L, L) - 0.5 * L;
    const double z = xi / width;
    return tr.kind == ProfileKind::step ? 0.5 * (1.0 - std::tanh(z)) : std::exp(-z * z);
  };
  auto add = [&](const Transport& tr) {
    for (Index j = 0; j < p.n; ++j) {
      const double t = s.time.t[static_cast<std::size_t>(j)];
      const double a = tr.amplitude(t);
      if (a == 0.0) continue;
      const double c = tr.position(t), w = tr.width(t);
      for (Index i = 0; i < p.m; ++i) {
        const double v = a * profile(tr, s.grid.x(i) - c, w);
        for (Index b = 0; b < nb; ++b) s.X(b * p.m + i, j) += tr.block_weights[static_cast<std::size_t>(b)] * v;
      }
    }
  };
  for (const auto& tr : p.transports) add(tr);
  for (const auto& tr : p.stationary) add(tr);

  const Index frames = static_cast<Index>(p.transports.size()) + (p.stationary.empty() ? 0 : 1);
  out.shifts.spec = {p.periodic ? ShiftBoundary::periodic : ShiftBoundary::constant_extrapolation, 3};
  out.shifts.d = Eigen::MatrixXd::Zero(frames, p.n);
  for (std::size_t k = 0; k < p.transports.size(); ++k) {
    std::vector<double> pos;
    for (double t : s.time.t) pos.push_back(p.transports[k].position(t));
    const auto d = frame_shifts_from_positions(pos, s.grid, out.shifts.spec.boundary);
    for (Index j = 0; j < p.n; ++j) out.shifts.d(static_cast<Index>(k), j) = d[static_cast<std::size_t>(j)];
    out.frame_names.push_back(p.transports[k].name);
  }
  if (!p.stationary.empty()) out.frame_names.push_back("stationary");
  return out;
}

}  // namespace spod::synth
