#pragma once

#include "spod/objective.hpp"
#include "spod/snapshot.hpp"

#include <functional>
#include <string>
#include <vector>

namespace spod::synth {

/// Linear acoustics rho_t + rho_ref u_x = 0, u_t + c^2/rho_ref rho_x = 0 on a
/// periodic domain, started from a Gaussian density pulse at rest.
struct WaveParams {
  double rho_ref = 1.0;
  double c = 1.0;
  double length = 1.0;
  Index m = 1024;
  Index n = 257;
  double final_time = 1.0;
  double pulse_center = 0.5;
  double pulse_width = 0.01;

  void validate() const;
};

/// rho0(x) = exp(-((x - center)/width)^2) evaluated at x mod L.
double wave_initial_density(const WaveParams& p, double x);

/// Samples rho = rho0(x+ct)/2 + rho0(x-ct)/2 and
/// u = c/(2 rho_ref) (rho0(x-ct) - rho0(x+ct)); blocks "density", "velocity".
SnapshotSet wave_snapshots(const WaveParams& p);

/// Shifts of the two analytic frames under the periodic operator:
/// frame 0 carries rho0(x+ct) (d = +c t), frame 1 carries rho0(x-ct) (d = -c t).
FrameShifts wave_frame_shifts(const WaveParams& p, const TimeAxis& time, int interp_degree = 3);

using Profile = std::function<double(double)>;

/// q(x,t) = q1(x+t) + q2(x-t) + cos(t) q3(x), arguments wrapped mod L.
/// Requires a periodic grid. Block name "q".
SnapshotSet three_signal_snapshots(const Profile& q1, const Profile& q2, const Profile& q3,
                                   const Grid1D& grid, const TimeAxis& time);

struct ThreeSignalCase {
  SnapshotSet snapshots;
  FrameShifts shifts;  ///< d = +t, -t, 0 under the periodic operator
  std::vector<std::string> frame_names;
  Profile q1, q2, q3;
};

/// Fixed smooth profiles on [0, 2 pi) with t in [0, 2 pi]. With n - 1
/// dividing m the shifts t_j are grid multiples.
ThreeSignalCase three_signal_default(Index m = 256, Index n = 129);

/// Piecewise-linear function of time, held constant outside its knots.
struct PiecewiseLinear {
  std::vector<double> times;
  std::vector<double> values;

  double operator()(double t) const;
  static PiecewiseLinear constant(double v) { return {{0.0}, {v}}; }
};

enum class ProfileKind {
  step,   ///< 0.5 (1 - tanh(xi / width)): 1 behind (left), 0 ahead
  pulse,  ///< exp(-(xi / width)^2)
};

struct Transport {
  std::string name;
  ProfileKind kind = ProfileKind::pulse;
  PiecewiseLinear position;           ///< centre x(t)
  PiecewiseLinear width;              ///< profile width in space units
  PiecewiseLinear amplitude = PiecewiseLinear::constant(1.0);
  std::vector<double> block_weights;  ///< one weight per variable block
};

struct CrossingParams {
  Index m = 256;
  Index n = 256;
  double length = 1.0;
  double final_time = 1.0;
  bool periodic = false;
  std::vector<std::string> blocks{"density", "species"};
  std::vector<Transport> transports;
  /// Stationary features share the last (zero-velocity) frame.
  std::vector<Transport> stationary;

  void validate() const;

  /// Four moving transports with a merge and a boundary reflection plus a
  /// stationary nozzle feature, on density and species blocks.
  static CrossingParams detonation_like(Index m = 256, Index n = 256);
};

struct CrossingScenario {
  SnapshotSet snapshots;
  FrameShifts shifts;  ///< one frame per transport, then one zero frame if any stationary
  std::vector<std::string> frame_names;
};

/// Superposes the transports and returns ground-truth frame shifts for the
/// constant-extrapolation operator (periodic operator if params.periodic).
CrossingScenario crossing_fronts(const CrossingParams& params);

}  // namespace spod::synth
