#include "cli.hpp"

#include "spod/config.hpp"
#include "spod/errors.hpp"
#include "spod/greedy.hpp"
#include "spod/io.hpp"
#include "spod/pod.hpp"
#include "spod/synthgen.hpp"
#include "spod/tracking.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace spod::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

struct Globals {
  int threads = 0;
  std::string measure;
  bool quiet = false;
};

ErrorMeasure measure_or(const Globals& g, ErrorMeasure fallback) {
  return g.measure.empty() ? fallback : parse_error_measure(g.measure);
}

/// Snapshots as the decomposition sees them, plus what is needed to undo
/// the preprocessing.
struct Prepared {
  SnapshotSet set;
  std::vector<double> factors;
  Eigen::VectorXd mean;
};

Prepared prepare(const SnapshotSet& raw, bool scale, bool center) {
  Prepared p;
  p.set = raw;
  if (scale) {
    auto s = scale_variables(raw);
    p.set = std::move(s.set);
    p.factors = std::move(s.factors);
  }
  if (center) {
    auto c = center_rows(p.set);
    p.set = std::move(c.set);
    p.mean = std::move(c.mean);
  }
  return p;
}

Eigen::MatrixXd undo_preparation(Eigen::MatrixXd X, const std::vector<VariableBlock>& blocks,
                                 const std::vector<double>& factors, const Eigen::VectorXd& mean) {
  if (mean.size() > 0) X.colwise() += mean;
  if (!factors.empty()) X = unscale_variables(X, blocks, factors);
  return X;
}

io::ShiftTable shift_table(const FrameShifts& shifts, const TimeAxis& time, std::vector<std::string> names) {
  io::ShiftTable t;
  t.t = time.t;
  t.names = std::move(names);
  t.d = shifts.d;
  return t;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  out << text;
}

std::string join(const std::vector<Index>& v, const char* sep) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? sep : "") + std::to_string(v[k]);
  return s;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string scenario;
  fs::path out, csv, shifts_out, config_out;
  std::optional<Index> m, n;
  std::optional<double> final_time;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  SnapshotSet set;
  FrameShifts shifts;
  std::vector<std::string> names;
  RunConfig cfg;
  if (a.scenario == "wave") {
    synth::WaveParams p;
    if (a.m) p.m = *a.m;
    if (a.n) p.n = *a.n;
    if (a.final_time) p.final_time = *a.final_time;
    set = synth::wave_snapshots(p);
    shifts = synth::wave_frame_shifts(p, set.time);
    names = {"left", "right"};
    cfg.r0 = {1, 1};
    cfg.tol = 1e-6;
  } else if (a.scenario == "three-signal") {
    if (a.final_time) throw InputError("three-signal: the time interval is fixed to [0, 2 pi]");
    auto c = synth::three_signal_default(a.m.value_or(256), a.n.value_or(129));
    set = std::move(c.snapshots);
    shifts = std::move(c.shifts);
    names = c.frame_names;
    cfg.r0 = {1, 1, 1};
    cfg.tol = 1e-6;
  } else {
    auto p = synth::CrossingParams::detonation_like(a.m.value_or(256), a.n.value_or(256));
    if (a.final_time) p.final_time = *a.final_time;
    auto c = synth::crossing_fronts(p);
    set = std::move(c.snapshots);
    shifts = std::move(c.shifts);
    names = c.frame_names;
    cfg.r0.assign(names.size(), 1);
    if (!p.stationary.empty()) cfg.r0.back() = 0;
    cfg.tol = 0.01;
  }
  io::write_snapshots(set, a.out);
  out << "wrote " << a.out.string() << " (" << set.rows() << " x " << set.cols() << ")\n";
  if (!a.csv.empty()) io::write_snapshots_csv(set, a.csv);
  if (!a.shifts_out.empty()) io::write_shifts_csv(shift_table(shifts, set.time, names), a.shifts_out);
  if (!a.config_out.empty()) {
    if (a.shifts_out.empty()) throw InputError("--config-out needs --shifts-out");
    cfg.snapshots = fs::absolute(a.out);
    cfg.shift_spec = shifts.spec;
    for (std::size_t l = 0; l < names.size(); ++l) {
      FrameConfig f;
      f.name = names[l];
      f.shift_column = names[l];
      f.shift_file = fs::absolute(a.shifts_out);
      cfg.frames.push_back(f);
    }
    cfg.output_dir = fs::absolute(a.config_out).parent_path() / (a.config_out.stem().string() + "-out");
    std::ofstream cf(a.config_out);
    write_config(cfg, cf);
  }
  return exit_ok;
}

// ------------------------------------------------------------------- track

struct TrackArgs {
  fs::path snapshots, config, out, out_dir;
  std::string block, statistic = "temporal-difference", windows, boundary = "constant-extrapolation", name;
  Index smoothing = 0;
};

int cmd_track(const TrackArgs& a, std::ostream& out) {
  if (!a.config.empty()) {
    if (a.out_dir.empty()) throw InputError("track --config needs --out-dir");
    const auto cfg = load_config(a.config);
    const auto X = io::read_snapshots(cfg.snapshots);
    const auto shifts = resolve_shifts(cfg, X);
    fs::create_directories(a.out_dir);
    for (std::size_t l = 0; l < cfg.frames.size(); ++l) {
      if (!cfg.frames[l].track) continue;
      io::ShiftTable t;
      t.t = X.time.t;
      t.names = {cfg.frames[l].name};
      t.d = shifts.d.row(static_cast<Index>(l));
      const auto path = a.out_dir / (cfg.frames[l].name + ".csv");
      io::write_shifts_csv(t, path);
      out << "wrote " << path.string() << '\n';
    }
    return exit_ok;
  }
  if (a.snapshots.empty() || a.block.empty() || a.out.empty()) {
    throw CLI::ValidationError("track", "needs --snapshots, --block and --out (or --config and --out-dir)");
  }
  const auto X = io::read_snapshots(a.snapshots);
  TrackOptions opts;
  opts.statistic = parse_track_statistic(a.statistic);
  if (!a.windows.empty()) opts.windows = parse_windows(a.windows);
  opts.smoothing = a.smoothing;
  const auto pos = track_front(combine_blocks(X, parse_block_combination(a.block)), X.grid, opts);
  const auto d = frame_shifts_from_positions(pos, X.grid, parse_shift_boundary(a.boundary));
  io::ShiftTable t;
  t.t = X.time.t;
  t.names = {a.name.empty() ? std::string("tracked") : a.name};
  t.d = Eigen::Map<const Eigen::RowVectorXd>(d.data(), static_cast<Index>(d.size()));
  io::write_shifts_csv(t, a.out);
  out << "wrote " << a.out.string() << '\n';
  return exit_ok;
}

// --------------------------------------------------------------------- pod

struct PodArgs {
  fs::path snapshots, sv_out, modes_out;
  double tol = 0.01;
  bool center = false, scale = false;
  std::optional<Index> rank;
};

int cmd_pod(const PodArgs& a, const Globals& g, std::ostream& out) {
  const auto raw = io::read_snapshots(a.snapshots);
  const auto p = prepare(raw, a.scale, a.center);
  const auto measure = measure_or(g, ErrorMeasure::root);
  const Eigen::VectorXd sv = singular_values(p.set.X);
  const Index r = modes_for_tolerance(sv, a.tol, measure);
  out << "modes " << r << '\n';
  out << "tol " << format_double(a.tol) << " measure " << to_string(measure) << '\n';
  if (!a.sv_out.empty()) {
    const auto curve = pod_error_curve(sv, sv.size());
    std::ostringstream csv;
    csv << "modes[count],sigma[data],error_squared[ratio],error_root[ratio]\n";
    for (Index k = 0; k <= sv.size(); ++k) {
      const double e = curve[static_cast<std::size_t>(k)];
      csv << k << ',' << (k == 0 ? std::string("nan") : format_double(sv(k - 1))) << ',' << format_double(e) << ','
          << format_double(apply_measure(e, ErrorMeasure::root)) << '\n';
    }
    write_text(a.sv_out, csv.str());
  }
  if (!a.modes_out.empty()) {
    io::write_matrix(pod_truncate(p.set.X, a.rank.value_or(r)).modes, a.modes_out);
  }
  return exit_ok;
}

// -------------------------------------------------------------------- spod

struct SpodArgs {
  fs::path config, out_dir;
};

struct RunOutcome {
  SpodResult result;
  Prepared prepared;
  RunConfig config;
  std::vector<std::string> names;
};

RunOutcome run_spod(RunConfig cfg, const Globals& g, std::ostream& err) {
  if (g.threads > 0) cfg.threads = g.threads;
  if (!g.measure.empty()) cfg.measure = parse_error_measure(g.measure);
  cfg.validate();
  const auto raw = io::read_snapshots(cfg.snapshots);
  RunOutcome o;
  o.prepared = prepare(raw, cfg.scale, cfg.center);
  for (const auto& f : cfg.frames) o.names.push_back(f.name);
  auto shifts = resolve_shifts(cfg, raw);
  auto greedy = make_greedy_config(cfg, o.prepared.set);
  if (!g.quiet) {
    greedy.progress = [&err, &o](const GreedyProgress& pr) {
      err << (pr.iteration == 0 ? "initial" : "iteration " + std::to_string(pr.iteration));
      if (pr.chosen >= 0) err << " added mode to " << o.names[static_cast<std::size_t>(pr.chosen)];
      err << ": r = [" << join(pr.r, " ") << "], error " << format_double(pr.error) << '\n';
    };
  }
  o.result = spod_decompose(o.prepared.set, shifts, greedy);
  o.config = std::move(cfg);
  return o;
}

std::string report_text(const RunOutcome& o) {
  const auto& rep = o.result.report;
  std::ostringstream s;
  s << "termination=" << to_string(rep.termination) << '\n';
  s << "optimizer_failed=" << (rep.optimizer_failed ? "true" : "false") << '\n';
  s << "greedy_iterations=" << rep.iterations.size() << '\n';
  s << "modes=" << join(rep.final_r, " ") << '\n';
  s << "total_modes=" << o.result.decomposition.total_modes() << '\n';
  s << "measure=" << to_string(rep.measure) << '\n';
  s << "tol=" << format_double(o.config.tol) << '\n';
  s << "error=" << format_double(rep.final_error) << '\n';
  s << "error_squared_ratio=" << format_double(rep.final_squared_error) << '\n';
  s << "initial_error=" << format_double(rep.initial_error) << '\n';
  s << "initial_solve=" << to_string(rep.initial_solve.status) << " iterations " << rep.initial_solve.iterations
    << " evaluations " << rep.initial_solve.evaluations << '\n';
  return s.str();
}

std::string report_csv(const RunOutcome& o) {
  const auto& rep = o.result.report;
  std::ostringstream s;
  s << "iteration[count],chosen_frame[name],total_modes[count],error[ratio]";
  for (const auto& n : o.names) s << ",candidate_" << n << "[ratio]";
  s << '\n';
  Index total = 0;
  for (Index r : o.config.r0) total += r;
  s << 0 << ",," << total << ',' << format_double(rep.initial_error);
  for (std::size_t k = 0; k < o.names.size(); ++k) s << ',';
  s << '\n';
  for (const auto& it : rep.iterations) {
    Index modes = 0;
    for (Index r : it.r) modes += r;
    s << it.p << ',' << o.names[static_cast<std::size_t>(it.chosen)] << ',' << modes << ',' << format_double(it.error);
    for (double e : it.candidate_errors) s << ',' << format_double(e);
    s << '\n';
  }
  return s.str();
}

bool converged(const GreedyReport& rep) {
  return rep.termination == Termination::tolerance_met && !rep.optimizer_failed;
}

int cmd_spod(const SpodArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  auto cfg = load_config(a.config);
  if (!a.out_dir.empty()) cfg.output_dir = fs::absolute(a.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto o = run_spod(cfg, g, err);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir = o.config.output_dir;
  fs::create_directories(dir);
  io::DecompositionMeta meta;
  meta.grid = o.prepared.set.grid;
  meta.time = o.prepared.set.time;
  meta.blocks = o.prepared.set.blocks;
  meta.frame_names = o.names;
  for (const auto& f : o.config.frames) meta.mask_blocks.push_back(f.mask_blocks);
  meta.scale_factors = o.prepared.factors;
  meta.row_mean = o.prepared.mean;
  io::write_decomposition(o.result.decomposition, meta, dir / "decomposition");
  io::write_shifts_csv(shift_table(o.result.decomposition.shifts, meta.time, o.names), dir / "shifts.csv");
  write_text(dir / "report.txt", report_text(o));
  write_text(dir / "report.csv", report_csv(o));
  std::ostringstream manifest;
  write_config(o.config, manifest);
  write_text(dir / "manifest.cfg", manifest.str());

  out << report_text(o);
  out << "output=" << dir.string() << '\n';
  err << "elapsed " << secs << " s\n";
  if (!converged(o.result.report)) {
    err << (o.result.report.optimizer_failed ? "optimizer failed" : "tolerance not met within p_max iterations")
        << '\n';
    return exit_convergence_failure;
  }
  return exit_ok;
}

// ------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  fs::path decomposition, out, csv;
};

SnapshotSet load_reconstruction(const fs::path& dir) {
  const auto [dec, meta] = io::read_decomposition(dir);
  SnapshotSet s;
  s.grid = meta.grid;
  s.time = meta.time;
  s.blocks = meta.blocks;
  s.X = undo_preparation(reconstruct(dec, meta.grid), meta.blocks, meta.scale_factors, meta.row_mean);
  return s;
}

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  const auto s = load_reconstruction(a.decomposition);
  io::write_snapshots(s, a.out);
  if (!a.csv.empty()) io::write_snapshots_csv(s, a.csv);
  out << "wrote " << a.out.string() << '\n';
  return exit_ok;
}

// ------------------------------------------------------------------- error

struct ErrorArgs {
  fs::path snapshots, approx, decomposition;
};

int cmd_error(const ErrorArgs& a, const Globals& g, std::ostream& out) {
  if (a.approx.empty() == a.decomposition.empty()) {
    throw CLI::ValidationError("error", "give exactly one of --approx and --decomposition");
  }
  const auto X = io::read_snapshots(a.snapshots);
  const auto Y = a.approx.empty() ? load_reconstruction(a.decomposition) : io::read_snapshots(a.approx);
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw InputError("shape mismatch: " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) + " vs " +
                     std::to_string(Y.rows()) + "x" + std::to_string(Y.cols()));
  }
  const double e = relative_error(X.X, Y.X);
  const auto measure = measure_or(g, ErrorMeasure::root);
  out << "squared_ratio=" << format_double(e) << '\n';
  out << "error=" << format_double(apply_measure(e, measure)) << " measure=" << to_string(measure) << '\n';
  return exit_ok;
}

// ----------------------------------------------------------- export-curves

struct CurvesArgs {
  fs::path config, out;
  Index max_modes = 20;
};

int cmd_export_curves(const CurvesArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  auto cfg = load_config(a.config);
  const auto raw = io::read_snapshots(cfg.snapshots);
  const auto prepared = prepare(raw, cfg.scale, cfg.center);
  std::ostringstream csv;
  csv << "method[name],modes[count],error_squared[ratio],error_root[ratio]\n";
  auto row = [&](const char* method, Index k, double e) {
    csv << method << ',' << k << ',' << format_double(e) << ',' << format_double(apply_measure(e, ErrorMeasure::root))
        << '\n';
  };
  const auto pod_curve = pod_error_curve(singular_values(prepared.set.X), a.max_modes);
  for (std::size_t k = 0; k < pod_curve.size(); ++k) row("pod", static_cast<Index>(k), pod_curve[k]);
  const auto centred = pod_error_curve(singular_values(center_rows(prepared.set.X)), a.max_modes);
  for (std::size_t k = 0; k < centred.size(); ++k) row("pod-centered", static_cast<Index>(k), centred[k]);

  Index start = 0;
  for (Index r : cfg.r0) start += r;
  if (start <= a.max_modes) {
    cfg.tol = std::numeric_limits<double>::min();
    cfg.p_max = a.max_modes - start;
    const auto o = run_spod(cfg, g, err);
    const auto& rep = o.result.report;
    const auto squared = [&](double e) { return rep.measure == ErrorMeasure::root ? e * e : e; };
    Index modes = start;
    row("spod", modes, squared(rep.initial_error));
    for (const auto& it : rep.iterations) row("spod", ++modes, squared(it.error));
  }
  write_text(a.out, csv.str());
  out << "wrote " << a.out.string() << '\n';
  return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shifted proper orthogonal decomposition of transport-dominated snapshot data", "spod"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads for candidate and snapshot loops (default: config or 1)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--error-measure", g.measure, "Error measure compared against tolerances")
      ->check(CLI::IsMember({"root", "squared", "squared-ratio"}));
  app.add_flag("-q,--quiet", g.quiet, "Suppress progress output");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic snapshot set");
  generate->fallthrough();
  generate->add_option("scenario", gen.scenario)->required()->check(CLI::IsMember({"wave", "three-signal", "crossing"}));
  generate->add_option("-o,--out", gen.out, "Snapshot file")->required();
  generate->add_option("--csv", gen.csv, "Also write the snapshots as CSV");
  generate->add_option("--shifts-out", gen.shifts_out, "Ground-truth shift CSV");
  generate->add_option("--config-out", gen.config_out, "Starter run configuration (needs --shifts-out)");
  generate->add_option("--m", gen.m, "Grid points")->check(CLI::PositiveNumber);
  generate->add_option("--n", gen.n, "Snapshots")->check(CLI::PositiveNumber);
  generate->add_option("--final-time", gen.final_time, "Final time");

  TrackArgs tr;
  auto* track = app.add_subcommand("track", "Estimate frame shifts from the snapshots");
  track->fallthrough();
  track->add_option("--snapshots", tr.snapshots);
  track->add_option("--block", tr.block, "Tracked block or combination, e.g. density+velocity");
  track->add_option("--statistic", tr.statistic)
      ->check(CLI::IsMember({"temporal-difference", "spatial-gradient", "peak"}));
  track->add_option("--windows", tr.windows, "Schedule t0:t1:x0:x1,... in column and grid indices");
  track->add_option("--smoothing", tr.smoothing)->check(CLI::NonNegativeNumber);
  track->add_option("--boundary", tr.boundary, "Shift operator the shifts are meant for")
      ->check(CLI::IsMember({"periodic", "constant-extrapolation", "constant"}));
  track->add_option("--name", tr.name, "Frame name used as the CSV column");
  track->add_option("-o,--out", tr.out, "Shift CSV");
  track->add_option("--config", tr.config, "Track every tracked frame of a run configuration");
  track->add_option("--out-dir", tr.out_dir, "Directory for per-frame shift CSVs (with --config)");

  PodArgs pa;
  auto* pod = app.add_subcommand("pod", "POD baseline: mode count for a tolerance and singular value decay");
  pod->fallthrough();
  pod->add_option("--snapshots", pa.snapshots)->required();
  pod->add_option("--tol", pa.tol)->check(CLI::PositiveNumber);
  pod->add_flag("--center", pa.center, "Subtract the temporal mean first");
  pod->add_flag("--scale", pa.scale, "Scale variable blocks to a common norm first");
  pod->add_option("--sv-out", pa.sv_out, "Singular value decay CSV");
  pod->add_option("--modes-out", pa.modes_out, "Write the POD modes as a matrix file");
  pod->add_option("--rank", pa.rank, "Number of modes for --modes-out (default: the tolerance count)");

  SpodArgs sa;
  auto* spodc = app.add_subcommand("spod", "Run the greedy shifted POD");
  spodc->fallthrough();
  spodc->add_option("-c,--config", sa.config)->required();
  spodc->add_option("--out-dir", sa.out_dir, "Override [output] dir");

  ReconstructArgs ra;
  auto* rec = app.add_subcommand("reconstruct", "Rebuild snapshots from a decomposition directory");
  rec->fallthrough();
  rec->add_option("--decomposition", ra.decomposition)->required();
  rec->add_option("-o,--out", ra.out)->required();
  rec->add_option("--csv", ra.csv);

  ErrorArgs ea;
  auto* errc = app.add_subcommand("error", "Relative error of an approximation");
  errc->fallthrough();
  errc->add_option("--snapshots", ea.snapshots)->required();
  errc->add_option("--approx", ea.approx, "Approximation snapshot file");
  errc->add_option("--decomposition", ea.decomposition, "Decomposition directory");

  CurvesArgs ca;
  auto* curves = app.add_subcommand("export-curves", "Error versus mode count for POD and shifted POD");
  curves->fallthrough();
  curves->add_option("-c,--config", ca.config)->required();
  curves->add_option("--max-modes", ca.max_modes)->check(CLI::PositiveNumber);
  curves->add_option("-o,--out", ca.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*track) return cmd_track(tr, out);
    if (*pod) return cmd_pod(pa, g, out);
    if (*spodc) return cmd_spod(sa, g, out, err);
    if (*rec) return cmd_reconstruct(ra, out);
    if (*errc) return cmd_error(ea, g, out);
    if (*curves) return cmd_export_curves(ca, g, out, err);
  } catch (const CLI::ValidationError& e) {
    err << "spod: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "spod: " << e.what() << '\n';
    return exit_data_error;
  }
  return exit_usage;
}

}  // namespace spod::cli
