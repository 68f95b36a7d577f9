#include "spod/config.hpp"

#include "spod/errors.hpp"
#include "spod/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace spod {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokens(std::string_view s, std::string_view seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string_view::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_bool(const std::string& v, const std::string& ctx) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(ctx + "expected true or false, got '" + v + "'");
}

fs::path resolve(const std::string& v, const fs::path& base) {
  fs::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

}  // namespace

WindowSchedule parse_windows(std::string_view text) {
  WindowSchedule s;
  for (const auto& item : tokens(text, ", ")) {
    const auto parts = tokens(item, ":");
    if (parts.size() != 4) throw ConfigError("window '" + item + "' must be t0:t1:x0:x1");
    TrackWindow w;
    try {
      w.t_begin = io::parse_integer(parts[0], "window t0");
      w.t_end = io::parse_integer(parts[1], "window t1");
      w.x_begin = io::parse_integer(parts[2], "window x0");
      w.x_end = io::parse_integer(parts[3], "window x1");
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    s.windows.push_back(w);
  }
  if (s.windows.empty()) throw ConfigError("empty window schedule");
  return s;
}

std::string format_windows(const WindowSchedule& schedule) {
  std::string out;
  for (std::size_t k = 0; k < schedule.windows.size(); ++k) {
    const auto& w = schedule.windows[k];
    if (k) out += ", ";
    out += std::to_string(w.t_begin) + ':' + std::to_string(w.t_end) + ':' + std::to_string(w.x_begin) + ':' +
           std::to_string(w.x_end);
  }
  return out;
}

void RunConfig::validate() const {
  if (snapshots.empty()) throw ConfigError("[input] snapshots is required");
  if (frames.empty()) throw ConfigError("at least one [frame NAME] section is required");
  if (r0.size() != frames.size()) {
    throw ConfigError("[spod] r0 has " + std::to_string(r0.size()) + " entries for " + std::to_string(frames.size()) +
                      " frames");
  }
  if (!(tol > 0.0)) throw ConfigError("[spod] tol must be positive");
  if (p_max && *p_max < 0) throw ConfigError("[spod] p_max must be non-negative");
  if (threads < 1) throw ConfigError("[spod] threads must be at least 1");
  shift_spec.validate();
  optimizer.validate();
  std::set<std::string> names;
  for (const auto& f : frames) {
    if (!names.insert(f.name).second) throw ConfigError("duplicate frame '" + f.name + "'");
    const int sources = (f.shift_file ? 1 : 0) + (f.track ? 1 : 0) + (f.zero ? 1 : 0);
    if (sources != 1) {
      throw ConfigError("frame '" + f.name + "' needs exactly one of shift_file or track");
    }
    if (f.track && f.track->smoothing < 0) throw ConfigError("frame '" + f.name + "': smoothing must be >= 0");
  }
}

RunConfig parse_config(std::istream& in, const fs::path& base_dir, std::string_view source) {
  RunConfig c;
  std::string section, frame_name;
  std::set<std::string> seen_sections;
  std::string line;
  int lineno = 0;
  bool have_r0 = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string ctx = std::string(source) + ": line " + std::to_string(lineno) + ": ";
    const auto hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(ctx + "unterminated section header");
      const auto parts = tokens(text.substr(1, text.size() - 2), " \t");
      if (parts.empty()) throw ConfigError(ctx + "empty section header");
      section = parts[0];
      if (section == "frame") {
        if (parts.size() != 2) throw ConfigError(ctx + "expected [frame NAME]");
        frame_name = parts[1];
        for (const auto& f : c.frames) {
          if (f.name == frame_name) throw ConfigError(ctx + "duplicate frame '" + frame_name + "'");
        }
        c.frames.push_back({});
        c.frames.back().name = frame_name;
        c.frames.back().shift_column = frame_name;
      } else if (section == "input" || section == "spod" || section == "optimizer" || section == "output") {
        if (parts.size() != 1) throw ConfigError(ctx + "unexpected text in section header");
        if (!seen_sections.insert(section).second) throw ConfigError(ctx + "duplicate section [" + section + "]");
      } else {
        throw ConfigError(ctx + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(ctx + "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string val = trim(text.substr(eq + 1));
    if (section.empty()) throw ConfigError(ctx + "key '" + key + "' outside a section");
    auto number = [&](const std::string& v) {
      try {
        return io::parse_double(v, key);
      } catch (const ParseError& e) {
        throw ConfigError(ctx + e.what());
      }
    };
    auto integer = [&](const std::string& v) {
      try {
        return io::parse_integer(v, key);
      } catch (const ParseError& e) {
        throw ConfigError(ctx + e.what());
      }
    };
    auto unknown = [&] { throw ConfigError(ctx + "unknown key '" + key + "' in [" + section + "]"); };
    try {
      if (section == "input") {
        if (key == "snapshots") c.snapshots = resolve(val, base_dir);
        else if (key == "scale") c.scale = parse_bool(val, ctx);
        else if (key == "center") c.center = parse_bool(val, ctx);
        else unknown();
      } else if (section == "spod") {
        if (key == "r0") {
          c.r0.clear();
          for (const auto& t : tokens(val, ", \t")) c.r0.push_back(integer(t));
          have_r0 = true;
        } else if (key == "tol") {
          c.tol = number(val);
        } else if (key == "p_max") {
          if (val == "n") c.p_max.reset();
          else c.p_max = integer(val);
        } else if (key == "error_measure") {
          c.measure = parse_error_measure(val);
        } else if (key == "rank_tol") {
          c.rank_tol = number(val);
        } else if (key == "warm_start") {
          c.warm_start = parse_bool(val, ctx);
        } else if (key == "threads") {
          c.threads = static_cast<int>(integer(val));
        } else if (key == "boundary") {
          c.shift_spec.boundary = parse_shift_boundary(val);
        } else if (key == "interp_degree") {
          c.shift_spec.interp_degree = static_cast<int>(integer(val));
        } else {
          unknown();
        }
      } else if (section == "optimizer") {
        auto& o = c.optimizer;
        if (key == "memory") o.memory = static_cast<int>(integer(val));
        else if (key == "grad_tol") o.grad_tol = number(val);
        else if (key == "relative_grad_tol") o.relative_grad_tol = parse_bool(val, ctx);
        else if (key == "max_iters") o.max_iters = static_cast<int>(integer(val));
        else if (key == "c1") o.sufficient_decrease = number(val);
        else if (key == "c2") o.curvature = number(val);
        else if (key == "max_line_search") o.max_line_search = static_cast<int>(integer(val));
        else unknown();
      } else if (section == "output") {
        if (key == "dir") c.output_dir = resolve(val, base_dir);
        else unknown();
      } else if (section == "frame") {
        auto& f = c.frames.back();
        auto recipe = [&]() -> TrackRecipe& {
          if (!f.track) throw ConfigError(ctx + "'" + key + "' requires 'track = BLOCK' earlier in the section");
          return *f.track;
        };
        if (key == "shift_file") {
          f.shift_file = resolve(val, base_dir);
        } else if (key == "shift_column") {
          f.shift_column = val;
        } else if (key == "track") {
          if (val == "zero") {
            f.zero = true;
          } else {
            f.track = TrackRecipe{};
            f.track->block = val;
          }
        } else if (key == "statistic") {
          recipe().statistic = parse_track_statistic(val);
        } else if (key == "windows") {
          recipe().windows = parse_windows(val);
        } else if (key == "smoothing") {
          recipe().smoothing = integer(val);
        } else if (key == "mask") {
          f.mask_blocks = tokens(val, ", \t");
        } else {
          unknown();
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(ctx + e.what());
    }
  }
  if (!have_r0) {
    c.r0.assign(c.frames.size(), 1);
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_config(in, fs::absolute(path).parent_path(), path.string());
}

void write_config(const RunConfig& c, std::ostream& out) {
  const auto abs = [](const fs::path& p) { return fs::absolute(p).lexically_normal().string(); };
  const auto b = [](bool v) { return v ? "true" : "false"; };
  out << "[input]\n";
  out << "snapshots = " << abs(c.snapshots) << '\n';
  out << "scale = " << b(c.scale) << '\n';
  out << "center = " << b(c.center) << "\n\n";
  out << "[spod]\n";
  out << "r0 =";
  for (Index r : c.r0) out << ' ' << r;
  out << '\n';
  out << "tol = " << io::format_double(c.tol) << '\n';
  out << "p_max = " << (c.p_max ? std::to_string(*c.p_max) : std::string("n")) << '\n';
  out << "error_measure = " << to_string(c.measure) << '\n';
  out << "rank_tol = " << io::format_double(c.rank_tol) << '\n';
  out << "warm_start = " << b(c.warm_start) << '\n';
  out << "threads = " << c.threads << '\n';
  out << "boundary = " << to_string(c.shift_spec.boundary) << '\n';
  out << "interp_degree = " << c.shift_spec.interp_degree << "\n\n";
  const auto& o = c.optimizer;
  out << "[optimizer]\n";
  out << "memory = " << o.memory << '\n';
  out << "grad_tol = " << io::format_double(o.grad_tol) << '\n';
  out << "relative_grad_tol = " << b(o.relative_grad_tol) << '\n';
  out << "max_iters = " << o.max_iters << '\n';
  out << "c1 = " << io::format_double(o.sufficient_decrease) << '\n';
  out << "c2 = " << io::format_double(o.curvature) << '\n';
  out << "max_line_search = " << o.max_line_search << "\n\n";
  for (const auto& f : c.frames) {
    out << "[frame " << f.name << "]\n";
    if (f.shift_file) {
      out << "shift_file = " << abs(*f.shift_file) << '\n';
      out << "shift_column = " << f.shift_column << '\n';
    } else if (f.zero) {
      out << "track = zero\n";
    } else if (f.track) {
      out << "track = " << f.track->block << '\n';
      out << "statistic = " << to_string(f.track->statistic) << '\n';
      if (f.track->windows) out << "windows = " << format_windows(*f.track->windows) << '\n';
      out << "smoothing = " << f.track->smoothing << '\n';
    }
    if (!f.mask_blocks.empty()) {
      out << "mask =";
      for (const auto& m : f.mask_blocks) out << ' ' << m;
      out << '\n';
    }
    out << '\n';
  }
  out << "[output]\n";
  out << "dir = " << abs(c.output_dir) << '\n';
}

FrameShifts resolve_shifts(const RunConfig& c, const SnapshotSet& X) {
  FrameShifts shifts;
  shifts.spec = c.shift_spec;
  const Index n = X.cols();
  shifts.d = Eigen::MatrixXd::Zero(static_cast<Index>(c.frames.size()), n);
  for (std::size_t l = 0; l < c.frames.size(); ++l) {
    const auto& f = c.frames[l];
    const auto row = static_cast<Index>(l);
    if (f.shift_file) {
      const auto table = io::read_shifts_csv(*f.shift_file);
      if (static_cast<Index>(table.t.size()) != n) {
        throw InputError("frame '" + f.name + "': shift file has " + std::to_string(table.t.size()) +
                         " rows, the snapshots have " + std::to_string(n) + " columns");
      }
      const double tscale = std::max(1.0, std::abs(X.time.final_time()));
      for (Index j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (std::abs(table.t[k] - X.time.t[k]) > 1e-9 * tscale) {
          throw InputError("frame '" + f.name + "': shift file time " + io::format_double(table.t[k]) +
                           " does not match snapshot time " + io::format_double(X.time.t[k]) + " at row " +
                           std::to_string(j));
        }
      }
      shifts.d.row(row) = table.d.row(table.column(f.shift_column));
    } else if (f.track) {
      TrackOptions opts;
      opts.statistic = f.track->statistic;
      opts.windows = f.track->windows;
      opts.smoothing = f.track->smoothing;
      const auto signal = combine_blocks(X, parse_block_combination(f.track->block));
      const auto d = frame_shifts_from_positions(track_front(signal, X.grid, opts), X.grid, c.shift_spec.boundary);
      for (Index j = 0; j < n; ++j) shifts.d(row, j) = d[static_cast<std::size_t>(j)];
    }
  }
  return shifts;
}

std::vector<ZeroMask> resolve_masks(const RunConfig& c, const SnapshotSet& X) {
  std::vector<ZeroMask> masks;
  bool any = false;
  for (const auto& f : c.frames) {
    ZeroMask mask(static_cast<std::size_t>(X.rows()), false);
    for (const auto& name : f.mask_blocks) {
      const auto& b = X.block(name);
      for (Index i = b.begin; i < b.end(); ++i) mask[static_cast<std::size_t>(i)] = true;
      any = true;
    }
    masks.push_back(std::move(mask));
  }
  if (!any) masks.clear();
  return masks;
}

GreedyConfig make_greedy_config(const RunConfig& c, const SnapshotSet& X) {
  GreedyConfig g;
  g.r0 = c.r0;
  g.tol = c.tol;
  g.p_max = c.p_max ? *c.p_max : X.cols();
  g.measure = c.measure;
  g.optimizer = c.optimizer;
  g.rank_tol = c.rank_tol;
  g.warm_start = c.warm_start;
  g.threads = c.threads;
  g.masks = resolve_masks(c, X);
  return g;
}

}  // namespace spod
