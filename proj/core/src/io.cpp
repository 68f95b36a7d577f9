#include "spod/io.hpp"

#include "spod/errors.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace spod::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError(std::string(what) + ": cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError(std::string(what) + ": cannot parse integer '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

void write_data(const Eigen::MatrixXd& M, std::ostream& out) {
  const Index count = M.size();
  std::vector<char> bytes(static_cast<std::size_t>(count) * 8);
  for (Index k = 0; k < count; ++k) {
    auto bits = std::bit_cast<std::uint64_t>(M.data()[k]);
    for (int b = 0; b < 8; ++b) bytes[static_cast<std::size_t>(k) * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ParseError("write failed");
}

void read_data(std::istream& in, Eigen::MatrixXd& M, std::string_view source) {
  const auto count = static_cast<std::size_t>(M.size());
  std::vector<char> bytes(count * 8);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != bytes.size()) {
    std::ostringstream msg;
    msg << source << ": data section truncated: expected " << count << " float64 elements, found " << got / 8;
    if (got % 8) msg << " (plus " << got % 8 << " stray bytes)";
    throw ParseError(msg.str());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(std::string(source) + ": unexpected bytes after the data section (expected " +
                     std::to_string(count) + " float64 elements)");
  }
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[k * 8 + b])) << (8 * b);
    const double v = std::bit_cast<double>(bits);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << source << ": non-finite value at element " << k << " (row " << k % static_cast<std::size_t>(M.rows())
          << ", column " << k / static_cast<std::size_t>(M.rows()) << ")";
      throw ParseError(msg.str());
    }
    M.data()[k] = v;
  }
}

struct Header {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<int> lines;
};

/// Reads key=value tokens until the `data=` token, leaving the stream at the
/// first byte of the binary section.
Header read_header(std::istream& in, std::string_view magic, std::string_view source) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != magic) {
    throw ParseError(std::string(source) + ": line 1: expected '" + std::string(magic) + "'");
  }
  Header h;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream tokens(line);
    std::string tok;
    bool data = false;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ParseError(std::string(source) + ": line " + std::to_string(lineno) + ": malformed token '" + tok +
                         "' (expected key=value)");
      }
      h.entries.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
      h.lines.push_back(lineno);
      if (h.entries.back().first == "data") data = true;
    }
    if (data) {
      if (h.entries.back().first != "data") {
        throw ParseError(std::string(source) + ": line " + std::to_string(lineno) + ": 'data' must be the last token");
      }
      if (h.entries.back().second != kDataLayout) {
        throw ParseError(std::string(source) + ": line " + std::to_string(lineno) + ": unsupported data layout '" +
                         h.entries.back().second + "'");
      }
      return h;
    }
  }
  throw ParseError(std::string(source) + ": header ended without a 'data=" + std::string(kDataLayout) + "' line");
}

std::string where(std::string_view source, const Header& h, std::size_t k) {
  return std::string(source) + ": line " + std::to_string(h.lines[k]) + ": ";
}

Boundary parse_boundary(std::string_view v, const std::string& ctx) {
  if (v == "periodic") return Boundary::periodic;
  if (v == "non-periodic") return Boundary::non_periodic;
  throw ParseError(ctx + "unknown boundary '" + std::string(v) + "'");
}

std::string_view boundary_name(Boundary b) { return b == Boundary::periodic ? "periodic" : "non-periodic"; }

std::string join_doubles(const std::vector<double>& v, char sep) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += sep;
    s += format_double(v[k]);
  }
  return s;
}

}  // namespace

void write_snapshots(const SnapshotSet& set, std::ostream& out) {
  set.validate();
  out << kSnapshotMagic << '\n';
  out << "m=" << set.grid.m << " n=" << set.cols() << " h=" << format_double(set.grid.h)
      << " boundary=" << boundary_name(set.grid.boundary) << '\n';
  for (const auto& b : set.blocks) out << "block=" << b.name << ':' << b.size << '\n';
  out << "time=" << join_doubles(set.time.t, ',') << '\n';
  out << "data=" << kDataLayout << '\n';
  write_data(set.X, out);
}

void write_snapshots(const SnapshotSet& set, const fs::path& path) {
  auto out = open_out(path);
  write_snapshots(set, out);
}

SnapshotSet read_snapshots(std::istream& in, std::string_view source) {
  const Header h = read_header(in, kSnapshotMagic, source);
  SnapshotSet s;
  long long m = -1, n = -1;
  double hval = -1.0;
  bool have_boundary = false, have_time = false;
  std::vector<std::pair<std::string, long long>> blocks;
  for (std::size_t k = 0; k + 1 < h.entries.size(); ++k) {
    const auto& [key, val] = h.entries[k];
    const std::string ctx = where(source, h, k);
    try {
      if (key == "m") {
        m = parse_integer(val, "m");
      } else if (key == "n") {
        n = parse_integer(val, "n");
      } else if (key == "h") {
        hval = parse_double(val, "h");
      } else if (key == "boundary") {
        s.grid.boundary = parse_boundary(val, ctx);
        have_boundary = true;
      } else if (key == "block") {
        const auto colon = val.rfind(':');
        if (colon == std::string::npos || colon == 0) throw ParseError("block must be name:height");
        blocks.emplace_back(val.substr(0, colon), parse_integer(val.substr(colon + 1), "block height"));
      } else if (key == "time") {
        for (const auto& t : split(val, ',')) s.time.t.push_back(parse_double(t, "time"));
        have_time = true;
      } else {
        throw ParseError("unknown key '" + key + "'");
      }
    } catch (const ParseError& e) {
      if (std::string_view(e.what()).starts_with(source)) throw;
      throw ParseError(ctx + e.what());
    }
  }
  const std::string hdr = std::string(source) + ": header: ";
  if (m < 2) throw ParseError(hdr + "missing or invalid m");
  if (n < 1) throw ParseError(hdr + "missing or invalid n");
  if (!(hval > 0.0)) throw ParseError(hdr + "missing or invalid h");
  if (!have_boundary) throw ParseError(hdr + "missing boundary");
  s.grid.m = m;
  s.grid.h = hval;
  if (blocks.empty()) blocks.emplace_back("q", m);
  Index begin = 0;
  for (const auto& [name, height] : blocks) {
    if (height != m) {
      throw ParseError(hdr + "block '" + name + "' has height " + std::to_string(height) + ", expected m = " +
                       std::to_string(m));
    }
    s.blocks.push_back({name, begin, static_cast<Index>(height)});
    begin += height;
  }
  if (!have_time) {
    for (long long j = 0; j < n; ++j) s.time.t.push_back(static_cast<double>(j));
  }
  if (static_cast<long long>(s.time.t.size()) != n) {
    throw ParseError(hdr + "time axis has " + std::to_string(s.time.t.size()) + " values, expected n = " +
                     std::to_string(n));
  }
  try {
    s.time.validate();
  } catch (const InputError& e) {
    throw ParseError(hdr + e.what());
  }
  s.X.resize(begin, n);
  read_data(in, s.X, source);
  return s;
}

SnapshotSet read_snapshots(const fs::path& path) {
  auto in = open_in(path);
  return read_snapshots(in, path.string());
}

void write_matrix(const Eigen::MatrixXd& M, std::ostream& out) {
  out << kMatrixMagic << '\n' << "rows=" << M.rows() << " cols=" << M.cols() << '\n';
  out << "data=" << kDataLayout << '\n';
  write_data(M, out);
}

void write_matrix(const Eigen::MatrixXd& M, const fs::path& path) {
  auto out = open_out(path);
  write_matrix(M, out);
}

Eigen::MatrixXd read_matrix(std::istream& in, std::string_view source) {
  const Header h = read_header(in, kMatrixMagic, source);
  long long rows = -1, cols = -1;
  for (std::size_t k = 0; k + 1 < h.entries.size(); ++k) {
    const auto& [key, val] = h.entries[k];
    if (key == "rows") rows = parse_integer(val, "rows");
    else if (key == "cols") cols = parse_integer(val, "cols");
    else throw ParseError(where(source, h, k) + "unknown key '" + key + "'");
  }
  if (rows < 0 || cols < 0) throw ParseError(std::string(source) + ": header: missing rows/cols");
  Eigen::MatrixXd M(rows, cols);
  read_data(in, M, source);
  return M;
}

Eigen::MatrixXd read_matrix(const fs::path& path) {
  auto in = open_in(path);
  return read_matrix(in, path.string());
}

void write_snapshots_csv(const SnapshotSet& set, const fs::path& path) {
  set.validate();
  auto out = open_out(path);
  out << "block,x";
  for (double t : set.time.t) out << ',' << format_double(t);
  out << '\n';
  for (const auto& b : set.blocks) {
    for (Index i = 0; i < b.size; ++i) {
      out << b.name << ',' << format_double(set.grid.x(i));
      for (Index j = 0; j < set.cols(); ++j) out << ',' << format_double(set.X(b.begin + i, j));
      out << '\n';
    }
  }
}

SnapshotSet read_snapshots_csv(const fs::path& path, Boundary boundary) {
  auto in = open_in(path);
  const std::string src = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(src + ": empty file");
  const auto head = split(trim(line), ',');
  if (head.size() < 3 || head[0] != "block" || head[1] != "x") {
    throw ParseError(src + ": line 1: expected header 'block,x,<times...>'");
  }
  SnapshotSet s;
  for (std::size_t k = 2; k < head.size(); ++k) s.time.t.push_back(parse_double(head[k], src + ": line 1: time"));
  const auto n = static_cast<Index>(s.time.t.size());
  std::vector<std::string> names;
  std::vector<double> xs;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    const std::string ctx = src + ": line " + std::to_string(lineno);
    if (static_cast<Index>(cells.size()) != n + 2) {
      throw ParseError(ctx + ": expected " + std::to_string(n + 2) + " fields, found " + std::to_string(cells.size()));
    }
    if (names.empty() || names.back() != cells[0]) {
      for (const auto& nm : names) {
        if (nm == cells[0]) throw ParseError(ctx + ": block '" + cells[0] + "' is not contiguous");
      }
      names.push_back(cells[0]);
    }
    xs.push_back(parse_double(cells[1], ctx));
    std::vector<double> row;
    for (Index j = 0; j < n; ++j) {
      row.push_back(parse_double(cells[static_cast<std::size_t>(j + 2)], ctx));
      if (!std::isfinite(row.back())) throw ParseError(ctx + ": non-finite value");
    }
    rows.push_back(std::move(row));
  }
  if (names.empty()) throw ParseError(src + ": no data rows");
  const auto total = static_cast<Index>(rows.size());
  const Index m = total / static_cast<Index>(names.size());
  if (m * static_cast<Index>(names.size()) != total || m < 2) throw ParseError(src + ": blocks have unequal heights");
  s.grid = {m, xs[1] - xs[0], boundary};
  s.blocks = SnapshotSet::stacked_blocks(names, m);
  s.X.resize(total, n);
  for (Index i = 0; i < total; ++i) {
    for (Index j = 0; j < n; ++j) s.X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  try {
    s.validate();
  } catch (const InputError& e) {
    throw ParseError(src + ": " + e.what());
  }
  return s;
}

Index ShiftTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return static_cast<Index>(k);
  }
  throw InputError("shift table has no frame '" + std::string(name) + "'");
}

void write_shifts_csv(const ShiftTable& table, const fs::path& path) {
  if (static_cast<Index>(table.names.size()) != table.d.rows() ||
      static_cast<Index>(table.t.size()) != table.d.cols()) {
    throw InputError("write_shifts_csv: table shape mismatch");
  }
  auto out = open_out(path);
  out << "t[time]";
  for (const auto& nm : table.names) out << ',' << nm << "[space]";
  out << '\n';
  for (Index j = 0; j < table.d.cols(); ++j) {
    out << format_double(table.t[static_cast<std::size_t>(j)]);
    for (Index l = 0; l < table.d.rows(); ++l) out << ',' << format_double(table.d(l, j));
    out << '\n';
  }
}

ShiftTable read_shifts_csv(const fs::path& path) {
  auto in = open_in(path);
  const std::string src = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(src + ": empty file");
  const auto head = split(trim(line), ',');
  if (head.size() < 2 || !head[0].starts_with("t")) throw ParseError(src + ": line 1: expected header 't[time],...'");
  ShiftTable table;
  for (std::size_t k = 1; k < head.size(); ++k) {
    std::string nm = head[k];
    if (nm.ends_with("[space]")) nm.resize(nm.size() - 7);
    table.names.push_back(nm);
  }
  std::vector<std::vector<double>> cols(table.names.size());
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    const std::string ctx = src + ": line " + std::to_string(lineno);
    if (cells.size() != head.size()) {
      throw ParseError(ctx + ": expected " + std::to_string(head.size()) + " fields, found " + std::to_string(cells.size()));
    }
    table.t.push_back(parse_double(cells[0], ctx));
    for (std::size_t k = 1; k < cells.size(); ++k) cols[k - 1].push_back(parse_double(cells[k], ctx));
  }
  table.d.resize(static_cast<Index>(table.names.size()), static_cast<Index>(table.t.size()));
  for (std::size_t l = 0; l < cols.size(); ++l) {
    for (std::size_t j = 0; j < cols[l].size(); ++j) table.d(static_cast<Index>(l), static_cast<Index>(j)) = cols[l][j];
  }
  return table;
}

void write_decomposition(const Decomposition& dec, const DecompositionMeta& meta, const fs::path& dir) {
  fs::create_directories(dir);
  auto out = open_out(dir / "decomposition.txt");
  out << "spod-decomposition 1\n";
  out << "m=" << meta.grid.m << " h=" << format_double(meta.grid.h) << " boundary=" << boundary_name(meta.grid.boundary)
      << '\n';
  for (const auto& b : meta.blocks) out << "block=" << b.name << ':' << b.size << '\n';
  out << "time=" << join_doubles(meta.time.t, ',') << '\n';
  out << "shift_boundary=" << to_string(dec.shifts.spec.boundary) << " interp_degree=" << dec.shifts.spec.interp_degree
      << '\n';
  out << "frames=" << dec.frames.size() << '\n';
  for (std::size_t l = 0; l < dec.frames.size(); ++l) {
    out << "frame=" << (l < meta.frame_names.size() ? meta.frame_names[l] : "frame" + std::to_string(l))
        << " modes=" << dec.frames[l].rank() << " mask=";
    if (l < meta.mask_blocks.size()) {
      for (std::size_t k = 0; k < meta.mask_blocks[l].size(); ++k) out << (k ? "," : "") << meta.mask_blocks[l][k];
    }
    out << '\n';
    write_matrix(dec.frames[l].modes, dir / ("frame" + std::to_string(l) + "_modes.mat"));
    write_matrix(dec.amplitudes[l], dir / ("frame" + std::to_string(l) + "_amplitudes.mat"));
  }
  if (!meta.scale_factors.empty()) out << "scale=" << join_doubles(meta.scale_factors, ',') << '\n';
  if (meta.row_mean.size() > 0) write_matrix(meta.row_mean, dir / "row_mean.mat");
  write_matrix(dec.shifts.d, dir / "shifts.mat");
}

std::pair<Decomposition, DecompositionMeta> read_decomposition(const fs::path& dir) {
  auto in = open_in(dir / "decomposition.txt");
  const std::string src = (dir / "decomposition.txt").string();
  std::string line;
  if (!std::getline(in, line) || trim(line) != "spod-decomposition 1") {
    throw ParseError(src + ": line 1: expected 'spod-decomposition 1'");
  }
  Decomposition dec;
  DecompositionMeta meta;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream tokens(line);
    std::string tok;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      const std::string ctx = src + ": line " + std::to_string(lineno) + ": ";
      if (eq == std::string::npos) throw ParseError(ctx + "malformed token '" + tok + "'");
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      if (key == "m") meta.grid.m = parse_integer(val, ctx + "m");
      else if (key == "h") meta.grid.h = parse_double(val, ctx + "h");
      else if (key == "boundary") meta.grid.boundary = parse_boundary(val, ctx);
      else if (key == "block") {
        const auto colon = val.rfind(':');
        if (colon == std::string::npos) throw ParseError(ctx + "block must be name:height");
        const Index height = parse_integer(val.substr(colon + 1), ctx + "block height");
        const Index begin = meta.blocks.empty() ? 0 : meta.blocks.back().end();
        meta.blocks.push_back({val.substr(0, colon), begin, height});
      } else if (key == "time") {
        for (const auto& t : split(val, ',')) meta.time.t.push_back(parse_double(t, ctx + "time"));
      } else if (key == "shift_boundary") {
        dec.shifts.spec.boundary = parse_shift_boundary(val);
      } else if (key == "interp_degree") {
        dec.shifts.spec.interp_degree = static_cast<int>(parse_integer(val, ctx + "interp_degree"));
      } else if (key == "frames" || key == "modes") {
        parse_integer(val, ctx + key);
      } else if (key == "frame") {
        meta.frame_names.push_back(val);
      } else if (key == "mask") {
        meta.mask_blocks.push_back(val.empty() ? std::vector<std::string>{} : split(val, ','));
      } else if (key == "scale") {
        for (const auto& f : split(val, ',')) meta.scale_factors.push_back(parse_double(f, ctx + "scale"));
      } else {
        throw ParseError(ctx + "unknown key '" + key + "'");
      }
    }
  }
  dec.shifts.d = read_matrix(dir / "shifts.mat");
  for (std::size_t l = 0; l < meta.frame_names.size(); ++l) {
    FrameBasis f;
    f.modes = read_matrix(dir / ("frame" + std::to_string(l) + "_modes.mat"));
    dec.frames.push_back(std::move(f));
    dec.amplitudes.push_back(read_matrix(dir / ("frame" + std::to_string(l) + "_amplitudes.mat")));
  }
  if (fs::exists(dir / "row_mean.mat")) meta.row_mean = read_matrix(dir / "row_mean.mat");
  return {std::move(dec), std::move(meta)};
}

}  // namespace spod::io
