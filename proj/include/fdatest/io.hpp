#pragma once

// Delimited-text layer: wide curve files, companion group/covariate tables,
// and the self-describing comma-separated outputs every command writes.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "flm.hpp"
#include "fourier.hpp"

namespace fdatest {

// %.12g keeps outputs compact, diffable, and byte-stable across reruns.
inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::string(buf);
}

namespace detail {

inline std::string trim_copy(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(trim_copy(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cells.push_back(trim_copy(cur));
  return cells;
}

inline bool iequal(const std::string& a, const char* b) {
  std::size_t i = 0;
  for (; i < a.size() && b[i] != '\0'; ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != b[i]) return false;
  return i == a.size() && b[i] == '\0';
}

inline std::string cell_name(long row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col + 1);
}

inline double parse_number(const std::string& cell, const std::string& where) {
  const char* s = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (cell.empty() || end != s + cell.size() || !std::isfinite(v))
    fail(ErrorKind::ParseError, where + ": not a finite number: '" + cell + "'");
  return v;
}

// clamped linear interpolation; x strictly increasing
inline double lin_interp(const std::vector<double>& x, const std::vector<double>& y, double q) {
  if (q <= x.front()) return y.front();
  if (q >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), q);
  const std::size_t hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double t = (q - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + t * (y[hi] - y[lo]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generic comma-separated tables

// A comma-separated file with '#' comment lines, one header row, and string
// cells; the common currency of every command's output.
struct Table {
  std::vector<std::string> comments;  // leading '#' lines, prefix stripped
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return j;
    fail(ErrorKind::ParseError, "table has no column named '" + name + "'");
    return 0;
  }

  double num(std::size_t i, std::size_t j) const {
    return detail::parse_number(rows.at(i).at(j), "data row " + std::to_string(i + 1) +
                                                      ", column '" + columns.at(j) + "'");
  }
};

inline void write_table(const std::string& path, const Table& t) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IOError, "cannot open for writing: " + path);
  for (const auto& c : t.comments) out << "# " << c << "\n";
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) out << ",";
    out << t.columns[j];
  }
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ",";
      out << r[j];
    }
    out << "\n";
  }
  out.flush();
  if (!out) fail(ErrorKind::IOError, "write failed: " + path);
}

inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IOError, "cannot open: " + path);
  Table t;
  std::string line;
  long row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string s = detail::trim_copy(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      if (!have_header) {
        std::size_t b = 1;
        if (b < s.size() && s[b] == ' ') ++b;
        t.comments.push_back(s.substr(b));
      }
      continue;
    }
    std::vector<std::string> cells = detail::split_csv(s);
    if (!have_header) {
      t.columns = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size())
      fail(ErrorKind::ParseError, "row " + std::to_string(row) + ": expected " +
                                      std::to_string(t.columns.size()) + " cells, got " +
                                      std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) fail(ErrorKind::EmptyFile, "no header row in " + path);
  return t;
}

// ---------------------------------------------------------------------------
// curve ingestion

// Curves on a uniform grid plus the file-level facts a caller needs: unit
// labels in column order and whether values were moved off the source grid.
struct LoadedCurves {
  CurveSet curves;
  std::vector<std::string> units;
  bool interpolated = false;
};

// Wide layout: one header row, first column time (or replicate then time),
// one column per unit. Rows of one replicate must be strictly increasing in
// time and every replicate must repeat the same time grid. A uniform source
// grid equal to the target passes values through bit-exact; anything else is
// linearly interpolated (clamped at the ends) onto the target points.
inline LoadedCurves load_curves(const std::string& path, std::optional<Grid> target = std::nullopt) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IOError, "cannot open: " + path);

  std::string line;
  long row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    const std::string s = detail::trim_copy(line);
    if (s.empty() || s[0] == '#') continue;
    header = detail::split_csv(s);
    break;
  }
  if (header.empty()) fail(ErrorKind::EmptyFile, "no content in " + path);

  const bool has_replicate = detail::iequal(header[0], "replicate");
  const std::size_t time_col = has_replicate ? 1 : 0;
  if (header.size() < time_col + 2)
    fail(ErrorKind::ParseError,
         "header needs a time column and at least one unit column: " + path);
  std::vector<std::string> units(header.begin() + time_col + 1, header.end());
  for (std::size_t u = 0; u < units.size(); ++u) {
    if (units[u].empty())
      fail(ErrorKind::ParseError, detail::cell_name(row, time_col + 1 + u) + ": empty unit label");
    for (std::size_t v = 0; v < u; ++v)
      if (units[v] == units[u])
        fail(ErrorKind::ParseError, "duplicate unit label '" + units[u] + "'");
  }
  const std::size_t n_units = units.size();

  // data rows, grouped by replicate in first-appearance order
  std::vector<std::string> rep_names;
  std::vector<std::vector<double>> times;
  std::vector<std::vector<std::vector<double>>> vals;  // [rep][unit][row]
  const auto rep_index = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < rep_names.size(); ++i)
      if (rep_names[i] == name) return i;
    rep_names.push_back(name);
    times.emplace_back();
    vals.emplace_back(n_units);
    return rep_names.size() - 1;
  };

  while (std::getline(in, line)) {
    ++row;
    const std::string s = detail::trim_copy(line);
    if (s.empty() || s[0] == '#') continue;
    const std::vector<std::string> cells = detail::split_csv(s);
    if (cells.size() != header.size())
      fail(ErrorKind::ParseError, "row " + std::to_string(row) + ": expected " +
                                      std::to_string(header.size()) + " cells, got " +
                                      std::to_string(cells.size()));
    const std::size_t ri = rep_index(has_replicate ? cells[0] : std::string());
    const double tv =
        detail::parse_number(cells[time_col], detail::cell_name(row, time_col));
    if (!times[ri].empty() && !(tv > times[ri].back()))
      fail(ErrorKind::NonMonotoneTime, "row " + std::to_string(row) + ": time " + fmt_num(tv) +
                                           " does not increase past " +
                                           fmt_num(times[ri].back()));
    times[ri].push_back(tv);
    for (std::size_t u = 0; u < n_units; ++u) {
      const std::size_t col = time_col + 1 + u;
      vals[ri][u].push_back(detail::parse_number(cells[col], detail::cell_name(row, col)));
    }
  }
  if (rep_names.empty()) fail(ErrorKind::EmptyFile, "no data rows in " + path);

  const std::vector<double>& t0 = times[0];
  for (std::size_t ri = 1; ri < times.size(); ++ri) {
    if (times[ri].size() != t0.size())
      fail(ErrorKind::ParseError, "replicate '" + rep_names[ri] + "' has " +
                                      std::to_string(times[ri].size()) + " rows; expected " +
                                      std::to_string(t0.size()));
    for (std::size_t l = 0; l < t0.size(); ++l)
      if (times[ri][l] != t0[l])
        fail(ErrorKind::ParseError, "replicate '" + rep_names[ri] +
                                        "' grid differs at time index " + std::to_string(l + 1));
  }
  const int r = static_cast<int>(t0.size());
  if (r < 2)
    fail(ErrorKind::ParseError, "need at least two time rows, got " + std::to_string(r));

  // A uniform grid with step d starting at t_1 is Grid{t_1 - d, t_r}: its
  // points a + (b - a) l / r land exactly on the observed times.
  const double span = t0.back() - t0.front();
  const double step = span / (r - 1);
  const double tol = 1e-9 * span;
  bool uniform = true;
  for (int l = 0; l < r; ++l)
    if (std::abs(t0[static_cast<std::size_t>(l)] - (t0.front() + step * l)) > tol) {
      uniform = false;
      break;
    }
  const Grid inferred{t0.front() - step, t0.back(), r};
  const Grid g = target ? *target : inferred;
  g.validate();
  const bool passthrough =
      uniform && g.a == inferred.a && g.b == inferred.b && g.r == inferred.r;

  LoadedCurves out;
  out.units = std::move(units);
  out.interpolated = !passthrough;
  out.curves =
      CurveSet::zeros(g, static_cast<int>(rep_names.size()), static_cast<int>(n_units));
  for (std::size_t i = 0; i < rep_names.size(); ++i)
    for (std::size_t k = 0; k < n_units; ++k)
      for (int l = 0; l < g.r; ++l)
        out.curves.at(static_cast<int>(i), static_cast<int>(k), l) =
            passthrough ? vals[i][k][static_cast<std::size_t>(l)]
                        : detail::lin_interp(t0, vals[i][k], g.point(l + 1));
  return out;
}

// ---------------------------------------------------------------------------
// group / covariate metadata

// Group and covariate assignments for the units of a curve file, joined by
// unit label. Group ids follow first appearance in curve-column order.
struct GroupTable {
  GroupLayout layout;
  std::vector<std::string> group_names;  // index = group id
};

inline GroupTable load_group_table(const std::string& path,
                                   const std::vector<std::string>& units) {
  const Table t = read_table(path);
  const std::size_t cu = t.column("unit");
  const std::size_t cg = t.column("group");
  const std::size_t cc = t.column("covariate");

  std::map<std::string, std::pair<std::string, double>> by_unit;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& u = t.rows[i][cu];
    if (by_unit.count(u))
      fail(ErrorKind::ParseError, "duplicate metadata row for unit '" + u + "'");
    by_unit[u] = {t.rows[i][cg], t.num(i, cc)};
  }

  GroupTable out;
  for (const std::string& u : units) {
    const auto it = by_unit.find(u);
    if (it == by_unit.end())
      fail(ErrorKind::ParseError, "unit '" + u + "' missing from metadata " + path);
    const std::string& gname = it->second.first;
    if (gname.empty())
      fail(ErrorKind::ParseError, "empty group label for unit '" + u + "'");
    std::size_t gid = out.group_names.size();
    for (std::size_t g = 0; g < out.group_names.size(); ++g)
      if (out.group_names[g] == gname) {
        gid = g;
        break;
      }
    if (gid == out.group_names.size()) out.group_names.push_back(gname);
    out.layout.group_of.push_back(static_cast<int>(gid));
    out.layout.covariate.push_back(it->second.second);
  }
  out.layout.n_groups = static_cast<int>(out.group_names.size());
  return out;
}

}  // namespace fdatest
