#ifndef Q2AMG_MATRIX_MARKET_HPP
#define Q2AMG_MATRIX_MARKET_HPP

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "q2amg/sparse.hpp"

namespace q2amg {

class ParseError : public Error {
public:
  ParseError(const std::string& path, int line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] int line() const { return line_; }

private:
  int line_;
};

namespace detail {

inline std::string format_real(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path);
  return in;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Reads the banner and skips comments; returns the size line.
inline std::string read_header(std::istream& in, const std::string& path, const std::string& want_format,
                               int& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
  line_no = 1;
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix")
    throw ParseError(path, line_no, "missing %%MatrixMarket matrix banner");
  if (lower(format) != want_format) throw ParseError(path, line_no, "expected format '" + want_format + "'");
  if (lower(field) != "real" && lower(field) != "double" && lower(field) != "integer")
    throw ParseError(path, line_no, "unsupported field '" + field + "'");
  if (lower(symmetry) != "general") throw ParseError(path, line_no, "only 'general' symmetry is supported");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    return line;
  }
  throw ParseError(path, line_no, "missing size line");
}

}  // namespace detail

inline void write_matrix_market(const std::string& path, const SparseMatrix& a) {
  auto out = detail::open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
  for (int i = 0; i < a.n_rows; ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k)
      out << (i + 1) << " " << (cols[k] + 1) << " " << detail::format_real(vals[k]) << "\n";
  }
  if (!out) throw Error("write failed: " + path);
}

inline SparseMatrix read_matrix_market(const std::string& path) {
  auto in = detail::open_in(path);
  int line_no = 0;
  const std::string size_line = detail::read_header(in, path, "coordinate", line_no);
  long rows = -1, cols = -1, entries = -1;
  {
    std::istringstream ss(size_line);
    if (!(ss >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0)
      throw ParseError(path, line_no, "malformed size line");
  }
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(entries));
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    long i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v)) throw ParseError(path, line_no, "malformed entry");
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError(path, line_no, "index out of range");
    if (static_cast<long>(trips.size()) == entries)
      throw ParseError(path, line_no, "more entries than declared in header");
    trips.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v});
  }
  if (static_cast<long>(trips.size()) != entries)
    throw ParseError(path, line_no, "entry count " + std::to_string(trips.size()) + " does not match header (" +
                                        std::to_string(entries) + ")");
  return from_triplets(static_cast<int>(rows), static_cast<int>(cols), std::move(trips));
}

inline void write_vector(const std::string& path, std::span<const double> v) {
  auto out = detail::open_out(path);
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (double x : v) out << detail::format_real(x) << "\n";
  if (!out) throw Error("write failed: " + path);
}

inline Vector read_vector(const std::string& path) {
  auto in = detail::open_in(path);
  int line_no = 0;
  const std::string size_line = detail::read_header(in, path, "array", line_no);
  long rows = -1, cols = -1;
  {
    std::istringstream ss(size_line);
    if (!(ss >> rows >> cols) || rows < 0 || cols != 1) throw ParseError(path, line_no, "malformed size line");
  }
  Vector v;
  v.reserve(static_cast<std::size_t>(rows));
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    double x = 0.0;
    if (!(ss >> x)) throw ParseError(path, line_no, "malformed value");
    v.push_back(x);
  }
  if (static_cast<long>(v.size()) != rows) throw ParseError(path, line_no, "value count does not match header");
  return v;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline void write_coordinates(const std::string& path, std::span<const Point> q2, std::span<const Point> q1) {
  auto out = detail::open_out(path);
  for (const auto& p : q2) out << detail::format_real(p.x) << " " << detail::format_real(p.y) << "\n";
  for (const auto& p : q1) out << detail::format_real(p.x) << " " << detail::format_real(p.y) << "\n";
  if (!out) throw Error("write failed: " + path);
}

inline std::vector<Point> read_coordinates(const std::string& path) {
  auto in = detail::open_in(path);
  std::vector<Point> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Point p;
    if (!(ss >> p.x >> p.y)) throw ParseError(path, line_no, "expected 'x y'");
    pts.push_back(p);
  }
  return pts;
}

}  // namespace q2amg

#endif  // Q2AMG_MATRIX_MARKET_HPP
