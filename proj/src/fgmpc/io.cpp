#include "fgmpc/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fgmpc/error.hpp"

namespace fgmpc {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string line_error(int line, const std::string& what) {
  return "hrep line " + std::to_string(line) + ": " + what;
}

}  // namespace

std::string format_hrep(const HPolyhedron& P, const std::vector<std::string>& column_names) {
  std::ostringstream out;
  out << "#hrep dim=" << P.dim() << " rows=" << P.rows() << "\n";
  if (!column_names.empty()) {
    out << "# columns:";
    for (const std::string& c : column_names) out << ' ' << c;
    out << " b\n";
  }
  for (int i = 0; i < P.rows(); ++i) {
    for (int j = 0; j < P.dim(); ++j) out << format_double(P.A()(i, j)) << ' ';
    out << format_double(P.b()[i]) << "\n";
  }
  return out.str();
}

HPolyhedron parse_hrep(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int dim = -1, rows = -1;
  while (dim < 0 && std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (std::sscanf(line.c_str(), "#hrep dim=%d rows=%d", &dim, &rows) != 2 || dim < 1 || rows < 0) {
      throw Error(ErrorCode::kIo, line_error(lineno, "expected header '#hrep dim=<n> rows=<m>'"));
    }
  }
  if (dim < 0) throw Error(ErrorCode::kIo, "hrep: missing header");

  Eigen::MatrixXd A(rows, dim);
  Eigen::VectorXd b(rows);
  int row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (row == rows) throw Error(ErrorCode::kIo, line_error(lineno, "more rows than the header declares"));
    std::istringstream fields(line);
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw Error(ErrorCode::kIo, line_error(lineno, "not a number: '" + tok + "'"));
      }
      values.push_back(v);
    }
    if (static_cast<int>(values.size()) != dim + 1) {
      throw Error(ErrorCode::kIo, line_error(lineno, "expected " + std::to_string(dim + 1) +
                                                          " values, got " + std::to_string(values.size())));
    }
    for (int j = 0; j < dim; ++j) A(row, j) = values[j];
    b[row] = values[dim];
    ++row;
  }
  if (row != rows) {
    throw Error(ErrorCode::kIo, "hrep: header declares " + std::to_string(rows) + " rows, found " +
                                    std::to_string(row));
  }
  return HPolyhedron(A, b);
}

void write_hrep(const std::string& path, const HPolyhedron& P,
                const std::vector<std::string>& column_names) {
  write_file_atomic(path, format_hrep(P, column_names));
}

HPolyhedron read_hrep(const std::string& path) { return parse_hrep(read_file(path)); }

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp.string() + ": " + std::strerror(errno));
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename onto " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path + ": " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fgmpc
