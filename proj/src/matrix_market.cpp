#include "phsvds/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace phsvds {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

double parse_real(const std::string& tok, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError(line, "invalid numeric value '" + tok + "'");
  return v;
}

Index parse_index(const std::string& tok, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError(line, "invalid integer '" + tok + "'");
  return static_cast<Index>(v);
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

}  // namespace

SparseMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++lineno;

  const auto head = tokens(lower(line));
  if (head.size() != 5 || head[0] != "%%matrixmarket" || head[1] != "matrix")
    throw ParseError(lineno, "malformed Matrix Market header");
  const std::string& format = head[2];
  const std::string& field = head[3];
  const std::string& symmetry = head[4];
  if (format != "coordinate" && format != "array")
    throw ParseError(lineno, "unsupported format '" + format + "'");
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError(lineno, "unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError(lineno, "unsupported symmetry '" + symmetry + "'");
  const bool symmetric = symmetry == "symmetric";

  std::vector<std::string> size_line;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    size_line = tokens(line);
    break;
  }
  if (size_line.empty()) throw ParseError(lineno, "missing size line");

  std::vector<Triplet> entries;
  if (format == "coordinate") {
    if (size_line.size() != 3) throw ParseError(lineno, "size line must have 3 entries");
    const Index m = parse_index(size_line[0], lineno);
    const Index n = parse_index(size_line[1], lineno);
    const Index nnz = parse_index(size_line[2], lineno);
    if (m < 0 || n < 0 || nnz < 0) throw ParseError(lineno, "negative size");
    if (symmetric && m != n) throw ParseError(lineno, "symmetric matrix must be square");
    entries.reserve(static_cast<std::size_t>(symmetric ? 2 * nnz : nnz));
    Index read = 0;
    while (read < nnz && std::getline(in, line)) {
      ++lineno;
      if (blank_or_comment(line)) continue;
      const auto tok = tokens(line);
      if (tok.size() != 3) throw ParseError(lineno, "entry must have row, column and value");
      const Index i = parse_index(tok[0], lineno) - 1;
      const Index j = parse_index(tok[1], lineno) - 1;
      const double v = parse_real(tok[2], lineno);
      if (i < 0 || i >= m || j < 0 || j >= n) throw ParseError(lineno, "index out of bounds");
      entries.push_back({i, j, v});
      if (symmetric && i != j) entries.push_back({j, i, v});
      ++read;
    }
    if (read < nnz) throw ParseError(lineno, "unexpected end of input");
    return SparseMatrix::from_triplets(m, n, std::move(entries));
  }

  if (size_line.size() != 2) throw ParseError(lineno, "array size line must have 2 entries");
  const Index m = parse_index(size_line[0], lineno);
  const Index n = parse_index(size_line[1], lineno);
  if (m < 0 || n < 0) throw ParseError(lineno, "negative size");
  if (symmetric && m != n) throw ParseError(lineno, "symmetric matrix must be square");
  // Column-major; symmetric stores the lower triangle only.
  for (Index j = 0; j < n; ++j) {
    for (Index i = symmetric ? j : 0; i < m; ++i) {
      do {
        if (!std::getline(in, line)) throw ParseError(lineno, "unexpected end of input");
        ++lineno;
      } while (blank_or_comment(line));
      const auto tok = tokens(line);
      if (tok.size() != 1) throw ParseError(lineno, "array entry must be a single value");
      const double v = parse_real(tok[0], lineno);
      entries.push_back({i, j, v});
      if (symmetric && i != j) entries.push_back({j, i, v});
    }
  }
  return SparseMatrix::from_triplets(m, n, std::move(entries));
}

SparseMatrix parse_matrix_market(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_market(in);
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonzeros() << '\n';
  out << std::setprecision(17);
  const auto& off = a.row_offsets();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index p = off[i]; p < off[i + 1]; ++p)
      out << i + 1 << ' ' << a.col_indices()[p] + 1 << ' ' << a.values()[p] << '\n';
}

void write_matrix_market(const std::string& path, const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_matrix_market(out, a);
}

}  // namespace phsvds
