#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "phsvds/sparse_matrix.hpp"

namespace phsvds {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Reads coordinate or array format with a real or integer field and general or
// symmetric symmetry. Symmetric storage is expanded; duplicates are summed.
SparseMatrix parse_matrix_market(std::istream& in);
SparseMatrix parse_matrix_market(const std::string& text);
SparseMatrix read_matrix_market(const std::string& path);

// Coordinate real general, 17 significant digits.
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
void write_matrix_market(const std::string& path, const SparseMatrix& a);

}  // namespace phsvds
