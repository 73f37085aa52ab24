#pragma once

// Files: the self-describing matrix and problem formats, CSV tables and
// atomic writes. All failures are Error{File} naming the path.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bcglab/matrix.hpp"
#include "bcglab/problem.hpp"

namespace bcglab::io {

/// Decimal, 17 significant digits: bit-faithful for doubles.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it over path.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// {"format":"bcglab-matrix","rows":r,"cols":c,"symmetric":bool,"order":"row-major","data":[...]}
std::string matrix_file_text(const Matrix& m);
Matrix parse_matrix_file(std::string_view text, std::string_view source = "<memory>");
Matrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);

/// {"format":"bcglab-problem","A":<matrix>,"b":[...],"x_star":[...] (optional)}
std::string problem_file_text(const LinearProblem& p);
LinearProblem parse_problem_file(std::string_view text, std::string_view source = "<memory>");
LinearProblem read_problem_file(const std::filesystem::path& path);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  /// Row width must match the header.
  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t size() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(std::size_t v);
std::string cell(std::string_view v);

}  // namespace bcglab::io
