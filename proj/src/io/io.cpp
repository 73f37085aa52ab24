#include "bcglab/io.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "bcglab/errors.hpp"
#include "bcglab/serialization.hpp"

namespace bcglab::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  // "-0" would parse back as the integer 0 and lose the sign bit.
  if (v == 0.0 && std::signbit(v)) return "-0.0";
  return fmt::format("{:.17g}", v);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::File, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::File, "read failed for '" + path.string() + "'");
  return ss.str();
}

void write_atomic(const fs::path& path, std::string_view content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorKind::File, "output directory for '" + path.string() + "' does not exist");
  fs::path tmp = path;
  tmp += fmt::format(".tmp.{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::File, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorKind::File, "write failed for '" + path.string() + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::File, "cannot move output into place at '" + path.string() + "'");
  }
}

namespace {

void append_numbers(std::string& out, std::span<const double> v, std::size_t per_line) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw Error(ErrorKind::NonFinite, "cannot serialize a non-finite value");
    if (i) out += (per_line && i % per_line == 0) ? ",\n  " : ",";
    out += format_double(v[i]);
  }
  out += ']';
}

void append_matrix(std::string& out, const Matrix& m) {
  const bool sym = m.is_square() && asymmetry(m) == 0.0;
  out += fmt::format(R"({{"format":"bcglab-matrix","rows":{},"cols":{},"symmetric":{},"order":"row-major","data":)",
                     m.rows(), m.cols(), sym ? "true" : "false");
  out += "\n  ";
  append_numbers(out, m.data(), m.cols());
  out += '}';
}

template <class F>
auto parse_guarded(std::string_view source, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::File, std::string(source) + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::File) throw;
    throw Error(ErrorKind::File, std::string(source) + ": " + e.what());
  }
}

}  // namespace

std::string matrix_file_text(const Matrix& m) {
  std::string out;
  append_matrix(out, m);
  out += '\n';
  return out;
}

Matrix parse_matrix_file(std::string_view text, std::string_view source) {
  return parse_guarded(source, [&] { return nlohmann::json::parse(text).get<Matrix>(); });
}

Matrix read_matrix_file(const fs::path& path) { return parse_matrix_file(read_file(path), path.string()); }

void write_matrix_file(const fs::path& path, const Matrix& m) { write_atomic(path, matrix_file_text(m)); }

std::string problem_file_text(const LinearProblem& p) {
  std::string out = R"({"format":"bcglab-problem","A":)";
  append_matrix(out, p.a);
  out += ",\n\"b\":";
  append_numbers(out, p.b, 0);
  if (p.truth) {
    out += ",\n\"x_star\":";
    append_numbers(out, *p.truth, 0);
  }
  out += "}\n";
  return out;
}

LinearProblem parse_problem_file(std::string_view text, std::string_view source) {
  return parse_guarded(source, [&] {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "bcglab-problem")
      throw Error(ErrorKind::File, "not a bcglab-problem file");
    for (const auto& [key, _] : j.items())
      if (key != "format" && key != "A" && key != "b" && key != "x_star")
        throw Error(ErrorKind::File, "unknown key '" + key + "'");
    LinearProblem p;
    p.a = j.at("A").get<Matrix>();
    p.b = j.at("b").get<Vector>();
    if (j.contains("x_star")) p.truth = j.at("x_star").get<Vector>();
    p.validate();
    return p;
  });
}

LinearProblem read_problem_file(const fs::path& path) {
  return parse_problem_file(read_file(path), path.string());
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw Error(ErrorKind::DimensionMismatch, "csv: row width does not match header");
  rows_.push_back(std::move(row));
}

namespace {

void append_field(std::string& out, const std::string& f) {
  if (f.find_first_of(",\"\n") == std::string::npos) {
    out += f;
    return;
  }
  out += '"';
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    append_field(out, fields[i]);
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

std::string cell(double v) { return format_double(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(std::string_view v) { return std::string(v); }

}  // namespace bcglab::io
