#include "bcglab/serialization.hpp"

#include <string>

#include "bcglab/errors.hpp"

namespace bcglab {

void to_json(json& j, const Matrix& m) {
  j = json{{"format", "bcglab-matrix"},
           {"rows", m.rows()},
           {"cols", m.cols()},
           {"symmetric", m.is_square() && asymmetry(m) == 0.0},
           {"order", "row-major"},
           {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

void from_json(const json& j, Matrix& m) {
  if (!j.is_object() || j.value("format", "") != "bcglab-matrix")
    throw Error(ErrorKind::File, "not a bcglab-matrix object");
  for (const auto& [key, _] : j.items())
    if (key != "format" && key != "rows" && key != "cols" && key != "symmetric" && key != "order" &&
        key != "data")
      throw Error(ErrorKind::File, "matrix: unknown key '" + key + "'");
  if (j.value("order", "row-major") != "row-major")
    throw Error(ErrorKind::File, "matrix: only row-major storage is supported");
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols)
    throw Error(ErrorKind::File, "matrix: data has " + std::to_string(data.size()) + " entries, expected " +
                                     std::to_string(rows * cols));
  Matrix out(rows, cols);
  std::copy(data.begin(), data.end(), out.data().begin());
  if (j.value("symmetric", false) && !(out.is_square() && asymmetry(out) == 0.0))
    throw Error(ErrorKind::File, "matrix: flagged symmetric but is not");
  m = std::move(out);
}

}  // namespace bcglab
