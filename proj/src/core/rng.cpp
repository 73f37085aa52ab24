#include "bcglab/rng.hpp"

#include <cmath>
#include <numbers>

namespace bcglab {

double RandomStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vector RandomStream::normal_vector(std::size_t n) {
  Vector v(n);
  for (double& x : v) x = normal();
  return v;
}

Matrix RandomStream::normal_matrix(std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = normal();
  return m;
}

}  // namespace bcglab
