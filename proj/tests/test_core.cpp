#include <doctest.h>

#include <cmath>
#include <set>

#include "bcglab/kernels.hpp"
#include "bcglab/matrix.hpp"
#include "bcglab/parallel.hpp"
#include "bcglab/rng.hpp"

using namespace bcglab;

TEST_SUITE("core") {

TEST_CASE("simd kernels agree with the scalar reference") {
  RandomStream rs(11, "kernels");
  const auto& ref = kernels::table(kernels::Isa::Scalar);
  for (kernels::Isa isa : {kernels::Isa::Scalar, kernels::Isa::Avx2, kernels::Isa::Neon}) {
    if (!kernels::available(isa)) continue;
    CAPTURE(kernels::isa_name(isa));
    const auto& k = kernels::table(isa);
    // Odd sizes exercise the remainder loops.
    for (std::size_t n : {0u, 1u, 3u, 7u, 16u, 33u, 257u}) {
      const Vector a = rs.normal_vector(n), b = rs.normal_vector(n);
      double scale = 0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
      CHECK(std::abs(k.dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-14 * (scale + 1));

      Vector y1 = b, y2 = b;
      k.axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    }
    for (auto [r, c] : {std::pair{5u, 3u}, {1u, 9u}, {17u, 17u}, {4u, 31u}}) {
      const Matrix m = rs.normal_matrix(r, c);
      const Vector x = rs.normal_vector(c), xt = rs.normal_vector(r);
      Vector y1(r), y2(r), z1(c), z2(c);
      k.gemv(m.data().data(), r, c, x.data(), y1.data());
      ref.gemv(m.data().data(), r, c, x.data(), y2.data());
      k.gemv_t(m.data().data(), r, c, xt.data(), z1.data());
      ref.gemv_t(m.data().data(), r, c, xt.data(), z2.data());
      for (std::size_t i = 0; i < r; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-13);
      for (std::size_t j = 0; j < c; ++j) CHECK(std::abs(z1[j] - z2[j]) <= 1e-13);
    }
  }
}

TEST_CASE("matrix helpers") {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  CHECK(transpose(a) == Matrix{{1, 4}, {2, 5}, {3, 6}});
  CHECK(matmul(a, transpose(a)) == Matrix{{14, 32}, {32, 77}});
  CHECK(matmul_nt(a, a) == matmul(a, transpose(a)));
  CHECK(matmul_tn(a, a) == matmul(transpose(a), a));
  CHECK(matvec(a, Vector{1, 1, 1}) == Vector{6, 15});
  CHECK(matvec_t(a, Vector{1, 1}) == Vector{5, 7, 9});
  CHECK(trace(Matrix::identity(4)) == 4.0);
  CHECK(asymmetry(Matrix{{1, 2}, {2.5, 1}}) == doctest::Approx(0.5));
  CHECK(std::isinf(asymmetry(a)));
  CHECK(leading_columns(a, 2) == Matrix{{1, 2}, {4, 5}});
  CHECK(Matrix::from_columns(std::vector<Vector>{{1, 4}, {2, 5}, {3, 6}}, 2) == a);
  // Scaled norm survives entries whose squares overflow.
  CHECK(norm2(Vector{3e200, 4e200}) == doctest::Approx(5e200));
}

TEST_CASE("random streams are deterministic and label-separated") {
  RandomStream a(7, "x", 0), b(7, "x", 0), c(7, "x", 1), d(7, "y", 0);
  const Vector va = a.normal_vector(64);
  CHECK(va == b.normal_vector(64));
  CHECK(va != c.normal_vector(64));
  CHECK(va != d.normal_vector(64));
  CHECK(derive_key(1, "a", 0) != derive_key(1, "a", 1));
}

TEST_CASE("normal draws have unit moments") {
  RandomStream rs(3, "moments");
  const std::size_t n = 200000;
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rs.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 5.0 / std::sqrt(double(n)));
  CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  RandomStream u(3, "uniform");
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
  }
}

TEST_CASE("parallel_for writes by index and rethrows the lowest failure") {
  std::vector<std::size_t> out(1000);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = i * i; });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == i * i);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
}

}
