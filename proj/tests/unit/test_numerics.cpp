#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "ssig/error.hpp"
#include "ssig/matrix.hpp"
#include "ssig/random.hpp"
#include "ssig/simd.hpp"

using namespace ssig;

namespace {

Matrix random_matrix(RandomStream& rs, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& v : m.values()) v = 2.0 * rs.next_uniform() - 1.0;
  return m;
}

}  // namespace

TEST_CASE("matrix construction checks entry count") {
  CHECK_THROWS_AS(Matrix(2, 3, std::vector<double>(5)), ShapeError);
  Matrix m{{1, 2, 3}, {4, 5, 6}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6.0);
  CHECK(m.row(1)[0] == 4.0);
  CHECK(m.all_finite());
  m(0, 0) = std::nan("");
  CHECK_FALSE(m.all_finite());
}

TEST_CASE("matmul small cases") {
  const Matrix a{{1, 2}, {3, 4}};
  CHECK(matmul(Matrix::identity(2), a) == a);
  CHECK(matmul(a, Matrix{{1}, {1}}) == Matrix{{3}, {7}});
  CHECK_THROWS_AS(matmul(a, Matrix(3, 1)), ShapeError);
}

TEST_CASE("matmul agrees with a triple loop") {
  RandomStream rs(7, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rs.next_below(9), k = 1 + rs.next_below(9), m = 1 + rs.next_below(9);
    const Matrix a = random_matrix(rs, n, k);
    const Matrix b = random_matrix(rs, k, m);
    const Matrix c = matmul(a, b);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < k; ++t) s += a(i, t) * b(t, j);
        CHECK(c(i, j) == doctest::Approx(s).epsilon(1e-13));
      }
    }
  }
  const Matrix a = random_matrix(rs, 3, 4);
  const Matrix b = random_matrix(rs, 4, 2);
  const Matrix c = matmul(a, b);
  REQUIRE(c.rows() == 3);
  REQUIRE(c.cols() == 2);
}

TEST_CASE("matmul is associative") {
  RandomStream rs(8, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 1 + rs.next_below(6), q = 1 + rs.next_below(6);
    const std::size_t r = 1 + rs.next_below(6), s = 1 + rs.next_below(6);
    const Matrix a = random_matrix(rs, p, q);
    const Matrix b = random_matrix(rs, q, r);
    const Matrix c = random_matrix(rs, r, s);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    double scale = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        double bound = 0.0;
        for (std::size_t x = 0; x < q; ++x) {
          for (std::size_t y = 0; y < r; ++y) bound += std::abs(a(i, x) * b(x, y) * c(y, j));
        }
        scale = std::max(scale, bound);
        CHECK(std::abs(left(i, j) - right(i, j)) <= 1e-12 * std::max(bound, 1e-300));
      }
    }
    CHECK(scale > 0.0);
  }
}

TEST_CASE("transpose") {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  const Matrix t = transpose(a);
  CHECK(t == Matrix{{1, 4}, {2, 5}, {3, 6}});
  CHECK(transpose(t) == a);
}

TEST_CASE("uniform draws") {
  RandomStream a(42, stream_id(StreamPurpose::data));
  CHECK_THROWS_AS(sample_uniform(a, 0), ArgumentError);

  RandomStream s1(42, 9), s2(42, 9);
  CHECK(sample_uniform(s1, 5) == sample_uniform(s2, 5));

  RandomStream other(42, 10);
  RandomStream base(42, 9);
  CHECK(sample_uniform(other, 5) != sample_uniform(base, 5));

  RandomStream big(3, 3);
  const auto xs = sample_uniform(big, 100000);
  double mean = 0.0;
  for (double x : xs) {
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
    mean += x;
  }
  mean /= static_cast<double>(xs.size());
  CHECK(std::abs(mean - 0.5) < 0.01);
}

TEST_CASE("uniform never reaches the endpoints") {
  RandomStream rs(0, 0);
  for (int i = 0; i < 1000000; ++i) {
    const double x = rs.next_uniform();
    REQUIRE(x != 0.0);
    REQUIRE(x != 1.0);
  }
  // The extreme bit patterns map strictly inside (0, 1).
  CHECK(uniform_from_bits(0) == 0x1.0p-53);
  CHECK(uniform_from_bits(~0ULL) == 1.0 - 0x1.0p-53);
  CHECK(uniform_from_bits(~0ULL) < 1.0);
}

TEST_CASE("normal draws: moments and determinism") {
  RandomStream a(5, 5), b(5, 5);
  CHECK_THROWS_AS(sample_standard_normal(a, 0), ArgumentError);
  CHECK(sample_standard_normal(a, 7) == sample_standard_normal(b, 7));

  RandomStream rs(11, 2);
  const auto xs = sample_standard_normal(rs, 100000);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);

  // Tail frequencies against the normal CDF.
  int below = 0;
  for (double x : xs) below += x < -1.0;
  const double p = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
  CHECK(std::abs(below / 100000.0 - p) < 0.005);
}

TEST_CASE("normal transform matches a Box-Muller oracle") {
  const double us[][2] = {{0.1, 0.2}, {0.5, 0.5}, {0.9, 0.75}, {1e-9, 0.3}, {0.999, 0.999}};
  for (const auto& pr : us) {
    const auto [z0, z1] = box_muller(pr[0], pr[1]);
    CHECK(z0 == doctest::Approx(oracle::box_muller_first(pr[0], pr[1])).epsilon(1e-14));
    const double rr = std::sqrt(-2.0 * std::log(pr[0]));
    CHECK(z1 == doctest::Approx(rr * std::sin(2.0 * 3.14159265358979323846 * pr[1])).epsilon(1e-12));
  }
  // next_normal consumes two uniforms from the same sequence.
  RandomStream a(1, 1), b(1, 1);
  const double u1 = b.next_uniform();
  const double u2 = b.next_uniform();
  CHECK(a.next_normal() == box_muller(u1, u2).first);
}

TEST_CASE("stream ids give independent, reproducible sequences") {
  CHECK(stream_id(StreamPurpose::noise, 3) != stream_id(StreamPurpose::shuffle, 3));
  CHECK(stream_id(StreamPurpose::noise, 3) != stream_id(StreamPurpose::noise, 4));
  RandomStream a(99, stream_id(StreamPurpose::noise, 3));
  RandomStream b(99, stream_id(StreamPurpose::noise, 3));
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  RandomStream parent(99, 1);
  const RandomStream c1 = parent.split(1);
  const RandomStream c1b = parent.split(1);
  RandomStream x = c1, y = c1b, z = parent.split(2);
  const auto xv = x.next_u64();
  CHECK(xv == y.next_u64());
  CHECK(xv != z.next_u64());
}

TEST_CASE("next_below and permutations") {
  RandomStream rs(4, 4);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) ++counts[rs.next_below(6)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);

  const auto perm = random_permutation(rs, 50);
  std::set<std::size_t> seen(perm.begin(), perm.end());
  CHECK(seen.size() == 50);
  CHECK(*seen.rbegin() == 49);
  RandomStream p1(4, 5), p2(4, 5);
  CHECK(random_permutation(p1, 30) == random_permutation(p2, 30));
}

TEST_CASE("vector kernels agree with the scalar reference") {
  using namespace ssig::simd;
  CHECK(isa_supported(Isa::scalar));
  const KernelTable& ref = kernels_for(Isa::scalar);
  RandomStream rs(12, 12);
  std::vector<Isa> isas{Isa::scalar};
  if (isa_supported(Isa::avx2)) isas.push_back(Isa::avx2);
  else CHECK_THROWS_AS(kernels_for(Isa::avx2), ArgumentError);
  for (Isa isa : isas) {
    const KernelTable& kt = kernels_for(isa);
    CHECK(kt.isa == isa);
    for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 101}) {
      std::vector<double> x(n), y(n);
      rs.fill_uniform(x);
      rs.fill_normal(y);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
      CHECK(std::abs(kt.dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <=
            1e-14 * (mag + 1.0));
      std::vector<double> y1 = y, y2 = y;
      kt.axpy(-0.7, x.data(), y1.data(), n);
      ref.axpy(-0.7, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("forcing the scalar kernels keeps matmul results") {
  using namespace ssig::simd;
  RandomStream rs(13, 13);
  const Matrix a = random_matrix(rs, 7, 13);
  const Matrix b = random_matrix(rs, 13, 5);
  const Isa before = kernels().isa;
  const Matrix fast = matmul(a, b);
  force_isa(Isa::scalar);
  const Matrix slow = matmul(a, b);
  force_isa(before);
  CHECK(kernels().isa == before);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    CHECK(fast.values()[i] == doctest::Approx(slow.values()[i]).epsilon(1e-13));
  }
  CHECK(!isa_name(Isa::scalar).empty());
}
