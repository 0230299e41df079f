#include <random>
#include <set>

#include "coarray/geometry.hpp"
#include "coarray/linalg.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarray;

namespace {

// Weight function counted straight from the position list.
int brute_weight(const std::vector<int>& pos, int lag)
{
  int w = 0;
  for (int a : pos)
    for (int b : pos) w += (a - b == lag);
  return w;
}

bool hole_free(const std::vector<int>& pos)
{
  const int ap = pos.back() - pos.front();
  for (int l = 0; l <= ap; ++l)
    if (brute_weight(pos, l) == 0) return false;
  return true;
}

// Whether any M-sensor array {0, ..., L} with hole-free coarray exists.
bool hole_free_exists(int m, int aperture)
{
  std::vector<int> pos = {0};
  std::function<bool(int)> extend = [&](int next) -> bool {
    if (int(pos.size()) == m - 1) {
      pos.push_back(aperture);
      const bool ok = hole_free(pos);
      pos.pop_back();
      return ok;
    }
    for (int p = next; p < aperture; ++p) {
      pos.push_back(p);
      if (extend(p + 1)) return true;
      pos.pop_back();
    }
    return false;
  };
  return extend(1);
}

}  // namespace

TEST_CASE("array families produce the expected positions")
{
  CHECK(make_coprime(5, 3).positions() == std::vector<int>{0, 3, 5, 6, 9, 10, 12, 15, 20, 25});
  CHECK(make_nested(5, 5).positions() == std::vector<int>{1, 2, 3, 4, 5, 6, 12, 18, 24, 30});
  CHECK(make_mra(10).positions() == std::vector<int>{0, 1, 4, 10, 16, 22, 28, 30, 33, 35});
  CHECK(make_coprime_pair(2).positions() == std::vector<int>{0, 2, 3, 4, 6, 9});
  CHECK(make_ula(4).positions() == std::vector<int>{0, 1, 2, 3});
  for (int q = 2; q <= 12; ++q) {
    CHECK(make_coprime_pair(q).size() == 3 * q);
    CHECK(make_nested(q + 1, q).size() == 2 * q + 1);
  }
}

TEST_CASE("array construction rejects invalid input")
{
  CHECK_THROWS_AS(make_coprime(4, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_mra(13), std::invalid_argument);
  CHECK_THROWS_AS(make_ula(1), std::invalid_argument);
  CHECK_THROWS_AS(ArrayGeometry({0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ArrayGeometry({0, 1}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ArraySpec::parse("hexagon:3"), std::invalid_argument);
  CHECK_THROWS_AS(make_array(ArraySpec::parse("coprime:5")), std::invalid_argument);
  CHECK_THROWS_AS(ArraySpec::parse("ula:x"), std::invalid_argument);
  CHECK_THROWS_AS(ArraySpec::parse("ula"), std::invalid_argument);
}

TEST_CASE("array specs round-trip")
{
  for (const char* s : {"ula:3", "coprime:5,3", "nested:5,5", "mra:10", "custom:0,1,4"}) {
    const ArraySpec spec = ArraySpec::parse(s);
    CHECK(spec.to_string() == s);
    CHECK(make_array(spec).name() == s);
  }
  CHECK(make_array(ArraySpec::parse("custom:4, 0, 1")).positions() == std::vector<int>{0, 1, 4});
}

TEST_CASE("weight function matches direct pair counting")
{
  for (const auto& g : testing::comparison_arrays()) {
    const CoarrayStructure co = difference_coarray(g);
    const int ap = g.aperture();
    int total = 0;
    for (int l = -ap - 1; l <= ap + 1; ++l) {
      CHECK(co.weight(l) == brute_weight(g.positions(), l));
      CHECK(co.weight(l) == co.weight(-l));
      total += co.weight(l);
    }
    CHECK(total == g.size() * g.size());
    CHECK(co.weight(0) == g.size());
    for (Index p = 0; p < g.size(); ++p)
      for (Index q = 0; q < g.size(); ++q) CHECK(co.diff(p, q) == g.positions()[p] - g.positions()[q]);
  }
}

TEST_CASE("virtual ULA half-size Mv")
{
  CHECK(difference_coarray(make_coprime(5, 3)).mv == 18);
  CHECK(difference_coarray(make_nested(5, 5)).mv == 30);
  CHECK(difference_coarray(make_mra(10)).mv == 36);
  CHECK(difference_coarray(make_coprime_pair(2)).mv == 8);
  CHECK(difference_coarray(make_ula(5)).mv == 5);
  CHECK(difference_coarray(ArrayGeometry({0, 1, 4})).mv == 2);
}

TEST_CASE("minimum-redundancy table is hole-free and maximal")
{
  for (int m : mra_sizes()) {
    const ArrayGeometry g = make_mra(m);
    CHECK(g.size() == m);
    CHECK(hole_free(g.positions()));
    CHECK(difference_coarray(g).mv == g.aperture() + 1);
  }
  // exhaustive check of maximality for the small sizes
  for (int m = 3; m <= 7; ++m) {
    CAPTURE(m);
    CHECK_FALSE(hole_free_exists(m, make_mra(m).aperture() + 1));
  }
}

TEST_CASE("selection matrix of the toy array {0, 1, 4}")
{
  const CoarrayStructure co = difference_coarray(ArrayGeometry({0, 1, 4}));
  RMatrix<double> expected = RMatrix<double>::Zero(3, 9);
  expected(0, 3) = 1.0;
  expected(1, 0) = expected(1, 4) = expected(1, 8) = 1.0 / 3.0;
  expected(2, 1) = 1.0;
  CHECK(selection_matrix<double>(co) == expected);

  CMatrix<double> r(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) r(i, j) = std::complex<double>(double(10 * (i + 1) + j + 1), double(i - j));
  const CVector<double> z = selection_matrix<double>(co).cast<std::complex<double>>() * vec(r);
  CHECK(z(0) == r(0, 1));
  CHECK(z(1) == (r(0, 0) + r(1, 1) + r(2, 2)) / 3.0);
  CHECK(z(2) == r(1, 0));
}

TEST_CASE("selection matrix rows average and index symmetry holds")
{
  for (const auto& g : testing::comparison_arrays()) {
    const CoarrayStructure co = difference_coarray(g);
    const RMatrix<double> f = selection_matrix<double>(co);
    const Index m = g.size();
    CHECK((f.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
    for (Index row = 0; row < f.rows(); ++row)
      for (Index p = 0; p < m; ++p)
        for (Index q = 0; q < m; ++q) CHECK(f(row, p + q * m) == f(f.rows() - 1 - row, q + p * m));
  }
}

TEST_CASE("F vec(H) is conjugate symmetric and mat(F^T z) Hermitian")
{
  std::mt19937_64 gen(11);
  for (const auto& g : testing::comparison_arrays()) {
    const RMatrix<double> f = selection_matrix<double>(difference_coarray(g));
    const CMatrix<double> fc = f.cast<std::complex<double>>();
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix<double> h = testing::random_hermitian(g.size(), gen);
      const CVector<double> z = fc * vec(h);
      CHECK(conj_symmetry_error(z) < 1e-12);
      CHECK(hermitian_error(mat(CVector<double>(fc.transpose() * z), g.size(), g.size())) < 1e-12);
    }
  }
}
