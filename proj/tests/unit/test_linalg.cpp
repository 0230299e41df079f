#include <random>

#include "coarray/linalg.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarray;

TEST_CASE("vec stacks columns and mat inverts it")
{
  CMatrix<double> a(2, 3);
  a << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  const CVector<double> v = vec(a);
  CHECK(v(0) == 1.0);
  CHECK(v(1) == 4.0);
  CHECK(v(2) == 2.0);
  CHECK(v(5) == 6.0);
  CHECK(mat(v, 2, 3) == a);
  CHECK_THROWS_AS(mat(v, 4, 2), std::invalid_argument);
}

TEST_CASE("vec(A X B) = (B^T kron A) vec(X)")
{
  std::mt19937_64 gen(3);
  const CMatrix<double> a = testing::random_hermitian(3, gen).leftCols(2);
  const CMatrix<double> x = testing::random_hermitian(2, gen);
  const CMatrix<double> b = testing::random_hermitian(2, gen) * std::complex<double>(0.3, 1.1);
  const CVector<double> lhs = vec(a * x * b);
  const CVector<double> rhs = kron(b.transpose(), a) * vec(x);
  CHECK(relative_error(lhs, rhs) < 1e-14);
}

TEST_CASE("Khatri-Rao columns are Kronecker products of columns")
{
  std::mt19937_64 gen(4);
  const CMatrix<double> a = testing::random_hermitian(3, gen);
  const CMatrix<double> b = testing::random_hermitian(3, gen);
  const CMatrix<double> kr = khatri_rao(a, b);
  for (Index k = 0; k < 3; ++k) CHECK(relative_error(CVector<double>(kr.col(k)), CVector<double>(kron(a.col(k), b.col(k)))) < 1e-15);
  CHECK_THROWS_AS(khatri_rao(a, b.leftCols(2)), std::invalid_argument);
}

TEST_CASE("pseudo_inverse of a tall full-rank matrix is a left inverse")
{
  std::mt19937_64 gen(5);
  const CMatrix<double> a = testing::random_hermitian(6, gen).leftCols(3);
  const CMatrix<double> p = pseudo_inverse(a);
  CHECK((p * a - CMatrix<double>::Identity(3, 3)).norm() < 1e-12);
  // P A^+ is the orthogonal projector onto range(A)
  const CMatrix<double> proj = a * p;
  CHECK((proj * proj - proj).norm() < 1e-12);
  CHECK(hermitian_error(proj) < 1e-12);

  CMatrix<double> deficient = a;
  deficient.col(2) = deficient.col(0) * 2.0;
  CHECK_THROWS_AS(pseudo_inverse(deficient), std::domain_error);
}

TEST_CASE("real_rank counts real-linear independence")
{
  CMatrix<double> a(2, 2);
  a << std::complex<double>(1, 0), std::complex<double>(0, 1), std::complex<double>(0, 0), std::complex<double>(0, 0);
  // columns 1 and j are complex-dependent but real-independent
  CHECK(real_rank<double>(a, 1e-10) == 2);
  a(0, 1) = 2.0;
  double cond = 0;
  CHECK(real_rank<double>(a, 1e-10, &cond) == 1);
  CHECK(cond > 1e10);
}

TEST_CASE("conjugate symmetry and Hermitian errors")
{
  CVector<double> z(3);
  z << std::complex<double>(1, 2), 5.0, std::complex<double>(1, -2);
  CHECK(conj_symmetry_error(z) == 0.0);
  z(1) = std::complex<double>(5, 1);
  CHECK(conj_symmetry_error(z) == doctest::Approx(2.0));
  std::mt19937_64 gen(6);
  CHECK(hermitian_error(testing::random_hermitian(4, gen)) < 1e-15);
}

TEST_CASE("hermitian_apply computes matrix square roots")
{
  std::mt19937_64 gen(7);
  CMatrix<double> h = testing::random_hermitian(4, gen);
  h = h * h.adjoint() + CMatrix<double>::Identity(4, 4);
  const CMatrix<double> s = hermitian_apply(h, [](double v) { return std::sqrt(v); });
  CHECK((s * s - h).norm() / h.norm() < 1e-13);
}
