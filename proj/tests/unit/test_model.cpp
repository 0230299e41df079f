#include <random>

#include "coarray/linalg.hpp"
#include "coarray/model.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarray;

TEST_CASE("scenario validation")
{
  RVector<double> d(2), p(2);
  d << 0.1, 0.1;
  p << 1.0, 1.0;
  CHECK_THROWS_AS(SourceScenario<double>(d, p, 1.0), std::invalid_argument);
  d << 0.1, 2.0;
  CHECK_THROWS_AS(SourceScenario<double>(d, p, 1.0), std::invalid_argument);
  d << 0.1, 0.2;
  CHECK_THROWS_AS(SourceScenario<double>(d, p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SourceScenario<double>(d, RVector<double>::Ones(3), 1.0), std::invalid_argument);
  p << 1.0, -1.0;
  CHECK_THROWS_AS(SourceScenario<double>(d, p, 1.0), std::invalid_argument);
}

TEST_CASE("SNR uses the weakest source")
{
  RVector<double> d(2), p(2);
  d << -0.3, 0.4;
  p << 4.0, 2.0;
  const SourceScenario<double> sc(d, p, 0.2);
  CHECK(sc.snr_db() == doctest::Approx(10.0));
  CHECK(sc.scaled(7.0).snr_db() == doctest::Approx(10.0));
  CHECK_FALSE(sc.equal_powers());
  const auto eq = SourceScenario<double>::equal_power(d, -10.0);
  CHECK(eq.noise_power == doctest::Approx(10.0));
  CHECK(eq.equal_powers());
}

TEST_CASE("uniform DOA layout")
{
  const RVector<double> d = uniform_doas_deg(-60.0, 60.0, 6);
  CHECK(rad2deg(d(0)) == doctest::Approx(-60.0));
  CHECK(rad2deg(d(1)) == doctest::Approx(-36.0));
  CHECK(rad2deg(d(5)) == doctest::Approx(60.0));
  CHECK(uniform_doas_deg(-60.0, 60.0, 1)(0) == 0.0);
  const RVector<double> e = testing::eleven_sources();
  CHECK(rad2deg(e(1) - e(0)) == doctest::Approx(12.375));
}

TEST_CASE("steering derivative matches central differences")
{
  const ArrayGeometry g = make_coprime(5, 3);
  RVector<double> d(3);
  d << -0.7, 0.1, 1.2;
  const SteeringMatrix<double> s = steering_matrix<double>(g.positions(), g.spacing_ratio(), d);
  const double h = 1e-6;
  for (Index k = 0; k < d.size(); ++k) {
    const CVector<double> fd = (steering_vector<double>(g, d(k) + h) - steering_vector<double>(g, d(k) - h)) / (2 * h);
    CHECK(relative_error(fd, CVector<double>(s.a_dot.col(k))) < 1e-7);
  }
  CHECK(std::abs(s.a(0, 0) - 1.0) < 1e-15);  // reference sensor at 0
}

TEST_CASE("exact covariance: Hermitian, PD and r = A_d p + sigma^2 vec(I)")
{
  std::mt19937_64 gen(21);
  for (const auto& g : testing::comparison_arrays()) {
    const auto sc = testing::random_scenario(g, gen);
    const auto cov = true_covariance(g, sc);
    CHECK(hermitian_error(cov.r_mat) < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMatrix<double>> es(cov.r_mat);
    if (sc.sources() < g.size())
      CHECK(es.eigenvalues().minCoeff() == doctest::Approx(sc.noise_power).epsilon(1e-8));
    else
      CHECK(es.eigenvalues().minCoeff() >= sc.noise_power * (1 - 1e-10));
    const CMatrix<double> a = steering_matrix(g, sc).a;
    const CVector<double> rebuilt =
        khatri_rao(a.conjugate(), a) * sc.powers.cast<std::complex<double>>() +
        sc.noise_power * vec(CMatrix<double>::Identity(g.size(), g.size()));
    CHECK(relative_error(cov.r_vec, rebuilt) < 1e-13);
  }
}

TEST_CASE("virtual observation of the exact covariance is the coarray steering response")
{
  const ArrayGeometry g = make_nested(5, 5);
  const CoarrayStructure co = difference_coarray(g);
  RVector<double> d(2), p(2);
  d << -0.2, 0.5;
  p << 1.5, 0.7;
  const SourceScenario<double> sc(d, p, 0.3);
  const CVector<double> z = virtual_observation(selection_matrix<double>(co), true_covariance(g, sc).r_vec);
  CVector<double> expected = coarray_steering_matrix(co.mv, g.spacing_ratio(), d) * p.cast<std::complex<double>>();
  expected(co.mv - 1) += sc.noise_power;
  CHECK(relative_error(z, expected) < 1e-13);
  CHECK_THROWS_AS(virtual_observation(selection_matrix<double>(co), CVector<double>::Zero(4)), std::invalid_argument);
}

TEST_CASE("snapshots are reproducible from the seed and prefix-stable in N")
{
  const ArrayGeometry g = make_mra(10);
  const auto sc = SourceScenario<double>::equal_power(uniform_doas_deg(-30.0, 30.0, 3), 5.0);
  const CMatrix<double> y1 = simulate_snapshots(g, sc, 50, 99);
  const CMatrix<double> y2 = simulate_snapshots(g, sc, 50, 99);
  const CMatrix<double> y3 = simulate_snapshots(g, sc, 80, 99);
  const CMatrix<double> y4 = simulate_snapshots(g, sc, 50, 100);
  CHECK(y1 == y2);
  CHECK(y3.leftCols(50) == y1);
  CHECK((y1 - y4).norm() > 1.0);
  CHECK_THROWS_AS(simulate_snapshots(g, sc, 0, 1), std::invalid_argument);
}

TEST_CASE("sample covariance converges to the model covariance")
{
  const ArrayGeometry g = make_ula(4);
  RVector<double> d(2), p(2);
  d << -0.4, 0.3;
  p << 2.0, 1.0;
  const SourceScenario<double> sc(d, p, 0.5);
  const long n = 200000;
  const auto est = sample_covariance(simulate_snapshots(g, sc, n, 5));
  const CMatrix<double> r = true_covariance(g, sc).r_mat;
  CHECK(est.snapshots == n);
  CHECK(hermitian_error(est.r_mat) == 0.0);
  // entrywise standard deviation is at most max|R| / sqrt(N); allow 5 of them
  const double tol = 5.0 * r.cwiseAbs().maxCoeff() / std::sqrt(double(n));
  CHECK((est.r_mat - r).cwiseAbs().maxCoeff() < tol);
}
