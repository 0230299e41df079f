#include <random>

#include "coarray/estimator.hpp"
#include "coarray/linalg.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coarray;

namespace {

CVector<double> exact_z(const ArrayGeometry& g, const SourceScenario<double>& sc)
{
  return virtual_observation(selection_matrix<double>(difference_coarray(g)), true_covariance(g, sc).r_vec);
}

CVector<double> sample_z(const ArrayGeometry& g, const SourceScenario<double>& sc, long n, std::uint64_t seed)
{
  return virtual_observation(selection_matrix<double>(difference_coarray(g)),
                             sample_covariance(simulate_snapshots(g, sc, n, seed)).r_vec);
}

}  // namespace

TEST_CASE("subarray selection")
{
  CVector<double> z(5);
  z << 1.0, 2.0, 3.0, 4.0, 5.0;
  CHECK(subarray_select(z, 0, 3) == z.head(3));
  CHECK(subarray_select(z, 2, 3) == z.tail(3));
  CHECK_THROWS_AS(subarray_select(z, 3, 3), std::out_of_range);
  CHECK_THROWS_AS(subarray_select(z, 0, 4), std::invalid_argument);
}

TEST_CASE("stacked selector builds Rv1 and its transpose scatters columns")
{
  std::mt19937_64 gen(31);
  const Index mv = 4;
  CVector<double> z = testing::random_hermitian(2 * mv - 1, gen).col(0);
  const RMatrix<double> g = stacked_subarray_selector<double>(mv);
  const CMatrix<double> rv1 = augment_direct<double>(z, mv).rv;
  CHECK(relative_error(CVector<double>(g.cast<std::complex<double>>() * z), vec(rv1)) < 1e-15);
  for (Index c = 0; c < mv; ++c) CHECK(rv1.col(c) == subarray_select(z, mv - 1 - c, mv));
  const CMatrix<double> y = testing::random_hermitian(mv, gen);
  CHECK(relative_error(stacked_subarray_adjoint_apply<double>(y),
                       CVector<double>(g.transpose().cast<std::complex<double>>() * vec(y))) < 1e-15);
}

TEST_CASE("augmented covariances on exact data")
{
  std::mt19937_64 gen(32);
  for (const auto& geom : testing::comparison_arrays()) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto sc = testing::random_scenario(geom, gen);
      const int mv = difference_coarray(geom).mv;
      const CVector<double> z = exact_z(geom, sc);
      const CMatrix<double> rv1 = augment_direct<double>(z, mv).rv;
      const CMatrix<double> rv2 = augment_spatial_smoothing<double>(z, mv).rv;
      // Rv1 is the covariance of a virtual ULA at 0..Mv-1
      const CMatrix<double> av = steering_matrix<double>(virtual_ula_positions(mv), geom.spacing_ratio(), sc.doas).a;
      CMatrix<double> model = av * sc.powers.asDiagonal() * av.adjoint();
      model.diagonal().array() += sc.noise_power;
      CHECK(relative_error(rv1, model) < 1e-12);
      CHECK(relative_error(rv2, CMatrix<double>(rv1 * rv1 / double(mv))) < 1e-12);
      // the noise subspace of Rv1 is an eigenspace of Rv2
      const CMatrix<double> e1 = noise_subspace(rv1, sc.sources());
      const double s4 = sc.noise_power * sc.noise_power / mv;
      CHECK((rv2 * e1 - s4 * e1).norm() < 1e-12 * rv2.norm());
    }
  }
}

TEST_CASE("noise subspace rejects K >= Mv")
{
  const CMatrix<double> rv = CMatrix<double>::Identity(3, 3);
  CHECK_THROWS_AS(noise_subspace(rv, 3), std::invalid_argument);
  CHECK_THROWS_AS(noise_subspace(rv, 0), std::invalid_argument);
}

TEST_CASE("null spectrum equals the direct quadratic form and ignores the basis choice")
{
  std::mt19937_64 gen(33);
  const Index mv = 9;
  CMatrix<double> h = testing::random_hermitian(mv, gen);
  const CMatrix<double> en = noise_subspace(h, 3);
  const NullSpectrum<double> spec(en, 0.5);
  // a different orthonormal basis of the same subspace
  Eigen::HouseholderQR<CMatrix<double>> qr(testing::random_hermitian(mv - 3, gen));
  const CMatrix<double> rotated = en * CMatrix<double>(qr.householderQ());
  const NullSpectrum<double> spec_rot(rotated, 0.5);
  for (double deg = -89.0; deg < 90.0; deg += 7.3) {
    const double t = deg2rad(deg);
    const CVector<double> a = steering_vector<double>(virtual_ula_positions(int(mv)), 0.5, t);
    const double direct = (a.adjoint() * en * en.adjoint() * a).value().real();
    CHECK(spec.denominator(t) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(spec_rot.denominator(t) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(spec(t) > 0.0);
  }
  const RVector<double> grid = angle_grid(deg2rad(1.0));
  CHECK(music_spectrum<double>(en, grid).minCoeff() > 0.0);
  CHECK_THROWS_AS(music_spectrum<double>(en, RVector<double>()), std::invalid_argument);
}

TEST_CASE("angle grid stays strictly inside (-90, 90) degrees")
{
  const RVector<double> g = angle_grid(deg2rad(0.1));
  CHECK(g.size() == 1799);
  CHECK(rad2deg(g(0)) == doctest::Approx(-89.9));
  CHECK(rad2deg(g(g.size() - 1)) == doctest::Approx(89.9));
  CHECK_THROWS_AS(angle_grid(0.0), std::invalid_argument);
}

TEST_CASE("exact covariance recovers every source")
{
  const auto doas = testing::eleven_sources();
  for (const auto& geom : testing::comparison_arrays()) {
    const auto sc = SourceScenario<double>::equal_power(doas, 0.0);
    const int mv = difference_coarray(geom).mv;
    for (Augmentation m : {Augmentation::direct, Augmentation::spatial_smoothing}) {
      const auto est = estimate_doas(augment<double>(exact_z(geom, sc), mv, m).rv, 11);
      REQUIRE(est.resolved);
      for (Index k = 0; k < 11; ++k) CHECK(std::abs(est.angles[k] - doas(k)) < 1e-4);
      CHECK(std::is_sorted(est.angles.begin(), est.angles.end()));
      for (bool ok : est.refined) CHECK(ok);
    }
  }
}

TEST_CASE("estimates follow a common DOA shift")
{
  const ArrayGeometry geom = make_mra(10);
  const int mv = difference_coarray(geom).mv;
  RVector<double> d(3);
  d << -0.5, 0.05, 0.6;
  const double delta = deg2rad(0.37);
  const auto base = estimate_doas(
      augment<double>(exact_z(geom, SourceScenario<double>::equal_power(d, 10.0)), mv, Augmentation::direct).rv, 3);
  const auto shifted = estimate_doas(
      augment<double>(exact_z(geom, SourceScenario<double>::equal_power(d.array() + delta, 10.0)), mv,
                      Augmentation::direct).rv, 3);
  for (Index k = 0; k < 3; ++k) CHECK(std::abs(shifted.angles[k] - base.angles[k] - delta) < 1e-6);
}

TEST_CASE("merged peaks give an unresolved outcome")
{
  const ArrayGeometry geom = make_ula(4);
  RVector<double> d(2);
  d << deg2rad(10.0), deg2rad(10.05);
  const auto sc = SourceScenario<double>::equal_power(d, -5.0);
  int unresolved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto est = estimate_doas(augment<double>(sample_z(geom, sc, 30, seed), 4, Augmentation::direct).rv, 2);
    if (!est.resolved) {
      ++unresolved;
      CHECK(est.angles.size() < 2);
    }
  }
  CHECK(unresolved > 0);
}

TEST_CASE("spectrum is kept on request")
{
  const ArrayGeometry geom = make_coprime(5, 3);
  RVector<double> d(1);
  d << 0.3;
  EstimatorOptions<double> opt;
  opt.keep_spectrum = true;
  opt.grid_step = deg2rad(0.5);
  const auto est = estimate_doas(
      augment<double>(exact_z(geom, SourceScenario<double>::equal_power(d, 0.0)), 18, Augmentation::direct).rv, 1,
      opt);
  CHECK(est.grid.size() == est.spectrum.size());
  Index peak = 0;
  est.spectrum.maxCoeff(&peak);
  CHECK(std::abs(est.grid(peak) - 0.3) < deg2rad(0.5));
}

TEST_CASE("DA and SS estimates coincide to first order on the same sample covariance")
{
  const ArrayGeometry geom = make_nested(5, 5);
  const int mv = difference_coarray(geom).mv;
  RVector<double> d(2);
  d << deg2rad(29.0), deg2rad(31.0);
  const auto sc = SourceScenario<double>::equal_power(d, 0.0);
  double between = 0, error = 0;
  int used = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const CVector<double> z = sample_z(geom, sc, 500, seed);
    const auto a = estimate_doas(augment<double>(z, mv, Augmentation::direct).rv, 2);
    const auto b = estimate_doas(augment<double>(z, mv, Augmentation::spatial_smoothing).rv, 2);
    if (!a.resolved || !b.resolved) continue;
    ++used;
    for (Index k = 0; k < 2; ++k) {
      between += std::abs(a.angles[k] - b.angles[k]);
      error += std::abs(a.angles[k] - d(k));
    }
  }
  REQUIRE(used > 30);
  CHECK(between < 0.1 * error);
}
