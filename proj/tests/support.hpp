#pragma once

// Shared fixtures for unit and acceptance tests.

#include <algorithm>
#include <random>
#include <vector>

#include "coarray/geometry.hpp"
#include "coarray/model.hpp"

namespace coarray::testing {

/// The three 10-sensor arrays of the comparison experiments.
inline std::vector<ArrayGeometry> comparison_arrays()
{
  return {make_coprime(5, 3), make_nested(5, 5), make_mra(10)};
}

/// The 11-source layout -67.5 deg .. 56.25 deg in steps of 12.375 deg.
inline RVector<double> eleven_sources() { return uniform_doas_deg(-67.5, 56.25, 11); }

inline CMatrix<double> random_hermitian(Index n, std::mt19937_64& gen)
{
  std::normal_distribution<double> normal;
  CMatrix<double> g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = {normal(gen), normal(gen)};
  return (g + g.adjoint()) / 2.0;
}

/// K DOAs in (-lim, lim) degrees, at least min_sep_deg apart, ascending.
/// Sorted uniform draws over the slack, then spread by the minimum gap.
inline RVector<double> random_doas(Index k, std::mt19937_64& gen, double lim = 70.0, double min_sep_deg = 3.0)
{
  const double slack = 2 * lim - double(k - 1) * min_sep_deg;
  std::uniform_real_distribution<double> u(0.0, slack);
  std::vector<double> d(k);
  for (auto& x : d) x = u(gen);
  std::sort(d.begin(), d.end());
  RVector<double> out(k);
  for (Index i = 0; i < k; ++i) out(i) = deg2rad(-lim + d[i] + double(i) * min_sep_deg);
  return out;
}

/// Random scenario with K < Mv, unequal powers in [0.5, 2] and SNR drawn from [-5, 20] dB.
inline SourceScenario<double> random_scenario(const ArrayGeometry& geom, std::mt19937_64& gen, Index max_k = 0)
{
  const int mv = difference_coarray(geom).mv;
  const Index cap = max_k > 0 ? std::min<Index>(max_k, mv - 1) : mv - 1;
  std::uniform_int_distribution<Index> kd(1, cap);
  const Index k = kd(gen);
  std::uniform_real_distribution<double> pd(0.5, 2.0), sd(-5.0, 20.0);
  RVector<double> p(k);
  for (Index i = 0; i < k; ++i) p(i) = pd(gen);
  const double sigma2 = p.minCoeff() * std::pow(10.0, -sd(gen) / 10.0);
  return SourceScenario<double>(random_doas(k, gen, 70.0, 100.0 / double(mv)), p, sigma2);
}

}  // namespace coarray::testing
