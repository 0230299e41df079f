#pragma once

// Narrow-band far-field model for a linear array and its coarray.
//
//   y(t) = A x(t) + n(t),   R = A P A^H + sigma^2 I,   r = vec(R) = A_d p + sigma^2 vec(I)
//
// with A_d = conj(A) (.) A (Khatri-Rao). The virtual ULA observation is z = F r.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "coarray/geometry.hpp"
#include "coarray/linalg.hpp"
#include "coarray/rng.hpp"
#include "coarray/types.hpp"

namespace coarray {

template <typename Scalar = double>
struct SourceScenario {
  RVector<Scalar> doas;    ///< radians, each in (-pi/2, pi/2), distinct
  RVector<Scalar> powers;  ///< p_k > 0
  Scalar noise_power = Scalar(1);

  SourceScenario() = default;
  SourceScenario(RVector<Scalar> doas_, RVector<Scalar> powers_, Scalar noise)
      : doas(std::move(doas_)), powers(std::move(powers_)), noise_power(noise)
  {
    validate();
  }

  /// Unit-power sources with sigma^2 chosen so that min_k p_k / sigma^2 hits snr_db.
  static SourceScenario equal_power(RVector<Scalar> doas_, Scalar snr_db)
  {
    RVector<Scalar> p = RVector<Scalar>::Ones(doas_.size());
    return SourceScenario(std::move(doas_), std::move(p), std::pow(Scalar(10), -snr_db / Scalar(10)));
  }

  Index sources() const { return doas.size(); }

  /// 10 log10(min_k p_k / sigma^2)
  Scalar snr_db() const { return Scalar(10) * std::log10(powers.minCoeff() / noise_power); }

  bool equal_powers() const { return (powers.array() == powers(0)).all(); }

  /// Joint rescaling (p, sigma^2) -> (c p, c sigma^2); leaves every SNR unchanged.
  SourceScenario scaled(Scalar c) const { return SourceScenario(doas, c * powers, c * noise_power); }

  void validate() const
  {
    if (doas.size() < 1) throw std::invalid_argument("scenario: need at least one source");
    if (powers.size() != doas.size()) throw std::invalid_argument("scenario: powers/doas size mismatch");
    if (!(noise_power > 0)) throw std::invalid_argument("scenario: noise power must be positive");
    const Scalar half_pi = pi_v<Scalar> / 2;
    for (Index k = 0; k < doas.size(); ++k) {
      if (!(std::abs(doas(k)) < half_pi)) throw std::invalid_argument("scenario: DOA outside (-pi/2, pi/2)");
      if (!(powers(k) > 0)) throw std::invalid_argument("scenario: source powers must be positive");
      for (Index l = 0; l < k; ++l)
        if (doas(k) == doas(l)) throw std::invalid_argument("scenario: DOAs must be distinct");
    }
  }
};

/// K angles evenly spaced from first to last inclusive (degrees in, radians out).
template <typename Scalar = double>
RVector<Scalar> uniform_doas_deg(Scalar first_deg, Scalar last_deg, Index count)
{
  RVector<Scalar> out(count);
  for (Index k = 0; k < count; ++k) {
    const Scalar t = count == 1 ? Scalar(0.5) : Scalar(k) / Scalar(count - 1);
    out(k) = deg2rad(first_deg + t * (last_deg - first_deg));
  }
  return out;
}

/// Phase advance per unit of d0: 2 pi (d0/lambda) sin(theta).
template <typename Scalar>
Scalar spatial_frequency(Scalar spacing_ratio, Scalar theta)
{
  return Scalar(2) * pi_v<Scalar> * spacing_ratio * std::sin(theta);
}

/// Steering vector of integer positions: element i = exp(j d_i phi).
template <typename Scalar = double>
CVector<Scalar> steering_vector(const std::vector<int>& positions, Scalar spacing_ratio, Scalar theta)
{
  const Scalar phi = spatial_frequency(spacing_ratio, theta);
  CVector<Scalar> a(static_cast<Index>(positions.size()));
  for (Index i = 0; i < a.size(); ++i) a(i) = std::polar(Scalar(1), Scalar(positions[i]) * phi);
  return a;
}

template <typename Scalar = double>
CVector<Scalar> steering_vector(const ArrayGeometry& geom, Scalar theta)
{
  return steering_vector<Scalar>(geom.positions(), Scalar(geom.spacing_ratio()), theta);
}

template <typename Scalar>
struct SteeringMatrix {
  CMatrix<Scalar> a;      ///< M x K
  CMatrix<Scalar> a_dot;  ///< M x K, column k = d a(theta_k) / d theta_k
};

template <typename Scalar = double>
SteeringMatrix<Scalar> steering_matrix(const std::vector<int>& positions, Scalar spacing_ratio,
                                       const RVector<Scalar>& doas)
{
  const Index m = static_cast<Index>(positions.size());
  SteeringMatrix<Scalar> out{CMatrix<Scalar>(m, doas.size()), CMatrix<Scalar>(m, doas.size())};
  const Complex<Scalar> j(0, 1);
  for (Index k = 0; k < doas.size(); ++k) {
    out.a.col(k) = steering_vector<Scalar>(positions, spacing_ratio, doas(k));
    const Scalar phi_dot = Scalar(2) * pi_v<Scalar> * spacing_ratio * std::cos(doas(k));
    for (Index i = 0; i < m; ++i) out.a_dot(i, k) = j * phi_dot * Scalar(positions[i]) * out.a(i, k);
  }
  return out;
}

template <typename Scalar = double>
SteeringMatrix<Scalar> steering_matrix(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc)
{
  return steering_matrix<Scalar>(geom.positions(), Scalar(geom.spacing_ratio()), sc.doas);
}

/// Positions 0..mv-1 of the virtual ULA used by the augmented covariances.
inline std::vector<int> virtual_ula_positions(int mv)
{
  std::vector<int> pos(mv);
  for (int i = 0; i < mv; ++i) pos[i] = i;
  return pos;
}

/// Steering matrix of the full virtual ULA, rows at lags -mv+1 .. mv-1.
template <typename Scalar = double>
CMatrix<Scalar> coarray_steering_matrix(int mv, Scalar spacing_ratio, const RVector<Scalar>& doas)
{
  std::vector<int> lags(2 * mv - 1);
  for (int i = 0; i < 2 * mv - 1; ++i) lags[i] = i - mv + 1;
  return steering_matrix<Scalar>(lags, spacing_ratio, doas).a;
}

template <typename Scalar>
struct CovarianceSet {
  CMatrix<Scalar> r_mat;  ///< M x M Hermitian
  CVector<Scalar> r_vec;  ///< vec(r_mat)
  Index snapshots = 0;    ///< 0 for the exact model
};

template <typename Scalar = double>
CovarianceSet<Scalar> true_covariance(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc)
{
  const CMatrix<Scalar> a = steering_matrix(geom, sc).a;
  CovarianceSet<Scalar> out;
  out.r_mat = a * sc.powers.asDiagonal() * a.adjoint();
  out.r_mat.diagonal().array() += sc.noise_power;
  out.r_vec = vec(out.r_mat);
  return out;
}

/// Snapshot matrix Y (M x N). Column t is drawn from its own counter-based
/// stream derive_seed(seed, t), so the result depends only on (seed, t).
template <typename Scalar = double>
CMatrix<Scalar> simulate_snapshots(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc, Index snapshots,
                                   std::uint64_t seed)
{
  if (snapshots < 1) throw std::invalid_argument("simulate_snapshots: need at least one snapshot");
  const Index m = geom.size();
  const Index k = sc.sources();
  const CMatrix<Scalar> a = steering_matrix(geom, sc).a;
  const RVector<Scalar> source_scale = (sc.powers / Scalar(2)).cwiseSqrt();
  const Scalar noise_scale = std::sqrt(sc.noise_power / Scalar(2));

  CMatrix<Scalar> x(k, snapshots);
  CMatrix<Scalar> noise(m, snapshots);
  for (Index t = 0; t < snapshots; ++t) {
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::normal_distribution<Scalar> normal;
    for (Index i = 0; i < k; ++i) {
      const Scalar re = normal(rng);
      const Scalar im = normal(rng);
      x(i, t) = source_scale(i) * Complex<Scalar>(re, im);
    }
    for (Index i = 0; i < m; ++i) {
      const Scalar re = normal(rng);
      const Scalar im = normal(rng);
      noise(i, t) = noise_scale * Complex<Scalar>(re, im);
    }
  }
  return a * x + noise;
}

/// R_hat = (1/N) sum_t y(t) y(t)^H
template <typename Derived>
auto sample_covariance(const Eigen::MatrixBase<Derived>& y)
{
  using S = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  if (y.cols() < 1) throw std::invalid_argument("sample_covariance: need at least one snapshot");
  CovarianceSet<S> out;
  out.r_mat = CMatrix<S>::Zero(y.rows(), y.rows());
  out.r_mat.template selfadjointView<Eigen::Lower>().rankUpdate(y.derived(), S(1) / S(y.cols()));
  out.r_mat = out.r_mat.template selfadjointView<Eigen::Lower>();
  out.r_vec = vec(out.r_mat);
  out.snapshots = y.cols();
  return out;
}

/// z = F r
template <typename Scalar, typename Derived>
CVector<Scalar> virtual_observation(const RMatrix<Scalar>& f, const Eigen::MatrixBase<Derived>& r)
{
  if (f.cols() != r.size()) throw std::invalid_argument("virtual_observation: F and r dimensions differ");
  return f.template cast<Complex<Scalar>>() * r;
}

}  // namespace coarray
