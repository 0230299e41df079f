#pragma once

// Coarray covariance augmentation and MUSIC on the virtual ULA.
//
// Subarray i (zero-based, 0 <= i < Mv) of the virtual ULA observation z is
// z_i = z[i .. i+Mv-1]. Direct augmentation stacks them as
//   Rv1 = [z_{Mv-1} z_{Mv-2} ... z_0]
// and spatial smoothing averages their outer products
//   Rv2 = (1/Mv) sum_i z_i z_i^H.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "coarray/model.hpp"
#include "coarray/types.hpp"

namespace coarray {

enum class Augmentation { direct, spatial_smoothing };

inline const char* to_string(Augmentation a) { return a == Augmentation::direct ? "da" : "ss"; }

inline Augmentation parse_augmentation(const std::string& s)
{
  if (s == "da" || s == "direct") return Augmentation::direct;
  if (s == "ss" || s == "spatial_smoothing") return Augmentation::spatial_smoothing;
  throw std::invalid_argument("unknown method '" + s + "' (expected da or ss)");
}

template <typename Scalar>
struct AugmentedCovariance {
  Augmentation kind;
  CMatrix<Scalar> rv;  ///< Mv x Mv
};

namespace detail {
template <typename Derived>
void check_virtual_length(const Eigen::MatrixBase<Derived>& z, Index mv)
{
  if (mv < 1 || z.size() != 2 * mv - 1)
    throw std::invalid_argument("virtual observation must have length 2*Mv-1");
}
}  // namespace detail

template <typename Derived>
auto subarray_select(const Eigen::MatrixBase<Derived>& z, Index i, Index mv)
{
  detail::check_virtual_length(z, mv);
  if (i < 0 || i >= mv) throw std::out_of_range("subarray index out of range");
  return Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>(z.segment(i, mv));
}

/// Dense stacked selector Gamma = [Gamma_{Mv-1}; ...; Gamma_0], Mv^2 x (2Mv-1).
/// Satisfies Gamma z = vec(Rv1). Intended for small Mv and tests.
template <typename Scalar = double>
RMatrix<Scalar> stacked_subarray_selector(Index mv)
{
  RMatrix<Scalar> g = RMatrix<Scalar>::Zero(mv * mv, 2 * mv - 1);
  for (Index c = 0; c < mv; ++c)
    for (Index r = 0; r < mv; ++r) g(c * mv + r, mv - 1 - c + r) = Scalar(1);
  return g;
}

/// Gamma^T vec(Y) without forming Gamma: scatters column c of Y onto
/// positions Mv-1-c .. 2Mv-2-c.
template <typename Scalar>
CVector<Scalar> stacked_subarray_adjoint_apply(const CMatrix<Scalar>& y)
{
  const Index mv = y.rows();
  CVector<Scalar> out = CVector<Scalar>::Zero(2 * mv - 1);
  for (Index c = 0; c < mv; ++c) out.segment(mv - 1 - c, mv) += y.col(c);
  return out;
}

template <typename Scalar, typename Derived>
AugmentedCovariance<Scalar> augment_direct(const Eigen::MatrixBase<Derived>& z, Index mv)
{
  detail::check_virtual_length(z, mv);
  AugmentedCovariance<Scalar> out{Augmentation::direct, CMatrix<Scalar>(mv, mv)};
  for (Index c = 0; c < mv; ++c) out.rv.col(c) = z.segment(mv - 1 - c, mv);
  return out;
}

template <typename Scalar, typename Derived>
AugmentedCovariance<Scalar> augment_spatial_smoothing(const Eigen::MatrixBase<Derived>& z, Index mv)
{
  detail::check_virtual_length(z, mv);
  AugmentedCovariance<Scalar> out{Augmentation::spatial_smoothing, CMatrix<Scalar>::Zero(mv, mv)};
  for (Index i = 0; i < mv; ++i) out.rv.noalias() += z.segment(i, mv) * z.segment(i, mv).adjoint();
  out.rv /= Scalar(mv);
  return out;
}

template <typename Scalar, typename Derived>
AugmentedCovariance<Scalar> augment(const Eigen::MatrixBase<Derived>& z, Index mv, Augmentation kind)
{
  return kind == Augmentation::direct ? augment_direct<Scalar>(z, mv) : augment_spatial_smoothing<Scalar>(z, mv);
}

/// Eigenvectors of the Mv-K algebraically smallest eigenvalues.
template <typename Scalar>
CMatrix<Scalar> noise_subspace(const CMatrix<Scalar>& rv, Index sources)
{
  const Index mv = rv.rows();
  if (sources < 1 || sources >= mv) throw std::invalid_argument("noise_subspace: need 1 <= K < Mv");
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(rv);
  if (es.info() != Eigen::Success) throw std::runtime_error("noise_subspace: eigendecomposition failed");
  return es.eigenvectors().leftCols(mv - sources);
}

/// MUSIC null spectrum d(theta) = a_v(theta)^H E_n E_n^H a_v(theta) for a
/// virtual ULA. The projector enters only through its diagonal sums
/// c_l = sum_m P(m, m+l), so each evaluation is a degree Mv-1 trigonometric
/// polynomial: d = Re c_0 + 2 Re sum_{l>=1} c_l exp(j l phi).
template <typename Scalar = double>
class NullSpectrum {
 public:
  NullSpectrum(const CMatrix<Scalar>& noise_basis, Scalar spacing_ratio) : ratio_(spacing_ratio)
  {
    const CMatrix<Scalar> proj = noise_basis * noise_basis.adjoint();
    const Index mv = proj.rows();
    coeffs_.resize(mv);
    for (Index l = 0; l < mv; ++l) coeffs_(l) = proj.diagonal(l).sum();
  }

  Scalar denominator(Scalar theta) const
  {
    const Complex<Scalar> w = std::polar(Scalar(1), spatial_frequency(ratio_, theta));
    Complex<Scalar> acc(0);
    for (Index l = coeffs_.size() - 1; l >= 1; --l) acc = (acc + coeffs_(l)) * w;
    return std::max(coeffs_(0).real() + Scalar(2) * acc.real(), Scalar(0));
  }

  Scalar operator()(Scalar theta) const
  {
    const Scalar d = denominator(theta);
    return Scalar(1) / std::max(d, std::numeric_limits<Scalar>::min());
  }

 private:
  Scalar ratio_;
  CVector<Scalar> coeffs_;
};

template <typename Scalar = double>
RVector<Scalar> music_spectrum(const CMatrix<Scalar>& noise_basis, const RVector<Scalar>& grid,
                               Scalar spacing_ratio = Scalar(0.5))
{
  if (grid.size() == 0) throw std::invalid_argument("music_spectrum: empty grid");
  const NullSpectrum<Scalar> spec(noise_basis, spacing_ratio);
  return grid.unaryExpr([&](Scalar t) { return spec(t); });
}

/// Uniform grid strictly inside (-pi/2, pi/2): -pi/2 + step, ..., below pi/2.
template <typename Scalar = double>
RVector<Scalar> angle_grid(Scalar step)
{
  if (!(step > 0)) throw std::invalid_argument("angle_grid: step must be positive");
  const Scalar half_pi = pi_v<Scalar> / 2;
  const Index n = static_cast<Index>(std::ceil(Scalar(2) * half_pi / step)) - 1;
  RVector<Scalar> g(n);
  for (Index i = 0; i < n; ++i) g(i) = -half_pi + Scalar(i + 1) * step;
  return g;
}

template <typename Scalar = double>
struct EstimatorOptions {
  Scalar grid_step = deg2rad(Scalar(0.1));
  int refine_iters = 100;  ///< iteration cap for the in-cell Brent search
  Scalar spacing_ratio = Scalar(0.5);
  bool keep_spectrum = false;
};

template <typename Scalar>
struct DoaEstimate {
  bool resolved = false;          ///< false when fewer than K peaks were found
  std::vector<Scalar> angles;     ///< radians, ascending
  std::vector<bool> refined;      ///< Brent search converged within the cap
  RVector<Scalar> grid;           ///< populated when keep_spectrum is set
  RVector<Scalar> spectrum;
};

/// Picks the K strongest local maxima of the MUSIC pseudo-spectrum on a grid
/// and refines each inside its bracketing cells. Ties go to the larger
/// spectrum value, then the smaller angle.
template <typename Scalar>
DoaEstimate<Scalar> estimate_doas(const CMatrix<Scalar>& rv, Index sources,
                                  const EstimatorOptions<Scalar>& opt = {})
{
  const CMatrix<Scalar> en = noise_subspace(rv, sources);
  const NullSpectrum<Scalar> spec(en, opt.spacing_ratio);
  const RVector<Scalar> grid = angle_grid(opt.grid_step);
  const Index n = grid.size();
  RVector<Scalar> d(n);
  for (Index i = 0; i < n; ++i) d(i) = spec.denominator(grid(i));

  std::vector<Index> peaks;
  for (Index i = 1; i + 1 < n; ++i)
    if (d(i) < d(i - 1) && d(i) <= d(i + 1)) peaks.push_back(i);
  std::stable_sort(peaks.begin(), peaks.end(), [&](Index a, Index b) { return d(a) < d(b); });

  DoaEstimate<Scalar> out;
  out.resolved = static_cast<Index>(peaks.size()) >= sources;
  if (static_cast<Index>(peaks.size()) > sources) peaks.resize(sources);

  constexpr int bits = std::numeric_limits<Scalar>::digits / 2;
  std::vector<std::pair<Scalar, bool>> found;
  for (Index i : peaks) {
    std::uintmax_t iters = static_cast<std::uintmax_t>(opt.refine_iters);
    const auto best = boost::math::tools::brent_find_minima(
        [&](Scalar t) { return spec.denominator(t); }, grid(i - 1), grid(i + 1), bits, iters);
    found.emplace_back(best.first, iters < static_cast<std::uintmax_t>(opt.refine_iters));
  }
  std::sort(found.begin(), found.end());
  for (const auto& [angle, ok] : found) {
    out.angles.push_back(angle);
    out.refined.push_back(ok);
  }
  if (opt.keep_spectrum) {
    out.grid = grid;
    out.spectrum = d.unaryExpr([](Scalar v) { return Scalar(1) / std::max(v, std::numeric_limits<Scalar>::min()); });
  }
  return out;
}

}  // namespace coarray
