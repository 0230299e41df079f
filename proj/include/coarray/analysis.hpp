#pragma once

// Closed-form performance analysis of coarray MUSIC (direct augmentation and
// spatial smoothing share the same first-order error) and the Cramer-Rao
// bound of the unconditional model with diagonal source covariance.
//
// First-order DOA error of source k:
//   theta_hat_k - theta_k ~ -(gamma_k p_k)^{-1} Re(xi_k^T dr),  dr = vec(R_hat - R)
//   xi_k    = F^T Gamma^T (beta_k (x) alpha_k)
//   alpha_k = -(Av^+)^T e_k,  beta_k = P_perp(Av) da_v(theta_k),  gamma_k = da_v^H P_perp da_v
// Asymptotic error covariance:
//   E[e_k1 e_k2] = Re[xi_k1^H (R (x) R^T) xi_k2] / (N p_k1 p_k2 gamma_k1 gamma_k2)

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "coarray/errors.hpp"
#include "coarray/estimator.hpp"
#include "coarray/geometry.hpp"
#include "coarray/linalg.hpp"
#include "coarray/model.hpp"
#include "coarray/types.hpp"

namespace coarray {

template <typename Scalar>
struct ErrorTerms {
  std::vector<CVector<Scalar>> xi;     ///< length M^2 each
  std::vector<CVector<Scalar>> alpha;  ///< length Mv each
  std::vector<CVector<Scalar>> beta;   ///< length Mv each
  RVector<Scalar> gamma;               ///< K, positive
  Index sensors = 0;
  int mv = 0;

  Index sources() const { return gamma.size(); }
  CMatrix<Scalar> xi_matrix(Index k) const { return mat(xi[k], sensors, sensors); }
};

template <typename Scalar = double>
ErrorTerms<Scalar> error_terms(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc)
{
  const CoarrayStructure co = difference_coarray(geom);
  const Index k_src = sc.sources();
  if (k_src >= co.mv)
    throw std::invalid_argument("error_terms: need K < Mv (K=" + std::to_string(k_src) +
                                ", Mv=" + std::to_string(co.mv) + ")");
  const RMatrix<Scalar> f = selection_matrix<Scalar>(co);
  const Scalar ratio = Scalar(geom.spacing_ratio());
  const SteeringMatrix<Scalar> v = steering_matrix<Scalar>(virtual_ula_positions(co.mv), ratio, sc.doas);
  const CMatrix<Scalar> av_pinv = pseudo_inverse(v.a);
  const CMatrix<Scalar> p_perp = CMatrix<Scalar>::Identity(co.mv, co.mv) - v.a * av_pinv;

  ErrorTerms<Scalar> out;
  out.sensors = geom.size();
  out.mv = co.mv;
  out.gamma.resize(k_src);
  for (Index k = 0; k < k_src; ++k) {
    CVector<Scalar> alpha = -av_pinv.row(k).transpose();
    CVector<Scalar> beta = p_perp * v.a_dot.col(k);
    out.gamma(k) = v.a_dot.col(k).dot(beta).real();
    const CMatrix<Scalar> outer = alpha * beta.transpose();  // vec(alpha beta^T) = beta (x) alpha
    const CVector<Scalar> w = stacked_subarray_adjoint_apply<Scalar>(outer);
    out.xi.push_back(f.transpose().template cast<Complex<Scalar>>() * w);
    out.alpha.push_back(std::move(alpha));
    out.beta.push_back(std::move(beta));
  }
  return out;
}

/// Predicted first-order errors theta_hat - theta for one covariance estimate.
template <typename Scalar>
RVector<Scalar> first_order_errors(const ErrorTerms<Scalar>& terms, const RVector<Scalar>& powers,
                                   const CVector<Scalar>& delta_r)
{
  RVector<Scalar> out(terms.sources());
  for (Index k = 0; k < terms.sources(); ++k)
    out(k) = -(terms.xi[k].transpose() * delta_r).value().real() / (terms.gamma(k) * powers(k));
  return out;
}

/// Re[xi_a^H (R (x) R^T) xi_b], evaluated as <Xi_a, R^T Xi_b R^T> in O(M^3).
template <typename Scalar>
Scalar kron_quadratic_form(const CMatrix<Scalar>& r, const CMatrix<Scalar>& xi_a, const CMatrix<Scalar>& xi_b)
{
  const CMatrix<Scalar> rt = r.transpose();
  const CMatrix<Scalar> right = rt * xi_b * rt;
  return xi_a.cwiseProduct(right.conjugate()).sum().real();
}

/// K x K asymptotic error covariance; the diagonal is the MSE eps(theta_k).
template <typename Scalar>
RMatrix<Scalar> analytical_mse(const ErrorTerms<Scalar>& terms, const SourceScenario<Scalar>& sc,
                               const CMatrix<Scalar>& r, Index snapshots)
{
  if (snapshots < 1) throw std::invalid_argument("analytical_mse: need N >= 1");
  const Index k_src = terms.sources();
  std::vector<CMatrix<Scalar>> xis;
  for (Index k = 0; k < k_src; ++k) xis.push_back(terms.xi_matrix(k));
  RMatrix<Scalar> out(k_src, k_src);
  for (Index a = 0; a < k_src; ++a)
    for (Index b = a; b < k_src; ++b) {
      const Scalar num = kron_quadratic_form(r, xis[a], xis[b]);
      out(a, b) = num / (Scalar(snapshots) * sc.powers(a) * sc.powers(b) * terms.gamma(a) * terms.gamma(b));
      out(b, a) = out(a, b);
    }
  return out;
}

template <typename Scalar = double>
RMatrix<Scalar> analytical_mse(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc, Index snapshots)
{
  return analytical_mse(error_terms(geom, sc), sc, true_covariance(geom, sc).r_mat, snapshots);
}

/// N * lim_{SNR -> inf} eps(theta_k) for equal-power sources:
///   || xi_k^H (A (x) conj(A)) ||^2 / gamma_k^2 = || A^H conj(Xi_k) A ||_F^2 / gamma_k^2.
template <typename Scalar = double>
RVector<Scalar> limiting_mse(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc)
{
  if (!sc.equal_powers()) throw std::invalid_argument("limiting_mse: sources must have equal power");
  const ErrorTerms<Scalar> terms = error_terms(geom, sc);
  const CMatrix<Scalar> a = steering_matrix(geom, sc).a;
  RVector<Scalar> out(sc.sources());
  for (Index k = 0; k < sc.sources(); ++k) {
    const CMatrix<Scalar> g = a.adjoint() * terms.xi_matrix(k).conjugate() * a;
    out(k) = g.squaredNorm() / (terms.gamma(k) * terms.gamma(k));
  }
  return out;
}

/// dr/d eta with eta = [theta_1..theta_K, p_1..p_K, sigma^2]:
///   [ (conj(dA) (.) A + conj(A) (.) dA) P | conj(A) (.) A | vec(I) ]
template <typename Scalar = double>
CMatrix<Scalar> model_jacobian(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc)
{
  const SteeringMatrix<Scalar> s = steering_matrix(geom, sc);
  const Index m = geom.size();
  const Index k_src = sc.sources();
  CMatrix<Scalar> j(m * m, 2 * k_src + 1);
  const CMatrix<Scalar> ad_dot = khatri_rao(s.a_dot.conjugate(), s.a) + khatri_rao(s.a.conjugate(), s.a_dot);
  j.leftCols(k_src) = ad_dot * sc.powers.asDiagonal();
  j.middleCols(k_src, k_src) = khatri_rao(s.a.conjugate(), s.a);
  j.col(2 * k_src) = vec(CMatrix<Scalar>::Identity(m, m));
  return j;
}

/// Applies (R^T (x) R)^{-1/2} to each column of j via vec(R^{-1/2} X R^{-1/2}).
template <typename Scalar>
CMatrix<Scalar> whiten_columns(const CMatrix<Scalar>& r, const CMatrix<Scalar>& j)
{
  Eigen::SelfAdjointEigenSolver<CMatrix<Scalar>> es(r);
  if (es.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  const RVector<Scalar>& ev = es.eigenvalues();
  if (!(ev(0) > ev(ev.size() - 1) * std::numeric_limits<Scalar>::epsilon()))
    throw NumericalError("covariance matrix is singular");
  const CMatrix<Scalar> inv_sqrt =
      es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
  const Index m = r.rows();
  CMatrix<Scalar> out(j.rows(), j.cols());
  for (Index c = 0; c < j.cols(); ++c) out.col(c) = vec(inv_sqrt * mat(j.col(c), m, m) * inv_sqrt);
  return out;
}

/// FIM = N (dr/deta)^H (R^T (x) R)^{-1} (dr/deta), real symmetric.
template <typename Scalar = double>
RMatrix<Scalar> fim(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc, Index snapshots)
{
  const CMatrix<Scalar> w = whiten_columns(true_covariance(geom, sc).r_mat, model_jacobian(geom, sc));
  RMatrix<Scalar> out = Scalar(snapshots) * (w.adjoint() * w).real();
  return (out + out.transpose()) / Scalar(2);
}

/// Element-wise FIM_mn = N tr(dR/deta_m R^{-1} dR/deta_n R^{-1}); an
/// independent route to the same matrix as fim().
template <typename Scalar = double>
RMatrix<Scalar> fim_trace_form(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc, Index snapshots)
{
  const SteeringMatrix<Scalar> s = steering_matrix(geom, sc);
  const Index m = geom.size();
  const Index k_src = sc.sources();
  std::vector<CMatrix<Scalar>> d_r;
  for (Index k = 0; k < k_src; ++k)
    d_r.push_back(sc.powers(k) * (s.a_dot.col(k) * s.a.col(k).adjoint() + s.a.col(k) * s.a_dot.col(k).adjoint()));
  for (Index k = 0; k < k_src; ++k) d_r.push_back(s.a.col(k) * s.a.col(k).adjoint());
  d_r.push_back(CMatrix<Scalar>::Identity(m, m));

  const CMatrix<Scalar> r = true_covariance(geom, sc).r_mat;
  const Eigen::PartialPivLU<CMatrix<Scalar>> lu(r);
  std::vector<CMatrix<Scalar>> solved;
  for (const auto& dr : d_r) solved.push_back(lu.solve(dr));  // R^{-1} dR
  const Index n = static_cast<Index>(d_r.size());
  RMatrix<Scalar> out(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) out(a, b) = Scalar(snapshots) * (solved[a] * solved[b]).trace().real();
  return out;
}

template <typename Scalar>
struct CrbReport {
  bool defined = false;
  RMatrix<Scalar> fim;             ///< (2K+1) x (2K+1)
  RMatrix<Scalar> crb;             ///< K x K DOA block, empty when undefined
  Index jacobian_rank = 0;
  Index parameters = 0;
  Scalar jacobian_condition = 0;
  Scalar fim_condition = 0;

  Scalar trace() const
  {
    if (!defined) throw NumericalError("CRB undefined: dr/deta has rank " + std::to_string(jacobian_rank) +
                                       " < " + std::to_string(parameters));
    return crb.trace();
  }
};

/// CRB_theta = (1/N) (M_theta^H P_perp(M_s) M_theta)^{-1} with
/// M_theta = W^{-1/2} dA_d P and M_s = W^{-1/2} [A_d vec(I)], W = R^T (x) R.
/// A rank-deficient Jacobian yields defined == false rather than an exception.
template <typename Scalar = double>
CrbReport<Scalar> crb(const ArrayGeometry& geom, const SourceScenario<Scalar>& sc, Index snapshots,
                      Scalar rank_tol = Scalar(1e-10))
{
  if (snapshots < 1) throw std::invalid_argument("crb: need N >= 1");
  const Index k_src = sc.sources();
  CrbReport<Scalar> rep;
  rep.parameters = 2 * k_src + 1;
  const CMatrix<Scalar> jac = model_jacobian(geom, sc);
  rep.jacobian_rank = real_rank<Scalar>(jac, rank_tol, &rep.jacobian_condition);
  const CMatrix<Scalar> w = whiten_columns(true_covariance(geom, sc).r_mat, jac);
  rep.fim = Scalar(snapshots) * (w.adjoint() * w).real();
  rep.fim = (rep.fim + rep.fim.transpose()).eval() / Scalar(2);
  {
    Eigen::SelfAdjointEigenSolver<RMatrix<Scalar>> es(rep.fim, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    rep.fim_condition = ev(0) > 0 ? ev(ev.size() - 1) / ev(0) : Scalar(INFINITY);
  }
  if (rep.jacobian_rank < rep.parameters) return rep;

  const CMatrix<Scalar> m_theta = w.leftCols(k_src);
  const CMatrix<Scalar> m_s = w.rightCols(k_src + 1);
  // P_perp(M_s) M_theta is the part of Q^H M_theta below the first k+1 rows.
  Eigen::HouseholderQR<CMatrix<Scalar>> qr(m_s);
  const CMatrix<Scalar> rotated = qr.householderQ().adjoint() * m_theta;
  const CMatrix<Scalar> resid = rotated.bottomRows(rotated.rows() - (k_src + 1));
  RMatrix<Scalar> schur = (resid.adjoint() * resid).real();
  schur = (schur + schur.transpose()).eval() / Scalar(2);
  Eigen::LLT<RMatrix<Scalar>> llt(schur);
  if (llt.info() != Eigen::Success) return rep;
  rep.crb = llt.solve(RMatrix<Scalar>::Identity(k_src, k_src)) / Scalar(snapshots);
  rep.crb = (rep.crb + rep.crb.transpose()).eval() / Scalar(2);
  rep.defined = true;
  return rep;
}

/// kappa = tr(CRB_theta) / sum_k eps(theta_k)
template <typename Scalar>
Scalar efficiency_kappa(const CrbReport<Scalar>& report, const RMatrix<Scalar>& mse)
{
  return report.trace() / mse.trace();
}

/// Two sources are declared resolvable when eps(theta_1) + eps(theta_2) < separation
/// (MSE in rad^2, separation in rad, compared literally).
template <typename Scalar>
bool resolution_predict(const RMatrix<Scalar>& mse, Scalar separation)
{
  if (mse.rows() != 2 || mse.cols() != 2) throw std::invalid_argument("resolution_predict: needs exactly two sources");
  return mse(0, 0) + mse(1, 1) < separation;
}

/// Smallest separation above which the two-source criterion declares the
/// pair resolvable everywhere in [lo, hi]. mse_at(sep) returns the 2x2 MSE.
/// Returns nullopt when the criterion is already met at lo or never met at hi.
template <typename Scalar>
std::optional<Scalar> resolution_threshold(const std::function<RMatrix<Scalar>(Scalar)>& mse_at, Scalar lo,
                                           Scalar hi, int scan_points = 200)
{
  auto excess = [&](Scalar sep) {
    const RMatrix<Scalar> e = mse_at(sep);
    return e(0, 0) + e(1, 1) - sep;
  };
  if (excess(hi) >= 0) return std::nullopt;
  Scalar upper = hi;
  Scalar lower = hi;
  bool bracketed = false;
  for (int i = scan_points - 1; i >= 0; --i) {
    lower = lo + (hi - lo) * Scalar(i) / Scalar(scan_points);
    if (excess(lower) >= 0) {
      bracketed = true;
      break;
    }
    upper = lower;
  }
  if (!bracketed) return std::nullopt;
  for (int it = 0; it < 80; ++it) {
    const Scalar mid = (lower + upper) / 2;
    (excess(mid) >= 0 ? lower : upper) = mid;
  }
  return upper;
}

/// The structured matrix C_AB: block (i, j) of size n x n equals a_j b_i^T.
template <typename Scalar>
RMatrix<Scalar> structured_cab(const RMatrix<Scalar>& a, const RMatrix<Scalar>& b)
{
  const Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n) throw std::invalid_argument("structured_cab: need equal square inputs");
  RMatrix<Scalar> out(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out.block(i * n, j * n, n, n) = a.col(j) * b.col(i).transpose();
  return out;
}

/// Exact second moments of dr = vec(R_hat - R) for N circular Gaussian snapshots.
template <typename Scalar>
struct DeltaRMoments {
  RMatrix<Scalar> re_re;  ///< E[Re dr Re dr^T]
  RMatrix<Scalar> im_im;  ///< E[Im dr Im dr^T]
  RMatrix<Scalar> re_im;  ///< E[Re dr Im dr^T]
};

template <typename Scalar>
DeltaRMoments<Scalar> delta_r_moment_oracle(const CMatrix<Scalar>& r, Index snapshots)
{
  const RMatrix<Scalar> re = r.real();
  const RMatrix<Scalar> im = r.imag();
  const Scalar scale = Scalar(1) / (Scalar(2) * Scalar(snapshots));
  const RMatrix<Scalar> kron_sum = kron(re, re) + kron(im, im);
  DeltaRMoments<Scalar> out;
  out.re_re = scale * (kron_sum + structured_cab(re, re) - structured_cab(im, im));
  out.im_im = scale * (kron_sum + structured_cab(im, im) - structured_cab(re, re));
  out.re_im = scale * (kron(im, re) - kron(re, im) + structured_cab(re, im) + structured_cab(im, re));
  return out;
}

/// Error covariance through the unsimplified real/imaginary expansion
///   E[Re(xi_a^T dr) Re(xi_b^T dr)] / (gamma_a p_a gamma_b p_b).
template <typename Scalar>
RMatrix<Scalar> mse_from_moments(const ErrorTerms<Scalar>& terms, const RVector<Scalar>& powers,
                                 const DeltaRMoments<Scalar>& mom)
{
  const Index k_src = terms.sources();
  RMatrix<Scalar> out(k_src, k_src);
  for (Index a = 0; a < k_src; ++a)
    for (Index b = 0; b < k_src; ++b) {
      const RVector<Scalar> ra = terms.xi[a].real(), ia = terms.xi[a].imag();
      const RVector<Scalar> rb = terms.xi[b].real(), ib = terms.xi[b].imag();
      const Scalar e = ra.dot(mom.re_re * rb) + ia.dot(mom.im_im * ib) - ra.dot(mom.re_im * ib) -
                       rb.dot(mom.re_im * ia);
      out(a, b) = e / (terms.gamma(a) * powers(a) * terms.gamma(b) * powers(b));
    }
  return out;
}

}  // namespace coarray
