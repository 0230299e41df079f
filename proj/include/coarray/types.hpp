#pragma once

#include <complex>

#include <Eigen/Dense>

namespace coarray {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using CVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using CMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

template <typename Scalar>
constexpr Scalar pi_v = Scalar(3.141592653589793238462643383279502884L);

template <typename Scalar>
constexpr Scalar deg2rad(Scalar deg) { return deg * pi_v<Scalar> / Scalar(180); }

template <typename Scalar>
constexpr Scalar rad2deg(Scalar rad) { return rad * Scalar(180) / pi_v<Scalar>; }

}  // namespace coarray
