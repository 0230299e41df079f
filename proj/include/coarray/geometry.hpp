#pragma once

// Sparse linear array geometries and their difference coarrays.
//
// Sensor positions are integers in units of the base spacing d0. The
// difference coarray of a geometry is the multiset {d_p - d_q}; its central
// contiguous part is a virtual ULA with 2*Mv - 1 elements at -Mv+1 .. Mv-1.

#include <map>
#include <string>
#include <vector>

#include "coarray/types.hpp"

namespace coarray {

enum class ArrayKind { ula, coprime, nested, mra, custom };

/// Geometry request: kind plus integer parameters.
///   ula      {M}
///   coprime  {m, n}    {m*k : k < 2n} u {n*k : k < m}, 2n + m - 1 sensors
///   nested   {n1, n2}  {1..n1} u {(n1+1)*k : k = 1..n2}
///   mra      {M}       tabulated minimum-redundancy array, 3 <= M <= 12
///   custom   positions
struct ArraySpec {
  ArrayKind kind = ArrayKind::ula;
  std::vector<int> params;

  /// Parses "ula:3", "coprime:5,3", "nested:5,5", "mra:10", "custom:0,1,4".
  static ArraySpec parse(const std::string& text);
  std::string to_string() const;
};

class ArrayGeometry {
 public:
  /// Positions are sorted on construction; duplicates and M < 2 are rejected.
  /// d0 and wavelength share a unit; only their ratio enters the model.
  explicit ArrayGeometry(std::vector<int> positions, double d0 = 0.5, double wavelength = 1.0,
                         std::string name = {});

  const std::vector<int>& positions() const { return positions_; }
  Index size() const { return static_cast<Index>(positions_.size()); }
  double d0() const { return d0_; }
  double wavelength() const { return wavelength_; }
  /// d0 / lambda; the phase of source theta at unit position is 2*pi*ratio*sin(theta).
  double spacing_ratio() const { return d0_ / wavelength_; }
  const std::string& name() const { return name_; }
  int aperture() const { return positions_.back() - positions_.front(); }

 private:
  std::vector<int> positions_;
  double d0_;
  double wavelength_;
  std::string name_;
};

ArrayGeometry make_array(const ArraySpec& spec, double d0 = 0.5, double wavelength = 1.0);

ArrayGeometry make_ula(int sensors, double d0 = 0.5, double wavelength = 1.0);
ArrayGeometry make_coprime(int m, int n, double d0 = 0.5, double wavelength = 1.0);
/// Co-prime family generated by the consecutive pair (q, q+1); 3q sensors.
ArrayGeometry make_coprime_pair(int q, double d0 = 0.5, double wavelength = 1.0);
ArrayGeometry make_nested(int n1, int n2, double d0 = 0.5, double wavelength = 1.0);
ArrayGeometry make_mra(int sensors, double d0 = 0.5, double wavelength = 1.0);

/// Sensor counts available in the minimum-redundancy table.
std::vector<int> mra_sizes();

struct CoarrayStructure {
  Eigen::MatrixXi diff;          ///< diff(p, q) = d_p - d_q
  std::map<int, int> weights;    ///< omega(l), only nonzero entries
  int mv = 1;                    ///< half-size of the central virtual ULA

  int weight(int lag) const;
  Index virtual_size() const { return 2 * static_cast<Index>(mv) - 1; }
  Index sensors() const { return diff.rows(); }
};

CoarrayStructure difference_coarray(const ArrayGeometry& geom);

/// Coarray selection matrix F, (2Mv-1) x M^2, zero-based:
///   F(m, p + q*M) = 1/omega(m - Mv + 1)  if diff(p, q) == m - Mv + 1, else 0.
/// Applied to r = vec(R) it averages the covariance entries sharing a lag.
template <typename Scalar = double>
RMatrix<Scalar> selection_matrix(const CoarrayStructure& co)
{
  const Index m = co.sensors();
  const Index rows = co.virtual_size();
  RMatrix<Scalar> f = RMatrix<Scalar>::Zero(rows, m * m);
  for (Index q = 0; q < m; ++q) {
    for (Index p = 0; p < m; ++p) {
      const int lag = co.diff(p, q);
      if (lag <= -co.mv || lag >= co.mv) continue;
      f(lag + co.mv - 1, p + q * m) = Scalar(1) / Scalar(co.weight(lag));
    }
  }
  return f;
}

}  // namespace coarray
