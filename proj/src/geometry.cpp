#include "coarray/geometry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace coarray {

namespace {

// Minimum-redundancy arrays with a hole-free coarray. M = 10 is the
// configuration used in the co-prime/nested/MRA comparison experiments
// (aperture 35); the remaining rows have the largest aperture attainable
// with a contiguous coarray, found by exhaustive search.
const std::map<int, std::vector<int>>& mra_table()
{
  static const std::map<int, std::vector<int>> table = {
      {3, {0, 1, 3}},
      {4, {0, 1, 4, 6}},
      {5, {0, 1, 2, 6, 9}},
      {6, {0, 1, 2, 6, 10, 13}},
      {7, {0, 1, 2, 3, 8, 13, 17}},
      {8, {0, 1, 2, 11, 15, 18, 21, 23}},
      {9, {0, 1, 2, 14, 18, 21, 24, 27, 29}},
      {10, {0, 1, 4, 10, 16, 22, 28, 30, 33, 35}},
      {11, {0, 1, 3, 6, 13, 20, 27, 34, 38, 42, 43}},
      {12, {0, 1, 2, 3, 23, 28, 32, 36, 40, 44, 47, 50}},
  };
  return table;
}

std::vector<int> parse_int_list(std::string_view text)
{
  std::vector<int> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty())
      throw std::invalid_argument("array spec: bad integer '" + std::string(item) + "'");
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

void require_params(const ArraySpec& spec, std::size_t count, const char* what)
{
  if (spec.params.size() != count)
    throw std::invalid_argument(std::string("array spec: ") + what + " expects " +
                                std::to_string(count) + " parameter(s)");
}

std::string join(const std::vector<int>& values)
{
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  return os.str();
}

}  // namespace

ArraySpec ArraySpec::parse(const std::string& text)
{
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  ArraySpec spec;
  if (kind == "ula") spec.kind = ArrayKind::ula;
  else if (kind == "coprime") spec.kind = ArrayKind::coprime;
  else if (kind == "nested") spec.kind = ArrayKind::nested;
  else if (kind == "mra") spec.kind = ArrayKind::mra;
  else if (kind == "custom") spec.kind = ArrayKind::custom;
  else throw std::invalid_argument("array spec: unknown kind '" + kind + "'");
  if (colon == std::string::npos) throw std::invalid_argument("array spec: missing parameters in '" + text + "'");
  spec.params = parse_int_list(std::string_view(text).substr(colon + 1));
  return spec;
}

std::string ArraySpec::to_string() const
{
  static constexpr std::array names = {"ula", "coprime", "nested", "mra", "custom"};
  return std::string(names[static_cast<int>(kind)]) + ":" + join(params);
}

ArrayGeometry::ArrayGeometry(std::vector<int> positions, double d0, double wavelength, std::string name)
    : positions_(std::move(positions)), d0_(d0), wavelength_(wavelength), name_(std::move(name))
{
  if (positions_.size() < 2) throw std::invalid_argument("array geometry needs at least 2 sensors");
  if (!(d0_ > 0) || !(wavelength_ > 0)) throw std::invalid_argument("array geometry: d0 and wavelength must be positive");
  std::sort(positions_.begin(), positions_.end());
  if (std::adjacent_find(positions_.begin(), positions_.end()) != positions_.end())
    throw std::invalid_argument("array geometry: duplicate sensor positions");
  if (name_.empty()) name_ = "custom:" + join(positions_);
}

ArrayGeometry make_ula(int sensors, double d0, double wavelength)
{
  if (sensors < 2) throw std::invalid_argument("ula: need at least 2 sensors");
  std::vector<int> pos(sensors);
  for (int i = 0; i < sensors; ++i) pos[i] = i;
  return ArrayGeometry(std::move(pos), d0, wavelength, "ula:" + std::to_string(sensors));
}

ArrayGeometry make_coprime(int m, int n, double d0, double wavelength)
{
  if (m < 1 || n < 1) throw std::invalid_argument("coprime: parameters must be positive");
  if (std::gcd(m, n) != 1) throw std::invalid_argument("coprime: parameters must be co-prime");
  std::vector<int> pos;
  for (int k = 0; k < 2 * n; ++k) pos.push_back(m * k);
  for (int k = 1; k < m; ++k) pos.push_back(n * k);
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  return ArrayGeometry(std::move(pos), d0, wavelength, "coprime:" + std::to_string(m) + "," + std::to_string(n));
}

ArrayGeometry make_coprime_pair(int q, double d0, double wavelength)
{
  if (q < 1) throw std::invalid_argument("coprime pair: q must be positive");
  return make_coprime(q + 1, q, d0, wavelength);
}

ArrayGeometry make_nested(int n1, int n2, double d0, double wavelength)
{
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("nested: parameters must be positive");
  std::vector<int> pos;
  for (int k = 1; k <= n1; ++k) pos.push_back(k);
  for (int k = 1; k <= n2; ++k) pos.push_back((n1 + 1) * k);
  return ArrayGeometry(std::move(pos), d0, wavelength, "nested:" + std::to_string(n1) + "," + std::to_string(n2));
}

std::vector<int> mra_sizes()
{
  std::vector<int> out;
  for (const auto& [m, pos] : mra_table()) out.push_back(m);
  return out;
}

ArrayGeometry make_mra(int sensors, double d0, double wavelength)
{
  const auto& table = mra_table();
  const auto it = table.find(sensors);
  if (it == table.end())
    throw std::invalid_argument("mra: no table entry for " + std::to_string(sensors) +
                                " sensors (available: " + join(mra_sizes()) + ")");
  return ArrayGeometry(it->second, d0, wavelength, "mra:" + std::to_string(sensors));
}

ArrayGeometry make_array(const ArraySpec& spec, double d0, double wavelength)
{
  switch (spec.kind) {
    case ArrayKind::ula:
      require_params(spec, 1, "ula");
      return make_ula(spec.params[0], d0, wavelength);
    case ArrayKind::coprime:
      require_params(spec, 2, "coprime");
      return make_coprime(spec.params[0], spec.params[1], d0, wavelength);
    case ArrayKind::nested:
      require_params(spec, 2, "nested");
      return make_nested(spec.params[0], spec.params[1], d0, wavelength);
    case ArrayKind::mra:
      require_params(spec, 1, "mra");
      return make_mra(spec.params[0], d0, wavelength);
    case ArrayKind::custom:
      return ArrayGeometry(spec.params, d0, wavelength);
  }
  throw std::invalid_argument("array spec: unknown kind");
}

int CoarrayStructure::weight(int lag) const
{
  const auto it = weights.find(lag);
  return it == weights.end() ? 0 : it->second;
}

CoarrayStructure difference_coarray(const ArrayGeometry& geom)
{
  const auto& pos = geom.positions();
  const Index m = geom.size();
  CoarrayStructure co;
  co.diff.resize(m, m);
  for (Index p = 0; p < m; ++p)
    for (Index q = 0; q < m; ++q) {
      const int lag = pos[p] - pos[q];
      co.diff(p, q) = lag;
      ++co.weights[lag];
    }
  // omega is symmetric, so contiguity of the non-negative half suffices.
  int mv = 0;
  while (co.weight(mv) > 0) ++mv;
  co.mv = mv;
  return co;
}

}  // namespace coarray
