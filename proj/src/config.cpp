#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coarray/errors.hpp"
#include "coarray/harness.hpp"
#include "json.hpp"

namespace coarray {

using nlohmann::json;

const char* to_string(ExperimentKind k)
{
  switch (k) {
    case ExperimentKind::verify_mse: return "verify_mse";
    case ExperimentKind::resolution: return "resolution";
    case ExperimentKind::efficiency: return "efficiency";
    case ExperimentKind::scaling: return "scaling";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s)
{
  for (auto k : {ExperimentKind::verify_mse, ExperimentKind::resolution, ExperimentKind::efficiency,
                 ExperimentKind::scaling})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown experiment '" + s + "' (expected verify_mse, resolution, efficiency or scaling)");
}

namespace {

void check(bool ok, const std::string& msg)
{
  if (!ok) throw ConfigError("config: " + msg);
}

template <typename T>
void read(const json& j, const char* key, T& dst)
{
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: field '") + key + "': " + e.what());
  }
}

// Scalars are accepted where a list is expected.
template <typename T>
void read_list(const json& j, const char* key, std::vector<T>& dst)
{
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  try {
    dst = v.is_array() ? v.get<std::vector<T>>() : std::vector<T>{v.get<T>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: field '") + key + "': " + e.what());
  }
}

const std::set<std::string>& known_keys()
{
  static const std::set<std::string> keys = {
      "experiment", "arrays", "d0", "wavelength", "doas_deg", "uniform_doas", "snr_db", "snapshots",
      "trials", "seed", "method", "grid_step_deg", "output", "center_deg", "separations_deg",
      "threshold_search_max_deg", "source_counts", "layout_first_deg", "layout_last_deg", "families",
      "q_min", "q_max"};
  return keys;
}

}  // namespace

void ExperimentConfig::validate() const
{
  check(kind == ExperimentKind::scaling || !arrays.empty(), "at least one array is required");
  for (const auto& a : arrays) {
    try {
      make_array(ArraySpec::parse(a), d0, wavelength);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  check(d0 > 0 && wavelength > 0, "d0 and wavelength must be positive");
  check(!snr_db.empty(), "snr_db must not be empty");
  for (double s : snr_db) check(std::isfinite(s), "snr_db entries must be finite");
  check(!snapshots.empty(), "snapshots must not be empty");
  for (long n : snapshots) check(n >= 1, "snapshots entries must be >= 1");
  const bool analytic_ok = kind == ExperimentKind::efficiency || kind == ExperimentKind::scaling;
  check(trials >= (analytic_ok ? 0 : 1), analytic_ok ? "trials must be >= 0" : "trials must be >= 1");
  check(method == "da" || method == "ss" || method == "both", "method must be da, ss or both");
  check(grid_step_deg > 0 && grid_step_deg <= 5, "grid_step_deg must be in (0, 5]");

  auto inside = [](double deg) { return std::abs(deg) < 90.0; };
  switch (kind) {
    case ExperimentKind::verify_mse:
      check(!doas_deg.empty(), "verify_mse needs doas_deg or uniform_doas");
      for (double d : doas_deg) check(inside(d), "DOAs must lie in (-90, 90) degrees");
      break;
    case ExperimentKind::resolution:
      check(!separations_deg.empty(), "resolution needs separations_deg");
      for (double s : separations_deg)
        check(s > 0 && inside(center_deg - s / 2) && inside(center_deg + s / 2),
              "separations must be positive and keep both sources inside (-90, 90)");
      check(threshold_search_max_deg > 0, "threshold_search_max_deg must be positive");
      break;
    case ExperimentKind::efficiency:
      check(inside(layout_first_deg) && inside(layout_last_deg) && layout_first_deg < layout_last_deg,
            "layout must satisfy -90 < first < last < 90");
      if (separations_deg.empty()) {
        check(!source_counts.empty(), "efficiency needs source_counts or separations_deg");
        for (int k : source_counts) check(k >= 1, "source_counts entries must be >= 1");
      }
      for (double s : separations_deg) check(s > 0, "separations must be positive");
      break;
    case ExperimentKind::scaling:
      check(q_min >= 1 && q_min <= q_max, "need 1 <= q_min <= q_max");
      for (const auto& f : families)
        check(f == "coprime" || f == "nested" || f == "mra", "families must be coprime, nested or mra");
      check(!families.empty(), "families must not be empty");
      break;
  }
}

std::vector<Augmentation> ExperimentConfig::methods() const
{
  if (method == "both") return {Augmentation::direct, Augmentation::spatial_smoothing};
  return {parse_augmentation(method)};
}

ExperimentConfig config_from_json_text(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check(j.is_object(), "top level must be an object");
  for (const auto& [key, value] : j.items()) check(known_keys().count(key) > 0, "unknown field '" + key + "'");

  ExperimentConfig cfg;
  check(j.contains("experiment"), "missing field 'experiment'");
  std::string kind;
  read(j, "experiment", kind);
  cfg.kind = parse_experiment_kind(kind);
  read_list(j, "arrays", cfg.arrays);
  read(j, "d0", cfg.d0);
  read(j, "wavelength", cfg.wavelength);
  read_list(j, "doas_deg", cfg.doas_deg);
  if (j.contains("uniform_doas")) {
    check(!j.contains("doas_deg"), "give either doas_deg or uniform_doas, not both");
    const json& u = j.at("uniform_doas");
    double first = 0, last = 0;
    long count = 0;
    read(u, "first_deg", first);
    read(u, "last_deg", last);
    read(u, "count", count);
    check(count >= 1, "uniform_doas.count must be >= 1");
    const RVector<double> doas = uniform_doas_deg(first, last, count);
    for (Index k = 0; k < doas.size(); ++k) cfg.doas_deg.push_back(rad2deg(doas(k)));
  }
  read_list(j, "snr_db", cfg.snr_db);
  read_list(j, "snapshots", cfg.snapshots);
  read(j, "trials", cfg.trials);
  read(j, "seed", cfg.seed);
  read(j, "method", cfg.method);
  read(j, "grid_step_deg", cfg.grid_step_deg);
  read(j, "output", cfg.output);
  read(j, "center_deg", cfg.center_deg);
  read_list(j, "separations_deg", cfg.separations_deg);
  read(j, "threshold_search_max_deg", cfg.threshold_search_max_deg);
  read_list(j, "source_counts", cfg.source_counts);
  read(j, "layout_first_deg", cfg.layout_first_deg);
  read(j, "layout_last_deg", cfg.layout_last_deg);
  read_list(j, "families", cfg.families);
  read(j, "q_min", cfg.q_min);
  read(j, "q_max", cfg.q_max);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg)
{
  json j;
  j["experiment"] = to_string(cfg.kind);
  j["arrays"] = cfg.arrays;
  j["d0"] = cfg.d0;
  j["wavelength"] = cfg.wavelength;
  j["doas_deg"] = cfg.doas_deg;
  j["snr_db"] = cfg.snr_db;
  j["snapshots"] = cfg.snapshots;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["method"] = cfg.method;
  j["grid_step_deg"] = cfg.grid_step_deg;
  j["output"] = cfg.output;
  j["center_deg"] = cfg.center_deg;
  j["separations_deg"] = cfg.separations_deg;
  j["threshold_search_max_deg"] = cfg.threshold_search_max_deg;
  j["source_counts"] = cfg.source_counts;
  j["layout_first_deg"] = cfg.layout_first_deg;
  j["layout_last_deg"] = cfg.layout_last_deg;
  j["families"] = cfg.families;
  j["q_min"] = cfg.q_min;
  j["q_max"] = cfg.q_max;
  return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg)
{
  ExperimentConfig c = cfg;
  c.output.clear();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config_to_json(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace coarray
