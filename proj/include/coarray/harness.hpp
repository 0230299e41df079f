#pragma once

// Config-driven Monte Carlo experiments: analytic vs empirical MSE, two-source
// resolution, statistical efficiency and MSE scaling with the number of sensors.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "coarray/estimator.hpp"
#include "coarray/geometry.hpp"
#include "coarray/model.hpp"

namespace coarray {

enum class ExperimentKind { verify_mse, resolution, efficiency, scaling };

const char* to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

/// Angles in degrees, SNR in dB. Fields not used by an experiment kind are ignored.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::verify_mse;
  std::vector<std::string> arrays;     ///< "coprime:5,3", "nested:5,5", "mra:10", ...
  double d0 = 0.5;
  double wavelength = 1.0;
  std::vector<double> doas_deg;        ///< verify_mse scenario
  std::vector<double> snr_db = {0.0};
  std::vector<long> snapshots = {1000};
  long trials = 100;                   ///< 0 runs the analytic side only (efficiency, scaling)
  std::uint64_t seed = 1;
  std::string method = "both";         ///< da, ss or both
  double grid_step_deg = 0.1;
  std::string output = "out";

  // resolution: two sources at center +- separation/2
  double center_deg = 30.0;
  std::vector<double> separations_deg;
  double threshold_search_max_deg = 10.0;

  // efficiency: K sources uniform over [layout_first, layout_last]; K = 1 sits at the midpoint.
  // With separations_deg set, two sources at +-separation/2 around layout midpoint instead.
  std::vector<int> source_counts = {1};
  double layout_first_deg = -60.0;
  double layout_last_deg = 60.0;

  // scaling
  std::vector<std::string> families = {"coprime", "nested", "mra"};
  int q_min = 2;
  int q_max = 12;

  void validate() const;
  std::vector<Augmentation> methods() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);  ///< canonical, sorted keys
std::uint64_t config_hash(const ExperimentConfig& cfg);   ///< FNV-1a of config_to_json, output directory excluded

struct TrialRecord {
  long index = 0;
  std::uint64_t seed = 0;
  Augmentation method = Augmentation::direct;
  bool resolved = false;   ///< K peaks found
  bool failed = false;     ///< unresolved, or an error beyond half the closest source spacing
  std::vector<double> estimates;  ///< radians
  std::vector<double> errors;     ///< radians, estimate - truth
};

using Cell = std::variant<std::string, long, double>;

struct PlotSpec {
  std::string title;
  std::string x_column;
  std::vector<std::string> y_columns;
  std::vector<std::string> group_columns;  ///< one curve per distinct combination
  bool log_x = false;
  bool log_y = false;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<PlotSpec> plots;

  void add_row(std::vector<Cell> row);
  Index column(const std::string& name) const;
  double number(Index row, const std::string& col) const;
  std::string text(Index row, const std::string& col) const;
};

struct ExperimentResult {
  std::vector<Table> tables;
  std::vector<std::string> notes;  ///< skipped points, undefined CRBs, ...
};

/// Simulates one trial: N snapshots from seed, sample covariance, both
/// requested augmentations on the same data.
std::vector<TrialRecord> run_trial(const ArrayGeometry& geom, const SourceScenario<double>& sc, long snapshots,
                                   long index, std::uint64_t seed, const std::vector<Augmentation>& methods,
                                   const EstimatorOptions<double>& opt);

/// Runs fn(0..count-1) on up to `threads` workers; results are stored by index.
template <typename T>
std::vector<T> parallel_map(long count, int threads, const std::function<T(long)>& fn)
{
  std::vector<T> out(static_cast<std::size_t>(count));
  const long workers = std::clamp<long>(threads, 1, std::max<long>(count, 1));
  if (workers == 1) {
    for (long i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (long i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (long w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Seed of trial `trial` at sweep point `point`.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial);

ExperimentResult run_verify_mse(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_resolution(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_efficiency(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_scaling(const ExperimentConfig& cfg, int threads = 1);
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// First x (ascending) where p reaches level, by linear interpolation between
/// neighbouring points; negative when never reached.
double probability_crossing(const std::vector<double>& x, const std::vector<double>& p, double level = 0.5);

std::string format_cell(const Cell& c);
/// Quotes fields containing separators; array names such as "coprime:5,3" need it.
std::string csv_field(const std::string& s);
std::string to_csv(const Table& t);
std::string to_gnuplot(const Table& t, const PlotSpec& p);

/// Writes <name>.csv per table, <name>_<i>.gp per plot and manifest.json into dir.
/// Returns the written paths.
std::vector<std::string> emit_outputs(const ExperimentResult& result, const ExperimentConfig& cfg,
                                      const std::string& dir);

}  // namespace coarray
