#include "coarray/harness.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "coarray/analysis.hpp"
#include "coarray/errors.hpp"
#include "coarray/rng.hpp"

namespace coarray {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// An estimate further than this from its source counts as a failed trial.
double failure_tolerance(const RVector<double>& sorted_doas)
{
  double tol = deg2rad(5.0);
  for (Index k = 1; k < sorted_doas.size(); ++k) tol = std::min(tol, (sorted_doas(k) - sorted_doas(k - 1)) / 2);
  return tol;
}

RVector<double> sorted(RVector<double> v)
{
  std::sort(v.data(), v.data() + v.size());
  return v;
}

EstimatorOptions<double> estimator_options(const ExperimentConfig& cfg, const ArrayGeometry& geom)
{
  EstimatorOptions<double> opt;
  opt.grid_step = deg2rad(cfg.grid_step_deg);
  opt.spacing_ratio = geom.spacing_ratio();
  return opt;
}

ArrayGeometry build_array(const ExperimentConfig& cfg, const std::string& spec)
{
  return make_array(ArraySpec::parse(spec), cfg.d0, cfg.wavelength);
}

// Empirical statistics of one method over the trials of a sweep point.
struct MethodStats {
  long trials = 0;
  long failed = 0;
  double mse = nan;             ///< mean over successful trials and sources
  double mse_se = nan;          ///< standard error of mse across trials
  RVector<double> per_source;   ///< per-source MSE over successful trials
};

MethodStats summarize(const std::vector<std::vector<TrialRecord>>& trials, std::size_t method_slot, Index sources)
{
  MethodStats s;
  s.trials = static_cast<long>(trials.size());
  s.per_source = RVector<double>::Zero(sources);
  std::vector<double> per_trial;
  for (const auto& t : trials) {
    const TrialRecord& r = t[method_slot];
    if (r.failed) {
      ++s.failed;
      continue;
    }
    double acc = 0;
    for (Index k = 0; k < sources; ++k) {
      const double e2 = r.errors[k] * r.errors[k];
      s.per_source(k) += e2;
      acc += e2;
    }
    per_trial.push_back(acc / double(sources));
  }
  const double n = double(per_trial.size());
  if (per_trial.empty()) {
    s.per_source.setConstant(nan);
    return s;
  }
  s.per_source /= n;
  s.mse = std::accumulate(per_trial.begin(), per_trial.end(), 0.0) / n;
  if (per_trial.size() > 1) {
    double var = 0;
    for (double v : per_trial) var += (v - s.mse) * (v - s.mse);
    s.mse_se = std::sqrt(var / (n - 1) / n);
  }
  return s;
}

std::vector<std::vector<TrialRecord>> simulate_point(const ExperimentConfig& cfg, const ArrayGeometry& geom,
                                                     const SourceScenario<double>& sc, long snapshots,
                                                     std::uint64_t point, const std::vector<Augmentation>& methods,
                                                     int threads)
{
  const EstimatorOptions<double> opt = estimator_options(cfg, geom);
  return parallel_map<std::vector<TrialRecord>>(cfg.trials, threads, [&](long t) {
    return run_trial(geom, sc, snapshots, t, trial_seed(cfg.seed, point, std::uint64_t(t)), methods, opt);
  });
}

}  // namespace

void Table::add_row(std::vector<Cell> row)
{
  if (row.size() != columns.size()) throw std::logic_error("table '" + name + "': row width mismatch");
  rows.push_back(std::move(row));
}

Index Table::column(const std::string& col) const
{
  const auto it = std::find(columns.begin(), columns.end(), col);
  if (it == columns.end()) throw std::out_of_range("table '" + name + "' has no column '" + col + "'");
  return it - columns.begin();
}

double Table::number(Index row, const std::string& col) const
{
  const Cell& c = rows.at(row).at(column(col));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* l = std::get_if<long>(&c)) return double(*l);
  throw std::invalid_argument("table '" + name + "': column '" + col + "' is not numeric");
}

std::string Table::text(Index row, const std::string& col) const
{
  return format_cell(rows.at(row).at(column(col)));
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t trial)
{
  return derive_seed(derive_seed(master, point), trial);
}

std::vector<TrialRecord> run_trial(const ArrayGeometry& geom, const SourceScenario<double>& sc, long snapshots,
                                   long index, std::uint64_t seed, const std::vector<Augmentation>& methods,
                                   const EstimatorOptions<double>& opt)
{
  const CoarrayStructure co = difference_coarray(geom);
  const RMatrix<double> f = selection_matrix<double>(co);
  const CMatrix<double> y = simulate_snapshots(geom, sc, snapshots, seed);
  const CVector<double> z = virtual_observation(f, sample_covariance(y).r_vec);
  const RVector<double> truth = sorted(sc.doas);
  const double tol = failure_tolerance(truth);

  std::vector<TrialRecord> out;
  for (Augmentation m : methods) {
    TrialRecord rec;
    rec.index = index;
    rec.seed = seed;
    rec.method = m;
    const DoaEstimate<double> est = estimate_doas(augment<double>(z, co.mv, m).rv, sc.sources(), opt);
    rec.resolved = est.resolved;
    rec.estimates = est.angles;
    rec.failed = !est.resolved;
    if (est.resolved) {
      for (Index k = 0; k < truth.size(); ++k) {
        rec.errors.push_back(est.angles[k] - truth(k));
        if (std::abs(rec.errors.back()) > tol) rec.failed = true;
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

ExperimentResult run_verify_mse(const ExperimentConfig& cfg, int threads)
{
  cfg.validate();
  ExperimentResult res;
  Table t;
  t.name = "verify_mse";
  t.columns = {"array", "method", "snr_db", "n_snapshots", "trials", "mse_an_rad2", "mse_em_rad2", "rel_err",
               "failed_trials", "mse_em_se_rad2", "mse_an_deg2", "mse_em_deg2"};
  t.plots.push_back({"Analytic vs empirical MSE", "snr_db", {"mse_an_deg2", "mse_em_deg2"},
                     {"array", "method", "n_snapshots"}, false, true});

  RVector<double> doas(Index(cfg.doas_deg.size()));
  for (Index k = 0; k < doas.size(); ++k) doas(k) = deg2rad(cfg.doas_deg[k]);
  doas = sorted(doas);
  const auto methods = cfg.methods();
  const double deg2 = rad2deg(1.0) * rad2deg(1.0);

  std::uint64_t point = 0;
  for (const auto& spec : cfg.arrays) {
    const ArrayGeometry geom = build_array(cfg, spec);
    for (double snr : cfg.snr_db) {
      const auto sc = SourceScenario<double>::equal_power(doas, snr);
      const ErrorTerms<double> terms = error_terms(geom, sc);
      const CMatrix<double> r = true_covariance(geom, sc).r_mat;
      for (long n : cfg.snapshots) {
        const double mse_an = analytical_mse(terms, sc, r, n).trace() / double(sc.sources());
        const auto trials = simulate_point(cfg, geom, sc, n, point++, methods, threads);
        for (std::size_t m = 0; m < methods.size(); ++m) {
          const MethodStats s = summarize(trials, m, sc.sources());
          if (s.failed > 0)
            res.notes.push_back(spec + " " + to_string(methods[m]) + " snr=" + format_cell(snr) + " N=" +
                                std::to_string(n) + ": " + std::to_string(s.failed) + " failed trials excluded");
          t.add_row({geom.name(), std::string(to_string(methods[m])), snr, n, cfg.trials, mse_an, s.mse,
                     std::abs(mse_an - s.mse) / s.mse, s.failed, s.mse_se, mse_an * deg2, s.mse * deg2});
        }
      }
    }
  }
  res.tables.push_back(std::move(t));
  return res;
}

ExperimentResult run_resolution(const ExperimentConfig& cfg, int threads)
{
  cfg.validate();
  ExperimentResult res;
  Table t;
  t.name = "resolution";
  t.columns = {"array", "method", "snr_db", "n_snapshots", "separation_deg", "trials", "p_resolve",
               "p_resolve_se", "eps_sum_rad2", "predicted_resolvable", "predicted_threshold_deg"};
  t.plots.push_back({"Resolution probability", "separation_deg", {"p_resolve"},
                     {"array", "method", "snr_db", "n_snapshots"}, false, false});
  Table summary;
  summary.name = "resolution_summary";
  summary.columns = {"array", "method", "snr_db", "n_snapshots", "predicted_threshold_deg",
                     "empirical_crossing_deg", "crossing_over_predicted"};

  const auto methods = cfg.methods();
  const double center = deg2rad(cfg.center_deg);
  auto scenario = [&](double sep_rad, double snr) {
    RVector<double> doas(2);
    doas << center - sep_rad / 2, center + sep_rad / 2;
    return SourceScenario<double>::equal_power(doas, snr);
  };

  std::uint64_t point = 0;
  for (const auto& spec : cfg.arrays) {
    const ArrayGeometry geom = build_array(cfg, spec);
    for (double snr : cfg.snr_db) {
      for (long n : cfg.snapshots) {
        const std::function<RMatrix<double>(double)> mse_at = [&](double sep) {
          return analytical_mse(geom, scenario(sep, snr), n);
        };
        // Search from a tenth of the smallest tested separation upward.
        const double lo = deg2rad(*std::min_element(cfg.separations_deg.begin(), cfg.separations_deg.end())) / 10;
        const auto threshold = resolution_threshold<double>(mse_at, lo, deg2rad(cfg.threshold_search_max_deg));
        const double thr_deg = threshold ? rad2deg(*threshold) : nan;
        if (!threshold) res.notes.push_back(spec + ": predicted threshold outside the search interval");

        std::vector<std::vector<double>> probs(methods.size());
        for (double sep_deg : cfg.separations_deg) {
          const double sep = deg2rad(sep_deg);
          const auto sc = scenario(sep, snr);
          const RMatrix<double> mse = analytical_mse(geom, sc, n);
          const auto trials = simulate_point(cfg, geom, sc, n, point++, methods, threads);
          for (std::size_t m = 0; m < methods.size(); ++m) {
            long ok = 0;
            for (const auto& tr : trials) {
              const TrialRecord& r = tr[m];
              if (r.resolved && std::abs(r.errors[0]) < sep / 2 && std::abs(r.errors[1]) < sep / 2) ++ok;
            }
            const double p = double(ok) / double(cfg.trials);
            probs[m].push_back(p);
            t.add_row({geom.name(), std::string(to_string(methods[m])), snr, n, sep_deg, cfg.trials, p,
                       std::sqrt(p * (1 - p) / double(cfg.trials)), mse(0, 0) + mse(1, 1),
                       long(resolution_predict(mse, sep)), thr_deg});
          }
        }
        for (std::size_t m = 0; m < methods.size(); ++m) {
          std::vector<std::size_t> order(probs[m].size());
          std::iota(order.begin(), order.end(), 0);
          std::stable_sort(order.begin(), order.end(),
                           [&](auto a, auto b) { return cfg.separations_deg[a] < cfg.separations_deg[b]; });
          std::vector<double> xs, ps;
          for (auto i : order) {
            xs.push_back(cfg.separations_deg[i]);
            ps.push_back(probs[m][i]);
          }
          const double cross = probability_crossing(xs, ps);
          summary.add_row({geom.name(), std::string(to_string(methods[m])), snr, n, thr_deg,
                           cross >= 0 ? cross : nan, cross >= 0 ? cross / thr_deg : nan});
        }
      }
    }
  }
  res.tables.push_back(std::move(t));
  res.tables.push_back(std::move(summary));
  return res;
}

ExperimentResult run_efficiency(const ExperimentConfig& cfg, int threads)
{
  cfg.validate();
  ExperimentResult res;
  Table t;
  t.name = "efficiency";
  t.columns = {"array", "method", "sources", "separation_deg", "snr_db", "n_snapshots", "trials", "crb_defined",
               "jacobian_rank", "crb_trace_rad2", "mse_an_sum_rad2", "kappa_an", "mse_em_sum_rad2", "kappa_em",
               "failed_trials"};
  t.plots.push_back({"Statistical efficiency", "snr_db", {"kappa_an", "kappa_em"},
                     {"array", "method", "sources", "n_snapshots"}, false, false});

  struct Layout {
    RVector<double> doas;
    double separation_deg;
  };
  std::vector<Layout> layouts;
  const double mid = (cfg.layout_first_deg + cfg.layout_last_deg) / 2;
  if (cfg.separations_deg.empty()) {
    for (int k : cfg.source_counts)
      layouts.push_back({uniform_doas_deg(cfg.layout_first_deg, cfg.layout_last_deg, Index(k)), nan});
  } else {
    for (double s : cfg.separations_deg) {
      RVector<double> doas(2);
      doas << deg2rad(mid - s / 2), deg2rad(mid + s / 2);
      layouts.push_back({doas, s});
    }
  }
  const auto methods = cfg.methods();

  std::uint64_t point = 0;
  bool any_defined = false;
  for (const auto& spec : cfg.arrays) {
    const ArrayGeometry geom = build_array(cfg, spec);
    for (const auto& layout : layouts) {
      for (double snr : cfg.snr_db) {
        const auto sc = SourceScenario<double>::equal_power(layout.doas, snr);
        for (long n : cfg.snapshots) {
          const std::uint64_t this_point = point++;
          const CrbReport<double> rep = crb(geom, sc, n);
          any_defined = any_defined || rep.defined;
          const double crb_tr = rep.defined ? rep.crb.trace() : nan;
          const double mse_an = analytical_mse(geom, sc, n).trace();
          const double kappa_an = rep.defined ? crb_tr / mse_an : nan;
          if (!rep.defined)
            res.notes.push_back(spec + " K=" + std::to_string(sc.sources()) + " snr=" + format_cell(snr) +
                                ": CRB undefined (Jacobian rank " + std::to_string(rep.jacobian_rank) + " < " +
                                std::to_string(rep.parameters) + "), excluded from kappa");
          const long k = long(sc.sources());
          if (cfg.trials == 0) {
            t.add_row({geom.name(), std::string("analytic"), k, layout.separation_deg, snr, n, 0L,
                       long(rep.defined), long(rep.jacobian_rank), crb_tr, mse_an, kappa_an, nan, nan, 0L});
            continue;
          }
          const auto trials = simulate_point(cfg, geom, sc, n, this_point, methods, threads);
          for (std::size_t m = 0; m < methods.size(); ++m) {
            const MethodStats s = summarize(trials, m, sc.sources());
            const double em_sum = s.per_source.sum();
            t.add_row({geom.name(), std::string(to_string(methods[m])), k, layout.separation_deg, snr, n,
                       cfg.trials, long(rep.defined), long(rep.jacobian_rank), crb_tr, mse_an, kappa_an, em_sum,
                       rep.defined ? crb_tr / em_sum : nan, s.failed});
          }
        }
      }
    }
  }
  if (!any_defined) throw NumericalError("efficiency: CRB undefined at every point");
  res.tables.push_back(std::move(t));
  return res;
}

ExperimentResult run_scaling(const ExperimentConfig& cfg, int threads)
{
  cfg.validate();
  ExperimentResult res;
  Table t;
  t.name = "scaling";
  t.columns = {"family", "mode", "param", "sensors", "sources", "snr_db", "n_snapshots", "mse_an_rad2", "trials",
               "mse_em_rad2", "mse_em_se_rad2", "failed_trials"};
  t.plots.push_back({"MSE vs number of sensors", "sensors", {"mse_an_rad2", "mse_em_rad2"},
                     {"family", "mode", "snr_db", "n_snapshots"}, true, true});
  Table slopes;
  slopes.name = "scaling_slopes";
  slopes.columns = {"family", "mode", "snr_db", "n_snapshots", "points", "slope_an", "slope_em"};

  struct Member {
    int param;
    ArrayGeometry geom;
  };
  const auto method = cfg.methods().front();
  std::uint64_t point = 0;
  for (const auto& family : cfg.families) {
    std::vector<Member> members;
    if (family == "mra") {
      for (int m : mra_sizes()) members.push_back({m, make_mra(m, cfg.d0, cfg.wavelength)});
    } else {
      for (int q = cfg.q_min; q <= cfg.q_max; ++q)
        members.push_back({q, family == "coprime" ? make_coprime_pair(q, cfg.d0, cfg.wavelength)
                                                  : make_nested(q + 1, q, cfg.d0, cfg.wavelength)});
    }
    for (const char* mode : {"single", "full"}) {
      for (double snr : cfg.snr_db) {
        for (long n : cfg.snapshots) {
          std::vector<double> sensors, an, em;
          for (const auto& mem : members) {
            const Index m = mem.geom.size();
            const RVector<double> doas = std::string(mode) == "single" ? uniform_doas_deg(0.0, 0.0, 1)
                                                                       : uniform_doas_deg(cfg.layout_first_deg,
                                                                                          cfg.layout_last_deg, m);
            if (doas.size() >= difference_coarray(mem.geom).mv) {
              res.notes.push_back(mem.geom.name() + ": K=" + std::to_string(doas.size()) + " >= Mv, skipped");
              continue;
            }
            const auto sc = SourceScenario<double>::equal_power(doas, snr);
            const double mse_an = analytical_mse(mem.geom, sc, n).trace() / double(sc.sources());
            MethodStats s;
            if (cfg.trials > 0) s = summarize(simulate_point(cfg, mem.geom, sc, n, point++, {method}, threads), 0,
                                              sc.sources());
            sensors.push_back(double(m));
            an.push_back(mse_an);
            em.push_back(s.mse);
            t.add_row({family, std::string(mode), long(mem.param), long(m), long(sc.sources()), snr, n, mse_an,
                       cfg.trials, s.mse, s.mse_se, s.failed});
          }
          const bool em_ok = cfg.trials > 0 && std::all_of(em.begin(), em.end(), [](double v) { return v > 0; });
          slopes.add_row({family, std::string(mode), snr, n, long(sensors.size()), loglog_slope(sensors, an),
                          em_ok ? loglog_slope(sensors, em) : nan});
        }
      }
    }
  }
  res.tables.push_back(std::move(t));
  res.tables.push_back(std::move(slopes));
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads)
{
  switch (cfg.kind) {
    case ExperimentKind::verify_mse: return run_verify_mse(cfg, threads);
    case ExperimentKind::resolution: return run_resolution(cfg, threads);
    case ExperimentKind::efficiency: return run_efficiency(cfg, threads);
    case ExperimentKind::scaling: return run_scaling(cfg, threads);
  }
  throw ConfigError("unknown experiment kind");
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
  if (x.size() != y.size() || x.size() < 2) return nan;
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double probability_crossing(const std::vector<double>& x, const std::vector<double>& p, double level)
{
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < level) continue;
    if (i == 0) return x[0];
    return x[i - 1] + (level - p[i - 1]) * (x[i] - x[i - 1]) / (p[i] - p[i - 1]);
  }
  return -1.0;
}

}  // namespace coarray
