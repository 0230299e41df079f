// coarray-lab: geometry inspection, single-run estimation, closed-form
// analysis and config-driven Monte Carlo experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "coarray/analysis.hpp"
#include "coarray/errors.hpp"
#include "coarray/harness.hpp"

using namespace coarray;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

// Scenario options shared by estimate and analyze; flags override the config file.
struct ScenarioArgs {
  std::vector<std::string> arrays;
  std::vector<double> doas_deg;
  std::vector<double> snr_db;
  std::vector<long> snapshots;
  std::string method;
  std::optional<double> grid_step_deg;
  double d0 = 0.5;
  double wavelength = 1.0;
};

ExperimentConfig scenario_config(const Common& common, const ScenarioArgs& args)
{
  ExperimentConfig cfg;
  if (!common.config.empty()) cfg = load_config(common.config);
  if (!args.arrays.empty()) cfg.arrays = args.arrays;
  if (!args.doas_deg.empty()) cfg.doas_deg = args.doas_deg;
  if (!args.snr_db.empty()) cfg.snr_db = args.snr_db;
  if (!args.snapshots.empty()) cfg.snapshots = args.snapshots;
  if (!args.method.empty()) cfg.method = args.method;
  if (args.grid_step_deg) cfg.grid_step_deg = *args.grid_step_deg;
  if (common.seed) cfg.seed = *common.seed;
  if (common.config.empty()) {
    cfg.d0 = args.d0;
    cfg.wavelength = args.wavelength;
  }
  cfg.kind = ExperimentKind::verify_mse;
  cfg.trials = std::max(cfg.trials, 1L);
  cfg.validate();
  return cfg;
}

RVector<double> doas_rad(const std::vector<double>& deg)
{
  RVector<double> out(Index(deg.size()));
  for (Index k = 0; k < out.size(); ++k) out(k) = deg2rad(deg[k]);
  std::sort(out.data(), out.data() + out.size());
  return out;
}

// Writes to DIR/name when an output directory is given, else to stdout.
void deliver(const std::string& out_dir, const std::string& name, const std::string& content)
{
  if (out_dir.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / name;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << content;
  std::cerr << "wrote " << path.string() << "\n";
}

int cmd_geom(const Common& common, const std::string& array_spec, double d0, double wavelength,
             const std::string& f_csv)
{
  std::string spec = array_spec;
  if (spec.empty() && !common.config.empty()) {
    const ExperimentConfig cfg = load_config(common.config);
    if (!cfg.arrays.empty()) spec = cfg.arrays.front();
  }
  if (spec.empty()) throw ConfigError("geom: give --array or a config with arrays");
  ArrayGeometry geom = [&] {
    try {
      return make_array(ArraySpec::parse(spec), d0, wavelength);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const CoarrayStructure co = difference_coarray(geom);

  std::ostringstream os;
  os << "array," << csv_field(geom.name()) << "\n";
  os << "sensors," << geom.size() << "\n";
  os << "positions";
  for (int p : geom.positions()) os << "," << p;
  os << "\naperture," << geom.aperture() << "\n";
  os << "mv," << co.mv << "\n";
  os << "virtual_ula_size," << co.virtual_size() << "\n";
  os << "lag,weight\n";
  for (const auto& [lag, w] : co.weights) os << lag << "," << w << "\n";
  deliver(common.out, "geom.csv", os.str());

  if (!f_csv.empty()) {
    const RMatrix<double> f = selection_matrix<double>(co);
    std::ofstream out(f_csv);
    if (!out) throw std::runtime_error("cannot open '" + f_csv + "' for writing");
    for (Index r = 0; r < f.rows(); ++r) {
      for (Index c = 0; c < f.cols(); ++c) out << (c ? "," : "") << format_cell(f(r, c));
      out << "\n";
    }
  }
  return 0;
}

int cmd_estimate(const Common& common, const ScenarioArgs& args, const std::string& dump)
{
  const ExperimentConfig cfg = scenario_config(common, args);
  const ArrayGeometry geom = make_array(ArraySpec::parse(cfg.arrays.front()), cfg.d0, cfg.wavelength);
  const auto sc = SourceScenario<double>::equal_power(doas_rad(cfg.doas_deg), cfg.snr_db.front());
  const long n = cfg.snapshots.front();

  const CoarrayStructure co = difference_coarray(geom);
  if (sc.sources() >= co.mv)
    throw ConfigError("estimate: K=" + std::to_string(sc.sources()) + " must be below Mv=" + std::to_string(co.mv));
  const CMatrix<double> y = simulate_snapshots(geom, sc, n, cfg.seed);
  if (!dump.empty()) {
    std::ofstream out(dump);
    if (!out) throw std::runtime_error("cannot open '" + dump + "' for writing");
    out << "t,sensor,re,im\n";
    for (Index t = 0; t < y.cols(); ++t)
      for (Index m = 0; m < y.rows(); ++m)
        out << t << "," << m << "," << format_cell(y(m, t).real()) << "," << format_cell(y(m, t).imag()) << "\n";
  }
  const CVector<double> z = virtual_observation(selection_matrix<double>(co), sample_covariance(y).r_vec);
  EstimatorOptions<double> opt;
  opt.grid_step = deg2rad(cfg.grid_step_deg);
  opt.spacing_ratio = geom.spacing_ratio();

  std::ostringstream os;
  os << "method,source,true_deg,estimate_deg,error_deg\n";
  for (Augmentation m : cfg.methods()) {
    const auto est = estimate_doas(augment<double>(z, co.mv, m).rv, sc.sources(), opt);
    if (!est.resolved) std::cerr << to_string(m) << ": fewer than K peaks, unresolved\n";
    for (Index k = 0; k < sc.sources(); ++k) {
      const double truth = rad2deg(sc.doas(k));
      const double e = est.resolved ? rad2deg(est.angles[k]) : NAN;
      os << to_string(m) << "," << k << "," << format_cell(truth) << "," << format_cell(e) << ","
         << format_cell(e - truth) << "\n";
    }
  }
  deliver(common.out, "estimate.csv", os.str());
  return 0;
}

int cmd_analyze(const Common& common, const ScenarioArgs& args)
{
  const ExperimentConfig cfg = scenario_config(common, args);
  const RVector<double> doas = doas_rad(cfg.doas_deg);
  const double deg2 = rad2deg(1.0) * rad2deg(1.0);
  std::ostringstream os;
  os << "array,sources,snr_db,n_snapshots,source,doa_deg,mse_rad2,mse_deg2,crb_trace_rad2,kappa\n";
  bool any_defined = false;
  for (const auto& spec : cfg.arrays) {
    const ArrayGeometry geom = make_array(ArraySpec::parse(spec), cfg.d0, cfg.wavelength);
    for (double snr : cfg.snr_db) {
      const auto sc = SourceScenario<double>::equal_power(doas, snr);
      for (long n : cfg.snapshots) {
        const RMatrix<double> mse = analytical_mse(geom, sc, n);
        const CrbReport<double> rep = crb(geom, sc, n);
        any_defined = any_defined || rep.defined;
        if (!rep.defined)
          std::cerr << spec << " snr=" << snr << ": CRB undefined (Jacobian rank " << rep.jacobian_rank << " < "
                    << rep.parameters << ")\n";
        const double tr = rep.defined ? rep.crb.trace() : NAN;
        const double kappa = rep.defined ? efficiency_kappa(rep, mse) : NAN;
        for (Index k = 0; k < sc.sources(); ++k)
          os << csv_field(geom.name()) << "," << sc.sources() << "," << format_cell(snr) << "," << n << "," << k
             << "," << format_cell(rad2deg(sc.doas(k))) << "," << format_cell(mse(k, k)) << ","
             << format_cell(mse(k, k) * deg2) << "," << format_cell(tr) << "," << format_cell(kappa) << "\n";
      }
    }
  }
  deliver(common.out, "analyze.csv", os.str());
  if (!any_defined) throw NumericalError("analyze: CRB undefined at every point");
  return 0;
}

int cmd_run(const Common& common)
{
  if (common.config.empty()) throw ConfigError("run: --config is required");
  ExperimentConfig cfg = load_config(common.config);
  if (common.seed) cfg.seed = *common.seed;
  if (!common.out.empty()) cfg.output = common.out;
  const ExperimentResult res = run_experiment(cfg, common.threads);
  for (const auto& note : res.notes) std::cerr << "note: " << note << "\n";
  for (const auto& path : emit_outputs(res, cfg, cfg.output)) std::cout << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Coarray MUSIC analysis and simulation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", COARRAY_VERSION);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Master seed (overrides the config)");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  ScenarioArgs scen;
  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("--array", scen.arrays, "Array spec, e.g. coprime:5,3 nested:5,5 mra:10 ula:8 custom:0,1,4")
        ->delimiter(';');
    sub->add_option("--doas", scen.doas_deg, "Source DOAs in degrees")->delimiter(',');
    sub->add_option("--snr", scen.snr_db, "SNR in dB")->delimiter(',');
    sub->add_option("-N,--snapshots", scen.snapshots, "Number of snapshots")->delimiter(',');
    sub->add_option("--d0", scen.d0, "Base spacing (same unit as wavelength)");
    sub->add_option("--wavelength", scen.wavelength, "Wavelength");
  };

  auto* geom = app.add_subcommand("geom", "Sensor positions, coarray weights and Mv");
  add_common(geom);
  std::string geom_array, f_csv;
  double geom_d0 = 0.5, geom_lambda = 1.0;
  geom->add_option("--array", geom_array, "Array spec");
  geom->add_option("--d0", geom_d0, "Base spacing");
  geom->add_option("--wavelength", geom_lambda, "Wavelength");
  geom->add_option("--f-csv", f_csv, "Write the coarray selection matrix F to this CSV file");

  auto* estimate = app.add_subcommand("estimate", "Simulate one snapshot batch and run coarray MUSIC");
  add_common(estimate);
  add_scenario(estimate);
  std::string dump;
  estimate->add_option("--method", scen.method, "da, ss or both")->check(CLI::IsMember({"da", "ss", "both"}));
  estimate->add_option("--grid-step", scen.grid_step_deg, "Search grid step in degrees");
  estimate->add_option("--dump-snapshots", dump, "Write the simulated snapshots to this CSV file");

  auto* analyze = app.add_subcommand("analyze", "Closed-form MSE, CRB and efficiency");
  add_common(analyze);
  add_scenario(analyze);

  auto* run = app.add_subcommand("run", "Run a configured experiment and write CSV, plot scripts and manifest");
  add_common(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*geom) return cmd_geom(common, geom_array, geom_d0, geom_lambda, f_csv);
    if (*estimate) return cmd_estimate(common, scen, dump);
    if (*analyze) return cmd_analyze(common, scen);
    if (*run) return cmd_run(common);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
