// Command-line front end: analytic rate engine, Monte Carlo simulator,
// operating-point sweeps, bound validation, and bundled study presets.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lsmimo/analytic.hpp>
#include <lsmimo/config_file.hpp>
#include <lsmimo/errors.hpp>
#include <lsmimo/montecarlo.hpp>
#include <lsmimo/params.hpp>
#include <lsmimo/scenarios.hpp>

namespace {

using namespace lsmimo;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_dir = ".";
};

ConfigFile effective_config(const CommonArgs& args) {
  ConfigDoc doc;
  if (!args.config_path.empty()) {
    doc = load_config(args.config_path);
  } else {
    doc.origin = "<built-in defaults>";
  }
  for (const std::string& kv : args.overrides) {
    add_override(doc, kv);
  }
  return resolve(doc);
}

const OperatingPoint& require_op(const ConfigFile& cfg) {
  if (!cfg.op) {
    throw std::invalid_argument(
        "this command needs an operating point: set antennas, multiplexing, "
        "diversity, and nulling via --config or --set");
  }
  return *cfg.op;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  const std::filesystem::path root(dir.empty() ? "." : dir);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) {
    throw std::invalid_argument("cannot create output directory '" +
                                root.string() + "': " + ec.message());
  }
  std::ofstream out(root / name, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot write output file '" +
                                (root / name).string() + "'");
  }
  return out;
}

ClusteringMode parse_mode(const std::string& name) {
  return name == "adaptive" ? ClusteringMode::range_adaptive
                            : ClusteringMode::fixed_range;
}

UserModel parse_user_model(const std::string& name) {
  return name == "ppp_users" ? UserModel::ppp_users : UserModel::fixed_pool;
}

void print_stats(const RateStats& stats) {
  std::printf("per-BS sum rate %.6f +- %.6f bits/s/Hz\n",
              stats.per_bs_sum_rate_mean, stats.per_bs_sum_rate_ci);
  std::printf("10th-percentile user rate %.6f +- %.6f bits/s/Hz\n",
              stats.percentile(10.0), stats.percentile_ci(10.0));
  std::printf("samples %lld from %d realizations (%d skipped)\n",
              stats.sample_count, stats.realizations_used,
              stats.realizations_skipped);
}

int run_analyze(const CommonArgs& common, int argmax_m, int points) {
  const ConfigFile cfg = effective_config(common);
  if (argmax_m > 0) {
    const ArgmaxResult best =
        argmax_sum_rate(cfg.sys, argmax_m, QuadratureSpec{}, common.workers);
    std::printf("(%d,%d,%d)\n", best.op.multiplexing, best.op.diversity,
                best.op.nulling);
    std::printf("per-BS ergodic sum rate %.6f bits/s/Hz at M = %d\n",
                best.sum_rate_bps_hz, argmax_m);
    return 0;
  }
  const OperatingPoint& op = require_op(cfg);
  const AnalyticContext ctx = make_context(cfg.sys, op);
  std::printf("per-BS ergodic sum rate %.6f bits/s/Hz at (%d,%d,%d), M = %d\n",
              ergodic_sum_rate(ctx), op.multiplexing, op.diversity, op.nulling,
              op.antennas);
  const RateCcdfCurve curve = rate_ccdf_curve(ctx, points);
  auto csv = open_output(common.output_dir, "analytic_ccdf.csv");
  write_bound_csv(csv, curve);
  std::printf("wrote analytic_ccdf.csv (%d thresholds)\n",
              static_cast<int>(curve.thresholds_bps_hz.size()));
  return 0;
}

int run_simulate(const CommonArgs& common, int realizations,
                 const std::string& mode, const std::string& user_model) {
  const ConfigFile cfg = effective_config(common);
  const OperatingPoint& op = require_op(cfg);

  SimulationPlan plan;
  plan.realizations = realizations;
  plan.master_seed = common.seed;
  plan.clustering_mode = parse_mode(mode);
  plan.user_model = parse_user_model(user_model);
  plan.workers = common.workers;
  plan.operating_points = {op};

  std::printf("simulating (%d,%d,%d) at M = %d: %d realizations, %s "
              "clustering, %s users\n",
              op.multiplexing, op.diversity, op.nulling, op.antennas,
              realizations, mode.c_str(), user_model.c_str());
  const RateStats stats = run(plan, cfg.sys)[0].second;
  print_stats(stats);
  auto csv = open_output(common.output_dir, "simulate_cdf.csv");
  write_cdf_csv(csv, stats);
  std::printf("wrote simulate_cdf.csv\n");
  return 0;
}

int run_sweep(const CommonArgs& common, int antennas, int realizations,
              const std::string& mode, const std::string& user_model,
              const std::vector<int>& k_list, int max_nulling) {
  const ConfigFile cfg = effective_config(common);
  int m = antennas;
  if (m <= 0 && cfg.op) m = cfg.op->antennas;
  if (m <= 0) {
    throw std::invalid_argument(
        "sweep needs the antenna budget: pass --M or a config with an "
        "operating point");
  }

  SweepOptions options;
  options.realizations = realizations;
  options.master_seed = common.seed;
  options.mode = parse_mode(mode);
  options.user_model = parse_user_model(user_model);
  options.k_list = k_list;
  options.max_nulling = max_nulling;
  options.workers = common.workers;

  std::printf("sweeping antenna splits of M = %d: %d realizations each, %s "
              "clustering\n",
              m, realizations, mode.c_str());
  const std::vector<SweepRow> rows = sweep(cfg.sys, m, options);
  {
    auto csv = open_output(common.output_dir, "sweep.csv");
    write_sweep_csv(csv, rows);
  }
  const SweepRow* best = &rows.front();
  for (const SweepRow& row : rows) {
    if (row.sum_rate_bps_hz > best->sum_rate_bps_hz) best = &row;
  }
  std::printf("wrote sweep.csv (%d operating points)\n",
              static_cast<int>(rows.size()));
  std::printf("best sum rate (%d,%d,%d): %.6f +- %.6f bits/s/Hz\n",
              best->op.multiplexing, best->op.diversity, best->op.nulling,
              best->sum_rate_bps_hz, best->sum_rate_ci);
  return 0;
}

int run_validate(const CommonArgs& common, int realizations, int probes,
                 int points, const std::string& mode) {
  const ConfigFile cfg = effective_config(common);
  const OperatingPoint& op = require_op(cfg);

  SimulationPlan plan;
  plan.realizations = realizations;
  plan.master_seed = common.seed;
  plan.clustering_mode = parse_mode(mode);
  plan.analytic_model_mode = true;
  plan.probes_per_realization = probes;
  plan.workers = common.workers;
  plan.operating_points = {op};

  std::printf("validating the rate-CCDF bound at (%d,%d,%d), M = %d: %d "
              "realizations x %d probes\n",
              op.multiplexing, op.diversity, op.nulling, op.antennas,
              realizations, probes);
  const RateStats stats = run(plan, cfg.sys)[0].second;
  const AnalyticContext ctx = make_context(cfg.sys, op);
  const RateCcdfCurve curve = rate_ccdf_curve(ctx, points);
  const BoundCheckReport report =
      compare_to_analytic(stats, ctx, curve.thresholds_bps_hz);

  {
    auto csv = open_output(common.output_dir, "validate_report.csv");
    csv << "kappa_bps_hz,bound_ccdf,empirical_ccdf,ci,holds\n";
    for (const BoundCheckPoint& pt : report.points) {
      char line[160];
      std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g,%d\n", pt.kappa,
                    pt.bound, pt.empirical, pt.ci, pt.holds ? 1 : 0);
      csv << line;
    }
  }
  for (const BoundCheckPoint& pt : report.points) {
    std::printf("kappa %8.4f  bound %.6f  empirical %.6f  ci %.6f  %s\n",
                pt.kappa, pt.bound, pt.empirical, pt.ci,
                pt.holds ? "ok" : "VIOLATED");
  }
  const int total = static_cast<int>(report.points.size());
  std::printf("bound holds at %d of %d grid points; largest bound-empirical "
              "gap %.6f\n",
              total - report.violations, total, report.max_gap);
  std::printf("wrote validate_report.csv\n");
  return report.violations == 0 ? 0 : 1;
}

int run_scenario_cmd(const CommonArgs& common, const std::string& name,
                     int realizations, int antennas) {
  ScenarioOptions options;
  options.seed = common.seed;
  options.workers = common.workers;
  options.output_dir = common.output_dir;
  options.realizations = realizations;
  options.antennas = antennas;
  const std::vector<std::string> files =
      run_scenario(name, options, std::cout);
  std::printf("scenario %s wrote %d files to %s\n", name.c_str(),
              static_cast<int>(files.size()),
              common.output_dir.empty() ? "." : common.output_dir.c_str());
  for (const std::string& f : files) std::printf("  %s\n", f.c_str());
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Antenna-resource toolkit: how many spatial dimensions to "
               "spend on multiplexing, diversity, and interference nulling "
               "in a large-antenna cellular downlink"};
  app.require_subcommand(1);

  CommonArgs common;
  app.add_option("--config", common.config_path,
                 "key = value config file (baseline parameters and optional "
                 "operating point)");
  app.add_option("--set", common.overrides,
                 "override one config key, e.g. --set multiplexing=10")
      ->take_all();
  app.add_option("--seed", common.seed, "master seed for all randomness");
  app.add_option("--workers", common.workers,
                 "realization-level parallelism");
  app.add_option("--output", common.output_dir,
                 "directory for output files (default .)");

  auto* analyze = app.add_subcommand(
      "analyze", "closed-form sum rate, rate-CCDF bound, and argmax search");
  int argmax_m = 0;
  int analyze_points = 30;
  analyze->add_option("--argmax", argmax_m,
                      "scan every split of M antennas and print the "
                      "sum-rate-optimal (K,zeta,O)");
  analyze->add_option("--points", analyze_points,
                      "thresholds in the CCDF curve");
  analyze->fallthrough();

  auto* simulate = app.add_subcommand(
      "simulate", "system-level Monte Carlo at one operating point");
  int sim_realizations = 500;
  std::string sim_mode = "fixed";
  std::string sim_users = "fixed_pool";
  simulate->add_option("--realizations", sim_realizations,
                       "independent network realizations");
  simulate->add_option("--mode", sim_mode, "clustering mode")
      ->check(CLI::IsMember({"fixed", "adaptive"}));
  simulate->add_option("--user-model", sim_users, "user placement model")
      ->check(CLI::IsMember({"fixed_pool", "ppp_users"}));
  simulate->fallthrough();

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "simulate every antenna split of a budget M");
  int sweep_m = 0;
  int sweep_realizations = 2000;
  std::string sweep_mode = "fixed";
  std::string sweep_users = "fixed_pool";
  std::vector<int> k_list;
  int max_nulling = -1;
  sweep_cmd->add_option("--M", sweep_m, "antenna budget to split");
  sweep_cmd->add_option("--realizations", sweep_realizations,
                        "realizations per operating point");
  sweep_cmd->add_option("--mode", sweep_mode, "clustering mode")
      ->check(CLI::IsMember({"fixed", "adaptive"}));
  sweep_cmd->add_option("--user-model", sweep_users, "user placement model")
      ->check(CLI::IsMember({"fixed_pool", "ppp_users"}));
  sweep_cmd->add_option("--K-list", k_list,
                        "restrict the sweep to these multiplexing orders")
      ->delimiter(',');
  sweep_cmd->add_option("--max-O", max_nulling,
                        "cap on the nulling budget (-1 = no cap)");
  sweep_cmd->fallthrough();

  auto* validate = app.add_subcommand(
      "validate", "check the analytic CCDF bound against a model-faithful "
                  "simulation");
  int val_realizations = 500;
  int val_probes = 20;
  int val_points = 30;
  std::string val_mode = "fixed";
  validate->add_option("--realizations", val_realizations,
                       "independent deployment draws");
  validate->add_option("--probes", val_probes,
                       "evaluation points per deployment");
  validate->add_option("--points", val_points, "thresholds in the kappa grid");
  validate->add_option("--mode", val_mode, "clustering mode")
      ->check(CLI::IsMember({"fixed", "adaptive"}));
  validate->fallthrough();

  auto* scenario = app.add_subcommand(
      "scenario", "run a bundled study preset end to end");
  std::string scenario_name;
  int scenario_realizations = 0;
  int scenario_m = 0;
  scenario->add_option("name", scenario_name, "preset name")->required();
  scenario->add_option("--realizations", scenario_realizations,
                       "override the preset's realization count");
  scenario->add_option("--M", scenario_m,
                       "antenna budget for table2 (default 15)");
  scenario->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e); // prints the message
    return 2;
  }

  try {
    if (*analyze) return run_analyze(common, argmax_m, analyze_points);
    if (*simulate) {
      return run_simulate(common, sim_realizations, sim_mode, sim_users);
    }
    if (*sweep_cmd) {
      return run_sweep(common, sweep_m, sweep_realizations, sweep_mode,
                       sweep_users, k_list, max_nulling);
    }
    if (*validate) {
      return run_validate(common, val_realizations, val_probes, val_points,
                          val_mode);
    }
    if (*scenario) {
      return run_scenario_cmd(common, scenario_name, scenario_realizations,
                              scenario_m);
    }
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
