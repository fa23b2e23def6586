#include "ipc/cli.hpp"

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ipc/error.hpp"
#include "ipc/inference.hpp"
#include "ipc/io.hpp"
#include "ipc/pipeline.hpp"
#include "ipc/simulation.hpp"

namespace ipc {
namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct EstimateOptions {
  std::string data;
  std::string x_cols;
  std::string y_col = "y";
  std::string id_col = "id";
  std::string time_col = "time";
  int d_max = 10;
  double delta = 1.0;
  std::string tau_rule = "global";
  std::string init_rule = "ols";
  int starts = 1;
  bool jackknife = false;
  std::string wald_r_matrix;
  std::string wald_r_vector;
  std::string out;
};

struct SimulateOptions {
  bool dgp1 = false;
  Eigen::Index n = 40;
  Eigen::Index t = 40;
  int reps = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  int d_max = 10;
  double delta = 1.0;
  std::string tau_rule = "global";
  std::string out;
};

IpcConfig make_config(int d_max, double delta, const std::string& tau_rule) {
  IpcConfig config;
  config.d_max = d_max;
  config.delta = delta;
  config.threshold_rule =
      tau_rule == "pergroup" ? ThresholdRule::PerGroupMock : ThresholdRule::GlobalMock;
  return config;
}

int run_estimate(const EstimateOptions& opt) {
  LongCsvSchema schema;
  schema.unit_column = opt.id_col;
  schema.time_column = opt.time_col;
  schema.y_column = opt.y_col;
  schema.x_columns = split_commas(opt.x_cols);
  if (schema.x_columns.empty()) {
    std::cerr << "error: --x-cols must name at least one column\n";
    return kExitUsage;
  }
  if (opt.wald_r_matrix.empty() != opt.wald_r_vector.empty()) {
    std::cerr << "error: --wald-R and --wald-r must be given together\n";
    return kExitUsage;
  }

  const PanelDataset data = load_long_csv(opt.data, schema);
  IpcConfig config = make_config(opt.d_max, opt.delta, opt.tau_rule);
  config.init_rule = opt.init_rule == "twfe" ? InitRule::TwoWayFE : InitRule::ZeroFactorOLS;
  config.n_starts = opt.starts;
  validate(data, config);

  std::vector<NamedWaldTest> tests;
  if (!opt.wald_r_matrix.empty()) {
    WaldSpec spec{read_numeric_csv(opt.wald_r_matrix), Eigen::VectorXd()};
    const Eigen::MatrixXd r = read_numeric_csv(opt.wald_r_vector);
    if (r.cols() != 1) throw Error(ErrorCode::ParseError, "--wald-r must be a single column");
    spec.r_vector = r.col(0);
    tests.push_back({"custom", spec, {}});
  } else {
    for (Eigen::Index j = 0; j < data.n_regressors(); ++j) {
      tests.push_back({schema.x_columns[j] + "=0", WaldSpec::coefficient(data.n_regressors(), j), {}});
    }
  }

  const IpcFit fit = fit_ipc(data, config);
  for (auto& t : tests) t.result = wald_test(data, fit, t.spec);

  FitReport report;
  report.fit = &fit;
  report.config = config;
  report.regressor_names = schema.x_columns;
  report.unit_labels = data.unit_labels();
  report.time_labels = data.time_labels();
  report.tests = std::move(tests);
  if (opt.jackknife) report.jackknife = jackknife_bias_correct(data, config);
  write_fit(report, opt.out);
  if (!fit.converged) {
    std::cerr << "warning: initial ALS stopped after " << fit.als_iterations
              << " iterations without meeting the tolerance\n";
  }
  return kExitOk;
}

int run_simulate(const SimulateOptions& opt) {
  if (!opt.dgp1) {
    std::cerr << "error: only --dgp1 is available\n";
    return kExitUsage;
  }
  const IpcConfig config = make_config(opt.d_max, opt.delta, opt.tau_rule);
  Dgp1Spec spec;
  spec.n_units = opt.n;
  spec.n_periods = opt.t;
  spec.seed = opt.seed;
  const McResult result = run_monte_carlo(spec, opt.reps, config, opt.threads);
  write_mc_result(result, config, opt.out);
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (kind_of(e.code())) {
    case ErrorKind::Data:
    case ErrorKind::Io:
      return kExitData;
    case ErrorKind::Numerical:
      return kExitNumerical;
  }
  return kExitNumerical;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Iterative principal components estimation for panels with interactive effects"};
  app.require_subcommand(1);

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Fit a long-format panel CSV");
  estimate->add_option("--data", est.data, "Long-format CSV file")->required()->check(CLI::ExistingFile);
  estimate->add_option("--x-cols", est.x_cols, "Comma-separated regressor columns")->required();
  estimate->add_option("--y-col", est.y_col, "Dependent variable column")->capture_default_str();
  estimate->add_option("--id-col", est.id_col, "Unit identifier column")->capture_default_str();
  estimate->add_option("--time-col", est.time_col, "Time column")->capture_default_str();
  estimate->add_option("--dmax", est.d_max, "Maximum factors per group")->capture_default_str();
  estimate->add_option("--delta", est.delta, "Factor normalization exponent")->capture_default_str();
  estimate->add_option("--tau-rule", est.tau_rule, "Threshold anchor")
      ->check(CLI::IsMember({"global", "pergroup"}))
      ->capture_default_str();
  estimate->add_option("--init", est.init_rule, "ALS starting point")
      ->check(CLI::IsMember({"ols", "twfe"}))
      ->capture_default_str();
  estimate->add_option("--starts", est.starts, "Number of ALS starts")->capture_default_str();
  estimate->add_flag("--jackknife", est.jackknife, "Add the half-panel jackknife correction");
  estimate->add_option("--wald-R", est.wald_r_matrix, "CSV with the r0 x d_x restriction matrix");
  estimate->add_option("--wald-r", est.wald_r_vector, "CSV with the r0 x 1 restriction values");
  estimate->add_option("--out", est.out, "Output directory")->required();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo on the artificial DGP");
  simulate->add_flag("--dgp1", sim.dgp1, "Use the trend / random walk / cycle design")->required();
  simulate->add_option("--n", sim.n, "Number of units")->required();
  simulate->add_option("--t", sim.t, "Number of periods")->required();
  simulate->add_option("--reps", sim.reps, "Replications")->required();
  simulate->add_option("--seed", sim.seed, "Base seed")->required();
  simulate->add_option("--threads", sim.threads, "Worker threads")->capture_default_str();
  simulate->add_option("--dmax", sim.d_max, "Maximum factors per group")->capture_default_str();
  simulate->add_option("--delta", sim.delta, "Factor normalization exponent")->capture_default_str();
  simulate->add_option("--tau-rule", sim.tau_rule, "Threshold anchor")
      ->check(CLI::IsMember({"global", "pergroup"}))
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* scope = estimate->parsed() ? estimate : (simulate->parsed() ? simulate : &app);
    std::cerr << scope->help();
    return kExitUsage;
  }

  try {
    if (estimate->parsed()) return run_estimate(est);
    return run_simulate(sim);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return cli_main(static_cast<int>(copy.size()), argv.data());
}

}  // namespace ipc
