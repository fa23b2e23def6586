// Acceptance run: one PASS/FAIL line per criterion, then the Monte Carlo
// properties of the simulation module. Exit status is nonzero if any line
// fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "ipc/cli.hpp"
#include "ipc/factor_selection.hpp"
#include "ipc/final_estimator.hpp"
#include "ipc/inference.hpp"
#include "ipc/init_estimator.hpp"
#include "ipc/pipeline.hpp"
#include "ipc/simulation.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace ipc;
using namespace ipc::testing;

namespace {

int g_failed = 0;

void report(const std::string& id, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++g_failed;
  std::printf("%s %s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), name.c_str(), detail.c_str());
  std::fflush(stdout);
}

// Runs one check; an exception counts as a failure of that line.
template <class Fn>
void guarded(const std::string& id, const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("threw: ") + e.what());
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

McResult monte_carlo(Eigen::Index n, std::uint64_t seed, int reps) {
  const auto start = std::chrono::steady_clock::now();
  Dgp1Spec spec;
  spec.n_units = n;
  spec.n_periods = n;
  spec.seed = seed;
  McResult r = run_monte_carlo(spec, reps, IpcConfig{}, threads());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("# DGP 1 N=T=%ld reps=%d seed=%llu: %.1f s, %d failures\n", static_cast<long>(n),
              reps, static_cast<unsigned long long>(seed), secs, r.failures);
  std::fflush(stdout);
  return r;
}

// ---- dense oracles for criterion 8 ----

// Stacked least squares of vec(Y) on [X, blockdiag(F)] over (beta, gamma_1..gamma_N).
Eigen::VectorXd stacked_beta(const PanelDataset& d, const Eigen::MatrixXd& f) {
  const Eigen::Index n = d.n_units(), t = d.n_periods(), dx = d.n_regressors(), r = f.cols();
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n * t, dx + n * r);
  Eigen::VectorXd rhs(n * t);
  for (Eigen::Index i = 0; i < n; ++i) {
    design.block(i * t, 0, t, dx) = d.x_unit(i);
    design.block(i * t, dx + i * r, t, r) = f;
    rhs.segment(i * t, t) = d.y_unit(i);
  }
  return design.colPivHouseholderQr().solve(rhs).head(dx);
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return max_abs(a - b) / std::max(1.0, max_abs(b));
}

void oracle_instance(std::uint64_t seed, std::array<double, 5>& worst) {
  std::mt19937_64 pick(seed);
  NormalGenerator gen(seed);
  const Eigen::Index t = 3 + static_cast<Eigen::Index>(pick() % 6);  // 3..8
  const Eigen::Index n = 2 + static_cast<Eigen::Index>(pick() % 7);  // 2..8
  const Eigen::Index dx = 1 + static_cast<Eigen::Index>(pick() % 2);
  const Eigen::Index r = static_cast<Eigen::Index>(pick() % std::min<Eigen::Index>({4, t - 1, n}));
  const PanelDataset d(gaussian(t, n, gen), gaussian(t, n * dx, gen), dx);
  const Eigen::MatrixXd f = gaussian(t, r, gen);
  const Eigen::MatrixXd gam = gaussian(n, r, gen);
  const Eigen::VectorXd beta = gaussian(dx, 1, gen);
  const Eigen::MatrixXd m = dense_annihilator(f);

  worst[0] = std::max(worst[0], rel_err(beta_given_f(d, f), stacked_beta(d, f)));

  Eigen::MatrixXd a_dense = Eigen::MatrixXd::Zero(n, n);
  if (r > 0) a_dense = gam * (gam.transpose() * gam).inverse() * gam.transpose();
  const Eigen::MatrixXd z = z_matrices(d, f, loading_weights(gam));
  Eigen::MatrixXd z_dense(t, n * dx);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd zi = m * d.x_unit(i);
    for (Eigen::Index j = 0; j < n; ++j) zi -= a_dense(i, j) * (m * d.x_unit(j));
    z_dense.middleCols(i * dx, dx) = zi;
  }
  worst[1] = std::max(worst[1], rel_err(z, z_dense));

  const Eigen::MatrixXd u = d.y() - [&] {
    Eigen::MatrixXd xb = Eigen::MatrixXd::Zero(t, n);
    for (Eigen::Index i = 0; i < n; ++i) xb.col(i) = d.x_unit(i) * beta;
    return xb;
  }();
  Eigen::VectorXd s_dense(n);
  for (Eigen::Index i = 0; i < n; ++i)
    s_dense(i) = u.col(i).dot(m * u.col(i)) / static_cast<double>(t);
  worst[2] = std::max(worst[2], rel_err(unit_variances(d, beta, f), s_dense));

  const double mock_dense = (m * u * u.transpose()).trace() / static_cast<double>(n);
  worst[3] = std::max(worst[3], std::abs(mock_eigenvalue(d, beta, f) - mock_dense) /
                                    std::max(1.0, std::abs(mock_dense)));

  const Eigen::MatrixXd f2 = gaussian(t, static_cast<Eigen::Index>(pick() % t), gen);
  const double pd_dense = (dense_projector(f) - dense_projector(f2)).norm();
  worst[4] = std::max(worst[4], std::abs(projector_distance(f, f2) - pd_dense));
}

FactorGroup group_with_loadings(const Eigen::MatrixXd& g, int index) {
  FactorGroup out;
  out.group_index = index;
  out.dim = static_cast<int>(g.cols());
  out.loadings = g;
  out.factors = Eigen::MatrixXd::Ones(80, g.cols());
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) try {
  // --skip-mc runs only the fast criteria; ctest always runs everything.
  const bool skip_mc = argc > 1 && std::string(argv[1]) == "--skip-mc";
  if (skip_mc) std::printf("SKIP 1-5, P1-P3: Monte Carlo disabled by --skip-mc\n");
  McResult big;
  if (!skip_mc) {
  // 1: dominant group at N=T=160.
  {
    const McResult mc = monte_carlo(160, 1600, 200);
    report("1", "dominant group selection", mc.per_group_freq[0] >= 0.99,
           fmt("freq(d1=1)=%.3f at N=T=160, need >= 0.99", mc.per_group_freq[0]));
  }

  big = monte_carlo(320, 3200, 200);
  const auto& rm = big.rmse_beta;

  // 2-5 share the N=T=320 run.
  report("2", "joint group structure", big.joint_selection_freq >= 0.92,
         fmt("freq(1,1,1)=%.3f, need in [0.92, 1]", big.joint_selection_freq));
  report("3", "projector RMSE", big.rmse_projector <= 0.20,
         fmt("%.4f, need <= 0.20", big.rmse_projector));
  {
    const bool in_band = rm[kBeta] >= 0.002 && rm[kBeta] <= 0.005;
    const bool order = rm[kBetaOracle] <= 1.1 * rm[kBeta] && rm[kBeta] <= 1.1 * rm[kBeta1] &&
                       rm[kBeta1] <= 1.1 * rm[kBeta0];
    report("4", "slope RMSE and ordering", in_band && order,
           fmt("beta=%.5f (need [0.002,0.005]); oracle=%.5f beta1=%.5f beta0=%.5f (need "
               "oracle<=beta<=beta1<=beta0, 10%% slack)",
               rm[kBeta], rm[kBetaOracle], rm[kBeta1], rm[kBeta0]));
  }
  {
    const auto& ws = big.wald_size;
    const bool ok = ws[kBeta] >= 0.03 && ws[kBeta] <= 0.10 && ws[kBeta0] >= 0.60;
    report("5", "Wald size", ok,
           fmt("size(W_beta)=%.3f (need [0.03,0.10]), size(W_beta0)=%.3f (need >= 0.60)",
               ws[kBeta], ws[kBeta0]));
  }

  }

  // 6: strength gap.
  guarded("6", "strength gap", [&] {
    NormalGenerator gen(6);
    const Eigen::MatrixXd g = gaussian(50, 1, gen);
    const double gap = strength_gap_diagnostic(
        {group_with_loadings(g, 1), group_with_loadings(g / std::sqrt(123.4), 2)}, 80, 1);
    const double rounded = std::round(gap * 1000.0) / 1000.0;
    report("6", "strength gap", rounded == 1.099, fmt("%.6f, need 1.099 to 3 decimals", gap));
  });

  // 7: delta invariance.
  guarded("7", "delta invariance", [&] {
    double worst = 0.0;
    bool dims_equal = true;
    for (std::uint64_t k = 0; k < 20; ++k) {
      Dgp1Spec spec;
      spec.seed = 7000 + k;
      const PanelDataset data = generate_dgp1(spec).first;
      std::vector<IpcFit> fits;
      for (double delta : {0.0, 1.0, 2.0}) {
        IpcConfig c;
        c.delta = delta;
        fits.push_back(fit_ipc(data, c));
      }
      for (const IpcFit& f : fits) {
        worst = std::max({worst, max_abs(f.beta0 - fits[0].beta0), max_abs(f.beta - fits[0].beta)});
        std::vector<int> a, b;
        for (const auto& gr : f.groups) a.push_back(gr.dim);
        for (const auto& gr : fits[0].groups) b.push_back(gr.dim);
        dims_equal = dims_equal && a == b;
      }
    }
    report("7", "delta invariance", dims_equal && worst <= 1e-8,
           fmt("20 draws at N=T=40, max |diff| = %.2e, dims %s", worst,
               dims_equal ? "equal" : "differ"));
  });

  // 8: oracle equivalence.
  guarded("8", "oracle equivalence", [&] {
    std::array<double, 5> worst{};
    for (std::uint64_t k = 0; k < 50; ++k) oracle_instance(8000 + k, worst);
    const bool ok = std::all_of(worst.begin(), worst.end(), [](double e) { return e <= 1e-8; });
    report("8", "oracle equivalence", ok,
           fmt("50 instances; max err beta_given_f=%.1e z_matrices=%.1e unit_variances=%.1e "
               "mock_eigenvalue=%.1e projector_distance=%.1e",
               worst[0], worst[1], worst[2], worst[3], worst[4]));
  });

  // 10: jackknife identity (run before 9 so its fits are counted).
  guarded("10", "jackknife identity", [&] {
    Dgp1Spec spec;
    spec.seed = 10;
    const PanelDataset data = generate_dgp1(spec).first;
    const JackknifeResult jk = jackknife_bias_correct(data, IpcConfig{});
    const auto& s = jk.sub_estimates;
    const Eigen::VectorXd same_order =
        jk.beta + (2.0 * jk.beta - 0.5 * ((s[0] + s[1]) + (s[2] + s[3])));
    const Eigen::VectorXd naive = 3.0 * jk.beta - 0.5 * (s[0] + s[1] + s[2] + s[3]);
    const double ulp_scale =
        std::numeric_limits<double>::epsilon() * std::max(1.0, max_abs(3.0 * jk.beta));
    const bool exact = jk.beta_bc == same_order;
    const bool naive_close = max_abs(jk.beta_bc - naive) <= 4.0 * ulp_scale;

    NormalGenerator gen(11);
    const Eigen::VectorXd b = gaussian(3, 1, gen);
    const bool fixed = jackknife_combine(b, {b, b, b, b}) == b;
    report("10", "jackknife identity", exact && naive_close && fixed,
           fmt("bitwise match %s, |bc - (3b - sum/2)| = %.1e, fixed point %s",
               exact ? "yes" : "no", max_abs(jk.beta_bc - naive), fixed ? "exact" : "inexact"));
  });

  // 11: simulate determinism.
  guarded("11", "simulate determinism", [&] {
    const fs::path root = fs::temp_directory_path() / fmt("ipc_accept_%d", static_cast<int>(::getpid()));
    fs::remove_all(root);
    auto run = [&](const std::string& tag, int k) {
      const fs::path out = root / tag;
      const int code = cli_main({"ipc", "simulate", "--dgp1", "--n", "40", "--t", "40", "--reps",
                                 "20", "--seed", "7", "--threads", std::to_string(k), "--out",
                                 out.string()});
      return std::pair(code, read_file(out / "mc_result.json") + read_file(out / "table.csv"));
    };
    const auto a = run("a", 1), b = run("b", 1), c = run("c", 4);
    const bool ok = a.first == 0 && b.first == 0 && c.first == 0 && !a.second.empty() &&
                    a.second == b.second && a.second == c.second;
    report("11", "simulate determinism", ok,
           fmt("exit codes %d/%d/%d, outputs %s", a.first, b.first, c.first,
               ok ? "byte-identical" : "differ"));
    fs::remove_all(root);
  });

  // 9: ALS monotonicity over every fit in this process.
  report("9", "ALS monotonicity", als_monotonicity_violations() == 0,
         fmt("%llu violations over %llu ALS runs (unit suite checks its own runs)",
             static_cast<unsigned long long>(als_monotonicity_violations()),
             static_cast<unsigned long long>(als_runs())));

  // Simulation-module properties.
  if (!skip_mc) {
    const auto& rm = big.rmse_beta;
    const McResult small = monte_carlo(80, 800, 200);
    report("P1", "beta RMSE falls from N=T=80 to 320", rm[kBeta] < small.rmse_beta[kBeta],
           fmt("%.5f at 80, %.5f at 320", small.rmse_beta[kBeta], rm[kBeta]));
    report("P2", "size separation at N=T=320", big.wald_size[kBeta0] > big.wald_size[kBeta] + 0.2,
           fmt("size(W_beta0)=%.3f, size(W_beta)=%.3f, need gap > 0.2", big.wald_size[kBeta0],
               big.wald_size[kBeta]));
    const double jp = big.joint_selection_freq;
    const double mn = *std::min_element(big.per_group_freq.begin(), big.per_group_freq.end());
    report("P3", "joint frequency bounded by per-group", jp <= mn + 1e-12,
           fmt("joint %.3f, min per-group %.3f", jp, mn));
  }

  std::printf("%d failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
catch (const std::exception& e) {
  std::printf("FAIL aborted: %s\n", e.what());
  return 1;
}
