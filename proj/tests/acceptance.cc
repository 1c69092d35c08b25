// Acceptance checks for the library and the nonnormal-lab binary.
// Prints one PASS/FAIL line per criterion with the measured values beneath
// it; exits non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nonnormal/config.h"
#include "nonnormal/errors.h"
#include "nonnormal/experiments.h"
#include "nonnormal/linalg.h"
#include "nonnormal/moments.h"
#include "nonnormal/quadrotor.h"
#include "nonnormal/report.h"
#include "nonnormal/systems.h"
#include "oracles.h"

namespace {

namespace fs = std::filesystem;
using namespace nonnormal;

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)) {}

  void check(bool ok, const std::string& what) {
    all_ok_ = all_ok_ && ok;
    lines_.push_back(std::string(ok ? "    ok   " : "    FAIL ") + what);
  }

  bool report(int number) const {
    std::cout << (all_ok_ ? "PASS" : "FAIL") << " criterion " << number << ": " << title_
              << "\n";
    for (const auto& l : lines_) std::cout << l << "\n";
    return all_ok_;
  }

 private:
  std::string title_;
  std::vector<std::string> lines_;
  bool all_ok_ = true;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

bool rel_close(double value, double target, double tol) {
  return std::abs(value - target) <= tol * std::abs(target);
}

// Runs `body`, converting any exception into a failed check.
void guarded(Criterion& c, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    c.check(false, std::string("unexpected exception: ") + e.what());
  }
}

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

bool criterion1() {
  Criterion c("linear-algebra oracles (peak gain vs brute force, Lyapunov vs series)");
  guarded(c, [&] {
    std::vector<std::pair<std::string, Matrix>> battery{
        {"[[0.5,10],[0,0.5]]", m2(0.5, 10, 0, 0.5)},
        {"diag(0.93,0.5)", m2(0.93, 0, 0, 0.5)},
        {"rotation 0.8", m2(0, -0.8, 0.8, 0)},
        {"[[0.9,3],[-0.1,0.6]]", m2(0.9, 3, -0.1, 0.6)}};
    for (const FamilyMember& m : build_shear_family(ShearFamilySpec::defaults())) {
      battery.emplace_back(fmt("shear alpha=%g", m.alpha), m.system.a());
    }
    double worst = 0.0;
    for (const auto& [name, a] : battery) {
      const double oracle = nonnormal::testing::brute_force_peak(a, 500).value;
      const double err = std::abs(peak_gain(a).value - oracle) / oracle;
      worst = std::max(worst, err);
      if (err > 1e-10) c.check(false, "peak gain mismatch on " + name);
    }
    c.check(worst <= 1e-10,
            fmt("peak gain: %g matrices, worst relative error %.2e <= 1e-10",
                static_cast<double>(battery.size()), worst));

    double worst_lyap = 0.0;
    for (const auto& [name, a] : battery) {
      Matrix q = Matrix::Zero(2, 2);
      q(1, 1) = 0.04;
      q(0, 0) = 0.01;
      const Matrix oracle = nonnormal::testing::truncated_lyapunov_series(a, q, 1e-14);
      const double err = (solve_discrete_lyapunov(a, q) - oracle).norm() / oracle.norm();
      worst_lyap = std::max(worst_lyap, err);
    }
    c.check(worst_lyap <= 1e-8,
            fmt("Lyapunov vs truncated series: worst Frobenius relative error %.2e <= 1e-8",
                worst_lyap));
    const double scalar = solve_discrete_lyapunov(Matrix::Constant(1, 1, 0.5),
                                                  Matrix::Constant(1, 1, 1.0))(0, 0);
    c.check(std::abs(scalar - 4.0 / 3.0) <= 1e-12,
            fmt("scalar a=0.5, q=1: %.17g vs 4/3 (1e-12)", scalar));
  });
  return c.report(1);
}

bool criterion2(const ExperimentConfig& config) {
  Criterion c("shear-family amplifier isolation (correlations, rho drift, CI width, runtime)");
  guarded(c, [&] {
    const auto start = std::chrono::steady_clock::now();
    const CI1Result r = run_ci1(config.ci1_members(), config.ci1);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.check(r.rows.size() == 21 && config.ci1.bootstrap.n_resamples == 10000,
            fmt("%g members, %g bootstrap resamples", static_cast<double>(r.rows.size()),
                static_cast<double>(config.ci1.bootstrap.n_resamples)));
    c.check(r.corr_kappa_cov >= 0.95,
            fmt("Pearson(kappa, tr Sigma) = %.4f >= 0.95", r.corr_kappa_cov));
    c.check(r.corr_kappa_gpeak >= 0.99,
            fmt("Pearson(kappa, G_peak) = %.4f >= 0.99", r.corr_kappa_gpeak));
    c.check(r.rho_drift < 1e-8, fmt("rho drift %.2e < 1e-8", r.rho_drift));
    c.check(r.ci_cov.width() < 0.1,
            fmt("CI tr Sigma [%.4f, %.4f] width %.4f < 0.1", r.ci_cov.lo, r.ci_cov.hi,
                r.ci_cov.width()));
    c.check(r.ci_gpeak.width() < 0.1,
            fmt("CI G_peak [%.4f, %.4f] width %.4f < 0.1", r.ci_gpeak.lo, r.ci_gpeak.hi,
                r.ci_gpeak.width()));
    c.check(seconds < 30.0, fmt("runtime %.2f s < 30 s", seconds));
  });
  return c.report(2);
}

bool criterion3(const ExperimentConfig& config) {
  Criterion c("source-only intervention on a fixed closed loop");
  guarded(c, [&] {
    const CI2Result r = run_ci2(config.ci2_member(config.ci2.alpha), config.ci2);
    const double white = r.white.metrics.applied_input_variance;
    const double filtered = r.filtered.metrics.applied_input_variance;
    c.check(rel_close(white, 0.04, 0.05),
            fmt("white applied variance %.5f = 0.04 +/- 5%%", white));
    const double a = config.ci2.filtered.ar_coefficient;
    const double oracle = (1.0 - a) / (1.0 + a);
    c.check(rel_close(filtered / white, oracle, 0.10),
            fmt("filtered/white ratio %.5f vs AR(1) oracle %.5f (+/- 10%%); reduction %.2f%%",
                filtered / white, oracle, r.reductions.action_variance_pct));
    c.check(r.reductions.cov_trace_pct > 0.0,
            fmt("cov-trace reduction %.2f%% > 0", r.reductions.cov_trace_pct));
    c.check(r.reductions.j_peak_pct > 0.0,
            fmt("J_peak reduction %.2f%% > 0", r.reductions.j_peak_pct));
    c.check(r.g_peak_white == r.g_peak_filtered,
            fmt("G_peak white %.17g == filtered %.17g", r.g_peak_white, r.g_peak_filtered));
    c.check(rel_close(r.filtered.metrics.cov_trace, r.filtered.cov_trace_analytic, 0.10),
            fmt("filtered arm: stationary augmented tr Sigma %.4f vs empirical %.4f "
                "(within 10%%); finite-horizon expectation %.4f",
                r.filtered.cov_trace_analytic, r.filtered.metrics.cov_trace,
                r.filtered.cov_trace_expected));
  });
  return c.report(3);
}

bool criterion4(const ExperimentConfig& config) {
  Criterion c("quadrotor bridge properties");
  guarded(c, [&] {
    const CI3Result r = run_ci3(config.ci3);
    bool zero = true;
    for (const CI3Reduction& red : r.summary.reductions) {
      if (red.level == 0.0) {
        zero = zero && red.action_variance_pct == 0.0 && red.cov_trace_pct == 0.0 &&
               red.j_peak_pct == 0.0;
      }
    }
    c.check(zero, "level-0 reductions exactly 0");

    const auto& by_level = r.summary.by_level;
    const auto at = [&](double level) -> const CI3LevelAggregate& {
      for (const auto& a : by_level) {
        if (std::abs(a.level - level) < 1e-12) return a;
      }
      throw InvalidArgument("missing level");
    };
    const double a05 = at(0.05).action_variance_pct.mean;
    const double a10 = at(0.10).action_variance_pct.mean;
    const double a20 = at(0.20).action_variance_pct.mean;
    c.check(a05 < a10 && a10 < a20,
            fmt("aggregate action reduction increasing: %.2f < %.2f < %.2f", a05, a10, a20));
    c.check(a20 >= 70.0 && a20 <= 95.0, fmt("action reduction at 0.20 = %.2f%% in [70, 95]", a20));
    const double c05 = at(0.05).cov_trace_pct.mean;
    const double c20 = at(0.20).cov_trace_pct.mean;
    c.check(c20 > c05, fmt("covariance reduction at 0.20 (%.2f%%) > at 0.05 (%.2f%%)", c20, c05));
    for (std::size_t i = 0; i + 1 < r.summary.stress.size(); ++i) {
      const CI3StressRow& s = r.summary.stress[i];
      c.check(s.cov_trace_pct.mean > 0.0,
              s.scenario + fmt(": covariance reduction at 0.20 = %.2f%% > 0",
                               s.cov_trace_pct.mean));
    }
    for (const CI3Diagnostic& d : r.diagnostics) {
      c.check(d.rho < 1.0 && d.g_peak.value > 1.0,
              d.scenario + fmt(": rho %.4f < 1, G_peak %.3f > 1", d.rho, d.g_peak.value));
    }
    bool finite = true;
    for (const auto& a : by_level) {
      finite = finite && std::isfinite(a.action_variance_pct.std) &&
               std::isfinite(a.cov_trace_pct.std);
    }
    for (const auto& s : r.summary.stress) {
      finite = finite && std::isfinite(s.action_variance_pct.std) &&
               std::isfinite(s.cov_trace_pct.std);
    }
    c.check(finite, "across-seed std fields finite");
    const std::string text = report::ci3_text(r);
    c.check(!r.summary.stress.empty() && r.summary.stress.back().scenario == "Agg" &&
                text.find("\n  Agg & ") != std::string::npos,
            "aggregate stress-table row emitted");
  });
  return c.report(4);
}

int run_tool(const std::string& args) {
  const std::string cmd =
      std::string(NONNORMAL_LAB_BINARY) + " " + args + " > /dev/null 2> /dev/null";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Compares every .csv and .json file of two output directories byte for byte.
bool same_outputs(const fs::path& a, const fs::path& b, std::size_t& files) {
  files = 0;
  bool same = true;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto ext = entry.path().extension();
    if (ext != ".csv" && ext != ".json") continue;
    ++files;
    const fs::path other = b / entry.path().filename();
    same = same && fs::exists(other) && read_all(entry.path()) == read_all(other);
  }
  return same && files > 0;
}

bool criterion5(const fs::path& work) {
  Criterion c("determinism of the full run");
  guarded(c, [&] {
    const fs::path a = work / "all_a", b = work / "all_b", t = work / "all_t8";
    c.check(run_tool("all --seed 0 --threads 1 --out " + a.string()) == 0, "all run #1 exit 0");
    c.check(run_tool("all --seed 0 --threads 1 --out " + b.string()) == 0, "all run #2 exit 0");
    c.check(run_tool("all --seed 0 --threads 8 --out " + t.string()) == 0,
            "all run --threads 8 exit 0");
    std::size_t files = 0;
    const bool twice = same_outputs(a, b, files);
    c.check(twice,
            fmt("same seed twice: %g CSV/JSON files byte-identical", static_cast<double>(files)));
    const bool threads = same_outputs(a, t, files);
    c.check(threads, fmt("--threads 1 vs --threads 8: %g files byte-identical",
                         static_cast<double>(files)));
  });
  return c.report(5);
}

bool criterion6(const fs::path& work) {
  Criterion c("negative controls");
  guarded(c, [&] {
    const fs::path w = work / "perturb_w.ini";
    std::ofstream(w) << "[ci1]\nperturb_member = 10\nperturb_w_delta = 0.004\n";
    const int w_exit = run_tool("ci1 --config " + w.string() + " --out " + (work / "neg").string());
    c.check(w_exit == 3, fmt("perturbed W in one member: exit %g (want 3)", w_exit));

    const fs::path s = work / "other_system.ini";
    std::ofstream(s) << "[ci2]\nfiltered_alpha = 9.5\n";
    const int s_exit = run_tool("ci2 --config " + s.string() + " --out " + (work / "neg").string());
    c.check(s_exit == 3, fmt("different systems in the two arms: exit %g (want 3)", s_exit));

    ExperimentConfig config = default_config();
    config.ci1_perturb_member = 10;
    config.ci1_perturb_w_delta = 0.004;
    bool thrown = false;
    try {
      run_ci1(config.ci1_members(), config.ci1);
    } catch (const AmplifierControlViolated&) {
      thrown = true;
    }
    c.check(thrown, "library: perturbed family raises AmplifierControlViolated");
    thrown = false;
    try {
      run_ci2_arms(config.ci2_member(10.0).system, config.ci2_member(9.5).system, config.ci2);
    } catch (const AmplifierControlViolated&) {
      thrown = true;
    }
    c.check(thrown, "library: mismatched arms raise AmplifierControlViolated");
  });
  return c.report(6);
}

bool criterion7() {
  Criterion c("quadrotor physics");
  guarded(c, [&] {
    using namespace quadrotor;
    const Params p;
    const StateVector hover = StateVector::Zero();
    const InputVector u0(p.hover_thrust(), 0.0);
    const double residual = (dynamics_step(hover, u0, p) - hover).norm();
    c.check(residual < 1e-12, fmt("hover fixed-point residual %.2e < 1e-12", residual));

    const DiscreteLinearization lin = hover_linearization(p);
    const Eigen::MatrixXd ja = nonnormal::testing::finite_difference_jacobian(
        [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
          return dynamics_step(StateVector(s), u0, p);
        },
        Eigen::VectorXd(hover), 1e-6);
    const Eigen::MatrixXd jb = nonnormal::testing::finite_difference_jacobian(
        [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
          return dynamics_step(hover, InputVector(u), p);
        },
        Eigen::VectorXd(u0), 1e-6);
    const double ea = (ja - lin.a).cwiseAbs().maxCoeff();
    const double eb = (jb - lin.b).cwiseAbs().maxCoeff();
    c.check(ea <= 1e-6 && eb <= 1e-6,
            fmt("finite-difference Jacobians: max |dA| %.2e, |dB| %.2e <= 1e-6", ea, eb));

    StateVector s = StateVector::Zero();
    s(3) = 0.4;
    s(4) = 1.5;
    const StateVector next = dynamics_step(s, InputVector::Zero(), p);
    const double h = p.dt;
    const double ez = std::abs(next(1) - (1.5 * h - 0.5 * p.gravity * h * h));
    const double evz = std::abs(next(4) - (1.5 - p.gravity * h));
    const double ex = std::abs(next(0) - 0.4 * h);
    const double worst = std::max({ez, evz, ex});
    c.check(worst <= 1e-10, fmt("free-fall step vs kinematics: max error %.2e <= 1e-10", worst));
  });
  return c.report(7);
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "nonnormal_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  ExperimentConfig config = default_config();
  bool ok = true;
  ok = criterion1() && ok;
  ok = criterion2(config) && ok;
  ok = criterion3(config) && ok;
  ok = criterion4(config) && ok;
  ok = criterion5(work) && ok;
  ok = criterion6(work) && ok;
  ok = criterion7() && ok;
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << "\n";
  return ok ? 0 : 1;
}
