#include <vector>

#include <benchmark/benchmark.h>

#include "nonnormal/linalg.h"
#include "nonnormal/quadrotor.h"
#include "nonnormal/random.h"
#include "nonnormal/rollout.h"
#include "nonnormal/stats.h"
#include "nonnormal/systems.h"

namespace {

using namespace nonnormal;

LinearClosedLoop shear_member(double alpha) {
  ShearFamilySpec spec = ShearFamilySpec::defaults();
  spec.alpha_grid = {alpha};
  return build_shear_family(spec).front().system;
}

void BM_PeakGain(benchmark::State& state) {
  const Matrix a = shear_member(static_cast<double>(state.range(0))).a();
  for (auto _ : state) benchmark::DoNotOptimize(peak_gain(a).value);
}
BENCHMARK(BM_PeakGain)->Arg(0)->Arg(5)->Arg(10);

void BM_Lyapunov(benchmark::State& state) {
  const auto n = state.range(0);
  ShearFamilySpec spec = ShearFamilySpec::defaults();
  spec.eigenvalues.clear();
  for (Eigen::Index i = 0; i < n; ++i) spec.eigenvalues.push_back(0.93 - 0.4 * i / n);
  spec.structure = ShearStructure::kStrictUpper;
  spec.g = Matrix::Ones(n, 1);
  spec.alpha_grid = {2.0};
  const LinearClosedLoop sys = build_shear_family(spec).front().system;
  const Matrix q = sys.g() * sys.w() * sys.g().transpose();
  for (auto _ : state) benchmark::DoNotOptimize(solve_discrete_lyapunov(sys.a(), q).trace());
}
BENCHMARK(BM_Lyapunov)->Arg(2)->Arg(8)->Arg(32);

void BM_SimulateLinear(benchmark::State& state) {
  const LinearClosedLoop sys = shear_member(10.0);
  NoiseSpec noise;
  noise.kind = NoiseKind::kAr1;
  noise.ar_coefficient = 0.85;
  RolloutConfig config;
  config.n_rollouts = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_linear(sys, noise, SuppressorConfig{}, config).cov_trace);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 80);
}
BENCHMARK(BM_SimulateLinear)->Arg(64)->Arg(512);

void BM_QuadrotorStep(benchmark::State& state) {
  const quadrotor::Params p;
  quadrotor::StateVector s = quadrotor::StateVector::Zero();
  s(2) = 0.05;
  const quadrotor::InputVector u(p.hover_thrust(), 0.001);
  for (auto _ : state) {
    s = quadrotor::dynamics_step(s, u, p);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_QuadrotorStep);

void BM_BootstrapPearson(benchmark::State& state) {
  RandomStream data(1);
  std::vector<double> x(21), y(21);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(i);
    y[i] = x[i] + 3.0 * data.gaussian();
  }
  BootstrapConfig config;
  config.n_resamples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    RandomStream s(7);
    benchmark::DoNotOptimize(bootstrap_pearson_ci(x, y, config, s).lo);
  }
}
BENCHMARK(BM_BootstrapPearson)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
