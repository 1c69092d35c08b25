#include "nonnormal/moments.h"

#include <vector>

#include "nonnormal/errors.h"

namespace nonnormal {

namespace {

// E[(1/T) Σ_t ||z_t − z̄||²] for the block [offset, offset+dim) of s_first..s_{first+T-1}.
double expected_centered_trace(const std::vector<Matrix>& cov, std::size_t first,
                               std::size_t count, const Matrix& f, Eigen::Index offset,
                               Eigen::Index dim) {
  double diagonal = 0.0;
  double all_pairs = 0.0;
  for (std::size_t s = first; s < first + count; ++s) {
    Matrix cross = cov[s];
    diagonal += cross.block(offset, offset, dim, dim).trace();
    for (std::size_t t = s; t < first + count; ++t) {
      const double tr = cross.block(offset, offset, dim, dim).trace();
      all_pairs += (t == s) ? tr : 2.0 * tr;
      cross = (f * cross).eval();
    }
  }
  const double n = static_cast<double>(count);
  return diagonal / n - all_pairs / (n * n);
}

}  // namespace

AugmentedLoop augment(const LinearClosedLoop& system, const NoiseSpec& noise,
                      const SuppressorConfig& suppressor) {
  noise.validate();
  suppressor.validate();
  const Eigen::Index n = system.state_dim();
  const Eigen::Index m = system.input_dim();
  if (static_cast<Eigen::Index>(noise.channels) != m) {
    throw ShapeError("noise channels do not match the columns of G");
  }
  const double a = noise.kind == NoiseKind::kAr1 ? noise.ar_coefficient : 0.0;
  const double beta = suppressor.is_identity() ? 1.0 : suppressor.beta;
  const double keep = 1.0 - beta;
  const Matrix eye = Matrix::Identity(m, m);

  AugmentedLoop out;
  out.state_dim = n;
  out.input_dim = m;
  const Eigen::Index d = n + 2 * m;
  out.transition = Matrix::Zero(d, d);
  out.transition.block(0, 0, n, n) = system.a();
  out.transition.block(0, n + m, n, m) = system.g();
  out.transition.block(n, n, m, m) = a * eye;
  out.transition.block(n + m, n, m, m) = beta * a * eye;
  out.transition.block(n + m, n + m, m, m) = keep * eye;

  out.input = Matrix::Zero(d, m);
  out.input.block(n, 0, m, m) = (1.0 - a) * eye;
  out.input.block(n + m, 0, m, m) = beta * (1.0 - a) * eye;

  out.noise_cov = Matrix::Zero(m, m);
  Matrix stationary_source = Matrix::Zero(m, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const double s = noise.channel_sigma(static_cast<std::size_t>(c));
    out.noise_cov(c, c) = s * s;
    stationary_source(c, c) = noise.stationary_variance(static_cast<std::size_t>(c));
  }
  out.initial_cov = Matrix::Zero(d, d);
  out.initial_cov.block(n, n, m, m) = stationary_source;
  out.initial_cov.block(n, n + m, m, m) = stationary_source;
  out.initial_cov.block(n + m, n, m, m) = stationary_source;
  out.initial_cov.block(n + m, n + m, m, m) = stationary_source;
  return out;
}

StationaryMoments stationary_moments(const LinearClosedLoop& system, const NoiseSpec& noise,
                                     const SuppressorConfig& suppressor) {
  const AugmentedLoop loop = augment(system, noise, suppressor);
  const Matrix q = loop.input * loop.noise_cov * loop.input.transpose();
  const Matrix sigma = solve_discrete_lyapunov(loop.transition, q);
  StationaryMoments out;
  const Eigen::Index n = loop.state_dim;
  const Eigen::Index m = loop.input_dim;
  out.state_cov = sigma.block(0, 0, n, n);
  out.applied_cov = sigma.block(loop.applied_offset(), loop.applied_offset(), m, m);
  out.state_trace = out.state_cov.trace();
  out.applied_variance = out.applied_cov.trace();
  return out;
}

FiniteHorizonMoments expected_rollout_moments(const LinearClosedLoop& system,
                                              const NoiseSpec& noise,
                                              const SuppressorConfig& suppressor,
                                              std::size_t horizon) {
  if (horizon == 0) throw EmptyHorizon("horizon must be >= 1");
  const AugmentedLoop loop = augment(system, noise, suppressor);
  const Matrix q = loop.input * loop.noise_cov * loop.input.transpose();
  std::vector<Matrix> cov;
  cov.reserve(horizon + 1);
  cov.push_back(loop.initial_cov);
  for (std::size_t t = 0; t < horizon; ++t) {
    cov.push_back(loop.transition * cov.back() * loop.transition.transpose() + q);
  }
  FiniteHorizonMoments out;
  out.cov_trace = expected_centered_trace(cov, 1, horizon, loop.transition, 0,
                                          loop.state_dim);
  out.applied_variance = expected_centered_trace(cov, 0, horizon, loop.transition,
                                                 loop.applied_offset(), loop.input_dim);
  return out;
}

}  // namespace nonnormal
