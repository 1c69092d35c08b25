#include "nonnormal/systems.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>

#include "nonnormal/errors.h"

namespace nonnormal {

namespace {

constexpr double kControlTolerance = 1e-8;

bool bitwise_equal(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
  return std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
}

std::vector<std::complex<double>> sorted_spectrum(const Matrix& a) {
  const auto values = eigen_decompose(a).values;
  std::vector<std::complex<double>> out(values.data(), values.data() + values.size());
  std::sort(out.begin(), out.end(), [](auto l, auto r) {
    if (l.real() != r.real()) return l.real() < r.real();
    return l.imag() < r.imag();
  });
  return out;
}

}  // namespace

LinearClosedLoop::LinearClosedLoop(Matrix a, Matrix g, Matrix w)
    : a_(std::move(a)), g_(std::move(g)), w_(std::move(w)) {
  require_finite(a_, "A");
  require_finite(g_, "G");
  require_finite(w_, "W");
  require_square(a_, "A");
  require_square(w_, "W");
  if (g_.rows() != a_.rows() || g_.cols() != w_.rows()) {
    throw ShapeError("G must be n x m with A n x n and W m x m");
  }
  const double scale = std::max(1.0, w_.cwiseAbs().maxCoeff());
  if ((w_ - w_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidCovariance("W is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (w_ + w_.transpose()),
                                            Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw InvalidCovariance("W is not positive semidefinite");
  }
  const double rho = spectral_radius(a_);
  if (!(rho < 1.0)) {
    throw NotSchurStable("closed loop has rho(A) = " + std::to_string(rho));
  }
}

bool LinearClosedLoop::identical_to(const LinearClosedLoop& other) const noexcept {
  return bitwise_equal(a_, other.a_) && bitwise_equal(g_, other.g_) &&
         bitwise_equal(w_, other.w_);
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

ShearFamilySpec ShearFamilySpec::defaults() {
  ShearFamilySpec spec;
  spec.eigenvalues = {0.93, 0.5};
  spec.alpha_grid = linspace(0.0, 10.0, 21);
  spec.g = Matrix(2, 1);
  spec.g << 0.0, 1.0;
  spec.w = Matrix::Constant(1, 1, 0.04);
  return spec;
}

Matrix shear_matrix(std::size_t n, double alpha, ShearStructure structure) {
  const auto size = static_cast<Eigen::Index>(n);
  Matrix s = Matrix::Identity(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = i + 1; j < size; ++j) {
      if (structure == ShearStructure::kStrictUpper || j == i + 1) s(i, j) = alpha;
    }
  }
  return s;
}

Matrix shear_inverse(std::size_t n, double alpha, ShearStructure structure) {
  // Both structures are upper-triangular Toeplitz, so the inverse is too:
  //   superdiagonal: (S⁻¹)_{i,i+k} = (−α)^k
  //   strict upper:  (S⁻¹)_{i,i+k} = −α(1−α)^{k−1}
  const auto size = static_cast<Eigen::Index>(n);
  Matrix inv = Matrix::Identity(size, size);
  for (Eigen::Index k = 1; k < size; ++k) {
    const double value = structure == ShearStructure::kSuperdiagonal
                             ? std::pow(-alpha, static_cast<double>(k))
                             : -alpha * std::pow(1.0 - alpha, static_cast<double>(k - 1));
    for (Eigen::Index i = 0; i + k < size; ++i) inv(i, i + k) = value;
  }
  return inv;
}

std::vector<FamilyMember> build_shear_family(const ShearFamilySpec& spec) {
  const std::size_t n = spec.eigenvalues.size();
  if (n == 0) throw InvalidArgument("shear family needs at least one eigenvalue");
  for (const double lambda : spec.eigenvalues) {
    if (!std::isfinite(lambda) || !(std::abs(lambda) < 1.0)) {
      throw NotSchurStable("family eigenvalue " + std::to_string(lambda) +
                           " is not inside the unit disk");
    }
  }
  if (spec.alpha_grid.empty()) throw InvalidArgument("alpha grid is empty");
  for (std::size_t i = 0; i < spec.alpha_grid.size(); ++i) {
    const double alpha = spec.alpha_grid[i];
    if (!std::isfinite(alpha) || alpha < 0.0) {
      throw InvalidArgument("alpha values must be finite and >= 0");
    }
    if (i > 0 && alpha < spec.alpha_grid[i - 1]) {
      throw InvalidArgument("alpha grid must be sorted ascending");
    }
  }
  if (static_cast<std::size_t>(spec.g.rows()) != n) {
    throw ShapeError("G has " + std::to_string(spec.g.rows()) +
                     " rows but the family has dimension " + std::to_string(n));
  }

  Vector lambda(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) lambda(static_cast<Eigen::Index>(i)) = spec.eigenvalues[i];

  std::vector<FamilyMember> members;
  members.reserve(spec.alpha_grid.size());
  for (const double alpha : spec.alpha_grid) {
    const Matrix s = shear_matrix(n, alpha, spec.structure);
    const Matrix s_inv = shear_inverse(n, alpha, spec.structure);
    Matrix a = s * lambda.asDiagonal() * s_inv;
    LinearClosedLoop system(std::move(a), spec.g, spec.w);
    const double kappa = eigenvector_condition(system.a());
    const double rho = spectral_radius(system.a());
    PeakGainResult peak = peak_gain(system.a());
    members.push_back(FamilyMember{alpha, std::move(system), kappa, rho, peak});
  }
  return members;
}

VerificationReport verify_family_controls(const std::vector<FamilyMember>& members) {
  VerificationReport report;
  if (members.empty()) {
    report.violations.push_back("family is empty");
    return report;
  }
  const FamilyMember& ref = members.front();
  const auto ref_spectrum = sorted_spectrum(ref.system.a());
  for (std::size_t i = 1; i < members.size(); ++i) {
    const FamilyMember& m = members[i];
    const std::string tag = "member " + std::to_string(i) + " (alpha=" +
                            std::to_string(m.alpha) + "): ";
    const auto spectrum = sorted_spectrum(m.system.a());
    if (spectrum.size() != ref_spectrum.size()) {
      report.violations.push_back(tag + "state dimension differs");
      continue;
    }
    double drift = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      drift = std::max(drift, std::abs(spectrum[k] - ref_spectrum[k]));
    }
    report.max_eigenvalue_drift = std::max(report.max_eigenvalue_drift, drift);
    if (drift > kControlTolerance) {
      report.violations.push_back(tag + "eigenvalues differ by " + std::to_string(drift));
    }
    const double rho_drift = std::abs(m.rho - ref.rho);
    report.max_rho_drift = std::max(report.max_rho_drift, rho_drift);
    if (rho_drift > kControlTolerance) {
      report.violations.push_back(tag + "spectral radius differs by " +
                                  std::to_string(rho_drift));
    }
    if (!bitwise_equal(m.system.g(), ref.system.g())) {
      report.violations.push_back(tag + "disturbance channel G differs");
    }
    if (!bitwise_equal(m.system.w(), ref.system.w())) {
      report.violations.push_back(tag + "disturbance covariance W differs");
    }
  }
  return report;
}

}  // namespace nonnormal
