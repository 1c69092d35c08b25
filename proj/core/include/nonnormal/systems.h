#pragma once

#include <string>
#include <vector>

#include "nonnormal/linalg.h"

namespace nonnormal {

/// Discrete closed loop x_{t+1} = A x_t + G w_t with Cov(w_t) = W.
/// Construction validates shapes, finiteness, symmetric PSD W and ρ(A) < 1.
class LinearClosedLoop {
 public:
  LinearClosedLoop(Matrix a, Matrix g, Matrix w);

  const Matrix& a() const noexcept { return a_; }
  const Matrix& g() const noexcept { return g_; }
  const Matrix& w() const noexcept { return w_; }
  Eigen::Index state_dim() const noexcept { return a_.rows(); }
  Eigen::Index input_dim() const noexcept { return g_.cols(); }

  /// Bitwise equality of (A, G, W).
  bool identical_to(const LinearClosedLoop& other) const noexcept;

 private:
  Matrix a_;
  Matrix g_;
  Matrix w_;
};

enum class ShearStructure {
  /// Unit diagonal, α on the first superdiagonal.
  kSuperdiagonal,
  /// Unit diagonal, α on every strictly upper entry.
  kStrictUpper,
};

struct ShearFamilySpec {
  std::vector<double> eigenvalues{0.93, 0.5};
  std::vector<double> alpha_grid;
  ShearStructure structure = ShearStructure::kSuperdiagonal;
  Matrix g;
  Matrix w;

  /// Default CI-1 family: Λ = (0.93, 0.5), 21 α values on [0, 10],
  /// G = (0, 1)ᵀ, W = 0.04.
  static ShearFamilySpec defaults();
};

std::vector<double> linspace(double lo, double hi, std::size_t count);

struct FamilyMember {
  double alpha = 0.0;
  LinearClosedLoop system;
  double kappa_v = 1.0;
  double rho = 0.0;
  PeakGainResult peak;

  double g_peak() const noexcept { return peak.value; }
};

/// S(α) and its closed-form inverse for the given structure.
Matrix shear_matrix(std::size_t n, double alpha, ShearStructure structure);
Matrix shear_inverse(std::size_t n, double alpha, ShearStructure structure);

std::vector<FamilyMember> build_shear_family(const ShearFamilySpec& spec);

struct VerificationReport {
  std::vector<std::string> violations;
  double max_eigenvalue_drift = 0.0;
  double max_rho_drift = 0.0;

  bool passed() const noexcept { return violations.empty(); }
};

/// Checks that the spectrum, ρ, G and W are held fixed across the family.
/// Violations are reported, never thrown.
VerificationReport verify_family_controls(const std::vector<FamilyMember>& members);

}  // namespace nonnormal
