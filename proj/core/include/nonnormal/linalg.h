#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace nonnormal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Right eigenpairs of a real square matrix. Columns of `vectors` have unit
/// 2-norm and their first non-negligible component is real and positive.
struct EigenDecomposition {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
};

/// Outcome of the sup_k ||A^k||_2 search.
struct PeakGainResult {
  double value = 1.0;
  std::size_t argmax_step = 0;
  /// True when the search stopped on a power with norm < 1, which bounds
  /// every later power by the running maximum.
  bool terminated_certified = false;
  std::size_t steps_examined = 0;
};

inline constexpr std::size_t kDefaultPeakGainMaxSteps = 10'000;
inline constexpr double kDefaultLyapunovTolerance = 1e-10;

/// Throws InvalidMatrix on empty or non-finite input.
void require_finite(const Matrix& a, const char* what);
/// Throws ShapeError unless `a` is square.
void require_square(const Matrix& a, const char* what);

double spectral_norm(const Matrix& a);
double spectral_radius(const Matrix& a);

EigenDecomposition eigen_decompose(const Matrix& a);

/// σ_max(V)/σ_min(V) for the unit-column eigenvector matrix V. Throws
/// NearDefective when σ_min(V) ≤ 1e-12·σ_max(V).
double eigenvector_condition(const Matrix& a);

/// Certified peak transient gain. Throws NotSchurStable when ρ(A) ≥ 1.
PeakGainResult peak_gain(const Matrix& a,
                         std::size_t max_steps = kDefaultPeakGainMaxSteps);

/// Same search without the stability precondition. Stops early (uncertified)
/// if a power overflows. Used for diagnostics of matrices that are not
/// Schur stable.
PeakGainResult peak_gain_search(const Matrix& a, std::size_t max_steps);

/// Solves Σ = AΣAᵀ + Q by the doubling iteration
///   Σ ← Σ + A_k Σ A_kᵀ,  A_k ← A_k²
/// and checks ||Σ − AΣAᵀ − Q||_F ≤ tol·||Q||_F on exit.
Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q,
                               double tol = kDefaultLyapunovTolerance);

/// Whitespace-delimited rows, `#` starts a comment, blank lines ignored.
Matrix parse_matrix(std::istream& in);
Matrix read_matrix_file(const std::string& path);
/// Writes entries with round-trip precision so parse_matrix recovers them
/// bit for bit.
void write_matrix(std::ostream& out, const Matrix& a);

}  // namespace nonnormal
