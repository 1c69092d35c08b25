#include "nonnormal/linalg.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "nonnormal/errors.h"

namespace nonnormal {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kDefectiveThreshold = 1e-12;
constexpr int kMaxDoublingSteps = 200;
constexpr int kMaxRefinements = 4;

double largest_singular_value(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

std::string shape_of(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

// Doubling sweep for Σ = AΣAᵀ + Q starting from Σ = Q.
Matrix doubling_sum(const Matrix& a, const Matrix& q) {
  Matrix sigma = q;
  Matrix ak = a;
  for (int i = 0; i < kMaxDoublingSteps; ++i) {
    const Matrix increment = ak * sigma * ak.transpose();
    sigma += increment;
    const double inc = increment.norm();
    if (inc <= std::numeric_limits<double>::epsilon() * 0.25 * sigma.norm()) {
      break;
    }
    ak = (ak * ak).eval();
    if (ak.norm() == 0.0) break;
  }
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace

void require_finite(const Matrix& a, const char* what) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw InvalidMatrix(std::string(what) + " is empty");
  }
  if (!a.allFinite()) {
    throw InvalidMatrix(std::string(what) + " has non-finite entries");
  }
}

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw ShapeError(std::string(what) + " must be square, got " + shape_of(a));
  }
}

double spectral_norm(const Matrix& a) {
  require_finite(a, "spectral_norm input");
  return largest_singular_value(a);
}

double spectral_radius(const Matrix& a) {
  require_finite(a, "spectral_radius input");
  require_square(a, "spectral_radius input");
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw InvalidMatrix("eigenvalue iteration did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

EigenDecomposition eigen_decompose(const Matrix& a) {
  require_finite(a, "eigen_decompose input");
  require_square(a, "eigen_decompose input");
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw InvalidMatrix("eigenvalue iteration did not converge");
  }
  EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index j = 0; j < out.vectors.cols(); ++j) {
    auto column = out.vectors.col(j);
    const double norm = column.norm();
    if (norm == 0.0) continue;
    column /= norm;
    // Fix the phase so the first non-negligible component is real positive.
    const double cutoff = 1e-14;
    for (Eigen::Index i = 0; i < column.size(); ++i) {
      const std::complex<double> c = column(i);
      if (std::abs(c) > cutoff) {
        column *= std::conj(c) / std::abs(c);
        column(i) = std::abs(c);
        break;
      }
    }
  }
  return out;
}

double eigenvector_condition(const Matrix& a) {
  const EigenDecomposition eig = eigen_decompose(a);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(eig.vectors);
  const auto& s = svd.singularValues();
  const double s_max = s(0);
  const double s_min = s(s.size() - 1);
  if (!(s_min > kDefectiveThreshold * s_max)) {
    throw NearDefective("eigenvector matrix is numerically singular (sigma_min = " +
                            std::to_string(s_min) + ")",
                        s_min);
  }
  return std::max(1.0, s_max / s_min);
}

PeakGainResult peak_gain_search(const Matrix& a, std::size_t max_steps) {
  require_finite(a, "peak_gain input");
  require_square(a, "peak_gain input");
  PeakGainResult result;
  result.value = 1.0;  // ||A^0||_2
  result.argmax_step = 0;
  result.steps_examined = 1;
  Matrix power = Matrix::Identity(a.rows(), a.cols());
  for (std::size_t k = 1; result.steps_examined < max_steps; ++k) {
    power = (power * a).eval();
    if (!power.allFinite()) break;
    const double norm = largest_singular_value(power);
    ++result.steps_examined;
    if (!std::isfinite(norm)) break;
    if (norm > result.value) {
      result.value = norm;
      result.argmax_step = k;
    }
    // Any m > k splits as m = qk + r with ||A^m|| ≤ ||A^k||^q ||A^r|| < max.
    if (norm < 1.0) {
      result.terminated_certified = true;
      break;
    }
  }
  return result;
}

PeakGainResult peak_gain(const Matrix& a, std::size_t max_steps) {
  const double rho = spectral_radius(a);
  if (!(rho < 1.0)) {
    throw NotSchurStable("peak gain needs rho(A) < 1, got " +
                         std::to_string(rho));
  }
  return peak_gain_search(a, max_steps);
}

Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q, double tol) {
  require_finite(a, "Lyapunov A");
  require_finite(q, "Lyapunov Q");
  require_square(a, "Lyapunov A");
  require_square(q, "Lyapunov Q");
  if (a.rows() != q.rows()) {
    throw ShapeError("Lyapunov A is " + shape_of(a) + " but Q is " + shape_of(q));
  }
  const double q_scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * q_scale) {
    throw InvalidCovariance("Q is not symmetric");
  }
  const Matrix q_sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> q_eig(q_sym, Eigen::EigenvaluesOnly);
  if (q_eig.eigenvalues().minCoeff() < -kSymmetryTolerance * q_scale) {
    throw InvalidCovariance("Q is not positive semidefinite");
  }
  const double rho = spectral_radius(a);
  if (!(rho < 1.0)) {
    throw NotSchurStable("Lyapunov solve needs rho(A) < 1, got " +
                         std::to_string(rho));
  }

  Matrix sigma = doubling_sum(a, q_sym);
  const double target = tol * q_sym.norm();
  for (int i = 0; i < kMaxRefinements; ++i) {
    const Matrix residual = q_sym - (sigma - a * sigma * a.transpose());
    if (residual.norm() <= target) return sigma;
    sigma += doubling_sum(a, 0.5 * (residual + residual.transpose()));
  }
  const double final_residual =
      (sigma - a * sigma * a.transpose() - q_sym).norm();
  if (final_residual > target) {
    throw InvalidArgument("Lyapunov residual " + std::to_string(final_residual) +
                          " above tolerance " + std::to_string(target));
  }
  return sigma;
}

Matrix parse_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream tokens(line);
    std::vector<double> row;
    std::string token;
    while (tokens >> token) {
      errno = 0;
      char* end = nullptr;
      const double value = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        throw InvalidMatrix("line " + std::to_string(line_no) +
                            ": not a number: '" + token + "'");
      }
      if (!std::isfinite(value)) {
        throw InvalidMatrix("line " + std::to_string(line_no) +
                            ": non-finite entry");
      }
      row.push_back(value);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ShapeError("line " + std::to_string(line_no) + ": row has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidMatrix("no matrix rows found");
  Matrix out(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file '" + path + "'");
  return parse_matrix(in);
}

void write_matrix(std::ostream& out, const Matrix& a) {
  char buf[64];
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", a(i, j));
      if (j > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace nonnormal
