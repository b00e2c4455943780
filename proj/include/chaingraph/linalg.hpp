#pragma once

// Dense symmetric kernels shared by every module. All PD inverses, square
// roots and projections go through one symmetric eigendecomposition.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "chaingraph/errors.hpp"

namespace chaingraph {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Zero-based node indices, kept sorted ascending.
using NodeSet = std::vector<int>;

/// Entries with magnitude at or below this are structural zeros.
inline constexpr double kSupportTol = 1e-8;

namespace linalg {

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // columns are eigenvectors
};

inline SymEig sym_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// V diag(values) V^T
inline Matrix compose(const Matrix& vectors, const Vector& values) {
  return vectors * values.asDiagonal() * vectors.transpose();
}

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline double asymmetry(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

inline void require_square(const Matrix& a, const char* name) {
  if (a.rows() != a.cols()) {
    throw InputError(std::string(name) + " must be square, got " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

inline void require_symmetric(const Matrix& a, double tol, const char* name) {
  require_square(a, name);
  if (!a.allFinite()) throw InputError(std::string(name) + " has non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (asymmetry(a) > tol * scale) {
    throw InputError(std::string(name) + " is not symmetric");
  }
}

/// Inverse of a symmetric positive definite matrix. Throws if the smallest
/// eigenvalue is not positive.
inline Matrix inv_spd(const Matrix& a) {
  if (a.size() == 0) return a;
  const SymEig eig = sym_eig(symmetrize(a));
  if (!(eig.values(0) > 0.0)) {
    throw NumericalError("matrix is not positive definite (min eigenvalue " +
                         std::to_string(eig.values(0)) + ")");
  }
  return compose(eig.vectors, eig.values.cwiseInverse());
}

/// Result of inverting a possibly ill-conditioned SPD block.
struct FlooredInverse {
  Matrix inverse;
  bool floored = false;  // eigenvalues were raised to the floor
};

/// Inverse with an eigenvalue floor of `rel_floor * trace(a)` applied when
/// the condition number exceeds `max_condition` or the matrix is indefinite.
inline FlooredInverse inv_spd_floored(const Matrix& a, double max_condition = 1e12,
                                      double rel_floor = 1e-10) {
  FlooredInverse out;
  if (a.size() == 0) {
    out.inverse = a;
    return out;
  }
  SymEig eig = sym_eig(symmetrize(a));
  const double top = eig.values.maxCoeff();
  const double bottom = eig.values.minCoeff();
  if (!(bottom > 0.0) || top / bottom > max_condition) {
    const double floor = std::max(rel_floor * a.trace(), std::numeric_limits<double>::min());
    eig.values = eig.values.cwiseMax(floor);
    out.floored = true;
  }
  out.inverse = compose(eig.vectors, eig.values.cwiseInverse());
  return out;
}

/// a(rows, cols) for index lists.
inline Matrix block(const Matrix& a, const NodeSet& rows, const NodeSet& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  }
  return out;
}

inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

/// Spectral norm.
inline double norm2(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

inline int sign(double x) { return (x > 0.0) - (x < 0.0); }

/// Entrywise sign with |x| <= tol mapped to 0.
inline Matrix sign_pattern(const Matrix& a, double tol = kSupportTol) {
  return a.unaryExpr([tol](double x) { return std::abs(x) <= tol ? 0.0 : static_cast<double>(sign(x)); });
}

}  // namespace linalg
}  // namespace chaingraph
