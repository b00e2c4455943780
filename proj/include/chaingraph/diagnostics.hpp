#pragma once

// Identifiability diagnostics for the sparse-plus-low-rank split
// Theta = Omega + L:
//   - transversality of the tangent spaces S(Omega) and T(L),
//   - separation of the nonzero eigenvalues of L,
//   - the incoherence value g_gamma(F_perp F^{-1}(sign(Omega), gamma U1 sign(D1) U1^T)),
//     where F and F_perp are the Fisher operator Theta^{-1} (.) Theta^{-1}
//     projected onto S x T and onto its orthogonal complement.
//
// Symmetric p x p matrices are handled as vec() columns of length p^2 under
// the trace inner product. F is only ever formed in tangent-basis
// coordinates, never as a p^2 x p^2 matrix.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "chaingraph/linalg.hpp"

namespace chaingraph {

struct TangentBases {
  int p = 0;
  Matrix s_basis;  // p^2 x dim S, orthonormal columns
  Matrix t_basis;  // p^2 x dim T, orthonormal columns
  Matrix u1;       // p x K eigenvectors of L for nonzero eigenvalues
  Vector d1;       // K nonzero eigenvalues
  int dim_s() const { return static_cast<int>(s_basis.cols()); }
  int dim_t() const { return static_cast<int>(t_basis.cols()); }
};

struct TransversalityReport {
  bool transversal = false;
  double min_principal_angle = 0.0;  // radians; pi/2 when either space is trivial
  int stacked_rank = 0;
};

struct EigenGapReport {
  bool distinct = true;
  double min_gap = std::numeric_limits<double>::infinity();
  Vector nonzero_eigenvalues;
};

enum class SignConvention {
  kFull,         // sign(Omega) entrywise including the diagonal
  kOffDiagonal,  // diagonal of sign(Omega) set to zero
};

struct IncoherenceReport {
  double g_value = 0.0;
  bool satisfied = false;
  double condition_of_f = 0.0;
  Matrix omega_part;    // S-perp component of F_perp F^{-1}(...)
  Matrix lowrank_part;  // T-perp component
};

namespace diag_detail {

inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Vector& v, int p) { return Eigen::Map<const Matrix>(v.data(), p, p); }

/// Orthonormal basis of the column span of `gen` (via its Gram matrix).
inline Matrix orthonormal_span(const Matrix& gen, double rel_tol = 1e-10) {
  if (gen.cols() == 0) return Matrix(gen.rows(), 0);
  const linalg::SymEig eig = linalg::sym_eig(gen.transpose() * gen);
  const double top = eig.values.maxCoeff();
  std::vector<int> keep;
  for (Eigen::Index i = eig.values.size() - 1; i >= 0; --i) {
    if (eig.values(i) > rel_tol * top) keep.push_back(static_cast<int>(i));
  }
  Matrix basis(gen.rows(), keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    basis.col(k) = gen * eig.vectors.col(keep[k]) / std::sqrt(eig.values(keep[k]));
  }
  // one Gram-Schmidt sweep tidies round-off
  Eigen::HouseholderQR<Matrix> qr(basis);
  Matrix q = qr.householderQ() * Matrix::Identity(basis.rows(), basis.cols());
  return q;
}

}  // namespace diag_detail

/// Default rank tolerance: 1e-8 times the largest |eigenvalue| of L.
inline double default_rank_tol(const Matrix& lowrank) {
  if (lowrank.size() == 0) return 0.0;
  return 1e-8 * linalg::sym_eig(linalg::symmetrize(lowrank)).values.cwiseAbs().maxCoeff();
}

/// Bases of S(Omega) (symmetric matrices supported on supp(Omega)) and
/// T(L) = {U1 Y + Y^T U1^T}. `omega_support` is read with |entry| > kSupportTol.
inline TangentBases tangent_bases(const Matrix& omega_support, const Matrix& lowrank,
                                  std::optional<double> rank_tol = std::nullopt) {
  linalg::require_square(omega_support, "omega");
  linalg::require_symmetric(lowrank, 1e-10, "lowrank");
  const int p = static_cast<int>(omega_support.rows());
  if (lowrank.rows() != p) throw InputError("omega and lowrank differ in size");
  TangentBases out;
  out.p = p;

  std::vector<Vector> s_cols;
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i <= j; ++i) {
      if (std::abs(omega_support(i, j)) <= kSupportTol && std::abs(omega_support(j, i)) <= kSupportTol) {
        continue;
      }
      Matrix e = Matrix::Zero(p, p);
      if (i == j) {
        e(i, i) = 1.0;
      } else {
        e(i, j) = e(j, i) = 1.0 / std::sqrt(2.0);
      }
      s_cols.push_back(diag_detail::vec(e));
    }
  }
  out.s_basis.resize(static_cast<Eigen::Index>(p) * p, s_cols.size());
  for (std::size_t k = 0; k < s_cols.size(); ++k) out.s_basis.col(k) = s_cols[k];

  const double tol = rank_tol.value_or(default_rank_tol(lowrank));
  const linalg::SymEig eig = linalg::sym_eig(linalg::symmetrize(lowrank));
  std::vector<int> nonzero;
  for (int i = 0; i < p; ++i) {
    if (std::abs(eig.values(i)) > tol) nonzero.push_back(i);
  }
  const int k_rank = static_cast<int>(nonzero.size());
  out.u1.resize(p, k_rank);
  out.d1.resize(k_rank);
  for (int k = 0; k < k_rank; ++k) {
    out.u1.col(k) = eig.vectors.col(nonzero[k]);
    out.d1(k) = eig.values(nonzero[k]);
  }

  // generators u_a e_b^T + e_b u_a^T over all a < K, b < p
  Matrix gen(static_cast<Eigen::Index>(p) * p, static_cast<Eigen::Index>(k_rank) * p);
  for (int a = 0; a < k_rank; ++a) {
    for (int b = 0; b < p; ++b) {
      Matrix g = Matrix::Zero(p, p);
      g.col(b) += out.u1.col(a);
      g.row(b) += out.u1.col(a).transpose();
      gen.col(static_cast<Eigen::Index>(a) * p + b) = diag_detail::vec(g);
    }
  }
  out.t_basis = diag_detail::orthonormal_span(gen);
  return out;
}

/// S and T meet only at zero iff no principal angle between them vanishes.
/// The sines of the angles are the singular values of (I - P_S) T, which
/// avoids the cancellation in 1 - cos near an intersection.
inline TransversalityReport check_transversality(const TangentBases& bases, double tol = 1e-8) {
  TransversalityReport out;
  const int ds = bases.dim_s();
  const int dt = bases.dim_t();
  if (ds == 0 || dt == 0) {
    out.transversal = true;
    out.min_principal_angle = M_PI / 2.0;
    out.stacked_rank = ds + dt;
    return out;
  }
  const Matrix residual = bases.t_basis - bases.s_basis * (bases.s_basis.transpose() * bases.t_basis);
  Eigen::HouseholderQR<Matrix> qr(residual);
  const Matrix r = qr.matrixQR().topRows(std::min<Eigen::Index>(dt, residual.rows()))
                       .triangularView<Eigen::Upper>();
  const Vector sines = Eigen::JacobiSVD<Matrix>(r).singularValues();
  int independent = 0;
  for (Eigen::Index i = 0; i < sines.size(); ++i) independent += sines(i) > tol;
  out.stacked_rank = ds + independent;
  out.transversal = independent == dt;
  out.min_principal_angle = std::asin(std::clamp(sines.minCoeff(), 0.0, 1.0));
  return out;
}

/// The K eigenvalues of L with |value| > rank_tol must be pairwise more
/// than gap_tol apart.
inline EigenGapReport check_distinct_eigenvalues(const Matrix& lowrank, std::optional<double> rank_tol = std::nullopt,
                                                 double gap_tol = 1e-6) {
  linalg::require_symmetric(lowrank, 1e-10, "lowrank");
  EigenGapReport out;
  const double tol = rank_tol.value_or(default_rank_tol(lowrank));
  const Vector values = linalg::sym_eig(linalg::symmetrize(lowrank)).values;  // ascending
  std::vector<double> kept;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values(i)) > tol) kept.push_back(values(i));
  }
  out.nonzero_eigenvalues = Eigen::Map<Vector>(kept.data(), kept.size());
  for (std::size_t i = 1; i < kept.size(); ++i) out.min_gap = std::min(out.min_gap, kept[i] - kept[i - 1]);
  out.distinct = !(out.min_gap <= gap_tol);
  return out;
}

/// M -> Theta^{-1} M Theta^{-1}, the Kronecker form (Theta^{-1} (x) Theta^{-1}) vec(M).
class FisherOperator {
 public:
  explicit FisherOperator(const Matrix& theta) : theta_inv_(linalg::inv_spd(theta)) {}

  Matrix operator()(const Matrix& m) const { return theta_inv_ * m * theta_inv_; }

  Vector apply_vec(const Vector& v) const {
    const int p = static_cast<int>(theta_inv_.rows());
    return diag_detail::vec((*this)(diag_detail::unvec(v, p)));
  }

  const Matrix& theta_inverse() const { return theta_inv_; }

 private:
  Matrix theta_inv_;
};

inline FisherOperator fisher_operator(const Matrix& theta) { return FisherOperator(theta); }

/// Coordinates of F on S x T in the orthonormal bases: W^T I W with W = [S T].
inline Matrix fisher_in_tangent_coordinates(const TangentBases& bases, const FisherOperator& fisher) {
  Matrix w(bases.s_basis.rows(), bases.dim_s() + bases.dim_t());
  w << bases.s_basis, bases.t_basis;
  Matrix iw(w.rows(), w.cols());
  for (Eigen::Index c = 0; c < w.cols(); ++c) iw.col(c) = fisher.apply_vec(w.col(c));
  return linalg::symmetrize(w.transpose() * iw);
}

/// Incoherence value at Fisher point `theta` with tangent spaces built from
/// (omega support, lowrank).
inline IncoherenceReport check_incoherence(const Matrix& omega, const Matrix& lowrank, const Matrix& theta,
                                           double gamma, std::optional<double> rank_tol = std::nullopt,
                                           SignConvention convention = SignConvention::kFull) {
  if (!(gamma > 0.0)) throw InputError("gamma must be positive");
  const int p = static_cast<int>(omega.rows());
  const TangentBases bases = tangent_bases(omega, lowrank, rank_tol);
  const FisherOperator fisher(theta);
  const Matrix f = fisher_in_tangent_coordinates(bases, fisher);

  IncoherenceReport out;
  const int ds = bases.dim_s();
  const int dt = bases.dim_t();
  const Vector ev = linalg::sym_eig(f).values;
  out.condition_of_f = ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0) : std::numeric_limits<double>::infinity();
  if (!(out.condition_of_f <= 1e10)) {
    throw NumericalError("F is singular on S x T (condition " + std::to_string(out.condition_of_f) +
                         "); the tangent spaces are not transversal");
  }

  Matrix sign_omega = linalg::sign_pattern(omega);
  if (convention == SignConvention::kOffDiagonal) sign_omega.diagonal().setZero();
  const Matrix lowrank_input = gamma * bases.u1 * bases.d1.unaryExpr([](double d) {
    return static_cast<double>(linalg::sign(d));
  }).asDiagonal() * bases.u1.transpose();

  Vector rhs(ds + dt);
  rhs << bases.s_basis.transpose() * diag_detail::vec(sign_omega),
      bases.t_basis.transpose() * diag_detail::vec(lowrank_input);
  const Vector coords = Eigen::LLT<Matrix>(f).solve(rhs);

  const Vector delta = bases.s_basis * coords.head(ds) + bases.t_basis * coords.tail(dt);
  const Vector image = fisher.apply_vec(delta);
  const Vector s_perp = image - bases.s_basis * (bases.s_basis.transpose() * image);
  const Vector t_perp = image - bases.t_basis * (bases.t_basis.transpose() * image);
  out.omega_part = diag_detail::unvec(s_perp, p);
  out.lowrank_part = diag_detail::unvec(t_perp, p);
  out.g_value = std::max(linalg::max_abs(out.omega_part), linalg::norm2(out.lowrank_part) / gamma);
  out.satisfied = out.g_value < 1.0;
  return out;
}

/// Incoherence at Theta = omega + lowrank.
inline IncoherenceReport check_incoherence(const Matrix& omega, const Matrix& lowrank, double gamma,
                                           std::optional<double> rank_tol = std::nullopt,
                                           SignConvention convention = SignConvention::kFull) {
  return check_incoherence(omega, lowrank, linalg::symmetrize(omega + lowrank), gamma, rank_tol, convention);
}

}  // namespace chaingraph
