#pragma once

// Sparse-plus-low-rank penalized Gaussian likelihood
//
//   min  -log det(Theta) + tr(Theta S) + lambda (||Omega||_{1,off} + gamma ||L||_*)
//   s.t. Theta = Omega + L,  Theta > 0,  Omega >= delta I
//
// solved by an outer ADMM over (Theta, Omega, L, U) whose Omega-step is itself
// an inner ADMM over (Phi, Omega, V).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "chaingraph/linalg.hpp"

namespace chaingraph {

struct SolverConfig {
  double lambda = 0.1;
  double gamma = 2.0;
  double mu = 1.0;
  double rho = 1.0;
  double delta = 1e-4;
  double outer_tol = 1e-5;
  double inner_tol = 1e-6;
  int max_outer = 2000;
  int max_inner = 100;

  void validate() const {
    if (!(lambda >= 0.0)) throw InputError("lambda must be nonnegative");
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");
    if (!(mu > 0.0)) throw InputError("mu must be positive");
    if (!(rho > 0.0)) throw InputError("rho must be positive");
    if (!(delta > 0.0)) throw InputError("delta must be positive");
    if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) throw InputError("tolerances must be positive");
    if (max_outer < 1 || max_inner < 1) throw InputError("iteration limits must be positive");
  }
};

struct PrecisionDecomposition {
  Matrix theta;
  Matrix omega;    // inner Omega iterate, exact zeros off the support
  Matrix phi;      // companion iterate with Phi >= delta I
  Matrix lowrank;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  int inner_unconverged = 0;  // outer iterations whose Omega-step hit max_inner
  std::vector<double> primal_history;
};

// ---------------------------------------------------------------------------
// Proximal primitives

/// Symmetric PSD square root. Eigenvalues down to -1e-10 (relative) are
/// clamped at zero; anything more negative is rejected.
inline Matrix matrix_sqrt_spd(const Matrix& a) {
  linalg::require_symmetric(a, 1e-10, "matrix_sqrt_spd input");
  if (a.size() == 0) return a;
  linalg::SymEig eig = linalg::sym_eig(linalg::symmetrize(a));
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  if (eig.values(0) < -1e-10 * scale) throw InputError("matrix_sqrt_spd input is indefinite");
  return linalg::compose(eig.vectors, eig.values.cwiseMax(0.0).cwiseSqrt());
}

/// Closed-form Theta update: (R + sqrt(R^2 + 4 mu I)) / (2 mu) with
/// R = mu (Omega + L) - S - U.
inline Matrix theta_step(const Matrix& sigma_hat, const Matrix& omega, const Matrix& lowrank,
                         const Matrix& u, double mu) {
  const Matrix r = linalg::symmetrize(mu * (omega + lowrank) - sigma_hat - u);
  linalg::SymEig eig = linalg::sym_eig(r);
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double ri = eig.values(i);
    const double root = std::sqrt(ri * ri + 4.0 * mu);
    // the two forms are equal; pick the one without cancellation
    eig.values(i) = ri >= 0.0 ? (ri + root) / (2.0 * mu) : 2.0 / (root - ri);
  }
  return linalg::compose(eig.vectors, eig.values);
}

/// Off-diagonal soft-thresholding; the diagonal passes through.
inline Matrix soft_threshold_offdiag(const Matrix& a, double tau) {
  if (!(tau >= 0.0)) throw InputError("soft-threshold level must be nonnegative");
  linalg::require_square(a, "soft_threshold_offdiag input");
  Matrix out = a;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i == j) continue;
      const double v = a(i, j);
      const double shrunk = std::abs(v) - tau;
      out(i, j) = shrunk > 0.0 ? std::copysign(shrunk, v) : 0.0;
    }
  }
  return out;
}

/// Frobenius projection onto {X : X >= delta I}.
inline Matrix project_psd_floor(const Matrix& a, double delta) {
  if (a.size() == 0) return a;
  linalg::SymEig eig = linalg::sym_eig(linalg::symmetrize(a));
  return linalg::compose(eig.vectors, eig.values.cwiseMax(delta));
}

/// Singular value thresholding, the prox of tau * nuclear norm. Symmetric
/// inputs shrink |eigenvalues| and keep their signs; others use an SVD.
inline Matrix svt(const Matrix& a, double tau) {
  if (!(tau >= 0.0)) throw InputError("svt level must be nonnegative");
  if (a.size() == 0) return a;
  const double scale = std::max(1.0, linalg::max_abs(a));
  if (a.rows() == a.cols() && linalg::asymmetry(a) <= 1e-12 * scale) {
    linalg::SymEig eig = linalg::sym_eig(linalg::symmetrize(a));
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
      const double s = eig.values(i);
      eig.values(i) = std::copysign(std::max(std::abs(s) - tau, 0.0), s);
    }
    return linalg::compose(eig.vectors, eig.values);
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector shrunk = (svd.singularValues().array() - tau).max(0.0).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

// ---------------------------------------------------------------------------
// Omega-step: min_{Omega >= delta I} (lambda/mu) ||Omega||_{1,off} + 0.5 ||Omega - R2||_F^2

struct OmegaStepState {
  Matrix omega;
  Matrix phi;
  Matrix v;
};

struct OmegaStepResult {
  OmegaStepState state;
  int iterations = 0;
  bool converged = false;
};

/// Inner ADMM. Without a warm start it begins from Phi = (R2)_+, Omega = R2,
/// V = 0. Stops once ||Phi - Omega||_F and rho ||Omega^{l+1} - Omega^l||_F are
/// both within inner_tol (1 + ||R2||_F), or within `tol_cap` if that is smaller.
inline OmegaStepResult omega_step(const Matrix& r2, double lambda_over_mu, const SolverConfig& cfg,
                                  const OmegaStepState* warm = nullptr,
                                  double tol_cap = std::numeric_limits<double>::infinity()) {
  if (!(lambda_over_mu >= 0.0)) throw InputError("lambda/mu must be nonnegative");
  const double rho = cfg.rho;
  OmegaStepResult out;
  if (warm) {
    out.state = *warm;
  } else {
    out.state.omega = r2;
    out.state.phi = project_psd_floor(r2, cfg.delta);
    out.state.v = Matrix::Zero(r2.rows(), r2.cols());
  }
  OmegaStepState& s = out.state;
  const double tol = std::min(cfg.inner_tol * (1.0 + r2.norm()), tol_cap);
  for (int l = 1; l <= cfg.max_inner; ++l) {
    s.phi = project_psd_floor(s.omega - s.v / rho, cfg.delta);
    Matrix next = soft_threshold_offdiag(linalg::symmetrize(r2 + s.v + rho * s.phi), lambda_over_mu) /
                  (1.0 + rho);
    const double change = rho * (next - s.omega).norm();
    s.omega = std::move(next);
    s.v += rho * (s.phi - s.omega);
    out.iterations = l;
    if ((s.phi - s.omega).norm() <= tol && change <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

/// -log det(Theta) + tr(Theta S) + lambda (||Omega||_{1,off} + gamma ||L||_*)
/// at Theta = Omega + L; +inf when Omega + L is not positive definite.
inline double penalized_objective(const Matrix& sigma_hat, const Matrix& omega, const Matrix& lowrank,
                                  double lambda, double gamma) {
  const Matrix theta = linalg::symmetrize(omega + lowrank);
  const linalg::SymEig eig = linalg::sym_eig(theta);
  if (!(eig.values(0) > 0.0)) return std::numeric_limits<double>::infinity();
  const double logdet = eig.values.array().log().sum();
  const double offdiag_l1 = omega.cwiseAbs().sum() - omega.diagonal().cwiseAbs().sum();
  const double nuclear = linalg::sym_eig(linalg::symmetrize(lowrank)).values.cwiseAbs().sum();
  return -logdet + (theta.cwiseProduct(sigma_hat)).sum() + lambda * (offdiag_l1 + gamma * nuclear);
}

/// Runs the outer ADMM from Theta = Omega = I, L = U = 0.
inline PrecisionDecomposition fit_sparse_lowrank(const Matrix& sigma_hat, const SolverConfig& cfg) {
  cfg.validate();
  linalg::require_symmetric(sigma_hat, 1e-10, "sigma_hat");
  const Eigen::Index p = sigma_hat.rows();
  const Matrix sigma = linalg::symmetrize(sigma_hat);
  const double mu = cfg.mu;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  PrecisionDecomposition out;
  Matrix theta = Matrix::Identity(p, p);
  Matrix omega = Matrix::Identity(p, p);
  Matrix lowrank = Matrix::Zero(p, p);
  Matrix u = Matrix::Zero(p, p);
  std::optional<OmegaStepState> inner;

  for (int k = 1; k <= cfg.max_outer; ++k) {
    theta = theta_step(sigma, omega, lowrank, u, mu);
    const Matrix r2 = linalg::symmetrize(theta - lowrank + u / mu);
    // the inner solve must stay more accurate than the outer residuals, or its
    // error shows up as periodic spikes in them near convergence
    const double cap = inner ? 0.1 * out.primal_residual : kInf;
    OmegaStepResult step = omega_step(r2, cfg.lambda / mu, cfg, inner ? &*inner : nullptr, std::max(cap, 1e-13));
    if (!step.converged) ++out.inner_unconverged;
    inner = std::move(step.state);
    const Matrix& omega_next = inner->omega;
    Matrix lowrank_next = svt(linalg::symmetrize(theta - omega_next + u / mu), cfg.lambda * cfg.gamma / mu);

    const Matrix gap = theta - omega_next - lowrank_next;
    u = linalg::symmetrize(u + mu * gap);
    out.primal_residual = gap.norm();
    out.dual_residual = mu * ((omega_next + lowrank_next) - (omega + lowrank)).norm();
    out.primal_history.push_back(out.primal_residual);
    omega = omega_next;
    lowrank = std::move(lowrank_next);
    out.iterations = k;

    const double tol = cfg.outer_tol * (1.0 + theta.norm());
    if (out.primal_residual <= tol && out.dual_residual <= tol) {
      out.converged = true;
      break;
    }
  }
  out.theta = std::move(theta);
  out.omega = std::move(omega);
  out.phi = inner->phi;
  out.lowrank = std::move(lowrank);
  out.objective = penalized_objective(sigma, out.omega, out.lowrank, cfg.lambda, cfg.gamma);
  return out;
}

}  // namespace chaingraph
