#pragma once

#include "gncm/chmc.hpp"

#include <Eigen/Core>

namespace gncm {

/// Potential energy (negative log conditional density, constants dropped)
/// together with its gradient. The potential_* functions throw DomainError
/// outside the support; the CHMC targets return +inf there instead.
struct Energy {
  double value = 0.0;
  Eigen::VectorXd grad;
};

/// Everything a per-pixel conditional depends on. `c` holds the Dirichlet
/// parameters of the pixel's current class; `a` its current abundances
/// (used by the noise-variance conditional only).
struct PixelContext {
  Eigen::VectorXd y;
  const Eigen::MatrixXd& M;      // L x R
  const Eigen::MatrixXd& Sigma;  // R x L
  double psi2 = 0.0;
  Eigen::VectorXd c;
  Eigen::VectorXd a;
};

/// Everything a per-band conditional depends on (band l).
struct BandContext {
  Eigen::VectorXd y_row;         // N observations of band l
  const Eigen::MatrixXd& A;      // R x N abundances
  Eigen::VectorXd m_row;         // current M_l:   (used by the variance conditional)
  Eigen::VectorXd sigma_col;     // current Sigma_:l (used by the mean conditional)
  const Eigen::VectorXd& Psi;    // N noise variances
  Eigen::VectorXd m_tilde_row;   // prior mean of M_l:
  double epsilon2 = 1e-2;
};

/// Sufficient statistics of the abundances currently assigned to one class.
struct DirichletStats {
  long count = 0;
  Eigen::VectorXd sum_log_a;  // sum_n log a_rn over the class
};

DirichletStats dirichlet_stats(const Eigen::Ref<const Eigen::MatrixXd>& abundances_in_class);

/// U(t) = U1 + U2 + U3 with
///   U1 = 1/2 sum_l Lambda_l (y_l - (M a)_l)^2,
///   U2 = -sum_r [(sum_{i>r} c_i - 1) log t_r + (c_r - 1) log(1 - t_r)],
///   U3 = 1/2 sum_l log Omega_l,
/// gradient via dU/da * da/dt + dU2/dt.
Energy potential_stick(const Eigen::VectorXd& t, const PixelContext& ctx);

/// V(m) = 1/2 sum_n Lambda_ln (y_ln - m a_n)^2 + ||m - m_tilde||^2 / (2 eps2).
/// Lambda does not depend on M, so it is held fixed.
Energy potential_mean(const Eigen::VectorXd& m_row, const BandContext& ctx);

/// W(s) = 1/2 sum_n res_n^2 / Omega_n + sum_r log s_r + 1/2 sum_n log Omega_n,
/// with Omega_n = sum_r s_r a_rn^2 + psi2_n.
Energy potential_variance(const Eigen::VectorXd& sigma_col, const BandContext& ctx);

/// H(psi2) = U1 + U3 + lambda psi2. The U3 term contributes +1/2 sum_l Lambda_l
/// to the derivative (U3 grows with psi2).
Energy potential_noise(double psi2, const PixelContext& ctx, double lambda);

/// P(c) = (gamma + 1) n [ -log Gamma(sum c) + sum log Gamma(c_r) ]
///        + n (alpha sum c - R alpha) - sum_r (c_r - 1) sum_n log a_rn.
/// Throws DomainError for an empty class.
Energy potential_dirichlet(const Eigen::VectorXd& c, const DirichletStats& stats, double alpha, double gamma);
Energy potential_dirichlet(const Eigen::VectorXd& c, const Eigen::Ref<const Eigen::MatrixXd>& abundances_in_class,
                           double alpha, double gamma);

/// Negative log of the Dirichlet hyperprior alone (used for empty classes).
Energy potential_hyperprior(const Eigen::VectorXd& c, double alpha, double gamma);

// CHMC targets. Contexts are copied into the target; references inside them
// must outlive it.
TargetSpec make_stick_target(PixelContext ctx);
TargetSpec make_mean_target(BandContext ctx);
TargetSpec make_variance_target(BandContext ctx);
TargetSpec make_noise_target(PixelContext ctx, double lambda);
TargetSpec make_dirichlet_target(DirichletStats stats, double alpha, double gamma);
TargetSpec make_hyperprior_target(int R, double alpha, double gamma);

} // namespace gncm
