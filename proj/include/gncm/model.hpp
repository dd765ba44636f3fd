#pragma once

#include "gncm/hsi_data.hpp"

#include <Eigen/Core>

#include <vector>

namespace gncm {

/// One full sample of the generalized normal compositional model:
///   y_n = sum_r a_rn s_rn + e_n,  s_rn ~ N(m_r, diag(sigma2_r)),  e_n ~ N(0, psi2_n I).
struct GncmState {
  Eigen::MatrixXd T;      // (R-1) x N stick coordinates, one column per pixel
  Eigen::MatrixXd M;      // L x R endmember means, entries in (0,1)
  Eigen::MatrixXd Sigma;  // R x L endmember variances
  std::vector<int> z;     // N labels in 1..K
  Eigen::VectorXd Psi;    // N noise variances
  Eigen::MatrixXd C;      // R x K Dirichlet parameters

  int endmembers() const { return static_cast<int>(M.cols()); }
  int bands() const { return static_cast<int>(M.rows()); }
  int pixels() const { return static_cast<int>(T.cols()); }
  int classes() const { return static_cast<int>(C.cols()); }

  /// Abundance matrix A (R x N) obtained column-wise from T.
  Eigen::MatrixXd abundances() const;

  /// Throws DomainError on any shape mismatch or invariant violation.
  void validate() const;
};

/// Omega = Sigma^T (A .* A) + 1_L (x) Psi and its elementwise inverse.
struct VarianceField {
  Eigen::MatrixXd Omega;   // L x N
  Eigen::MatrixXd Lambda;  // L x N
};

VarianceField compute_variance_field(const GncmState& state);

/// Per-pixel Gaussian log-likelihood with the (2 pi)^(-L/2) constant dropped:
///   -1/2 sum_l [ log Omega_l + (y_l - (M a)_l)^2 / Omega_l ].
double log_likelihood_pixel(const Eigen::Ref<const Eigen::VectorXd>& y,
                            const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::MatrixXd& M,
                            const Eigen::MatrixXd& Sigma, double psi2);

double log_likelihood_image(const HsiCube& cube, const GncmState& state);

/// M * A: pixel spectra predicted by the mean endmembers.
Eigen::MatrixXd reconstruct(const GncmState& state);
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& M, const Eigen::MatrixXd& A);

} // namespace gncm
