#pragma once

#include <Eigen/Core>

#include <vector>

namespace gncm {

/// sqrt( (1 / (N R)) sum_n ||a_n - a_hat_n||^2 ).
double armse_abundance(const Eigen::MatrixXd& A_true, const Eigen::MatrixXd& A_est);

/// Angle between two spectra, computed as 2 atan2(||u - v||, ||u + v||) on
/// the normalized vectors (accurate near 0 and pi). Throws on a zero vector.
double spectral_angle(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v);

struct EndmemberErrors {
  Eigen::VectorXd rmse;  // ||m_hat_r - m_r|| / sqrt(L)
  Eigen::VectorXd sam;   // radians
  double armse = 0.0;    // sqrt(mean rmse^2)
  double asam = 0.0;     // mean sam
};

EndmemberErrors endmember_errors(const Eigen::MatrixXd& M_true, const Eigen::MatrixXd& M_est);

struct ReconstructionErrors {
  double re = 0.0;   // sqrt( (1 / (N L)) sum_n ||y_hat_n - y_n||^2 )
  double sam = 0.0;  // mean spectral angle over pixels
};

ReconstructionErrors reconstruction_errors(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Y_hat);

/// Minimum-cost assignment on a square cost matrix: result[i] is the column
/// assigned to row i.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// perm[r] is the column of M_est matched to true endmember r, chosen to
/// minimize the total spectral angle.
std::vector<int> align_endmembers(const Eigen::MatrixXd& M_true, const Eigen::MatrixXd& M_est);

/// Reorders columns (or rows) so that entry r of the result is entry perm[r].
Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& X, const std::vector<int>& perm);
Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& X, const std::vector<int>& perm);

struct LabelAgreement {
  double accuracy = 0.0;
  std::vector<int> mapping;  // mapping[k-1] = true label matched to estimated label k
};

/// Fraction of pixels whose estimated label equals the true one after the best
/// relabeling of the estimate. Labels are 1-based.
LabelAgreement classification_accuracy(const std::vector<int>& z_true, const std::vector<int>& z_est, int K);

} // namespace gncm
