#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace gncm {

/// Fixed hyperparameters of the hierarchical model.
struct HyperParams {
  double lambda = 1e7;     // exponential rate of the noise-variance prior
  double alpha = 1e-3;     // Dirichlet hyperprior constants
  double gamma = 1e-3;
  double epsilon2 = 1e-2;  // variance of the truncated Gaussian endmember-mean prior
  double beta = 1.5;       // Potts granularity
  int K = 1;
  int R = 3;

  void validate() const;
};

/// 4-neighbourhood label image on a width x height grid (row-major pixels).
class PottsField {
public:
  PottsField(int width, int height, int K, double beta);
  PottsField(int width, int height, int K, double beta, std::vector<int> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return width_ * height_; }
  int classes() const { return K_; }
  double beta() const { return beta_; }

  std::span<const int> neighbors(int n) const {
    return {neighbors_[n].data(), static_cast<std::size_t>(degree_[n])};
  }
  /// 0 for even (x + y), 1 otherwise. Pixels of one colour share no edge.
  int color(int n) const { return (n % width_ + n / width_) % 2; }

  const std::vector<int>& labels() const { return labels_; }
  int label(int n) const { return labels_[n]; }
  void set_label(int n, int k);
  void set_labels(std::vector<int> labels);

  /// Number of grid edges whose endpoints share a label.
  long monochromatic_edges() const;
  long edge_count() const;

private:
  int width_;
  int height_;
  int K_;
  double beta_;
  std::vector<int> labels_;
  std::vector<std::array<int, 4>> neighbors_;
  std::vector<int> degree_;
};

/// weight_k = beta * #{n' in nu(n) : z_n' = k}, k = 1..K (returned 0-indexed).
Eigen::VectorXd potts_conditional_weights(const PottsField& field, int n);

/// Log-density of stick coordinates under Dir(c) including the
/// log Gamma(sum c) - sum log Gamma(c_r) normalizer.
double log_prior_stick(const Eigen::Ref<const Eigen::VectorXd>& t, const Eigen::Ref<const Eigen::VectorXd>& c);

/// -||m - m_tilde||^2 / (2 eps2) on (0,1)^R, -inf outside.
double log_prior_mean_row(const Eigen::Ref<const Eigen::VectorXd>& m,
                          const Eigen::Ref<const Eigen::VectorXd>& m_tilde, double epsilon2);

/// Jeffreys: -log sigma2, -inf for sigma2 <= 0.
double log_prior_variance(double sigma2);

/// Exponential with log(lambda) dropped: -lambda psi2, -inf for psi2 < 0.
double log_prior_noise(double psi2, double lambda);

/// gamma [log Gamma(sum c) - sum log Gamma(c_r)] - alpha sum c + R alpha; -inf unless c > 0.
double log_hyperprior_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& c, double alpha, double gamma);

} // namespace gncm
