#include "gncm/priors.hpp"

#include "gncm/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gncm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void HyperParams::validate() const {
  if (!(lambda > 0 && alpha > 0 && gamma > 0 && epsilon2 > 0 && beta > 0))
    throw DomainError("hyperparameters lambda, alpha, gamma, epsilon2, beta must be positive");
  if (K < 1) throw DomainError("K must be at least 1");
  if (R < 2) throw DomainError("R must be at least 2");
}

PottsField::PottsField(int width, int height, int K, double beta)
    : PottsField(width, height, K, beta, std::vector<int>(static_cast<std::size_t>(width) * height, 1)) {}

PottsField::PottsField(int width, int height, int K, double beta, std::vector<int> labels)
    : width_(width), height_(height), K_(K), beta_(beta) {
  if (width <= 0 || height <= 0) throw DomainError("Potts grid must be non-empty");
  if (K < 1) throw DomainError("Potts field needs K >= 1");
  if (beta < 0) throw DomainError("Potts beta must be nonnegative");
  const int N = width * height;
  neighbors_.assign(N, {-1, -1, -1, -1});
  degree_.assign(N, 0);
  for (int n = 0; n < N; ++n) {
    const int x = n % width;
    const int y = n / width;
    auto& nb = neighbors_[n];
    int& d = degree_[n];
    if (y > 0) nb[d++] = n - width;
    if (x > 0) nb[d++] = n - 1;
    if (x + 1 < width) nb[d++] = n + 1;
    if (y + 1 < height) nb[d++] = n + width;
  }
  set_labels(std::move(labels));
}

void PottsField::set_label(int n, int k) {
  if (k < 1 || k > K_) throw DomainError("label " + std::to_string(k) + " outside 1..K");
  labels_[n] = k;
}

void PottsField::set_labels(std::vector<int> labels) {
  if (static_cast<int>(labels.size()) != size()) throw DomainError("label vector size mismatch");
  for (int k : labels)
    if (k < 1 || k > K_) throw DomainError("label " + std::to_string(k) + " outside 1..K");
  labels_ = std::move(labels);
}

long PottsField::monochromatic_edges() const {
  long count = 0;
  for (int n = 0; n < size(); ++n)
    for (int m : neighbors(n))
      if (m > n && labels_[m] == labels_[n]) ++count;
  return count;
}

long PottsField::edge_count() const {
  return static_cast<long>(width_ - 1) * height_ + static_cast<long>(height_ - 1) * width_;
}

Eigen::VectorXd potts_conditional_weights(const PottsField& field, int n) {
  if (n < 0 || n >= field.size()) throw DomainError("pixel index out of range");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(field.classes());
  for (int m : field.neighbors(n)) w[field.label(m) - 1] += field.beta();
  return w;
}

double log_prior_stick(const Eigen::Ref<const Eigen::VectorXd>& t, const Eigen::Ref<const Eigen::VectorXd>& c) {
  const Eigen::Index R = c.size();
  if (t.size() != R - 1) throw DomainError("log_prior_stick: t must have R-1 entries");
  if ((c.array() <= 0.0).any()) throw DomainError("log_prior_stick: Dirichlet parameters must be positive");
  for (Eigen::Index r = 0; r < R - 1; ++r)
    if (!(t[r] > 0.0 && t[r] < 1.0)) throw DomainError("log_prior_stick: t outside (0,1)");
  double lp = std::lgamma(c.sum());
  for (Eigen::Index r = 0; r < R; ++r) lp -= std::lgamma(c[r]);
  double tail = c.sum();
  for (Eigen::Index r = 0; r < R - 1; ++r) {
    tail -= c[r];
    lp += (tail - 1.0) * std::log(t[r]) + (c[r] - 1.0) * std::log1p(-t[r]);
  }
  return lp;
}

double log_prior_mean_row(const Eigen::Ref<const Eigen::VectorXd>& m, const Eigen::Ref<const Eigen::VectorXd>& m_tilde,
                          double epsilon2) {
  if (m.size() != m_tilde.size()) throw DomainError("log_prior_mean_row: size mismatch");
  if (!((m.array() > 0.0).all() && (m.array() < 1.0).all())) return kNegInf;
  return -(m - m_tilde).squaredNorm() / (2.0 * epsilon2);
}

double log_prior_variance(double sigma2) { return sigma2 > 0.0 ? -std::log(sigma2) : kNegInf; }

double log_prior_noise(double psi2, double lambda) { return psi2 >= 0.0 ? -lambda * psi2 : kNegInf; }

double log_hyperprior_dirichlet(const Eigen::Ref<const Eigen::VectorXd>& c, double alpha, double gamma) {
  if (!(c.array() > 0.0).all()) return kNegInf;
  double lg = std::lgamma(c.sum());
  for (Eigen::Index r = 0; r < c.size(); ++r) lg -= std::lgamma(c[r]);
  return gamma * lg - alpha * c.sum() + static_cast<double>(c.size()) * alpha;
}

} // namespace gncm
