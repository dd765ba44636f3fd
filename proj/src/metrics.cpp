#include "gncm/metrics.hpp"

#include "gncm/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gncm {

double armse_abundance(const Eigen::MatrixXd& A_true, const Eigen::MatrixXd& A_est) {
  if (A_true.rows() != A_est.rows() || A_true.cols() != A_est.cols())
    throw DomainError("armse_abundance: shape mismatch");
  if (A_true.size() == 0) throw DomainError("armse_abundance: empty input");
  return std::sqrt((A_true - A_est).squaredNorm() / static_cast<double>(A_true.size()));
}

double spectral_angle(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) throw DomainError("spectral_angle: length mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw DomainError("spectral_angle: zero-norm spectrum");
  const Eigen::VectorXd a = u / nu;
  const Eigen::VectorXd b = v / nv;
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

EndmemberErrors endmember_errors(const Eigen::MatrixXd& M_true, const Eigen::MatrixXd& M_est) {
  if (M_true.rows() != M_est.rows() || M_true.cols() != M_est.cols())
    throw DomainError("endmember_errors: shape mismatch (" + std::to_string(M_true.cols()) + " vs " +
                      std::to_string(M_est.cols()) + " endmembers)");
  const auto L = static_cast<double>(M_true.rows());
  const auto R = M_true.cols();
  EndmemberErrors e;
  e.rmse.resize(R);
  e.sam.resize(R);
  for (Eigen::Index r = 0; r < R; ++r) {
    e.rmse[r] = (M_est.col(r) - M_true.col(r)).norm() / std::sqrt(L);
    e.sam[r] = spectral_angle(M_est.col(r), M_true.col(r));
  }
  e.armse = std::sqrt(e.rmse.squaredNorm() / static_cast<double>(R));
  e.asam = e.sam.mean();
  return e;
}

ReconstructionErrors reconstruction_errors(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Y_hat) {
  if (Y.rows() != Y_hat.rows() || Y.cols() != Y_hat.cols())
    throw DomainError("reconstruction_errors: shape mismatch");
  if (Y.size() == 0) throw DomainError("reconstruction_errors: empty input");
  ReconstructionErrors e;
  e.re = std::sqrt((Y_hat - Y).squaredNorm() / static_cast<double>(Y.size()));
  double total = 0.0;
  for (Eigen::Index n = 0; n < Y.cols(); ++n) total += spectral_angle(Y_hat.col(n), Y.col(n));
  e.sam = total / static_cast<double>(Y.cols());
  return e;
}

// O(n^3) Hungarian algorithm with row/column potentials (1-based internally).
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DomainError("solve_assignment: cost matrix must be square");
  if (!cost.allFinite()) throw DomainError("solve_assignment: non-finite cost");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(n);
  for (int j = 1; j <= n; ++j) result[match[j] - 1] = j - 1;
  return result;
}

std::vector<int> align_endmembers(const Eigen::MatrixXd& M_true, const Eigen::MatrixXd& M_est) {
  if (M_true.rows() != M_est.rows() || M_true.cols() != M_est.cols())
    throw DomainError("align_endmembers: shape mismatch (" + std::to_string(M_true.cols()) + " vs " +
                      std::to_string(M_est.cols()) + " endmembers)");
  const auto R = M_true.cols();
  Eigen::MatrixXd cost(R, R);
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index j = 0; j < R; ++j) cost(i, j) = spectral_angle(M_true.col(i), M_est.col(j));
  return solve_assignment(cost);
}

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& X, const std::vector<int>& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != X.cols()) throw DomainError("permute_columns: size mismatch");
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (std::size_t r = 0; r < perm.size(); ++r) out.col(static_cast<Eigen::Index>(r)) = X.col(perm[r]);
  return out;
}

Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& X, const std::vector<int>& perm) {
  if (static_cast<Eigen::Index>(perm.size()) != X.rows()) throw DomainError("permute_rows: size mismatch");
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (std::size_t r = 0; r < perm.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(perm[r]);
  return out;
}

LabelAgreement classification_accuracy(const std::vector<int>& z_true, const std::vector<int>& z_est, int K) {
  if (z_true.size() != z_est.size()) throw DomainError("classification_accuracy: label maps differ in length");
  if (z_true.empty()) throw DomainError("classification_accuracy: empty label map");
  if (K < 1) throw DomainError("classification_accuracy: K must be positive");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(K, K);  // (estimated, true)
  for (std::size_t n = 0; n < z_true.size(); ++n) {
    if (z_true[n] < 1 || z_true[n] > K || z_est[n] < 1 || z_est[n] > K)
      throw DomainError("classification_accuracy: label outside 1..K");
    counts(z_est[n] - 1, z_true[n] - 1) += 1.0;
  }
  const auto assign = solve_assignment(-counts);
  LabelAgreement out;
  double hits = 0.0;
  for (int k = 0; k < K; ++k) {
    out.mapping.push_back(assign[k] + 1);
    hits += counts(k, assign[k]);
  }
  out.accuracy = hits / static_cast<double>(z_true.size());
  return out;
}

} // namespace gncm
