#include "gncm/model.hpp"

#include "gncm/error.hpp"
#include "gncm/simplex.hpp"

#include <cmath>
#include <string>

namespace gncm {

Eigen::MatrixXd GncmState::abundances() const {
  const int R = endmembers();
  const int N = pixels();
  Eigen::MatrixXd A(R, N);
  Eigen::VectorXd a(R);
  for (int n = 0; n < N; ++n) {
    detail::stick_to_simplex(T.col(n), a);
    A.col(n) = a;
  }
  return A;
}

void GncmState::validate() const {
  const int R = endmembers();
  const int L = bands();
  const int N = pixels();
  if (R < 2) throw DomainError("state: need at least 2 endmembers");
  if (T.rows() != R - 1) throw DomainError("state: T must have R-1 rows");
  if (Sigma.rows() != R || Sigma.cols() != L) throw DomainError("state: Sigma must be R x L");
  if (static_cast<int>(z.size()) != N || Psi.size() != N)
    throw DomainError("state: z and Psi must have one entry per pixel");
  if (C.rows() != R || C.cols() < 1) throw DomainError("state: C must be R x K");
  if (!((T.array() > 0.0).all() && (T.array() < 1.0).all()))
    throw DomainError("state: stick coordinates outside (0,1)");
  if (!((M.array() > 0.0).all() && (M.array() < 1.0).all()))
    throw DomainError("state: endmember means outside (0,1)");
  if (!Sigma.allFinite() || (Sigma.array() <= 0.0).any())
    throw DomainError("state: endmember variances must be positive");
  if (!Psi.allFinite() || (Psi.array() < 0.0).any())
    throw DomainError("state: noise variances must be nonnegative");
  if (!C.allFinite() || (C.array() <= 0.0).any())
    throw DomainError("state: Dirichlet parameters must be positive");
  const int K = classes();
  for (int n = 0; n < N; ++n)
    if (z[n] < 1 || z[n] > K)
      throw DomainError("state: label at pixel " + std::to_string(n) + " outside 1..K");
}

VarianceField compute_variance_field(const GncmState& state) {
  if ((state.Sigma.array() == 0.0).all() && (state.Psi.array() == 0.0).all())
    throw DomainError("variance field: Sigma and Psi are both identically zero");
  const Eigen::MatrixXd A = state.abundances();
  VarianceField f;
  f.Omega = state.Sigma.transpose() * A.cwiseAbs2();
  f.Omega.rowwise() += state.Psi.transpose();
  if (!f.Omega.allFinite() || (f.Omega.array() <= 0.0).any())
    throw NumericError("variance field: nonpositive Omega entry (degenerate variances)");
  f.Lambda = f.Omega.cwiseInverse();
  return f;
}

double log_likelihood_pixel(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& a,
                            const Eigen::MatrixXd& M, const Eigen::MatrixXd& Sigma, double psi2) {
  const Eigen::Index L = y.size();
  if (M.rows() != L || M.cols() != a.size() || Sigma.rows() != a.size() || Sigma.cols() != L)
    throw DomainError("log_likelihood_pixel: dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index l = 0; l < L; ++l) {
    double omega = psi2;
    double pred = 0.0;
    for (Eigen::Index r = 0; r < a.size(); ++r) {
      omega += Sigma(r, l) * a[r] * a[r];
      pred += M(l, r) * a[r];
    }
    if (!(omega > 0.0)) throw NumericError("log_likelihood_pixel: nonpositive Omega");
    const double res = y[l] - pred;
    acc += std::log(omega) + res * res / omega;
  }
  return -0.5 * acc;
}

double log_likelihood_image(const HsiCube& cube, const GncmState& state) {
  if (cube.pixels() != state.pixels() || cube.bands() != state.bands())
    throw DomainError("log_likelihood_image: cube and state dimensions differ");
  const Eigen::MatrixXd A = state.abundances();
  double total = 0.0;
  for (int n = 0; n < state.pixels(); ++n)
    total += log_likelihood_pixel(cube.reflectance.col(n), A.col(n), state.M, state.Sigma, state.Psi[n]);
  return total;
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& M, const Eigen::MatrixXd& A) {
  if (M.cols() != A.rows()) throw DomainError("reconstruct: M and A disagree on R");
  return M * A;
}

Eigen::MatrixXd reconstruct(const GncmState& state) { return reconstruct(state.M, state.abundances()); }

} // namespace gncm
