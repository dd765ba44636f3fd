#pragma once

// Randomized gradient and density-consistency checks for the five conditional
// potentials. Each returns the worst error observed.

#include "gncm/conditionals.hpp"
#include "gncm/rng.hpp"
#include "oracles.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <vector>

namespace checks {

using gncm::StreamRng;

struct PixelInstance {
  Eigen::MatrixXd M, Sigma;
  Eigen::VectorXd y, c, a;
  double psi2 = 0.0;
  gncm::PixelContext ctx() const { return gncm::PixelContext{y, M, Sigma, psi2, c, a}; }
};

struct BandInstance {
  Eigen::MatrixXd A;
  Eigen::VectorXd y, m, s, Psi, m_tilde;
  double eps2 = 1e-2;
  gncm::BandContext ctx() const { return gncm::BandContext{y, A, m, s, Psi, m_tilde, eps2}; }
};

inline Eigen::VectorXd uniform_vec(int n, double lo, double hi, StreamRng& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * rng.uniform();
  return v;
}

inline Eigen::VectorXd random_simplex(int R, StreamRng& rng) {
  Eigen::VectorXd a(R);
  for (int r = 0; r < R; ++r) a[r] = rng.gamma(2.0);
  return a / a.sum();
}

inline PixelInstance random_pixel(int L, int R, StreamRng& rng) {
  PixelInstance p;
  p.M.resize(L, R);
  for (int r = 0; r < R; ++r) p.M.col(r) = uniform_vec(L, 0.05, 0.95, rng);
  p.Sigma.resize(R, L);
  for (int l = 0; l < L; ++l) p.Sigma.col(l) = uniform_vec(R, 1e-3, 2e-2, rng);
  p.a = random_simplex(R, rng);
  p.y = p.M * p.a + uniform_vec(L, -0.1, 0.1, rng);
  p.c = uniform_vec(R, 0.5, 6.0, rng);
  p.psi2 = 1e-3 * rng.uniform();
  return p;
}

inline BandInstance random_band(int N, int R, StreamRng& rng) {
  BandInstance b;
  b.A.resize(R, N);
  for (int n = 0; n < N; ++n) b.A.col(n) = random_simplex(R, rng);
  b.m = uniform_vec(R, 0.05, 0.95, rng);
  b.s = uniform_vec(R, 1e-3, 2e-2, rng);
  b.Psi = uniform_vec(N, 0.0, 1e-3, rng);
  b.m_tilde = uniform_vec(R, 0.05, 0.95, rng);
  b.y = b.A.transpose() * b.m + uniform_vec(N, -0.1, 0.1, rng);
  b.eps2 = 0.005 + 0.05 * rng.uniform();
  return b;
}

// ---- gradients vs finite differences ---------------------------------------

inline double gradient_error_stick(int points, std::uint64_t seed) {
  StreamRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const PixelInstance p = random_pixel(5, 3, rng);
    const gncm::PixelContext ctx = p.ctx();
    const Eigen::VectorXd t = uniform_vec(2, 0.05, 0.95, rng);
    auto f = [&](const Eigen::VectorXd& x) { return gncm::potential_stick(x, ctx).value; };
    worst = std::max(worst, oracle::relative_error(gncm::potential_stick(t, ctx).grad, oracle::fd_gradient(f, t)));
  }
  return worst;
}

inline double gradient_error_mean(int points, std::uint64_t seed) {
  StreamRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const BandInstance b = random_band(6, 3, rng);
    const gncm::BandContext ctx = b.ctx();
    const Eigen::VectorXd m = uniform_vec(3, 0.05, 0.95, rng);
    auto f = [&](const Eigen::VectorXd& x) { return gncm::potential_mean(x, ctx).value; };
    worst = std::max(worst, oracle::relative_error(gncm::potential_mean(m, ctx).grad, oracle::fd_gradient(f, m)));
  }
  return worst;
}

inline double gradient_error_variance(int points, std::uint64_t seed) {
  StreamRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const BandInstance b = random_band(6, 3, rng);
    const gncm::BandContext ctx = b.ctx();
    const Eigen::VectorXd s = uniform_vec(3, 1e-4, 5e-2, rng);
    auto f = [&](const Eigen::VectorXd& x) { return gncm::potential_variance(x, ctx).value; };
    worst = std::max(worst,
                     oracle::relative_error(gncm::potential_variance(s, ctx).grad, oracle::fd_gradient(f, s, 1e-4, 0.0)));
  }
  return worst;
}

inline double gradient_error_noise(int points, std::uint64_t seed) {
  StreamRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const PixelInstance p = random_pixel(5, 3, rng);
    const gncm::PixelContext ctx = p.ctx();
    const double lambda = 100.0 * rng.uniform();
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, 1e-5 + 1e-2 * rng.uniform());
    auto f = [&](const Eigen::VectorXd& x) { return gncm::potential_noise(x[0], ctx, lambda).value; };
    worst = std::max(worst, oracle::relative_error(gncm::potential_noise(q[0], ctx, lambda).grad,
                                                   oracle::fd_gradient(f, q, 1e-4, 0.0)));
  }
  return worst;
}

inline double gradient_error_dirichlet(int points, std::uint64_t seed) {
  StreamRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    Eigen::MatrixXd A(3, 7);
    for (int n = 0; n < 7; ++n) A.col(n) = random_simplex(3, rng);
    const Eigen::VectorXd c = uniform_vec(3, 0.2, 20.0, rng);
    const double alpha = 0.1 * rng.uniform(), gamma = 0.5 * rng.uniform();
    auto f = [&](const Eigen::VectorXd& x) { return gncm::potential_dirichlet(x, A, alpha, gamma).value; };
    worst = std::max(worst, oracle::relative_error(gncm::potential_dirichlet(c, A, alpha, gamma).grad,
                                                   oracle::fd_gradient(f, c, 1e-4, 0.0)));
  }
  return worst;
}

// ---- exp(-potential) vs the conditional density, both normalized on a grid ---

inline std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * (i + 0.5) / n;
  return g;
}

// Gaussian log-density of one observation, with the variance as an explicit sum.
inline double band_loglik(double y, const Eigen::VectorXd& m_row, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& s_col, double psi2) {
  double mean = 0.0, var = psi2;
  for (Eigen::Index r = 0; r < a.size(); ++r) {
    mean += m_row[r] * a[r];
    var += s_col[r] * a[r] * a[r];
  }
  return oracle::log_normal(y, mean, var);
}

inline double density_error_stick(std::uint64_t seed) {
  StreamRng rng(seed);
  const PixelInstance p = random_pixel(3, 3, rng);
  const gncm::PixelContext ctx = p.ctx();
  std::vector<double> lp_pot, lp_ref;
  for (double t1 : grid(0.0, 1.0, 60))
    for (double t2 : grid(0.0, 1.0, 60)) {
      Eigen::VectorXd t(2);
      t << t1, t2;
      lp_pot.push_back(-gncm::potential_stick(t, ctx).value);
      const Eigen::VectorXd a = oracle::stick_loop(t);
      double ll = 0.0;
      for (int l = 0; l < 3; ++l) ll += band_loglik(p.y[l], p.M.row(l).transpose(), a, p.Sigma.col(l), p.psi2);
      // Dirichlet on (a_1, a_2) times |d(a_1, a_2)/d(t_1, t_2)| = t_1.
      lp_ref.push_back(ll + oracle::log_dirichlet(a, p.c) + std::log(t1));
    }
  return oracle::max_abs_diff(oracle::normalize_log(lp_pot), oracle::normalize_log(lp_ref));
}

inline double density_error_mean(std::uint64_t seed) {
  StreamRng rng(seed);
  BandInstance b = random_band(3, 2, rng);
  b.eps2 = 0.05;
  const gncm::BandContext ctx = b.ctx();
  std::vector<double> lp_pot, lp_ref;
  for (double m1 : grid(0.0, 1.0, 60))
    for (double m2 : grid(0.0, 1.0, 60)) {
      Eigen::VectorXd m(2);
      m << m1, m2;
      lp_pot.push_back(-gncm::potential_mean(m, ctx).value);
      double ll = 0.0;
      for (int n = 0; n < 3; ++n) ll += band_loglik(b.y[n], m, b.A.col(n), b.s, b.Psi[n]);
      const double prior = -((m1 - b.m_tilde[0]) * (m1 - b.m_tilde[0]) + (m2 - b.m_tilde[1]) * (m2 - b.m_tilde[1])) /
                           (2.0 * b.eps2);
      lp_ref.push_back(ll + prior);
    }
  return oracle::max_abs_diff(oracle::normalize_log(lp_pot), oracle::normalize_log(lp_ref));
}

inline double density_error_variance(std::uint64_t seed) {
  StreamRng rng(seed);
  const BandInstance b = random_band(3, 2, rng);
  const gncm::BandContext ctx = b.ctx();
  std::vector<double> lp_pot, lp_ref;
  for (double s1 : grid(1e-3, 0.1, 60))
    for (double s2 : grid(1e-3, 0.1, 60)) {
      Eigen::VectorXd s(2);
      s << s1, s2;
      lp_pot.push_back(-gncm::potential_variance(s, ctx).value);
      double ll = 0.0;
      for (int n = 0; n < 3; ++n) ll += band_loglik(b.y[n], b.m, b.A.col(n), s, b.Psi[n]);
      lp_ref.push_back(ll - std::log(s1) - std::log(s2));
    }
  return oracle::max_abs_diff(oracle::normalize_log(lp_pot), oracle::normalize_log(lp_ref));
}

inline double density_error_noise(std::uint64_t seed) {
  StreamRng rng(seed);
  const PixelInstance p = random_pixel(3, 3, rng);
  const gncm::PixelContext ctx = p.ctx();
  const double lambda = 50.0;
  std::vector<double> lp_pot, lp_ref;
  for (double psi2 : grid(0.0, 0.05, 2000)) {
    lp_pot.push_back(-gncm::potential_noise(psi2, ctx, lambda).value);
    double ll = 0.0;
    for (int l = 0; l < 3; ++l) ll += band_loglik(p.y[l], p.M.row(l).transpose(), p.a, p.Sigma.col(l), psi2);
    lp_ref.push_back(ll + std::log(lambda) - lambda * psi2);
  }
  return oracle::max_abs_diff(oracle::normalize_log(lp_pot), oracle::normalize_log(lp_ref));
}

inline double density_error_dirichlet(std::uint64_t seed) {
  StreamRng rng(seed);
  Eigen::MatrixXd A(2, 3);
  for (int n = 0; n < 3; ++n) A.col(n) = random_simplex(2, rng);
  const double alpha = 0.05, gamma = 0.3;
  std::vector<double> lp_pot, lp_ref;
  for (double c1 : grid(0.05, 12.0, 60))
    for (double c2 : grid(0.05, 12.0, 60)) {
      Eigen::VectorXd c(2);
      c << c1, c2;
      lp_pot.push_back(-gncm::potential_dirichlet(c, A, alpha, gamma).value);
      double lp = 0.0;
      for (int n = 0; n < 3; ++n) {
        const double lg = boost::math::lgamma(c1 + c2) - boost::math::lgamma(c1) - boost::math::lgamma(c2);
        lp += (gamma + 1.0) * lg - alpha * (c1 + c2) + 2.0 * alpha + (c1 - 1.0) * std::log(A(0, n)) +
              (c2 - 1.0) * std::log(A(1, n));
      }
      lp_ref.push_back(lp);
    }
  return oracle::max_abs_diff(oracle::normalize_log(lp_pot), oracle::normalize_log(lp_ref));
}

} // namespace checks
