#include "gncm/error.hpp"
#include "gncm/priors.hpp"
#include "gncm/rng.hpp"
#include "gncm/simplex.hpp"
#include "oracles.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <Eigen/LU>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace gncm;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}
} // namespace

TEST_CASE("Potts neighbourhoods are symmetric with 2-4 neighbours") {
  PottsField f(5, 4, 3, 1.5);
  for (int n = 0; n < f.size(); ++n) {
    const auto nb = f.neighbors(n);
    CHECK(nb.size() >= 2);
    CHECK(nb.size() <= 4);
    for (int m : nb) {
      const auto back = f.neighbors(m);
      CHECK(std::find(back.begin(), back.end(), n) != back.end());
      CHECK(f.color(m) != f.color(n));
    }
  }
  CHECK(f.neighbors(0).size() == 2);
  CHECK(f.neighbors(1).size() == 3);
  CHECK(f.neighbors(6).size() == 4);
}

TEST_CASE("Potts weights for an interior pixel surrounded by class 2") {
  std::vector<int> z(9, 1);
  z[1] = z[3] = z[5] = z[7] = 2;
  PottsField f(3, 3, 3, 1.5, z);
  const Eigen::VectorXd w = potts_conditional_weights(f, 4);
  CHECK(w[0] == 0.0);
  CHECK(w[1] == doctest::Approx(6.0));
  CHECK(w[2] == 0.0);
  PottsField flat(3, 3, 3, 0.0, z);
  CHECK(potts_conditional_weights(flat, 4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Potts weights match brute-force normalization of the field energy") {
  StreamRng rng(31);
  const int W = 6, H = 5, K = 3;
  std::vector<int> z(W * H);
  for (int& k : z) k = 1 + static_cast<int>(rng() % K);
  PottsField f(W, H, K, 0.8, z);
  for (int n = 0; n < f.size(); ++n) {
    std::vector<double> logp_brute;
    for (int k = 1; k <= K; ++k) {
      PottsField g = f;
      g.set_label(n, k);
      logp_brute.push_back(0.8 * static_cast<double>(g.monochromatic_edges()));
    }
    const Eigen::VectorXd w = potts_conditional_weights(f, n);
    const auto p = oracle::normalize_log(std::vector<double>(w.data(), w.data() + K));
    CHECK(oracle::max_abs_diff(p, oracle::normalize_log(logp_brute)) < 1e-14);
  }
}

TEST_CASE("Sum of Potts matches equals twice the monochromatic edges") {
  StreamRng rng(32);
  std::vector<int> z(7 * 6);
  for (int& k : z) k = 1 + static_cast<int>(rng() % 2);
  PottsField f(7, 6, 2, 1.0, z);
  double total = 0.0;
  for (int n = 0; n < f.size(); ++n) total += potts_conditional_weights(f, n)[f.label(n) - 1];
  CHECK(total == doctest::Approx(2.0 * static_cast<double>(f.monochromatic_edges())));
  CHECK(f.edge_count() == 6 * 6 + 5 * 7);
}

TEST_CASE("Potts rejects labels outside 1..K") {
  PottsField f(2, 2, 2, 1.0);
  CHECK_THROWS_AS(f.set_label(0, 0), DomainError);
  CHECK_THROWS_AS(f.set_label(0, 3), DomainError);
}

TEST_CASE("stick prior with unit parameters is the Jacobian of the stick map") {
  // Dir(1,...,1) is flat on the simplex; in t-space its density is
  // Gamma(R) prod_r t_r^(R-1-r).
  StreamRng rng(33);
  const Eigen::VectorXd c = Eigen::VectorXd::Ones(4);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd t(3);
    for (int r = 0; r < 3; ++r) t[r] = rng.uniform();
    const double expected = std::lgamma(4.0) + 2.0 * std::log(t[0]) + std::log(t[1]);
    worst = std::max(worst, std::abs(log_prior_stick(t, c) - expected));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("R=2 stick marginal is Be(c_2, c_1)") {
  // t_1 ~ Be(sum_{i>1} c_i, c_1): with c = [2, 3] that is Beta(3, 2).
  const Eigen::VectorXd c = vec({2.0, 3.0});
  const boost::math::beta_distribution<double> beta(3.0, 2.0);
  for (double t : {0.1, 0.3, 0.5, 0.77, 0.95}) {
    const double lp = log_prior_stick(vec({t}), c);
    CHECK(lp == doctest::Approx(std::log(boost::math::pdf(beta, t))).epsilon(1e-13));
  }
}

TEST_CASE("stick prior equals the Dirichlet density times the Jacobian determinant") {
  StreamRng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd c(3), t(2);
    for (int r = 0; r < 3; ++r) c[r] = 0.3 + 5.0 * rng.uniform();
    for (int r = 0; r < 2; ++r) t[r] = 0.05 + 0.9 * rng.uniform();
    const Eigen::VectorXd a = oracle::stick_loop(t);
    // Density on the first R-1 coordinates of a: |det d(a_1..a_{R-1})/dt|, by finite differences.
    Eigen::MatrixXd J(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int r = 0; r < 2; ++r) {
        auto f = [r](const Eigen::VectorXd& x) { return oracle::stick_loop(x)[r]; };
        J(r, i) = oracle::fd_gradient(f, t, 1e-5, 1.0)[i];
      }
    const double expected = oracle::log_dirichlet(a, c) + std::log(std::abs(J.determinant()));
    CHECK(std::abs(log_prior_stick(t, c) - expected) < 1e-8);
  }
}

TEST_CASE("mean prior") {
  const Eigen::VectorXd m = vec({0.2, 0.4, 0.6});
  CHECK(log_prior_mean_row(m, m, 0.01) == 0.0);
  CHECK(log_prior_mean_row(vec({0.2, 1.01, 0.6}), m, 0.01) == kNegInf);
  StreamRng rng(35);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(3), y(3);
    for (int r = 0; r < 3; ++r) {
      x[r] = rng.uniform();
      y[r] = rng.uniform();
    }
    double d2 = 0.0;
    for (int r = 0; r < 3; ++r) d2 += (x[r] - y[r]) * (x[r] - y[r]);
    CHECK(std::abs(log_prior_mean_row(x, y, 0.02) + d2 / 0.04) < 1e-14 * std::max(1.0, d2 / 0.04));
  }
}

TEST_CASE("Jeffreys and exponential priors") {
  CHECK(log_prior_variance(1.0) == 0.0);
  CHECK(log_prior_variance(std::exp(1.0)) == doctest::Approx(-1.0));
  CHECK(log_prior_variance(0.0) == kNegInf);
  CHECK(log_prior_variance(-1.0) == kNegInf);
  CHECK(log_prior_noise(0.0, 1e7) == 0.0);
  CHECK(log_prior_noise(1e-7, 1e7) == doctest::Approx(-1.0));
  CHECK(log_prior_noise(-1e-12, 1e7) == kNegInf);
}

TEST_CASE("Dirichlet hyperprior") {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK(log_hyperprior_dirichlet(ones, 1e-3, 0.5) == doctest::Approx(0.5 * std::lgamma(3.0)));
  CHECK(std::abs(log_hyperprior_dirichlet(vec({2.0, 7.0, 0.4}), 1e-300, 1e-300)) < 1e-290);
  CHECK(log_hyperprior_dirichlet(vec({1.0, 0.0, 1.0}), 1e-3, 1e-3) == kNegInf);
  StreamRng rng(36);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd c = vec({0.1 + 10 * rng.uniform(), 0.1 + 10 * rng.uniform(), 0.1 + 10 * rng.uniform()});
    const double ref = 0.3 * (boost::math::lgamma(c.sum()) - boost::math::lgamma(c[0]) - boost::math::lgamma(c[1]) -
                              boost::math::lgamma(c[2])) -
                       0.2 * c.sum() + 3 * 0.2;
    CHECK(std::abs(log_hyperprior_dirichlet(c, 0.2, 0.3) - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("hyperparameter validation") {
  HyperParams h;
  CHECK_NOTHROW(h.validate());
  h.R = 1;
  CHECK_THROWS_AS(h.validate(), DomainError);
  h = HyperParams{};
  h.alpha = 0.0;
  CHECK_THROWS_AS(h.validate(), DomainError);
}
