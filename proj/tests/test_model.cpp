#include "gncm/error.hpp"
#include "gncm/model.hpp"
#include "gncm/rng.hpp"
#include "gncm/simplex.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gncm;

namespace {

GncmState random_state(int L, int R, int N, StreamRng& rng) {
  GncmState s;
  s.T.resize(R - 1, N);
  for (int n = 0; n < N; ++n)
    for (int r = 0; r < R - 1; ++r) s.T(r, n) = 0.05 + 0.9 * rng.uniform();
  s.M.resize(L, R);
  for (int l = 0; l < L; ++l)
    for (int r = 0; r < R; ++r) s.M(l, r) = 0.1 + 0.8 * rng.uniform();
  s.Sigma.resize(R, L);
  for (int r = 0; r < R; ++r)
    for (int l = 0; l < L; ++l) s.Sigma(r, l) = 1e-3 * (0.5 + rng.uniform());
  s.Psi.resize(N);
  for (int n = 0; n < N; ++n) s.Psi[n] = 1e-4 * rng.uniform();
  s.z.assign(N, 1);
  s.C = Eigen::MatrixXd::Ones(R, 1);
  return s;
}

} // namespace

TEST_CASE("scalar variance field") {
  GncmState s;
  s.T.resize(1, 1);
  s.T(0, 0) = 0.5;  // a = [0.5, 0.5]
  s.M = Eigen::MatrixXd::Constant(1, 2, 0.5);
  s.Sigma = Eigen::MatrixXd::Constant(2, 1, 0.02);
  s.Psi = Eigen::VectorXd::Constant(1, 0.001);
  s.z = {1};
  s.C = Eigen::MatrixXd::Ones(2, 1);
  const VarianceField vf = compute_variance_field(s);
  // 0.02 * (0.25 + 0.25) + 0.001
  CHECK(vf.Omega(0, 0) == doctest::Approx(0.011).epsilon(1e-14));
  CHECK(vf.Lambda(0, 0) == doctest::Approx(1.0 / 0.011).epsilon(1e-14));
}

TEST_CASE("variance field matches a triple loop and Lambda * Omega = 1") {
  StreamRng rng(3);
  const GncmState s = random_state(3, 3, 3, rng);
  const VarianceField vf = compute_variance_field(s);
  const Eigen::MatrixXd A = s.abundances();
  for (int l = 0; l < 3; ++l)
    for (int n = 0; n < 3; ++n) {
      double w = s.Psi[n];
      for (int r = 0; r < 3; ++r) w += s.Sigma(r, l) * A(r, n) * A(r, n);
      CHECK(std::abs(vf.Omega(l, n) - w) < 1e-14);
      CHECK(std::abs(vf.Lambda(l, n) * vf.Omega(l, n) - 1.0) < 1e-14);
    }
}

TEST_CASE("zero noise reduces to the NCM variance") {
  StreamRng rng(4);
  GncmState s = random_state(4, 3, 5, rng);
  s.Psi.setZero();
  const Eigen::MatrixXd A = s.abundances();
  const Eigen::MatrixXd ncm = s.Sigma.transpose() * A.cwiseProduct(A);
  CHECK((compute_variance_field(s).Omega - ncm).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("all-zero variances are rejected") {
  StreamRng rng(4);
  GncmState s = random_state(2, 2, 2, rng);
  s.Psi.setZero();
  s.Sigma.setZero();
  CHECK_THROWS_AS(compute_variance_field(s), DomainError);
}

TEST_CASE("log_likelihood_pixel special cases") {
  Eigen::MatrixXd M(1, 2);
  M << 0.5, 0.5;
  const Eigen::MatrixXd Sigma = Eigen::MatrixXd::Constant(2, 1, 0.0);
  Eigen::VectorXd a(2);
  a << 0.5, 0.5;
  Eigen::VectorXd y(1);
  y << 0.6;
  CHECK(log_likelihood_pixel(y, a, M, Sigma, 0.01) == doctest::Approx(-0.5 * (std::log(0.01) + 1.0)));

  StreamRng rng(6);
  GncmState s = random_state(5, 3, 1, rng);
  const Eigen::VectorXd ab = s.abundances().col(0);
  const Eigen::VectorXd exact = s.M * ab;
  const VarianceField vf = compute_variance_field(s);
  CHECK(log_likelihood_pixel(exact, ab, s.M, s.Sigma, s.Psi[0]) ==
        doctest::Approx(-0.5 * vf.Omega.col(0).array().log().sum()).epsilon(1e-14));
}

TEST_CASE("log_likelihood_pixel equals a per-band Gaussian product") {
  StreamRng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    GncmState s = random_state(8, 3, 1, rng);
    const Eigen::VectorXd a = s.abundances().col(0);
    Eigen::VectorXd y(8);
    for (int l = 0; l < 8; ++l) y[l] = rng.uniform();
    double ref = 0.0;
    for (int l = 0; l < 8; ++l) {
      double mean = 0.0, var = s.Psi[0];
      for (int r = 0; r < 3; ++r) {
        mean += s.M(l, r) * a[r];
        var += s.Sigma(r, l) * a[r] * a[r];
      }
      ref += oracle::log_normal(y[l], mean, var) + 0.5 * std::log(2.0 * M_PI);
    }
    CHECK(std::abs(log_likelihood_pixel(y, a, s.M, s.Sigma, s.Psi[0]) - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("band permutation leaves the pixel likelihood unchanged") {
  StreamRng rng(9);
  GncmState s = random_state(6, 3, 1, rng);
  const Eigen::VectorXd a = s.abundances().col(0);
  Eigen::VectorXd y(6);
  for (int l = 0; l < 6; ++l) y[l] = rng.uniform();
  Eigen::VectorXi perm(6);
  perm << 3, 0, 5, 1, 4, 2;
  Eigen::VectorXd yp(6);
  Eigen::MatrixXd Mp(6, 3), Sp(3, 6);
  for (int l = 0; l < 6; ++l) {
    yp[l] = y[perm[l]];
    Mp.row(l) = s.M.row(perm[l]);
    Sp.col(l) = s.Sigma.col(perm[l]);
  }
  CHECK(log_likelihood_pixel(y, a, s.M, s.Sigma, s.Psi[0]) ==
        doctest::Approx(log_likelihood_pixel(yp, a, Mp, Sp, s.Psi[0])).epsilon(1e-13));
}

TEST_CASE("image likelihood is the sum over pixels") {
  StreamRng rng(10);
  GncmState s = random_state(4, 3, 4, rng);
  HsiCube cube;
  cube.width = 2;
  cube.height = 2;
  cube.reflectance = Eigen::MatrixXd::Random(4, 4).cwiseAbs();
  const Eigen::MatrixXd A = s.abundances();
  double sum = 0.0;
  for (int n = 0; n < 4; ++n) sum += log_likelihood_pixel(cube.reflectance.col(n), A.col(n), s.M, s.Sigma, s.Psi[n]);
  CHECK(std::abs(log_likelihood_image(cube, s) - sum) < 1e-12 * std::abs(sum));

  // Duplicating a pixel doubles its contribution.
  HsiCube two;
  two.width = 2;
  two.height = 1;
  two.reflectance = cube.reflectance.col(0).replicate(1, 2);
  GncmState s2 = s;
  s2.T = s.T.col(0).replicate(1, 2);
  s2.Psi = Eigen::VectorXd::Constant(2, s.Psi[0]);
  s2.z = {1, 1};
  const double one = log_likelihood_pixel(cube.reflectance.col(0), A.col(0), s.M, s.Sigma, s.Psi[0]);
  CHECK(log_likelihood_image(two, s2) == doctest::Approx(2.0 * one).epsilon(1e-14));
}

TEST_CASE("reconstruction hits vertices and stays in the hull") {
  StreamRng rng(12);
  GncmState s = random_state(5, 3, 50, rng);
  const Eigen::MatrixXd Y = reconstruct(s);
  const Eigen::MatrixXd A = s.abundances();
  for (int n = 0; n < 50; ++n) {
    // Convexity: the weights that produce Y are A itself, nonnegative and summing to one.
    CHECK((A.col(n).array() >= 0.0).all());
    CHECK(std::abs(A.col(n).sum() - 1.0) < 1e-14);
    CHECK((Y.col(n) - s.M * A.col(n)).norm() < 1e-14);
  }
  Eigen::MatrixXd vertex = Eigen::MatrixXd::Zero(3, 1);
  vertex(1, 0) = 1.0;
  CHECK((reconstruct(s.M, vertex).col(0) - s.M.col(1)).norm() == 0.0);
}

TEST_CASE("state validation catches invariant violations") {
  StreamRng rng(13);
  GncmState s = random_state(3, 3, 2, rng);
  CHECK_NOTHROW(s.validate());
  GncmState bad = s;
  bad.M(0, 0) = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = s;
  bad.z[1] = 2;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = s;
  bad.Psi[0] = -1e-9;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}
