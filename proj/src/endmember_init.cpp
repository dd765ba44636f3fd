#include "gncm/endmember_init.hpp"

#include "gncm/error.hpp"
#include "gncm/rng.hpp"

#include <Eigen/QR>

#include <cmath>
#include <string>

namespace gncm {

namespace {
constexpr double kClip = 1e-6;
constexpr double kRankTol = 1e-10;

int argmax_abs(const Eigen::VectorXd& v) {
  int best = 0;
  for (int n = 1; n < v.size(); ++n)
    if (std::abs(v[n]) > std::abs(v[best])) best = n;
  return best;
}
} // namespace

std::vector<int> select_pure_pixels(const Eigen::MatrixXd& Y, int R, std::uint64_t seed) {
  const auto L = static_cast<int>(Y.rows());
  const auto N = static_cast<int>(Y.cols());
  if (R < 1) throw DomainError("extract_endmembers: R must be positive");
  if (N < R) throw DomainError("extract_endmembers: fewer pixels than endmembers");
  if (R > L) throw DomainError("extract_endmembers: rank deficiency (R exceeds the number of bands)");

  const Eigen::VectorXd mean = Y.rowwise().mean();
  const Eigen::VectorXd dist = (Y.colwise() - mean).colwise().squaredNorm().transpose();
  const double scale = Y.colwise().norm().maxCoeff();
  if (!(dist.maxCoeff() > 0.0)) throw DomainError("extract_endmembers: image is constant");

  std::vector<int> picks{argmax_abs(dist)};
  StreamRng rng(seed, Phase::init, 0x656d, 0);
  Eigen::MatrixXd selected(L, R);
  selected.col(0) = Y.col(picks[0]);

  for (int k = 1; k < R; ++k) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(selected.leftCols(k));
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(L, k);
    Eigen::VectorXd f(L);
    for (int l = 0; l < L; ++l) f[l] = rng.normal();
    f -= Q * (Q.transpose() * f);
    f.normalize();
    const Eigen::VectorXd proj = Y.transpose() * f;
    const int best = argmax_abs(proj);
    if (!(std::abs(proj[best]) > kRankTol * scale))
      throw DomainError("extract_endmembers: rank deficiency after " + std::to_string(k) + " endmembers");
    picks.push_back(best);
    selected.col(k) = Y.col(best);
  }
  return picks;
}

EndmemberLibrary extract_endmembers(const HsiCube& cube, int R, std::uint64_t seed) {
  const auto picks = select_pure_pixels(cube.reflectance, R, seed);
  EndmemberLibrary lib;
  lib.means.resize(cube.bands(), R);
  for (int r = 0; r < R; ++r) {
    lib.means.col(r) = cube.reflectance.col(picks[r]).cwiseMax(kClip).cwiseMin(1.0 - kClip);
    lib.names.push_back("em_" + std::to_string(r + 1));
  }
  return lib;
}

} // namespace gncm
