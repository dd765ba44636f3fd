#include "gncm/synth.hpp"

#include "gncm/error.hpp"
#include "gncm/parallel.hpp"
#include "gncm/simplex.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace gncm {

namespace {
constexpr long kMaxRejections = 2'000'000;  // 1 / kMaxRejections < 1e-6
constexpr double kTruthVarianceFloor = 1e-12;

int draw_categorical(const Eigen::VectorXd& logw, StreamRng& rng) {
  const double mx = logw.maxCoeff();
  Eigen::VectorXd p = (logw.array() - mx).exp();
  double u = rng.uniform() * p.sum();
  for (int k = 0; k < p.size(); ++k) {
    u -= p[k];
    if (u <= 0.0) return k;
  }
  return static_cast<int>(p.size()) - 1;
}
} // namespace

EndmemberLibrary synthetic_library(int L, int R, std::uint64_t seed) {
  if (L < 1 || R < 1) throw DomainError("synthetic_library: L and R must be positive");
  EndmemberLibrary lib;
  lib.means.resize(L, R);
  Eigen::MatrixXd vars(R, L);
  const double denom = std::max(1, L - 1);
  for (int r = 0; r < R; ++r) {
    StreamRng rng(seed, Phase::scene, 0x6c6962ULL, static_cast<std::uint64_t>(r));
    const int bumps = 3 + static_cast<int>(rng() % 3);
    Eigen::VectorXd m = Eigen::VectorXd::Constant(L, 0.05 + 0.15 * rng.uniform());
    for (int b = 0; b < bumps; ++b) {
      const double centre = rng.uniform();
      const double width = 0.05 + 0.25 * rng.uniform();
      const double height = 0.2 + 0.8 * rng.uniform();
      for (int l = 0; l < L; ++l) {
        const double x = (l / denom - centre) / width;
        m[l] += height * std::exp(-0.5 * x * x);
      }
    }
    const double top = 0.6 + 0.35 * rng.uniform();
    m *= top / m.maxCoeff();
    lib.means.col(r) = m.cwiseMax(1e-3).cwiseMin(1.0 - 1e-3);

    const double s = 0.5 + 1.5 * rng.uniform();
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    for (int l = 0; l < L; ++l) {
      const double sn = std::sin(2.0 * std::numbers::pi * (l + 1) / L + phi);
      vars(r, l) = s * (1.0 + sn * sn) * 1e-4;
    }
    lib.names.push_back("synthetic_" + std::to_string(r + 1));
  }
  lib.variances = vars;
  return lib;
}

PottsField sample_potts_field(int width, int height, int K, double beta, int n_sweeps, std::uint64_t seed) {
  if (n_sweeps < 1) throw DomainError("sample_potts_field: n_sweeps must be at least 1");
  PottsField field(width, height, K, beta);
  const int N = field.size();
  std::vector<int> labels(N);
  for (int n = 0; n < N; ++n) {
    StreamRng rng(seed, Phase::potts, static_cast<std::uint64_t>(n), 0);
    labels[n] = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(K));
  }
  field.set_labels(std::move(labels));
  if (K == 1) return field;
  for (int sweep = 1; sweep <= n_sweeps; ++sweep)
    for (int colour = 0; colour < 2; ++colour)
      for (int n = 0; n < N; ++n) {
        if (field.color(n) != colour) continue;
        StreamRng rng(seed, Phase::potts, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(sweep));
        field.set_label(n, 1 + draw_categorical(potts_conditional_weights(field, n), rng));
      }
  return field;
}

Eigen::VectorXd sample_truncated_dirichlet(const Eigen::VectorXd& c, double cap, StreamRng& rng,
                                           TruncationStats* stats) {
  const auto R = c.size();
  if (R < 1 || (c.array() <= 0.0).any()) throw DomainError("truncated Dirichlet: parameters must be positive");
  if (!(cap > 1.0 / static_cast<double>(R))) throw DomainError("truncated Dirichlet: cap must exceed 1/R");
  Eigen::VectorXd a(R);
  for (long tries = 1;; ++tries) {
    for (Eigen::Index r = 0; r < R; ++r) a[r] = rng.gamma(c[r]);
    const double s = a.sum();
    bool ok = s > 0.0;
    if (ok) {
      a /= s;
      ok = (a.array() > 0.0).all() && a.maxCoeff() < cap;
    }
    if (stats) ++stats->proposed;
    if (ok) {
      if (stats) ++stats->accepted;
      return a;
    }
    if (tries >= kMaxRejections) {
      std::ostringstream msg;
      msg << "truncated Dirichlet: acceptance rate below 1e-6 after " << tries << " proposals (c = ["
          << c.transpose() << "], cap = " << cap << ")";
      throw NumericError(msg.str());
    }
  }
}

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "zero") return NoiseKind::zero;
  if (name == "constant") return NoiseKind::constant;
  if (name == "band_linear" || name == "band-linear") return NoiseKind::band_linear;
  throw ConfigError("unknown noise kind '" + name + "' (expected zero, constant or band_linear)");
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::zero: return "zero";
    case NoiseKind::constant: return "constant";
    case NoiseKind::band_linear: return "band_linear";
  }
  return "?";
}

Eigen::VectorXd band_linear_noise(int L) {
  if (L < 2) throw DomainError("band-linear noise needs at least 2 bands");
  Eigen::VectorXd psi2(L);
  for (int l = 1; l <= L; ++l) psi2[l - 1] = 1e-4 * (4.0 * l / (L - 1) + (L + 3.0) / (L - 1));
  return psi2;
}

Eigen::VectorXd mix_pixel(const Eigen::VectorXd& a, const Eigen::MatrixXd& means, const Eigen::MatrixXd& variances,
                          const Eigen::VectorXd& band_noise, StreamRng& rng) {
  const auto L = means.rows();
  const auto R = means.cols();
  if (a.size() != R || variances.rows() != R || variances.cols() != L || band_noise.size() != L)
    throw DomainError("mix_pixel: dimension mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(L);
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index l = 0; l < L; ++l) y[l] += a[r] * (means(l, r) + std::sqrt(variances(r, l)) * rng.normal());
  for (Eigen::Index l = 0; l < L; ++l) y[l] += std::sqrt(band_noise[l]) * rng.normal();
  return y;
}

Scene generate_scene(const EndmemberLibrary& lib, const Eigen::MatrixXd& dirichlet, const PottsField& field,
                     const NoiseSpec& noise, double cap, std::uint64_t seed, int threads) {
  const int L = lib.bands();
  const int R = lib.endmembers();
  const int N = field.size();
  if (dirichlet.rows() != R) throw DomainError("generate_scene: Dirichlet matrix must have R rows");
  if (dirichlet.cols() != field.classes()) throw DomainError("generate_scene: Dirichlet matrix must have K columns");
  if (R < 2) throw DomainError("generate_scene: need at least 2 endmembers");
  const Eigen::MatrixXd vars = lib.variances.value_or(Eigen::MatrixXd::Zero(R, L));
  if (vars.rows() != R || vars.cols() != L) throw DomainError("generate_scene: variances must be R x L");
  if ((vars.array() < 0.0).any()) throw DomainError("generate_scene: variances must be nonnegative");

  Eigen::VectorXd band_noise;
  switch (noise.kind) {
    case NoiseKind::zero: band_noise = Eigen::VectorXd::Zero(L); break;
    case NoiseKind::constant:
      if (noise.psi2 < 0.0) throw DomainError("generate_scene: noise variance must be nonnegative");
      band_noise = Eigen::VectorXd::Constant(L, noise.psi2);
      break;
    case NoiseKind::band_linear: band_noise = band_linear_noise(L); break;
  }
  Scene scene;
  scene.cube.width = field.width();
  scene.cube.height = field.height();
  scene.cube.reflectance.resize(L, N);
  GncmState& truth = scene.truth;
  truth.T.resize(R - 1, N);
  truth.M = lib.means;
  truth.Sigma = vars.cwiseMax(kTruthVarianceFloor);
  truth.z = field.labels();
  truth.Psi = Eigen::VectorXd::Constant(N, band_noise.mean());
  truth.C = dirichlet;

  parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t i) {
    const int n = static_cast<int>(i);
    StreamRng rng(seed, Phase::scene, static_cast<std::uint64_t>(n), 1);
    const Eigen::VectorXd a = sample_truncated_dirichlet(dirichlet.col(field.label(n) - 1), cap, rng);
    scene.cube.reflectance.col(n) = mix_pixel(a, lib.means, vars, band_noise, rng);
    truth.T.col(n) = simplex_to_stick(a);
  });
  scene.band_noise = band_noise;
  return scene;
}

} // namespace gncm
