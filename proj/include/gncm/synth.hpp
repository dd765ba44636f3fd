#pragma once

#include "gncm/hsi_data.hpp"
#include "gncm/model.hpp"
#include "gncm/priors.hpp"
#include "gncm/rng.hpp"

#include <cstdint>

namespace gncm {

/// Smooth spectra built from 3-5 Gaussian bumps per endmember, with band
/// variances sigma2_rl = s_r (1 + sin^2(2 pi l / L + phi_r)) 1e-4, s_r in [0.5, 2].
EndmemberLibrary synthetic_library(int L, int R, std::uint64_t seed);

/// Gibbs sampling of the Potts prior from a uniform random start, using a
/// checkerboard schedule for n_sweeps full sweeps.
PottsField sample_potts_field(int width, int height, int K, double beta, int n_sweeps, std::uint64_t seed);

struct TruncationStats {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

/// Rejection sampling from Dir(c) restricted to max_r a_r < cap. Aborts with
/// NumericError once the running acceptance estimate for this draw falls
/// below 1e-6.
Eigen::VectorXd sample_truncated_dirichlet(const Eigen::VectorXd& c, double cap, StreamRng& rng,
                                           TruncationStats* stats = nullptr);

enum class NoiseKind { zero, constant, band_linear };

NoiseKind parse_noise_kind(const std::string& name);
std::string to_string(NoiseKind kind);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::constant;
  double psi2 = 1e-7;  // constant kind only
};

/// psi2_l = 1e-4 (4 l / (L - 1) + (L + 3) / (L - 1)), l = 1..L.
Eigen::VectorXd band_linear_noise(int L);

/// One draw of y = sum_r a_r s_r + e with s_r ~ N(m_r, diag(sigma2_r)) and
/// e ~ N(0, diag(band_noise)). `variances` is R x L.
Eigen::VectorXd mix_pixel(const Eigen::VectorXd& a, const Eigen::MatrixXd& means, const Eigen::MatrixXd& variances,
                          const Eigen::VectorXd& band_noise, StreamRng& rng);

struct Scene {
  HsiCube cube;
  GncmState truth;
  Eigen::VectorXd band_noise;  // per-band noise variance actually used (L)
};

/// Draws y_n = sum_r a_rn s_rn + e_n with a_n from the truncated Dirichlet of
/// the pixel's class. With band-linear noise the truth Psi holds the band mean.
Scene generate_scene(const EndmemberLibrary& lib, const Eigen::MatrixXd& dirichlet, const PottsField& field,
                     const NoiseSpec& noise, double cap, std::uint64_t seed, int threads = 1);

} // namespace gncm
