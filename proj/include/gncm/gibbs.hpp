#pragma once

#include "gncm/chmc.hpp"
#include "gncm/hsi_data.hpp"
#include "gncm/model.hpp"
#include "gncm/priors.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gncm {

/// Continuous blocks moved by CHMC, in sweep order (labels sit between
/// variance and noise and are drawn exactly).
enum class Block { stick = 0, mean = 1, variance = 2, noise = 3, dirichlet = 4 };
inline constexpr int kBlockCount = 5;
const char* block_name(Block b);

/// Which blocks a sweep updates. Disabled blocks stay at their initial value.
struct UpdateMask {
  bool stick = true;
  bool mean = true;
  bool variance = true;
  bool labels = true;
  bool noise = true;
  bool dirichlet = true;
};

struct SamplerConfig {
  long n_burn_in = 2000;
  long n_total = 3000;
  std::uint64_t seed = 1;
  int thinning = 1;
  HyperParams hyper;
  std::array<ChmcConfig, kBlockCount> chmc = default_chmc();
  int proposals_per_sweep = 3;  // CHMC proposals per block per sweep
  bool search_initial_step = true;
  bool fix_noise_zero = false;  // NCM: psi2 = 0 throughout
  UpdateMask update;
  int threads = 1;
  std::ostream* progress = nullptr;  // one line per 100 sweeps when set

  ChmcConfig& block(Block b) { return chmc[static_cast<int>(b)]; }
  const ChmcConfig& block(Block b) const { return chmc[static_cast<int>(b)]; }
  void validate() const;

  static std::array<ChmcConfig, kBlockCount> default_chmc();
};

struct InitialState {
  GncmState state;
  Eigen::MatrixXd m_tilde;  // L x R prior mean of M
};

struct TraceRow {
  long sweep = 0;
  double log_posterior = 0.0;
  std::array<double, kBlockCount> accept{};     // mean acceptance probability this sweep
  std::array<double, kBlockCount> step_size{};
  double mean_psi2 = 0.0;
  double mean_sigma2 = 0.0;
  Eigen::MatrixXd C;
};

struct ChainSummary {
  Eigen::MatrixXd A_mmse;      // R x N, columns renormalized
  Eigen::MatrixXd M_mmse;      // L x R
  Eigen::MatrixXd Sigma_mmse;  // R x L
  Eigen::VectorXd Psi_mmse;    // N
  Eigen::MatrixXd C_mmse;      // R x K
  std::vector<int> z_map;      // per-pixel mode of the stored labels
  std::array<double, kBlockCount> acceptance_rate{};  // post-burn-in accepted fraction (NaN if never run)
  std::array<double, kBlockCount> step_size{};
  long kept_samples = 0;
  long iterations = 0;
  long burn_in = 0;
  std::uint64_t seed = 0;
  std::vector<TraceRow> trace;
  GncmState last;

  ResultBundle to_bundle(int width, int height) const;
};

/// Runs n_total sweeps of the hybrid Gibbs sampler. Each sweep updates, in
/// order: all stick columns, all rows of M, all columns of Sigma, the labels
/// (checkerboard), all psi2_n, all c_k. Random streams are keyed by
/// (seed, phase, block index, sweep), so output does not depend on cfg.threads.
ChainSummary run_sampler(const HsiCube& cube, const InitialState& init, const SamplerConfig& cfg);

/// One checkerboard pass over the labels. z_n = k is drawn with probability
/// proportional to Dir(a_n; c_k) exp(beta #{n' ~ n : z_n' = k}). Updates both
/// `state.z` and `field`.
void sample_labels(GncmState& state, PottsField& field, std::uint64_t seed, long sweep, int threads = 1);

/// Unnormalized log-posterior (constants dropped) used for traces.
double log_posterior(const HsiCube& cube, const GncmState& state, const Eigen::MatrixXd& m_tilde,
                     const HyperParams& hyper, bool noise_fixed_zero = false);

/// Mean prior from the library (or the pure-pixel initializer), T at the
/// barycenter, Sigma = 1e-3, Psi = 1e-8, C = 1, labels from k-means on
/// PCA-projected pixels.
InitialState initialize_state(const HsiCube& cube, int R, int K, const HyperParams& hyper,
                              const std::optional<EndmemberLibrary>& library, std::uint64_t seed,
                              std::ostream* warnings = nullptr);

/// k-means++ / Lloyd clustering of the columns of X into K groups (labels 1..K).
std::vector<int> kmeans_labels(const Eigen::MatrixXd& X, int K, std::uint64_t seed, int max_iter = 100);

} // namespace gncm
