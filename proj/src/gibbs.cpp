#include "gncm/gibbs.hpp"

#include "gncm/conditionals.hpp"
#include "gncm/endmember_init.hpp"
#include "gncm/error.hpp"
#include "gncm/parallel.hpp"
#include "gncm/simplex.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

namespace gncm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kClip = 1e-6;

int block_index(Block b) { return static_cast<int>(b); }

Phase block_phase(Block b) {
  switch (b) {
    case Block::stick: return Phase::stick;
    case Block::mean: return Phase::mean;
    case Block::variance: return Phase::variance;
    case Block::noise: return Phase::noise;
    case Block::dirichlet: return Phase::dirichlet;
  }
  return Phase::init;
}

struct Move {
  Eigen::VectorXd q;
  double accept_prob = 0.0;
  int accepted = 0;
};

// proposals_per_sweep successive CHMC transitions from one stream.
Move chmc_moves(const Eigen::VectorXd& q0, const TargetSpec& target, const ChmcConfig& cfg, int count,
                StreamRng& rng) {
  Move m;
  m.q = q0;
  for (int i = 0; i < count; ++i) {
    Proposal p = chmc_propose(m.q, target, cfg, rng);
    m.accept_prob += p.accept_prob;
    if (p.accepted) {
      ++m.accepted;
      m.q = std::move(p.q);
    }
  }
  m.accept_prob /= count;
  return m;
}

int draw_from_logweights(const Eigen::VectorXd& logw, double u) {
  const double mx = logw.maxCoeff();
  const Eigen::VectorXd p = (logw.array() - mx).exp();
  double acc = u * p.sum();
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    acc -= p[k];
    if (acc <= 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(p.size()) - 1;
}

PixelContext pixel_context(const HsiCube& cube, const GncmState& s, int n) {
  return PixelContext{cube.reflectance.col(n), s.M, s.Sigma, s.Psi[n], s.C.col(s.z[n] - 1), Eigen::VectorXd()};
}

BandContext band_context(const HsiCube& cube, const GncmState& s, const Eigen::MatrixXd& A,
                         const Eigen::MatrixXd& m_tilde, double eps2, int l) {
  return BandContext{cube.reflectance.row(l).transpose(), A, s.M.row(l).transpose(), s.Sigma.col(l),
                     s.Psi, m_tilde.row(l).transpose(), eps2};
}

Eigen::MatrixXd class_abundances(const Eigen::MatrixXd& A, const std::vector<int>& z, int k) {
  long count = 0;
  for (int zn : z) count += zn == k;
  Eigen::MatrixXd out(A.rows(), count);
  long j = 0;
  for (std::size_t n = 0; n < z.size(); ++n)
    if (z[n] == k) out.col(j++) = A.col(static_cast<Eigen::Index>(n));
  return out;
}

} // namespace

const char* block_name(Block b) {
  switch (b) {
    case Block::stick: return "abundances";
    case Block::mean: return "endmember_means";
    case Block::variance: return "endmember_variances";
    case Block::noise: return "noise_variances";
    case Block::dirichlet: return "dirichlet";
  }
  return "?";
}

std::array<ChmcConfig, kBlockCount> SamplerConfig::default_chmc() {
  std::array<ChmcConfig, kBlockCount> c{};
  c[block_index(Block::stick)].step_size = 1e-2;
  c[block_index(Block::mean)].step_size = 1e-3;
  c[block_index(Block::variance)].step_size = 1e-5;
  c[block_index(Block::noise)].step_size = 1e-8;
  c[block_index(Block::dirichlet)].step_size = 1e-1;
  return c;
}

void SamplerConfig::validate() const {
  if (n_burn_in < 0) throw ConfigError("sampler: burn-in must be nonnegative");
  if (n_total <= n_burn_in) throw ConfigError("sampler: total iterations must exceed burn-in");
  if (thinning < 1) throw ConfigError("sampler: thinning must be at least 1");
  if (proposals_per_sweep < 1) throw ConfigError("sampler: proposals per sweep must be at least 1");
  if (threads < 1) throw ConfigError("sampler: threads must be at least 1");
  hyper.validate();
  for (const auto& c : chmc) c.validate();
}

ResultBundle ChainSummary::to_bundle(int width, int height) const {
  ResultBundle b;
  b.width = width;
  b.height = height;
  b.abundance_maps = A_mmse;
  b.label_map = z_map;
  b.noise_variance_map = Psi_mmse;
  b.endmember_means = M_mmse;
  b.endmember_variances = Sigma_mmse;
  b.dirichlet_params = C_mmse;
  b.chain_meta.iterations = iterations;
  b.chain_meta.burn_in = burn_in;
  b.chain_meta.kept_samples = kept_samples;
  b.chain_meta.seed = seed;
  for (int i = 0; i < kBlockCount; ++i) {
    const char* name = block_name(static_cast<Block>(i));
    if (!std::isnan(acceptance_rate[i])) b.chain_meta.acceptance_rates[name] = acceptance_rate[i];
    b.chain_meta.step_sizes[name] = step_size[i];
  }
  return b;
}

void sample_labels(GncmState& state, PottsField& field, std::uint64_t seed, long sweep, int threads) {
  const int N = state.pixels();
  const int K = state.classes();
  if (field.size() != N || field.classes() != K) throw DomainError("sample_labels: field and state disagree");
  if (K == 1) return;
  for (int colour = 0; colour < 2; ++colour) {
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t i) {
      const int n = static_cast<int>(i);
      if (field.color(n) != colour) return;
      Eigen::VectorXd logw = potts_conditional_weights(field, n);
      for (int k = 0; k < K; ++k) logw[k] += log_prior_stick(state.T.col(n), state.C.col(k));
      StreamRng rng(seed, Phase::labels, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(sweep));
      const int k = 1 + draw_from_logweights(logw, rng.uniform());
      field.set_label(n, k);
      state.z[n] = k;
    });
  }
}

double log_posterior(const HsiCube& cube, const GncmState& s, const Eigen::MatrixXd& m_tilde,
                     const HyperParams& hyper, bool noise_fixed_zero) {
  double lp = log_likelihood_image(cube, s);
  for (int n = 0; n < s.pixels(); ++n) lp += log_prior_stick(s.T.col(n), s.C.col(s.z[n] - 1));
  for (int l = 0; l < s.bands(); ++l)
    lp += log_prior_mean_row(s.M.row(l).transpose(), m_tilde.row(l).transpose(), hyper.epsilon2);
  lp -= s.Sigma.array().log().sum();
  if (!noise_fixed_zero)
    for (int n = 0; n < s.pixels(); ++n) lp += log_prior_noise(s.Psi[n], hyper.lambda);
  PottsField field(cube.width, cube.height, s.classes(), hyper.beta, s.z);
  lp += hyper.beta * static_cast<double>(field.monochromatic_edges());
  for (int k = 0; k < s.classes(); ++k) lp += log_hyperprior_dirichlet(s.C.col(k), hyper.alpha, hyper.gamma);
  return lp;
}

ChainSummary run_sampler(const HsiCube& cube, const InitialState& init, const SamplerConfig& cfg) {
  cfg.validate();
  cube.validate();
  GncmState s = init.state;
  s.validate();
  const int N = s.pixels();
  const int L = s.bands();
  const int R = s.endmembers();
  const int K = s.classes();
  if (cube.pixels() != N || cube.bands() != L)
    throw DomainError("run_sampler: cube is " + std::to_string(cube.bands()) + " x " +
                      std::to_string(cube.pixels()) + " but state is " + std::to_string(L) + " x " +
                      std::to_string(N));
  if (init.m_tilde.rows() != L || init.m_tilde.cols() != R) throw DomainError("run_sampler: mean prior must be L x R");
  if (cfg.hyper.K != K || cfg.hyper.R != R)
    throw DomainError("run_sampler: hyperparameters disagree with the state on K or R");
  if (cfg.fix_noise_zero) s.Psi.setZero();

  const HyperParams& hp = cfg.hyper;
  const double lp0 = log_posterior(cube, s, init.m_tilde, hp, cfg.fix_noise_zero);
  if (!std::isfinite(lp0)) throw NumericError("run_sampler: non-finite log-posterior at initialization");

  PottsField field(cube.width, cube.height, K, hp.beta, s.z);
  const bool enabled[kBlockCount] = {cfg.update.stick, cfg.update.mean, cfg.update.variance,
                                     cfg.update.noise && !cfg.fix_noise_zero, cfg.update.dirichlet};

  Eigen::MatrixXd A = s.abundances();

  auto stick_target = [&](int n) { return make_stick_target(pixel_context(cube, s, n)); };
  auto mean_target = [&](int l) { return make_mean_target(band_context(cube, s, A, init.m_tilde, hp.epsilon2, l)); };
  auto variance_target = [&](int l) {
    return make_variance_target(band_context(cube, s, A, init.m_tilde, hp.epsilon2, l));
  };
  auto noise_target = [&](int n) {
    PixelContext ctx = pixel_context(cube, s, n);
    ctx.a = A.col(n);
    return make_noise_target(std::move(ctx), hp.lambda);
  };
  std::vector<DirichletStats> stats(K);
  auto dirichlet_target = [&](int k) {
    return stats[k].count > 0 ? make_dirichlet_target(stats[k], hp.alpha, hp.gamma)
                              : make_hyperprior_target(R, hp.alpha, hp.gamma);
  };
  auto refresh_stats = [&] {
    for (int k = 0; k < K; ++k) stats[k] = dirichlet_stats(class_abundances(A, s.z, k + 1));
  };

  // Step sizes: optional doubling/halving search from block 0, then
  // stochastic-approximation adaptation during burn-in.
  std::array<StepSizeAdapter, kBlockCount> adapters;
  for (int b = 0; b < kBlockCount; ++b) {
    double eps = cfg.chmc[b].step_size;
    if (cfg.search_initial_step && enabled[b]) {
      StreamRng rng(cfg.seed, Phase::step_search, static_cast<std::uint64_t>(b), 0);
      switch (static_cast<Block>(b)) {
        case Block::stick: eps = find_initial_step_size(s.T.col(0), stick_target(0), eps, rng); break;
        case Block::mean: eps = find_initial_step_size(s.M.row(0).transpose(), mean_target(0), eps, rng); break;
        case Block::variance: eps = find_initial_step_size(s.Sigma.col(0), variance_target(0), eps, rng); break;
        case Block::noise:
          eps = find_initial_step_size(Eigen::VectorXd::Constant(1, s.Psi[0]), noise_target(0), eps, rng);
          break;
        case Block::dirichlet:
          refresh_stats();
          eps = find_initial_step_size(s.C.col(0), dirichlet_target(0), eps, rng);
          break;
      }
    }
    adapters[b] = StepSizeAdapter(eps, cfg.chmc[b].target_accept);
    if (!cfg.chmc[b].adapt) adapters[b].freeze();
  }

  ChainSummary out;
  out.iterations = cfg.n_total;
  out.burn_in = cfg.n_burn_in;
  out.seed = cfg.seed;
  Eigen::MatrixXd A_sum = Eigen::MatrixXd::Zero(R, N);
  Eigen::MatrixXd M_sum = Eigen::MatrixXd::Zero(L, R);
  Eigen::MatrixXd S_sum = Eigen::MatrixXd::Zero(R, L);
  Eigen::VectorXd P_sum = Eigen::VectorXd::Zero(N);
  Eigen::MatrixXd C_sum = Eigen::MatrixXd::Zero(R, K);
  std::vector<std::vector<long>> label_counts(N, std::vector<long>(K, 0));
  std::array<long, kBlockCount> post_accepted{};
  std::array<long, kBlockCount> post_proposed{};

  std::vector<double> acc_prob(std::max({N, L, K}));
  std::vector<int> acc_count(acc_prob.size());
  const int per = cfg.proposals_per_sweep;

  for (long sweep = 1; sweep <= cfg.n_total; ++sweep) {
    const bool burning = sweep <= cfg.n_burn_in;
    std::array<double, kBlockCount> sweep_accept;
    sweep_accept.fill(kNaN);
    auto finish_block = [&](Block b, int count) {
      const int i = block_index(b);
      double mean = 0.0;
      long accepted = 0;
      for (int j = 0; j < count; ++j) {
        mean += acc_prob[j];
        accepted += acc_count[j];
      }
      mean /= count;
      sweep_accept[i] = mean;
      if (burning) {
        adapters[i].update(mean);
      } else {
        post_accepted[i] += accepted;
        post_proposed[i] += static_cast<long>(count) * per;
      }
    };
    auto block_cfg = [&](Block b) {
      ChmcConfig c = cfg.block(b);
      c.step_size = adapters[block_index(b)].step_size();
      return c;
    };
    auto stream = [&](Block b, int index) {
      return StreamRng(cfg.seed, block_phase(b), static_cast<std::uint64_t>(index),
                       static_cast<std::uint64_t>(sweep));
    };

    if (enabled[block_index(Block::stick)]) {
      const ChmcConfig c = block_cfg(Block::stick);
      parallel_for(N, cfg.threads, [&](std::size_t i) {
        const int n = static_cast<int>(i);
        StreamRng rng = stream(Block::stick, n);
        Move m = chmc_moves(s.T.col(n), stick_target(n), c, per, rng);
        acc_prob[n] = m.accept_prob;
        acc_count[n] = m.accepted;
        s.T.col(n) = m.q;
        Eigen::VectorXd a(R);
        detail::stick_to_simplex(m.q, a);
        A.col(n) = a;
      });
      finish_block(Block::stick, N);
    }

    if (enabled[block_index(Block::mean)]) {
      const ChmcConfig c = block_cfg(Block::mean);
      parallel_for(L, cfg.threads, [&](std::size_t i) {
        const int l = static_cast<int>(i);
        StreamRng rng = stream(Block::mean, l);
        Move m = chmc_moves(s.M.row(l).transpose(), mean_target(l), c, per, rng);
        acc_prob[l] = m.accept_prob;
        acc_count[l] = m.accepted;
        s.M.row(l) = m.q.transpose();
      });
      finish_block(Block::mean, L);
    }

    if (enabled[block_index(Block::variance)]) {
      const ChmcConfig c = block_cfg(Block::variance);
      parallel_for(L, cfg.threads, [&](std::size_t i) {
        const int l = static_cast<int>(i);
        StreamRng rng = stream(Block::variance, l);
        Move m = chmc_moves(s.Sigma.col(l), variance_target(l), c, per, rng);
        acc_prob[l] = m.accept_prob;
        acc_count[l] = m.accepted;
        s.Sigma.col(l) = m.q;
      });
      finish_block(Block::variance, L);
    }

    if (cfg.update.labels) sample_labels(s, field, cfg.seed, sweep, cfg.threads);

    if (enabled[block_index(Block::noise)]) {
      const ChmcConfig c = block_cfg(Block::noise);
      parallel_for(N, cfg.threads, [&](std::size_t i) {
        const int n = static_cast<int>(i);
        StreamRng rng = stream(Block::noise, n);
        Move m = chmc_moves(Eigen::VectorXd::Constant(1, s.Psi[n]), noise_target(n), c, per, rng);
        acc_prob[n] = m.accept_prob;
        acc_count[n] = m.accepted;
        s.Psi[n] = m.q[0];
      });
      finish_block(Block::noise, N);
    }

    if (enabled[block_index(Block::dirichlet)]) {
      refresh_stats();
      const ChmcConfig c = block_cfg(Block::dirichlet);
      parallel_for(K, cfg.threads, [&](std::size_t i) {
        const int k = static_cast<int>(i);
        StreamRng rng = stream(Block::dirichlet, k);
        Move m = chmc_moves(s.C.col(k), dirichlet_target(k), c, per, rng);
        acc_prob[k] = m.accept_prob;
        acc_count[k] = m.accepted;
        s.C.col(k) = m.q;
      });
      finish_block(Block::dirichlet, K);
    }

    if (sweep == cfg.n_burn_in)
      for (auto& a : adapters) a.freeze();

#ifndef NDEBUG
    s.validate();
#endif

    if (!burning && (sweep - cfg.n_burn_in) % cfg.thinning == 0) {
      A_sum += A;
      M_sum += s.M;
      S_sum += s.Sigma;
      P_sum += s.Psi;
      C_sum += s.C;
      for (int n = 0; n < N; ++n) ++label_counts[n][s.z[n] - 1];
      ++out.kept_samples;
    }

    const bool report = cfg.progress && (sweep % 100 == 0 || sweep == cfg.n_total);
    if (sweep % cfg.thinning == 0 || report) {
      TraceRow row;
      row.sweep = sweep;
      row.log_posterior = log_posterior(cube, s, init.m_tilde, hp, cfg.fix_noise_zero);
      row.accept = sweep_accept;
      for (int b = 0; b < kBlockCount; ++b) row.step_size[b] = adapters[b].step_size();
      row.mean_psi2 = s.Psi.mean();
      row.mean_sigma2 = s.Sigma.mean();
      row.C = s.C;
      if (report) {
        std::ostream& os = *cfg.progress;
        os << "sweep " << sweep << "/" << cfg.n_total << " log-posterior " << std::setprecision(8)
           << row.log_posterior << " acceptance";
        for (int b = 0; b < kBlockCount; ++b)
          if (!std::isnan(sweep_accept[b]))
            os << ' ' << block_name(static_cast<Block>(b)) << '=' << std::setprecision(3) << sweep_accept[b];
        os << '\n';
        os.flush();
      }
      if (sweep % cfg.thinning == 0) out.trace.push_back(std::move(row));
    }
  }

  const double kept = static_cast<double>(out.kept_samples);
  out.A_mmse = A_sum / kept;
  for (int n = 0; n < N; ++n) out.A_mmse.col(n) /= out.A_mmse.col(n).sum();
  out.M_mmse = M_sum / kept;
  out.Sigma_mmse = S_sum / kept;
  out.Psi_mmse = P_sum / kept;
  out.C_mmse = C_sum / kept;
  out.z_map.resize(N);
  for (int n = 0; n < N; ++n) {
    int best = 0;
    for (int k = 1; k < K; ++k)
      if (label_counts[n][k] > label_counts[n][best]) best = k;
    out.z_map[n] = best + 1;
  }
  for (int b = 0; b < kBlockCount; ++b) {
    out.acceptance_rate[b] =
        post_proposed[b] ? static_cast<double>(post_accepted[b]) / static_cast<double>(post_proposed[b]) : kNaN;
    out.step_size[b] = adapters[b].step_size();
  }
  out.last = std::move(s);
  return out;
}

std::vector<int> kmeans_labels(const Eigen::MatrixXd& X, int K, std::uint64_t seed, int max_iter) {
  const auto N = static_cast<int>(X.cols());
  if (K < 1) throw DomainError("kmeans: K must be positive");
  if (N < K) throw DomainError("kmeans: fewer points than clusters");
  std::vector<int> labels(N, 1);
  if (K == 1) return labels;

  StreamRng rng(seed, Phase::init, 0x6b6d, 0);
  Eigen::MatrixXd centres(X.rows(), K);
  centres.col(0) = X.col(static_cast<int>(rng() % static_cast<std::uint64_t>(N)));
  Eigen::VectorXd d2 = (X.colwise() - centres.col(0)).colwise().squaredNorm().transpose();
  for (int k = 1; k < K; ++k) {
    const double total = d2.sum();
    int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(N));
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (int n = 0; n < N; ++n) {
        u -= d2[n];
        if (u <= 0.0) {
          pick = n;
          break;
        }
      }
    }
    centres.col(k) = X.col(pick);
    d2 = d2.cwiseMin((X.colwise() - centres.col(k)).colwise().squaredNorm().transpose());
  }

  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (int n = 0; n < N; ++n) {
      Eigen::Index best;
      (centres.colwise() - X.col(n)).colwise().squaredNorm().minCoeff(&best);
      if (labels[n] != best + 1) {
        labels[n] = static_cast<int>(best) + 1;
        changed = true;
      }
    }
    if (!changed && it > 0) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(X.rows(), K);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
    for (int n = 0; n < N; ++n) {
      sums.col(labels[n] - 1) += X.col(n);
      counts[labels[n] - 1] += 1.0;
    }
    for (int k = 0; k < K; ++k)
      if (counts[k] > 0) centres.col(k) = sums.col(k) / counts[k];
  }
  return labels;
}

InitialState initialize_state(const HsiCube& cube, int R, int K, const HyperParams& hyper,
                              const std::optional<EndmemberLibrary>& library, std::uint64_t seed,
                              std::ostream* warnings) {
  if (R < 2) throw DomainError("initialize_state: R must be at least 2");
  if (K < 1) throw DomainError("initialize_state: K must be at least 1");
  hyper.validate();
  cube.validate();
  const int L = cube.bands();
  const int N = cube.pixels();
  const Eigen::MatrixXd& Y = cube.reflectance;

  InitialState init;
  if (library) {
    library->validate();
    if (library->bands() != L || library->endmembers() != R)
      throw DomainError("initialize_state: library is " + std::to_string(library->bands()) + " x " +
                        std::to_string(library->endmembers()) + ", expected " + std::to_string(L) + " x " +
                        std::to_string(R));
    init.m_tilde = library->means;
  } else {
    try {
      init.m_tilde = extract_endmembers(cube, R, seed).means;
    } catch (const DomainError& e) {
      if (N < 1) throw;
      if (warnings) *warnings << "warning: " << e.what() << "; using random pixels as initial endmembers\n";
      StreamRng rng(seed, Phase::init, 0x726e64, 0);
      init.m_tilde.resize(L, R);
      for (int r = 0; r < R; ++r) init.m_tilde.col(r) = Y.col(static_cast<int>(rng() % static_cast<std::uint64_t>(N)));
      init.m_tilde = init.m_tilde.cwiseMax(kClip).cwiseMin(1.0 - kClip);
    }
  }

  GncmState& s = init.state;
  s.M = init.m_tilde.cwiseMax(kClip).cwiseMin(1.0 - kClip);
  const Eigen::VectorXd t0 = simplex_to_stick(Eigen::VectorXd::Constant(R, 1.0 / R));
  s.T = t0.replicate(1, N);
  s.Sigma = Eigen::MatrixXd::Constant(R, L, 1e-3);
  s.Psi = Eigen::VectorXd::Constant(N, 1e-8);
  s.C = Eigen::MatrixXd::Ones(R, K);

  // Pixel features for clustering: projection onto the leading R-1 principal axes.
  const Eigen::MatrixXd centred = Y.colwise() - Y.rowwise().mean();
  const int dims = std::max(1, std::min(R - 1, L));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centred * centred.transpose());
  const Eigen::MatrixXd axes = eig.eigenvectors().rightCols(dims);
  const Eigen::MatrixXd features = axes.transpose() * centred;
  if (N >= K) {
    s.z = kmeans_labels(features, K, seed);
  } else {
    s.z.resize(N);
    for (int n = 0; n < N; ++n) s.z[n] = 1 + n % K;
  }
  s.validate();
  return init;
}

} // namespace gncm
