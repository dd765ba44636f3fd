#pragma once

#include "gncm/rng.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace gncm {

/// Box-constrained target for the constrained HMC kernel. `energy` returns
/// U(q) = -log f(q) (up to a constant) and writes dU/dq into `grad`, which the
/// caller sizes to dim(). Non-finite energies are allowed and cause rejection.
struct TargetSpec {
  using EnergyFn = std::function<double(const Eigen::VectorXd& q, Eigen::VectorXd& grad)>;

  EnergyFn energy;
  Eigen::VectorXd lower;  // may hold -inf
  Eigen::VectorXd upper;  // may hold +inf

  int dim() const { return static_cast<int>(lower.size()); }
  double potential(const Eigen::VectorXd& q) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& q) const;
  bool inside(const Eigen::VectorXd& q) const;
  void validate() const;
};

struct ChmcConfig {
  double step_size = 1e-2;
  int n_leapfrog = 10;
  double jitter = 0.2;         // N_L drawn uniformly from [N_L (1 - jitter), N_L (1 + jitter)]
  double target_accept = 0.75;
  bool adapt = true;

  void validate() const;
};

struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
};

/// Folds every coordinate of q back into [lower, upper] by mirror reflection
/// (q_u + h -> q_u - h, q_l - h -> q_l + h), negating the matching momentum
/// component on each fold. Throws NumericError after 100 folds of one coordinate.
void reflect_into_box(Eigen::VectorXd& q, Eigen::VectorXd& p, const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper);

/// One leapfrog step (half kick, drift with reflection, half kick).
PhasePoint leapfrog_step(const Eigen::VectorXd& q, const Eigen::VectorXd& p, double eps, const TargetSpec& target);

/// Runs `steps` leapfrog steps, sharing gradients between consecutive steps.
PhasePoint leapfrog_trajectory(const Eigen::VectorXd& q, const Eigen::VectorXd& p, double eps, int steps,
                               const TargetSpec& target);

struct Proposal {
  Eigen::VectorXd q;           // accepted point, or the start point on rejection
  bool accepted = false;
  double delta_H = 0.0;        // H(end) - H(start); +inf when the trajectory diverged
  double accept_prob = 0.0;    // min(1, exp(-delta_H))
  bool diverged = false;       // non-finite energy or runaway reflection
};

/// One CHMC transition with p ~ N(0, I) and K(p) = p'p / 2.
Proposal chmc_propose(const Eigen::VectorXd& q0, const TargetSpec& target, const ChmcConfig& cfg,
                      StreamRng& rng);

/// Number of leapfrog steps for one proposal after applying jitter.
int jittered_steps(const ChmcConfig& cfg, StreamRng& rng);

/// Stochastic-approximation step-size controller. Each update moves log(eps)
/// by gain_t * (mean_accept - target) with a decaying gain, so eps grows while
/// proposals are accepted more often than the target and shrinks otherwise.
/// After freeze() the step size no longer changes.
class StepSizeAdapter {
public:
  StepSizeAdapter() = default;
  StepSizeAdapter(double initial_step, double target_accept);

  double step_size() const;
  void update(double mean_accept_prob);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  long updates() const { return updates_; }
  void reset(double step);

private:
  double log_step_ = -4.6;
  double target_ = 0.75;
  long updates_ = 0;
  bool frozen_ = false;
};

/// Same update expressed as a free function over an acceptance history:
/// feeds each recorded mean acceptance into a fresh adapter started at
/// cfg.step_size and returns the resulting step size.
double adapt_step_size(const std::vector<double>& acceptance_history, const ChmcConfig& cfg);

/// Doubles or halves a starting step size until the one-step acceptance
/// probability from q0 crosses 1/2.
double find_initial_step_size(const Eigen::VectorXd& q0, const TargetSpec& target, double initial,
                              StreamRng& rng);

} // namespace gncm
