#include "gncm/chmc.hpp"

#include "gncm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gncm {

namespace {
constexpr int kMaxFolds = 100;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

double TargetSpec::potential(const Eigen::VectorXd& q) const {
  Eigen::VectorXd g(dim());
  return energy(q, g);
}

Eigen::VectorXd TargetSpec::gradient(const Eigen::VectorXd& q) const {
  Eigen::VectorXd g(dim());
  energy(q, g);
  return g;
}

bool TargetSpec::inside(const Eigen::VectorXd& q) const {
  return (q.array() > lower.array()).all() && (q.array() < upper.array()).all();
}

void TargetSpec::validate() const {
  if (!energy) throw DomainError("target: energy function not set");
  if (lower.size() != upper.size() || lower.size() < 1) throw DomainError("target: bound sizes differ");
  if (!(lower.array() < upper.array()).all()) throw DomainError("target: lower must be < upper");
}

void ChmcConfig::validate() const {
  if (!(step_size > 0)) throw DomainError("chmc: step size must be positive");
  if (n_leapfrog < 1) throw DomainError("chmc: need at least one leapfrog step");
  if (!(jitter >= 0 && jitter < 1)) throw DomainError("chmc: jitter must lie in [0,1)");
  if (!(target_accept > 0 && target_accept < 1)) throw DomainError("chmc: target acceptance must lie in (0,1)");
}

void reflect_into_box(Eigen::VectorXd& q, Eigen::VectorXd& p, const Eigen::VectorXd& lower,
                      const Eigen::VectorXd& upper) {
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    int folds = 0;
    while (q[i] > upper[i] || q[i] < lower[i]) {
      if (++folds > kMaxFolds)
        throw NumericError("reflection did not terminate within 100 folds (step size too large)");
      q[i] = q[i] > upper[i] ? 2.0 * upper[i] - q[i] : 2.0 * lower[i] - q[i];
      p[i] = -p[i];
    }
  }
}

PhasePoint leapfrog_step(const Eigen::VectorXd& q, const Eigen::VectorXd& p, double eps, const TargetSpec& target) {
  return leapfrog_trajectory(q, p, eps, 1, target);
}

PhasePoint leapfrog_trajectory(const Eigen::VectorXd& q0, const Eigen::VectorXd& p0, double eps, int steps,
                               const TargetSpec& target) {
  PhasePoint s{q0, p0};
  Eigen::VectorXd grad(q0.size());
  target.energy(s.q, grad);
  for (int i = 0; i < steps; ++i) {
    s.p.noalias() -= 0.5 * eps * grad;
    s.q.noalias() += eps * s.p;
    reflect_into_box(s.q, s.p, target.lower, target.upper);
    target.energy(s.q, grad);
    s.p.noalias() -= 0.5 * eps * grad;
  }
  return s;
}

int jittered_steps(const ChmcConfig& cfg, StreamRng& rng) {
  if (cfg.jitter <= 0.0) return cfg.n_leapfrog;
  const double scale = 1.0 + cfg.jitter * (2.0 * rng.uniform() - 1.0);
  return std::max(1, static_cast<int>(std::lround(cfg.n_leapfrog * scale)));
}

Proposal chmc_propose(const Eigen::VectorXd& q0, const TargetSpec& target, const ChmcConfig& cfg, StreamRng& rng) {
  const Eigen::Index d = q0.size();
  Proposal out;
  out.q = q0;

  Eigen::VectorXd p(d);
  for (Eigen::Index i = 0; i < d; ++i) p[i] = rng.normal();
  const int steps = jittered_steps(cfg, rng);
  const double u = rng.uniform();

  Eigen::VectorXd grad(d);
  const double u0 = target.energy(q0, grad);
  if (!std::isfinite(u0) || !grad.allFinite()) {
    out.diverged = true;
    out.delta_H = kInf;
    return out;
  }
  const double h0 = u0 + 0.5 * p.squaredNorm();

  Eigen::VectorXd q = q0;
  double u1 = u0;
  const double eps = cfg.step_size;
  try {
    for (int i = 0; i < steps; ++i) {
      p.noalias() -= 0.5 * eps * grad;
      q.noalias() += eps * p;
      reflect_into_box(q, p, target.lower, target.upper);
      u1 = target.energy(q, grad);
      if (!std::isfinite(u1) || !grad.allFinite()) {
        out.diverged = true;
        break;
      }
      p.noalias() -= 0.5 * eps * grad;
    }
  } catch (const NumericError&) {
    out.diverged = true;
  }
  if (out.diverged) {
    out.delta_H = kInf;
    return out;
  }
  const double h1 = u1 + 0.5 * p.squaredNorm();
  out.delta_H = h1 - h0;
  out.accept_prob = out.delta_H <= 0.0 ? 1.0 : std::exp(-out.delta_H);
  if (u < out.accept_prob) {
    out.accepted = true;
    out.q = std::move(q);
  }
  return out;
}

StepSizeAdapter::StepSizeAdapter(double initial_step, double target_accept)
    : log_step_(std::log(initial_step)), target_(target_accept) {
  if (!(initial_step > 0)) throw DomainError("adapter: initial step must be positive");
}

double StepSizeAdapter::step_size() const { return std::exp(log_step_); }

void StepSizeAdapter::update(double mean_accept_prob) {
  if (frozen_) return;
  const double gain = 0.5 / std::pow(1.0 + static_cast<double>(updates_) / 50.0, 0.6);
  log_step_ += gain * (mean_accept_prob - target_);
  ++updates_;
}

void StepSizeAdapter::reset(double step) {
  log_step_ = std::log(step);
  updates_ = 0;
  frozen_ = false;
}

double adapt_step_size(const std::vector<double>& acceptance_history, const ChmcConfig& cfg) {
  StepSizeAdapter a(cfg.step_size, cfg.target_accept);
  if (!cfg.adapt) return cfg.step_size;
  for (double rate : acceptance_history) a.update(rate);
  return a.step_size();
}

double find_initial_step_size(const Eigen::VectorXd& q0, const TargetSpec& target, double initial, StreamRng& rng) {
  const Eigen::Index d = q0.size();
  Eigen::VectorXd grad(d);
  const double u0 = target.energy(q0, grad);
  if (!std::isfinite(u0)) return initial;

  auto one_step_accept = [&](double eps) {
    Eigen::VectorXd p(d);
    for (Eigen::Index i = 0; i < d; ++i) p[i] = rng.normal();
    const double h0 = u0 + 0.5 * p.squaredNorm();
    try {
      const PhasePoint s = leapfrog_step(q0, p, eps, target);
      const double u1 = target.potential(s.q);
      const double dh = u1 + 0.5 * s.p.squaredNorm() - h0;
      if (!std::isfinite(dh)) return 0.0;
      return dh <= 0.0 ? 1.0 : std::exp(-dh);
    } catch (const NumericError&) {
      return 0.0;
    }
  };

  double eps = initial;
  const bool grow = one_step_accept(eps) > 0.5;
  for (int i = 0; i < 100; ++i) {
    const double next = grow ? eps * 2.0 : eps * 0.5;
    const double acc = one_step_accept(next);
    if (grow && acc < 0.5) break;
    eps = next;
    if (!grow && acc > 0.5) break;
  }
  return eps;
}

} // namespace gncm
