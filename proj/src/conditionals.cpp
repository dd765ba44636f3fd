#include "gncm/conditionals.hpp"

#include "gncm/error.hpp"
#include "gncm/simplex.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <limits>
#include <memory>

namespace gncm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double digamma(double x) { return boost::math::digamma(x); }

// Evaluators shared by the public potentials and the CHMC targets. Each writes
// grad and returns the energy (+inf outside the support).

double stick_energy(const Eigen::VectorXd& t, const PixelContext& ctx, Eigen::VectorXd& grad) {
  const Eigen::Index R = ctx.M.cols();
  grad.setZero(R - 1);
  for (Eigen::Index r = 0; r < R - 1; ++r)
    if (!(t[r] > 0.0 && t[r] < 1.0)) return kInf;

  Eigen::VectorXd a(R);
  detail::stick_to_simplex(t, a);
  const Eigen::VectorXd a2 = a.cwiseAbs2();
  const Eigen::VectorXd res = ctx.y - ctx.M * a;
  Eigen::VectorXd omega = ctx.Sigma.transpose() * a2;
  omega.array() += ctx.psi2;
  if (!(omega.array() > 0.0).all()) return kInf;
  const Eigen::VectorXd lam = omega.cwiseInverse();
  const Eigen::VectorXd res2 = res.cwiseAbs2();

  const double u1 = 0.5 * lam.dot(res2);
  const double u3 = 0.5 * omega.array().log().sum();
  double u2 = 0.0;
  double tail = ctx.c.sum();
  Eigen::VectorXd du2(R - 1);
  for (Eigen::Index r = 0; r < R - 1; ++r) {
    tail -= ctx.c[r];
    u2 -= (tail - 1.0) * std::log(t[r]) + (ctx.c[r] - 1.0) * std::log1p(-t[r]);
    du2[r] = -(tail - 1.0) / t[r] + (ctx.c[r] - 1.0) / (1.0 - t[r]);
  }

  // dU1/da = -M'(lam .* res) - a .* (Sigma (lam^2 .* res^2));  dU3/da = a .* (Sigma lam)
  const Eigen::VectorXd du_da = -ctx.M.transpose() * lam.cwiseProduct(res) -
                                a.cwiseProduct(ctx.Sigma * lam.cwiseAbs2().cwiseProduct(res2)) +
                                a.cwiseProduct(ctx.Sigma * lam);
  Eigen::MatrixXd jac(R, R - 1);
  detail::stick_jacobian(t, a, jac);
  grad.noalias() = jac.transpose() * du_da;
  grad += du2;
  return u1 + u2 + u3;
}

Eigen::VectorXd band_lambda(const Eigen::VectorXd& sigma_col, const Eigen::MatrixXd& A, const Eigen::VectorXd& Psi) {
  Eigen::VectorXd omega = A.cwiseAbs2().transpose() * sigma_col + Psi;
  if (!(omega.array() > 0.0).all()) throw NumericError("band conditional: nonpositive Omega");
  return omega.cwiseInverse();
}

double mean_energy(const Eigen::VectorXd& m, const BandContext& ctx, const Eigen::VectorXd& lam, Eigen::VectorXd& grad) {
  const Eigen::Index R = m.size();
  grad.setZero(R);
  if (!((m.array() > 0.0).all() && (m.array() < 1.0).all())) return kInf;
  const Eigen::VectorXd res = ctx.y_row - ctx.A.transpose() * m;
  const Eigen::VectorXd wres = lam.cwiseProduct(res);
  const Eigen::VectorXd dev = m - ctx.m_tilde_row;
  grad.noalias() = -ctx.A * wres;
  grad += dev / ctx.epsilon2;
  return 0.5 * wres.dot(res) + dev.squaredNorm() / (2.0 * ctx.epsilon2);
}

double variance_energy(const Eigen::VectorXd& s, const BandContext& ctx, const Eigen::MatrixXd& a2,
                       const Eigen::VectorXd& res2, Eigen::VectorXd& grad) {
  const Eigen::Index R = s.size();
  grad.setZero(R);
  if (!(s.array() > 0.0).all()) return kInf;
  const Eigen::VectorXd omega = a2.transpose() * s + ctx.Psi;
  if (!(omega.array() > 0.0).all()) return kInf;
  const Eigen::VectorXd lam = omega.cwiseInverse();
  const double w1 = 0.5 * lam.dot(res2);
  const double w2 = s.array().log().sum();
  const double w3 = 0.5 * omega.array().log().sum();
  grad.noalias() = -0.5 * a2 * lam.cwiseAbs2().cwiseProduct(res2);
  grad += s.cwiseInverse();
  grad.noalias() += 0.5 * a2 * lam;
  return w1 + w2 + w3;
}

double noise_energy(double psi2, double lambda, const Eigen::VectorXd& base_omega,
                    const Eigen::VectorXd& res2, double& grad) {
  grad = 0.0;
  if (!(psi2 >= 0.0)) return kInf;
  const Eigen::VectorXd omega = base_omega.array() + psi2;
  if (!(omega.array() > 0.0).all()) return kInf;
  const Eigen::VectorXd lam = omega.cwiseInverse();
  const double u1 = 0.5 * lam.dot(res2);
  const double u3 = 0.5 * omega.array().log().sum();
  grad = -0.5 * lam.cwiseAbs2().dot(res2) + 0.5 * lam.sum() + lambda;
  return u1 + u3 + lambda * psi2;
}

double dirichlet_energy(const Eigen::VectorXd& c, const DirichletStats& st, double alpha, double gamma,
                        Eigen::VectorXd& grad) {
  const Eigen::Index R = c.size();
  grad.setZero(R);
  if (!(c.array() > 0.0).all()) return kInf;
  const double n = static_cast<double>(st.count);
  const double csum = c.sum();
  double lg = -std::lgamma(csum);
  for (Eigen::Index r = 0; r < R; ++r) lg += std::lgamma(c[r]);
  const double p1 = (gamma + 1.0) * n * lg;
  const double p2 = n * (alpha * csum - static_cast<double>(R) * alpha) - (c.array() - 1.0).matrix().dot(st.sum_log_a);
  const double dsum = digamma(csum);
  for (Eigen::Index r = 0; r < R; ++r)
    grad[r] = (gamma + 1.0) * n * (digamma(c[r]) - dsum) + n * alpha - st.sum_log_a[r];
  return p1 + p2;
}

double hyperprior_energy(const Eigen::VectorXd& c, double alpha, double gamma, Eigen::VectorXd& grad) {
  const Eigen::Index R = c.size();
  grad.setZero(R);
  if (!(c.array() > 0.0).all()) return kInf;
  const double csum = c.sum();
  double lg = std::lgamma(csum);
  for (Eigen::Index r = 0; r < R; ++r) lg -= std::lgamma(c[r]);
  const double dsum = digamma(csum);
  for (Eigen::Index r = 0; r < R; ++r) grad[r] = -gamma * (dsum - digamma(c[r])) + alpha;
  return -(gamma * lg - alpha * csum + static_cast<double>(R) * alpha);
}

void check_pixel_context(const PixelContext& ctx) {
  const Eigen::Index L = ctx.y.size();
  const Eigen::Index R = ctx.M.cols();
  if (ctx.M.rows() != L || ctx.Sigma.rows() != R || ctx.Sigma.cols() != L)
    throw DomainError("pixel context: dimension mismatch");
  if (ctx.c.size() != 0 && ctx.c.size() != R) throw DomainError("pixel context: c must have R entries");
}

void check_band_context(const BandContext& ctx) {
  const Eigen::Index N = ctx.y_row.size();
  const Eigen::Index R = ctx.A.rows();
  if (ctx.A.cols() != N || ctx.Psi.size() != N) throw DomainError("band context: pixel count mismatch");
  if (ctx.m_tilde_row.size() != R) throw DomainError("band context: prior mean must have R entries");
  if (!(ctx.epsilon2 > 0)) throw DomainError("band context: epsilon2 must be positive");
}

} // namespace

DirichletStats dirichlet_stats(const Eigen::Ref<const Eigen::MatrixXd>& abundances_in_class) {
  DirichletStats st;
  st.count = abundances_in_class.cols();
  st.sum_log_a = Eigen::VectorXd::Zero(abundances_in_class.rows());
  for (Eigen::Index n = 0; n < abundances_in_class.cols(); ++n)
    st.sum_log_a += abundances_in_class.col(n).array().log().matrix();
  return st;
}

Energy potential_stick(const Eigen::VectorXd& t, const PixelContext& ctx) {
  check_pixel_context(ctx);
  if (t.size() != ctx.M.cols() - 1) throw DomainError("potential_stick: t must have R-1 entries");
  for (Eigen::Index r = 0; r < t.size(); ++r)
    if (!(t[r] > 0.0 && t[r] < 1.0)) throw DomainError("potential_stick: t on or outside the boundary");
  Energy e;
  e.value = stick_energy(t, ctx, e.grad);
  return e;
}

Energy potential_mean(const Eigen::VectorXd& m_row, const BandContext& ctx) {
  check_band_context(ctx);
  if (m_row.size() != ctx.A.rows()) throw DomainError("potential_mean: row must have R entries");
  if (!((m_row.array() > 0.0).all() && (m_row.array() < 1.0).all()))
    throw DomainError("potential_mean: endmember mean outside (0,1)");
  Energy e;
  e.value = mean_energy(m_row, ctx, band_lambda(ctx.sigma_col, ctx.A, ctx.Psi), e.grad);
  return e;
}

Energy potential_variance(const Eigen::VectorXd& sigma_col, const BandContext& ctx) {
  check_band_context(ctx);
  if (sigma_col.size() != ctx.A.rows()) throw DomainError("potential_variance: column must have R entries");
  if (!(sigma_col.array() > 0.0).all()) throw DomainError("potential_variance: variances must be positive");
  const Eigen::VectorXd res2 = (ctx.y_row - ctx.A.transpose() * ctx.m_row).cwiseAbs2();
  Energy e;
  e.value = variance_energy(sigma_col, ctx, ctx.A.cwiseAbs2(), res2, e.grad);
  return e;
}

Energy potential_noise(double psi2, const PixelContext& ctx, double lambda) {
  check_pixel_context(ctx);
  if (ctx.a.size() != ctx.M.cols()) throw DomainError("potential_noise: context lacks abundances");
  if (psi2 < 0.0) throw DomainError("potential_noise: negative variance");
  const Eigen::VectorXd base = ctx.Sigma.transpose() * ctx.a.cwiseAbs2();
  const Eigen::VectorXd res2 = (ctx.y - ctx.M * ctx.a).cwiseAbs2();
  Energy e;
  double g = 0.0;
  e.value = noise_energy(psi2, lambda, base, res2, g);
  e.grad = Eigen::VectorXd::Constant(1, g);
  return e;
}

Energy potential_dirichlet(const Eigen::VectorXd& c, const DirichletStats& stats, double alpha, double gamma) {
  if (stats.count == 0) throw DomainError("potential_dirichlet: empty class");
  if (c.size() != stats.sum_log_a.size()) throw DomainError("potential_dirichlet: size mismatch");
  if (!(c.array() > 0.0).all()) throw DomainError("potential_dirichlet: parameters must be positive");
  Energy e;
  e.value = dirichlet_energy(c, stats, alpha, gamma, e.grad);
  return e;
}

Energy potential_dirichlet(const Eigen::VectorXd& c, const Eigen::Ref<const Eigen::MatrixXd>& abundances_in_class,
                           double alpha, double gamma) {
  return potential_dirichlet(c, dirichlet_stats(abundances_in_class), alpha, gamma);
}

Energy potential_hyperprior(const Eigen::VectorXd& c, double alpha, double gamma) {
  Energy e;
  e.value = hyperprior_energy(c, alpha, gamma, e.grad);
  return e;
}

TargetSpec make_stick_target(PixelContext ctx) {
  check_pixel_context(ctx);
  const Eigen::Index d = ctx.M.cols() - 1;
  TargetSpec spec;
  spec.lower = Eigen::VectorXd::Zero(d);
  spec.upper = Eigen::VectorXd::Ones(d);
  spec.energy = [ctx = std::move(ctx)](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
    return stick_energy(t, ctx, g);
  };
  return spec;
}

TargetSpec make_mean_target(BandContext ctx) {
  check_band_context(ctx);
  const Eigen::Index R = ctx.A.rows();
  auto lam = band_lambda(ctx.sigma_col, ctx.A, ctx.Psi);
  TargetSpec spec;
  spec.lower = Eigen::VectorXd::Zero(R);
  spec.upper = Eigen::VectorXd::Ones(R);
  spec.energy = [ctx = std::move(ctx), lam = std::move(lam)](const Eigen::VectorXd& m, Eigen::VectorXd& g) {
    return mean_energy(m, ctx, lam, g);
  };
  return spec;
}

TargetSpec make_variance_target(BandContext ctx) {
  check_band_context(ctx);
  const Eigen::Index R = ctx.A.rows();
  auto res2 = (ctx.y_row - ctx.A.transpose() * ctx.m_row).cwiseAbs2().eval();
  // shared so that copies of the target do not duplicate the R x N matrix
  auto a2 = std::make_shared<const Eigen::MatrixXd>(ctx.A.cwiseAbs2());
  TargetSpec spec;
  spec.lower = Eigen::VectorXd::Zero(R);
  spec.upper = Eigen::VectorXd::Constant(R, kInf);
  spec.energy = [ctx = std::move(ctx), a2, res2 = std::move(res2)](const Eigen::VectorXd& s, Eigen::VectorXd& g) {
    return variance_energy(s, ctx, *a2, res2, g);
  };
  return spec;
}

TargetSpec make_noise_target(PixelContext ctx, double lambda) {
  check_pixel_context(ctx);
  if (ctx.a.size() != ctx.M.cols()) throw DomainError("noise target: context lacks abundances");
  auto base = (ctx.Sigma.transpose() * ctx.a.cwiseAbs2()).eval();
  auto res2 = (ctx.y - ctx.M * ctx.a).cwiseAbs2().eval();
  TargetSpec spec;
  spec.lower = Eigen::VectorXd::Zero(1);
  spec.upper = Eigen::VectorXd::Constant(1, kInf);
  spec.energy = [lambda, base = std::move(base), res2 = std::move(res2)](const Eigen::VectorXd& q,
                                                                         Eigen::VectorXd& g) {
    double d = 0.0;
    const double v = noise_energy(q[0], lambda, base, res2, d);
    g.resize(1);
    g[0] = d;
    return v;
  };
  return spec;
}

TargetSpec make_dirichlet_target(DirichletStats stats, double alpha, double gamma) {
  if (stats.count == 0) throw DomainError("dirichlet target: empty class");
  const Eigen::Index R = stats.sum_log_a.size();
  TargetSpec spec;
  spec.lower = Eigen::VectorXd::Zero(R);
  spec.upper = Eigen::VectorXd::Constant(R, kInf);
  spec.energy = [stats = std::move(stats), alpha, gamma](const Eigen::VectorXd& c, Eigen::VectorXd& g) {
    return dirichlet_energy(c, stats, alpha, gamma, g);
  };
  return spec;
}

TargetSpec make_hyperprior_target(int R, double alpha, double gamma) {
  TargetSpec spec;
  spec.lower = Eigen::VectorXd::Zero(R);
  spec.upper = Eigen::VectorXd::Constant(R, kInf);
  spec.energy = [alpha, gamma](const Eigen::VectorXd& c, Eigen::VectorXd& g) {
    return hyperprior_energy(c, alpha, gamma, g);
  };
  return spec;
}

} // namespace gncm
