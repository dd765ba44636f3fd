#include "gncm/simplex.hpp"

#include "gncm/error.hpp"

#include <cmath>
#include <string>

namespace gncm {

namespace detail {

void stick_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& t, Eigen::Ref<Eigen::VectorXd> a) {
  const Eigen::Index last = t.size();
  double remaining = 1.0;
  for (Eigen::Index r = 0; r < last; ++r) {
    a[r] = remaining * (1.0 - t[r]);
    remaining *= t[r];
  }
  a[last] = remaining;
}

void stick_jacobian(const Eigen::Ref<const Eigen::VectorXd>& t, const Eigen::Ref<const Eigen::VectorXd>& a,
                    Eigen::Ref<Eigen::MatrixXd> jac) {
  const Eigen::Index R = a.size();
  for (Eigen::Index r = 0; r < R; ++r) {
    for (Eigen::Index i = 0; i < R - 1; ++i) {
      if (i > r)
        jac(r, i) = 0.0;
      else if (i == r)
        jac(r, i) = a[r] / (t[i] - 1.0);
      else
        jac(r, i) = a[r] / t[i];
    }
  }
}

} // namespace detail

namespace {
void check_stick(const Eigen::Ref<const Eigen::VectorXd>& t) {
  for (Eigen::Index r = 0; r < t.size(); ++r)
    if (!(t[r] > 0.0 && t[r] < 1.0))
      throw DomainError("stick coordinate t[" + std::to_string(r) + "] = " + std::to_string(t[r]) +
                        " outside (0,1)");
}
} // namespace

Eigen::VectorXd stick_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& t) {
  check_stick(t);
  Eigen::VectorXd a(t.size() + 1);
  detail::stick_to_simplex(t, a);
  return a;
}

Eigen::VectorXd simplex_to_stick(const Eigen::Ref<const Eigen::VectorXd>& a) {
  const Eigen::Index R = a.size();
  if (R < 2) throw DomainError("simplex_to_stick needs at least 2 components");
  for (Eigen::Index r = 0; r < R; ++r)
    if (!(a[r] > 0.0))
      throw DomainError("abundance a[" + std::to_string(r) + "] is on the simplex boundary");
  if (std::abs(a.sum() - 1.0) > 1e-10) throw DomainError("abundances do not sum to 1");
  Eigen::VectorXd t(R - 1);
  double tail = a[R - 1];
  for (Eigen::Index r = R - 2; r >= 0; --r) {
    const double with_r = tail + a[r];
    t[r] = tail / with_r;
    tail = with_r;
  }
  return t;
}

Eigen::MatrixXd stick_jacobian(const Eigen::Ref<const Eigen::VectorXd>& t) {
  check_stick(t);
  Eigen::VectorXd a(t.size() + 1);
  detail::stick_to_simplex(t, a);
  Eigen::MatrixXd jac(a.size(), t.size());
  detail::stick_jacobian(t, a, jac);
  return jac;
}

} // namespace gncm
