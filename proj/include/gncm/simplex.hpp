#pragma once

#include <Eigen/Core>

namespace gncm {

// Stick-breaking bijection between the open simplex in R^R and the open box
// (0,1)^(R-1):
//   a_r = (prod_{k<r} t_k) * (1 - t_r)   for r < R
//   a_R =  prod_{k<R} t_k
// so t_r is the fraction of the remaining stick that is *not* assigned to r.

/// Maps stick coordinates t in (0,1)^(R-1) to abundances a (length R).
/// Throws DomainError when some t_r is outside the open interval.
Eigen::VectorXd stick_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& t);

/// Inverse map: t_r = (sum_{i>r} a_i) / (sum_{i>=r} a_i). Rejects boundary
/// points (any a_r <= 0) and vectors whose sum differs from 1 by more than 1e-10.
Eigen::VectorXd simplex_to_stick(const Eigen::Ref<const Eigen::VectorXd>& a);

/// R x (R-1) Jacobian d a_r / d t_i: 0 for i > r, a_r/(t_r - 1) for i == r,
/// a_r/t_i for i < r.
Eigen::MatrixXd stick_jacobian(const Eigen::Ref<const Eigen::VectorXd>& t);

namespace detail {
// Unchecked versions for hot loops; callers guarantee t is inside the box.
void stick_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& t, Eigen::Ref<Eigen::VectorXd> a);
void stick_jacobian(const Eigen::Ref<const Eigen::VectorXd>& t, const Eigen::Ref<const Eigen::VectorXd>& a,
                    Eigen::Ref<Eigen::MatrixXd> jac);
} // namespace detail

} // namespace gncm
