#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <utility>

#include "selfkin/error.hpp"

namespace selfkin {

using Index = Eigen::Index;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vec = VecX<double>;
using Mat = MatX<double>;

namespace detail {
template <typename A, typename B>
void require_same_size(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("shape-mismatch");
}
}  // namespace detail

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return v > Scalar(0) ? v : Scalar(0); });
}

/// 1 where x > 0, else 0: the ReLU derivative with the subgradient at 0 taken as 0.
template <typename Derived>
auto relu_gate(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); });
}

template <typename Derived>
auto sign(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) {
    return v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0));
  });
}

/// Two-way softmax with max-subtraction. The larger logit maps to exp(0)=1,
/// and the second probability is formed as 1 - first so the pair sums to 1.
template <typename Scalar>
std::pair<Scalar, Scalar> softmax2(Scalar z1, Scalar z2) {
  using std::exp;
  const Scalar top = std::max(z1, z2);
  const Scalar e1 = exp(z1 - top);
  const Scalar e2 = exp(z2 - top);
  const Scalar sum = e1 + e2;
  if (z1 >= z2) {
    const Scalar p2 = e2 / sum;
    return {Scalar(1) - p2, p2};
  }
  const Scalar p1 = e1 / sum;
  return {p1, Scalar(1) - p1};
}

template <typename Derived>
typename Derived::Scalar mean(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) throw Error("empty-vector");
  return x.sum() / static_cast<typename Derived::Scalar>(x.size());
}

template <typename M, typename V>
auto matvec(const Eigen::MatrixBase<M>& w, const Eigen::MatrixBase<V>& x) {
  if (w.cols() != x.rows() || x.cols() != 1) throw Error("shape-mismatch");
  return (w * x).eval();
}

template <typename A, typename B>
typename A::Scalar dot(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::require_same_size(a, b);
  return a.dot(b);
}

/// y += alpha * x
template <typename X, typename Y>
void axpy(typename X::Scalar alpha, const Eigen::MatrixBase<X>& x, Eigen::MatrixBase<Y>& y) {
  detail::require_same_size(x, y);
  y.derived() += alpha * x;
}

template <typename A, typename B>
auto hadamard(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::require_same_size(a, b);
  return a.cwiseProduct(b).eval();
}

template <typename Derived>
typename Derived::Scalar l1_norm(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseAbs().sum();
}

template <typename Derived>
typename Derived::Scalar l2_norm_sq(const Eigen::MatrixBase<Derived>& x) {
  return x.squaredNorm();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

}  // namespace selfkin
