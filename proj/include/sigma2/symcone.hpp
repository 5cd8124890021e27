#pragma once

// Elementary symmetric polynomials, Newton transforms and Garding cones on
// symmetric 4x4 matrices.
//
// All sigma_k are computed by principal-minor enumeration; eigenvalues are
// never needed on the library path.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "sigma2/errors.hpp"

namespace sigma2 {

template <class T>
using BasicVec4 = std::array<T, 4>;
using Vec4 = BasicVec4<double>;

/// Real symmetric 4x4 matrix stored as its upper triangle.
template <class T>
class BasicSymMat4 {
 public:
  using value_type = T;

  constexpr BasicSymMat4() noexcept : a_{} {}

  static constexpr BasicSymMat4 zero() noexcept { return {}; }

  static constexpr BasicSymMat4 identity(T scale = T(1)) noexcept {
    return diagonal(scale, scale, scale, scale);
  }

  static constexpr BasicSymMat4 diagonal(T d0, T d1, T d2, T d3) noexcept {
    BasicSymMat4 m;
    m.set(0, 0, d0);
    m.set(1, 1, d1);
    m.set(2, 2, d2);
    m.set(3, 3, d3);
    return m;
  }

  /// X (x) X.
  static constexpr BasicSymMat4 outer(const BasicVec4<T>& x) noexcept {
    BasicSymMat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) m.set(i, j, x[i] * x[j]);
    return m;
  }

  /// X (x) Y + Y (x) X.
  static constexpr BasicSymMat4 sym_outer(const BasicVec4<T>& x, const BasicVec4<T>& y) noexcept {
    BasicSymMat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) m.set(i, j, x[i] * y[j] + y[i] * x[j]);
    return m;
  }

  /// Symmetric part of a dense 4x4 matrix.
  static BasicSymMat4 from_dense(const Eigen::Matrix<T, 4, 4>& d) {
    BasicSymMat4 m;
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) m.set(i, j, T(0.5) * (d(i, j) + d(j, i)));
    return m;
  }

  Eigen::Matrix<T, 4, 4> dense() const {
    Eigen::Matrix<T, 4, 4> d;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) d(i, j) = (*this)(i, j);
    return d;
  }

  constexpr T operator()(int i, int j) const noexcept { return a_[index(i, j)]; }
  constexpr void set(int i, int j, T v) noexcept { a_[index(i, j)] = v; }

  constexpr const std::array<T, 10>& coefficients() const noexcept { return a_; }

  constexpr T trace() const noexcept { return a_[0] + a_[4] + a_[7] + a_[9]; }

  constexpr BasicSymMat4& operator+=(const BasicSymMat4& o) noexcept {
    for (std::size_t i = 0; i < 10; ++i) a_[i] += o.a_[i];
    return *this;
  }
  constexpr BasicSymMat4& operator-=(const BasicSymMat4& o) noexcept {
    for (std::size_t i = 0; i < 10; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  constexpr BasicSymMat4& operator*=(T s) noexcept {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend constexpr BasicSymMat4 operator+(BasicSymMat4 a, const BasicSymMat4& b) noexcept { return a += b; }
  friend constexpr BasicSymMat4 operator-(BasicSymMat4 a, const BasicSymMat4& b) noexcept { return a -= b; }
  friend constexpr BasicSymMat4 operator-(BasicSymMat4 a) noexcept { return a *= T(-1); }
  friend constexpr BasicSymMat4 operator*(BasicSymMat4 a, T s) noexcept { return a *= s; }
  friend constexpr BasicSymMat4 operator*(T s, BasicSymMat4 a) noexcept { return a *= s; }

  friend constexpr bool operator==(const BasicSymMat4&, const BasicSymMat4&) = default;

 private:
  // Row-major upper triangle: (0,0) (0,1) (0,2) (0,3) (1,1) (1,2) (1,3) (2,2) (2,3) (3,3).
  static constexpr int index(int i, int j) noexcept {
    if (i > j) std::swap(i, j);
    constexpr int row_start[4] = {0, 4, 7, 9};
    return row_start[i] + (j - i);
  }

  std::array<T, 10> a_;
};

using SymMat4 = BasicSymMat4<double>;

/// Level k of the Garding cone Gamma_k+, 1 <= k <= 4.
class ConeLevel {
 public:
  explicit constexpr ConeLevel(int k) : k_(k) {
    if (k < 1 || k > 4) throw std::invalid_argument("cone level must lie in 1..4");
  }
  constexpr int value() const noexcept { return k_; }

 private:
  int k_;
};

// ---------------------------------------------------------------------------
// Basic linear algebra

/// Frobenius pairing <A, B> = sum_ij A_ij B_ij.
template <class T>
constexpr T inner(const BasicSymMat4<T>& a, const BasicSymMat4<T>& b) noexcept {
  T s = 0;
  for (int i = 0; i < 4; ++i) {
    s += a(i, i) * b(i, i);
    for (int j = i + 1; j < 4; ++j) s += T(2) * a(i, j) * b(i, j);
  }
  return s;
}

template <class T>
constexpr T dot(const BasicVec4<T>& x, const BasicVec4<T>& y) noexcept {
  return x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
}

/// Bilinear form A(X, Y).
template <class T>
constexpr T form(const BasicSymMat4<T>& a, const BasicVec4<T>& x, const BasicVec4<T>& y) noexcept {
  T s = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += x[i] * a(i, j) * y[j];
  return s;
}

/// (AB + BA)/2; equals AB whenever the factors commute.
template <class T>
constexpr BasicSymMat4<T> sym_product(const BasicSymMat4<T>& a, const BasicSymMat4<T>& b) noexcept {
  BasicSymMat4<T> m;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      T ab = 0, ba = 0;
      for (int l = 0; l < 4; ++l) {
        ab += a(i, l) * b(l, j);
        ba += b(i, l) * a(l, j);
      }
      m.set(i, j, T(0.5) * (ab + ba));
    }
  return m;
}

/// Congruence Q^T A Q.
template <class T>
BasicSymMat4<T> conjugate(const BasicSymMat4<T>& a, const Eigen::Matrix<T, 4, 4>& q) {
  return BasicSymMat4<T>::from_dense(q.transpose() * a.dense() * q);
}

template <class T>
Eigen::Matrix<T, 4, 1> eigenvalues(const BasicSymMat4<T>& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<T, 4, 4>> es(a.dense(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// ---------------------------------------------------------------------------
// Elementary symmetric polynomials

namespace detail {

template <class T>
constexpr T det3(const BasicSymMat4<T>& a, int i, int j, int k) noexcept {
  return a(i, i) * (a(j, j) * a(k, k) - a(j, k) * a(j, k)) -
         a(i, j) * (a(i, j) * a(k, k) - a(j, k) * a(i, k)) +
         a(i, k) * (a(i, j) * a(j, k) - a(j, j) * a(i, k));
}

/// sigma_k for 0 <= k <= 4 as the sum of k x k principal minors (sigma_0 = 1).
template <class T>
constexpr T elementary(const BasicSymMat4<T>& a, int k) noexcept {
  switch (k) {
    case 0:
      return T(1);
    case 1:
      return a.trace();
    case 2: {
      T s = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) s += a(i, i) * a(j, j) - a(i, j) * a(i, j);
      return s;
    }
    case 3:
      return det3(a, 1, 2, 3) + det3(a, 0, 2, 3) + det3(a, 0, 1, 3) + det3(a, 0, 1, 2);
    case 4: {
      // Cofactor expansion along the first row.
      return a(0, 0) * det3(a, 1, 2, 3) -
             a(0, 1) * (a(1, 0) * (a(2, 2) * a(3, 3) - a(2, 3) * a(3, 2)) -
                        a(1, 2) * (a(2, 0) * a(3, 3) - a(2, 3) * a(3, 0)) +
                        a(1, 3) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0))) +
             a(0, 2) * (a(1, 0) * (a(2, 1) * a(3, 3) - a(2, 3) * a(3, 1)) -
                        a(1, 1) * (a(2, 0) * a(3, 3) - a(2, 3) * a(3, 0)) +
                        a(1, 3) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0))) -
             a(0, 3) * (a(1, 0) * (a(2, 1) * a(3, 2) - a(2, 2) * a(3, 1)) -
                        a(1, 1) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0)) +
                        a(1, 2) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0)));
    }
    default:
      return T(0);
  }
}

constexpr int factorial(int n) noexcept { return n <= 1 ? 1 : n * factorial(n - 1); }

constexpr int permutation_sign(const std::array<int, 5>& p, int m) noexcept {
  int inversions = 0;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      if (p[a] > p[b]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

/// Calls visit(upper, perm, sign) for every nonzero entry of the generalized
/// Kronecker delta with m upper indices drawn from {0..3}: `upper` runs over
/// ordered tuples of distinct indices and the lower tuple is upper[perm[a]].
template <class Visit>
void for_each_delta_term(int m, Visit&& visit) {
  std::array<int, 5> upper{};
  auto recurse = [&](auto&& self, int depth) -> void {
    if (depth == m) {
      std::array<int, 5> perm{0, 1, 2, 3, 4};
      do {
        visit(upper, perm, permutation_sign(perm, m));
      } while (std::next_permutation(perm.begin(), perm.begin() + m));
      return;
    }
    for (int v = 0; v < 4; ++v) {
      bool used = false;
      for (int d = 0; d < depth; ++d) used = used || upper[d] == v;
      if (used) continue;
      upper[depth] = v;
      self(self, depth + 1);
    }
  };
  recurse(recurse, 0);
}

}  // namespace detail

/// k-th elementary symmetric polynomial of the eigenvalues of A.
template <class T>
constexpr T sigma(const BasicSymMat4<T>& a, ConeLevel k) noexcept {
  return detail::elementary(a, k.value());
}

/// Newton transform T_k(A) by the recursion T_0 = I, T_k = sigma_k(A) I - A T_{k-1}(A).
template <class T>
BasicSymMat4<T> newton(const BasicSymMat4<T>& a, int k) {
  if (k < 0 || k > 3) throw std::invalid_argument("newton: order must lie in 0..3");
  auto t = BasicSymMat4<T>::identity();
  for (int r = 1; r <= k; ++r)
    t = BasicSymMat4<T>::identity(detail::elementary(a, r)) - sym_product(a, t);
  return t;
}

/// Generalized Newton transform
///   [T_k]_ij(A_1..A_k) = (1/k!) delta^{i i_1..i_k}_{j j_1..j_k} (A_1)_{i_1 j_1} ... (A_k)_{i_k j_k}.
/// With this normalization newton_multi(A, .., A) = newton(A, k) exactly.
template <class T>
BasicSymMat4<T> newton_multi(std::span<const BasicSymMat4<T>> mats) {
  const int k = static_cast<int>(mats.size());
  if (k < 1 || k > 3) throw std::invalid_argument("newton_multi: need 1..3 matrices");
  Eigen::Matrix<T, 4, 4> acc = Eigen::Matrix<T, 4, 4>::Zero();
  detail::for_each_delta_term(k + 1, [&](const auto& up, const auto& perm, int sign) {
    T term = T(sign);
    for (int a = 1; a <= k; ++a) term *= mats[a - 1](up[a], up[perm[a]]);
    acc(up[0], up[perm[0]]) += term;
  });
  acc /= T(detail::factorial(k));
  return BasicSymMat4<T>::from_dense(acc);
}

/// Polarized sigma_k
///   Sigma_k(A_1..A_k) = (1/(k-1)!) delta^{i_1..i_k}_{j_1..j_k} (A_1)_{i_1 j_1} ... (A_k)_{i_k j_k}.
/// The diagonal restriction is sigma_polarized(A, .., A) = k * sigma_k(A).
template <class T>
T sigma_polarized(std::span<const BasicSymMat4<T>> mats) {
  const int k = static_cast<int>(mats.size());
  if (k < 1 || k > 4) throw std::invalid_argument("sigma_polarized: need 1..4 matrices");
  T acc = 0;
  detail::for_each_delta_term(k, [&](const auto& up, const auto& perm, int sign) {
    T term = T(sign);
    for (int a = 0; a < k; ++a) term *= mats[a](up[a], up[perm[a]]);
    acc += term;
  });
  return acc / T(detail::factorial(k - 1));
}

/// Constant c with sigma_polarized(A, .., A) = c * sigma(A, k).
constexpr double sigma_polarized_diagonal_constant(int k) noexcept { return k; }

/// First level j <= k at which sigma_j(A) <= 0, or 0 if A is in Gamma_k+.
template <class T>
constexpr int first_cone_violation(const BasicSymMat4<T>& a, ConeLevel k) noexcept {
  for (int j = 1; j <= k.value(); ++j)
    if (!(detail::elementary(a, j) > T(0))) return j;
  return 0;
}

/// True iff sigma_j(A) > 0 for every j <= k (strict, no tolerance).
template <class T>
constexpr bool in_cone(const BasicSymMat4<T>& a, ConeLevel k) noexcept {
  return first_cone_violation(a, k) == 0;
}

template <class T>
void require_cone(const BasicSymMat4<T>& a, ConeLevel k, const std::string& name) {
  if (int j = first_cone_violation(a, k); j != 0)
    throw ConeMembershipError(name, k.value(), static_cast<double>(detail::elementary(a, j)));
}

// ---------------------------------------------------------------------------
// Matrix lemmas

/// Two evaluations of one quantity (identities) or the two sides of an
/// inequality lhs >= rhs.
template <class T>
struct Sides {
  T lhs;
  T rhs;
  T difference() const noexcept { return lhs - rhs; }
};

/// (sigma_k(A - X(x)X), sigma_k(A) - <T_{k-1}(A), X(x)X>); the components agree.
template <class T>
Sides<T> rank_one_drop(const BasicSymMat4<T>& a, const BasicVec4<T>& x, ConeLevel k) {
  const auto xx = BasicSymMat4<T>::outer(x);
  return {sigma(a - xx, k), sigma(a, k) - inner(newton(a, k.value() - 1), xx)};
}

/// (<T_k(A - X(x)X), X(x)X>, <T_k(A), X(x)X>) for 0 <= k <= 3; the components agree.
template <class T>
Sides<T> rank_one_newton_pairing(const BasicSymMat4<T>& a, const BasicVec4<T>& x, int k) {
  const auto xx = BasicSymMat4<T>::outer(x);
  return {inner(newton(a - xx, k), xx), inner(newton(a, k), xx)};
}

/// (<T_1(B), A>^2, 4 sigma_2(A) sigma_2(B)); lhs >= rhs on Gamma_2+.
template <class T>
Sides<T> t1_cauchy_schwarz(const BasicSymMat4<T>& a, const BasicSymMat4<T>& b) {
  require_cone(a, ConeLevel{2}, "A");
  require_cone(b, ConeLevel{2}, "B");
  const T p = inner(newton(b, 1), a);
  return {p * p, T(4) * sigma(a, ConeLevel{2}) * sigma(b, ConeLevel{2})};
}

/// -T_1(X,X) T_1(Y,Y) + T_1(X,Y)^2 + sigma_2(A) (|X|^2|Y|^2 - <X,Y>^2), which is
/// nonpositive for A in Gamma_2+.
template <class T>
T sg_quadratic(const BasicSymMat4<T>& a, const BasicVec4<T>& x, const BasicVec4<T>& y) {
  require_cone(a, ConeLevel{2}, "A");
  const auto t1 = newton(a, 1);
  const T txx = form(t1, x, x), tyy = form(t1, y, y), txy = form(t1, x, y);
  const T xy = dot(x, y);
  return -txx * tyy + txy * txy + sigma(a, ConeLevel{2}) * (dot(x, x) * dot(y, y) - xy * xy);
}

}  // namespace sigma2
