#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sigma2/sphere.hpp"

namespace sigma2 {

/// A RadialField for each node of a uniform time grid on [t_begin, t_end]
/// (by default [0, 1]). Slices are stored contiguously, time-major.
class SpacetimeField {
 public:
  SpacetimeField() = default;
  SpacetimeField(std::size_t n_theta, std::size_t n_time, double t_begin = 0.0, double t_end = 1.0)
      : n_theta_(n_theta), n_time_(n_time), t0_(t_begin), t1_(t_end), v_(n_theta * n_time, 0.0) {
    if (n_time < 3) throw std::invalid_argument("SpacetimeField: need at least 3 time nodes");
    if (!(t_end > t_begin)) throw std::invalid_argument("SpacetimeField: empty time interval");
  }

  std::size_t n_theta() const noexcept { return n_theta_; }
  std::size_t n_time() const noexcept { return n_time_; }
  double t_begin() const noexcept { return t0_; }
  double t_end() const noexcept { return t1_; }
  double dt() const noexcept { return (t1_ - t0_) / static_cast<double>(n_time_ - 1); }
  double time(std::size_t n) const noexcept { return t0_ + dt() * static_cast<double>(n); }

  double& operator()(std::size_t j, std::size_t n) { return v_[n * n_theta_ + j]; }
  double operator()(std::size_t j, std::size_t n) const { return v_[n * n_theta_ + j]; }

  std::vector<double>& data() noexcept { return v_; }
  const std::vector<double>& data() const noexcept { return v_; }

  RadialField slice(std::size_t n) const {
    return RadialField(std::vector<double>(v_.begin() + static_cast<std::ptrdiff_t>(n * n_theta_),
                                           v_.begin() + static_cast<std::ptrdiff_t>((n + 1) * n_theta_)));
  }

  void set_slice(std::size_t n, const RadialField& f) {
    if (f.size() != n_theta_) throw std::invalid_argument("set_slice: size mismatch");
    for (std::size_t j = 0; j < n_theta_; ++j) (*this)(j, n) = f[j];
  }

  bool same_shape(const SpacetimeField& o) const noexcept {
    return n_theta_ == o.n_theta_ && n_time_ == o.n_time_ && t0_ == o.t0_ && t1_ == o.t1_;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  /// Sup norm over the interior time slices only.
  double interior_max_abs() const noexcept {
    double m = 0.0;
    for (std::size_t n = 1; n + 1 < n_time_; ++n)
      for (std::size_t j = 0; j < n_theta_; ++j) m = std::max(m, std::abs((*this)(j, n)));
    return m;
  }

  SpacetimeField& operator+=(const SpacetimeField& o) {
    require_shape(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  SpacetimeField& operator-=(const SpacetimeField& o) {
    require_shape(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  SpacetimeField& operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
  }
  friend SpacetimeField operator+(SpacetimeField a, const SpacetimeField& b) { return a += b; }
  friend SpacetimeField operator-(SpacetimeField a, const SpacetimeField& b) { return a -= b; }
  friend SpacetimeField operator*(double s, SpacetimeField a) { return a *= s; }

 private:
  void require_shape(const SpacetimeField& o) const {
    if (!same_shape(o)) throw std::invalid_argument("SpacetimeField: shape mismatch");
  }

  std::size_t n_theta_ = 0, n_time_ = 0;
  double t0_ = 0.0, t1_ = 1.0;
  std::vector<double> v_;
};

/// du/dt: centered in the interior, second-order one-sided at the two ends.
inline SpacetimeField time_derivative(const SpacetimeField& u) {
  SpacetimeField out(u.n_theta(), u.n_time(), u.t_begin(), u.t_end());
  const std::size_t nt = u.n_time();
  const double dt = u.dt();
  for (std::size_t j = 0; j < u.n_theta(); ++j) {
    out(j, 0) = (-3.0 * u(j, 0) + 4.0 * u(j, 1) - u(j, 2)) / (2.0 * dt);
    out(j, nt - 1) = (3.0 * u(j, nt - 1) - 4.0 * u(j, nt - 2) + u(j, nt - 3)) / (2.0 * dt);
    for (std::size_t n = 1; n + 1 < nt; ++n) out(j, n) = (u(j, n + 1) - u(j, n - 1)) / (2.0 * dt);
  }
  return out;
}

/// d^2u/dt^2: centered in the interior, second-order one-sided at the ends
/// (needs at least four time nodes for the one-sided formula).
inline SpacetimeField second_time_derivative(const SpacetimeField& u) {
  SpacetimeField out(u.n_theta(), u.n_time(), u.t_begin(), u.t_end());
  const std::size_t nt = u.n_time();
  const double dt2 = u.dt() * u.dt();
  for (std::size_t j = 0; j < u.n_theta(); ++j) {
    for (std::size_t n = 1; n + 1 < nt; ++n)
      out(j, n) = (u(j, n + 1) - 2.0 * u(j, n) + u(j, n - 1)) / dt2;
    if (nt >= 4) {
      out(j, 0) = (2.0 * u(j, 0) - 5.0 * u(j, 1) + 4.0 * u(j, 2) - u(j, 3)) / dt2;
      out(j, nt - 1) = (2.0 * u(j, nt - 1) - 5.0 * u(j, nt - 2) + 4.0 * u(j, nt - 3) - u(j, nt - 4)) / dt2;
    } else {
      out(j, 0) = out(j, 1);
      out(j, nt - 1) = out(j, nt - 2);
    }
  }
  return out;
}

}  // namespace sigma2
