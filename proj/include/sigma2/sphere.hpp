#pragma once

// Cohomogeneity-one model of the round four-sphere.
//
// A rotationally symmetric function is sampled at the cell centres
// theta_j = (j + 1/2) pi / n of a uniform polar-angle grid, so no node sits on
// a pole. xi = cos(theta) is the height coordinate, |grad xi|^2 = 1 - xi^2.
// Smooth symmetric functions are even in theta about both poles; ghost nodes
// are filled by even reflection, theta_{-1-j} = theta_j and
// theta_{n+j} = theta_{n-1-j}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace sigma2 {

/// Nodal samples of a rotationally symmetric scalar. Arithmetic is nodewise.
class RadialField {
 public:
  RadialField() = default;
  explicit RadialField(std::size_t n, double value = 0.0) : v_(n, value) {}
  explicit RadialField(std::vector<double> values) : v_(std::move(values)) {}

  std::size_t size() const noexcept { return v_.size(); }
  double& operator[](std::size_t j) { return v_[j]; }
  double operator[](std::size_t j) const { return v_[j]; }
  std::span<const double> values() const noexcept { return v_; }
  std::span<double> values() noexcept { return v_; }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }

  template <class Fn>
  RadialField map(Fn&& fn) const {
    RadialField out(size());
    for (std::size_t j = 0; j < size(); ++j) out.v_[j] = fn(v_[j]);
    return out;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  double min() const noexcept {
    double m = v_.empty() ? 0.0 : v_.front();
    for (double x : v_) m = std::min(m, x);
    return m;
  }
  double max() const noexcept {
    double m = v_.empty() ? 0.0 : v_.front();
    for (double x : v_) m = std::max(m, x);
    return m;
  }
  bool all_finite() const noexcept {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  RadialField& operator+=(const RadialField& o) { return zip(o, [](double& a, double b) { a += b; }); }
  RadialField& operator-=(const RadialField& o) { return zip(o, [](double& a, double b) { a -= b; }); }
  RadialField& operator*=(const RadialField& o) { return zip(o, [](double& a, double b) { a *= b; }); }
  RadialField& operator/=(const RadialField& o) { return zip(o, [](double& a, double b) { a /= b; }); }
  RadialField& operator+=(double s) {
    for (double& x : v_) x += s;
    return *this;
  }
  RadialField& operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
  }

  friend RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
  friend RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
  friend RadialField operator*(RadialField a, const RadialField& b) { return a *= b; }
  friend RadialField operator/(RadialField a, const RadialField& b) { return a /= b; }
  friend RadialField operator+(RadialField a, double s) { return a += s; }
  friend RadialField operator-(RadialField a, double s) { return a += -s; }
  friend RadialField operator*(RadialField a, double s) { return a *= s; }
  friend RadialField operator*(double s, RadialField a) { return a *= s; }
  friend RadialField operator-(RadialField a) { return a *= -1.0; }

  friend bool operator==(const RadialField&, const RadialField&) = default;

 private:
  template <class Op>
  RadialField& zip(const RadialField& o, Op op) {
    if (o.size() != size()) throw std::invalid_argument("RadialField: size mismatch");
    for (std::size_t j = 0; j < size(); ++j) op(v_[j], o.v_[j]);
    return *this;
  }

  std::vector<double> v_;
};

/// Eigenvalues of the Hessian of a radial function: `rad` along grad xi and
/// `tan` (multiplicity three) on the orthogonal 3-plane.
struct HessianEigen {
  RadialField rad;
  RadialField tan;
};

/// Polar-angle grid, finite-difference stencils and volume quadrature on S^4.
class RadialGrid {
 public:
  /// Five-point stencils: f'(x) ~ sum_k d1[k] f(x + (k-2)h) / h and
  /// f''(x) ~ sum_k d2[k] f(x + (k-2)h) / h^2, both fourth order.
  static constexpr std::array<double, 5> d1_stencil{1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  static constexpr std::array<double, 5> d2_stencil{-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};

  static constexpr double volume_exact = 8.0 * std::numbers::pi * std::numbers::pi / 3.0;

  explicit RadialGrid(std::size_t n_theta) : n_(n_theta) {
    if (n_theta < 8) throw std::invalid_argument("RadialGrid: need at least 8 nodes");
    h_ = std::numbers::pi / static_cast<double>(n_);
    theta_.resize(n_);
    xi_.resize(n_);
    sin_.resize(n_);
    cot_.resize(n_);
    weights_.resize(n_);
    constexpr double two_pi_sq = 2.0 * std::numbers::pi * std::numbers::pi;
    for (std::size_t j = 0; j < n_; ++j) {
      const double th = (static_cast<double>(j) + 0.5) * h_;
      theta_[j] = th;
      xi_[j] = std::cos(th);
      sin_[j] = std::sin(th);
      cot_[j] = xi_[j] / sin_[j];
      weights_[j] = two_pi_sq * h_ * sin_[j] * sin_[j] * sin_[j];
    }
    // Midpoint rule for g = f sin^3 on [0, pi]. g is odd about both poles, so
    // g' vanishes there and the first Euler-Maclaurin term drops out; the
    // h^4 term is -(7 h^4 / 5760) [g''']_0^pi = (7 h^4 / 960) (f(0) + f(pi)).
    // The pole values come from even extrapolation f(0) ~ (9 f_0 - f_1) / 8.
    // Net order: h^6 for smooth even f.
    const double c = two_pi_sq * 7.0 * std::pow(h_, 4) / 960.0;
    weights_[0] += c * 9.0 / 8.0;
    weights_[1] -= c / 8.0;
    weights_[n_ - 1] += c * 9.0 / 8.0;
    weights_[n_ - 2] -= c / 8.0;
  }

  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double theta(std::size_t j) const { return theta_[j]; }
  double xi(std::size_t j) const { return xi_[j]; }
  double sin_theta(std::size_t j) const { return sin_[j]; }
  double cot_theta(std::size_t j) const { return cot_[j]; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Index of the physical node holding the value of (possibly ghost) node i.
  std::size_t reflect(std::ptrdiff_t i) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    if (i < 0) return static_cast<std::size_t>(-i - 1);
    if (i >= n) return static_cast<std::size_t>(2 * n - 1 - i);
    return static_cast<std::size_t>(i);
  }

  RadialField constant(double c) const { return RadialField(n_, c); }

  /// Samples fn(xi) at every node.
  RadialField from_xi(const std::function<double(double)>& fn) const {
    RadialField f(n_);
    for (std::size_t j = 0; j < n_; ++j) f[j] = fn(xi_[j]);
    return f;
  }

  RadialField from_theta(const std::function<double(double)>& fn) const {
    RadialField f(n_);
    for (std::size_t j = 0; j < n_; ++j) f[j] = fn(theta_[j]);
    return f;
  }

  RadialField xi_field() const { return RadialField(xi_); }
  RadialField theta_field() const { return RadialField(theta_); }

  /// d^order f / d theta^order, order 1 or 2, fourth-order central differences.
  RadialField differentiate(const RadialField& f, int order) const {
    check(f);
    if (order != 1 && order != 2) throw std::invalid_argument("differentiate: order must be 1 or 2");
    const auto& st = order == 1 ? d1_stencil : d2_stencil;
    const double scale = order == 1 ? 1.0 / h_ : 1.0 / (h_ * h_);
    RadialField out(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 5; ++k)
        acc += st[k] * f[reflect(static_cast<std::ptrdiff_t>(j) + k - 2)];
      out[j] = acc * scale;
    }
    return out;
  }

  /// Integral over S^4 of the radial function, dV = 2 pi^2 sin^3(theta) d theta.
  double integrate_volume(const RadialField& f) const {
    check(f);
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += weights_[j] * f[j];
    return acc;
  }

  /// Discrete volume of the round metric (quadrature of 1).
  double volume() const { return integrate_volume(constant(1.0)); }

  /// |grad f|^2 = (d_theta f)^2 = (1 - xi^2) (d_xi f)^2.
  RadialField grad_sq(const RadialField& f) const {
    auto d = differentiate(f, 1);
    return d * d;
  }

  /// rad = (1 - xi^2) f_xixi - xi f_xi = f_thetatheta,
  /// tan = -xi f_xi = cot(theta) f_theta.
  HessianEigen hessian_eigen(const RadialField& f) const {
    HessianEigen h{differentiate(f, 2), differentiate(f, 1)};
    for (std::size_t j = 0; j < n_; ++j) h.tan[j] *= cot_[j];
    return h;
  }

  /// Laplace-Beltrami operator, (1 - xi^2) f_xixi - 4 xi f_xi.
  RadialField laplacian(const RadialField& f) const {
    auto h = hessian_eigen(f);
    return h.rad + 3.0 * h.tan;
  }

  void check(const RadialField& f) const {
    if (f.size() != n_) throw std::invalid_argument("field does not match grid size");
  }

 private:
  std::size_t n_;
  double h_;
  std::vector<double> theta_, xi_, sin_, cot_, weights_;
};

}  // namespace sigma2
