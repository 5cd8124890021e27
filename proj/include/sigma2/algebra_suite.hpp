#pragma once

// Batch verification of the symmetric-function matrix lemmas on seeded
// random instances. Each check reports its largest violation: |lhs - rhs| for
// identities, the amount by which an inequality fails otherwise (0 if it holds).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigma2/random.hpp"
#include "sigma2/sampling.hpp"
#include "sigma2/symcone.hpp"

namespace sigma2 {

inline constexpr double identity_tolerance = 1e-10;
inline constexpr double inequality_slack = 1e-12;

struct PropertyCheck {
  std::string name;
  std::string kind;  // "identity", "inequality" or "equality-case"
  std::size_t samples = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool passed() const noexcept { return max_violation <= tolerance; }
};

struct AlgebraReport {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::vector<PropertyCheck> checks;
  bool passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed(); });
  }
  const PropertyCheck* first_failure() const noexcept {
    for (const auto& c : checks)
      if (!c.passed()) return &c;
    return nullptr;
  }
};

struct AlgebraOptions {
  std::uint64_t seed = 20240611;
  std::size_t samples = 10'000;
  bool break_cone = false;  // feeds a matrix outside Gamma_2+ to the Cauchy-Schwarz check
};

namespace detail {

inline double min_eigenvalue(const SymMat4& a) { return eigenvalues(a).minCoeff(); }

inline double max_entry_diff(const SymMat4& a, const SymMat4& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace detail

/// Runs every lemma check. A cone precondition failure (only reachable with
/// break_cone) propagates as ConeMembershipError.
inline AlgebraReport verify_algebra(const AlgebraOptions& opt = {}) {
  AlgebraReport rep;
  rep.seed = opt.seed;
  rep.samples = opt.samples;
  SplitMix64 root(opt.seed);
  const std::size_t n = opt.samples;

  // References returned by add() must stay valid while later checks are added.
  rep.checks.reserve(32);
  auto add = [&](std::string name, std::string kind, double tol) -> PropertyCheck& {
    rep.checks.push_back({std::move(name), std::move(kind), n, 0.0, tol});
    return rep.checks.back();
  };

  // Orthogonal invariance of sigma_k.
  {
    auto rng = root.fork();
    auto& c = add("sigma_conjugation_invariance", "identity", identity_tolerance);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = sampling::symmetric(rng);
      const auto q = sampling::orthogonal(rng);
      const auto b = conjugate(a, q);
      for (int k = 1; k <= 4; ++k)
        c.max_violation = std::max(c.max_violation, std::abs(sigma(a, ConeLevel{k}) - sigma(b, ConeLevel{k})));
    }
  }

  // Diagonal restrictions of the multilinear forms.
  {
    auto rng = root.fork();
    auto& c = add("newton_multi_diagonal", "identity", identity_tolerance);
    auto& d = add("sigma_polarized_diagonal", "identity", identity_tolerance);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = sampling::symmetric(rng);
      const std::array<SymMat4, 4> same{a, a, a, a};
      for (int k = 1; k <= 3; ++k)
        c.max_violation = std::max(c.max_violation, detail::max_entry_diff(newton_multi<double>(std::span(same.data(), k)),
                                                                           newton(a, k)));
      for (int k = 1; k <= 4; ++k)
        d.max_violation = std::max(d.max_violation,
                                   std::abs(sigma_polarized<double>(std::span(same.data(), k)) -
                                            sigma_polarized_diagonal_constant(k) * sigma(a, ConeLevel{k})));
    }
  }

  // Positivity and monotonicity of the polarized forms on Gamma_k+.
  {
    auto rng = root.fork();
    auto& pd = add("newton_multi_positive_definite", "inequality", inequality_slack);
    auto& pos = add("sigma_polarized_positive", "inequality", inequality_slack);
    auto& mono = add("sigma_polarized_monotone", "inequality", inequality_slack);
    for (std::size_t i = 0; i < n; ++i) {
      const int k = 2 + static_cast<int>(i % 3);
      const ConeLevel level{k};
      std::array<SymMat4, 4> mats;
      for (int a = 0; a < k; ++a) mats[a] = sampling::cone_matrix(rng, level);
      const auto t = newton_multi<double>(std::span<const SymMat4>(mats.data(), k - 1));
      pd.max_violation = std::max(pd.max_violation, -detail::min_eigenvalue(t));
      const double full = sigma_polarized<double>(std::span<const SymMat4>(mats.data(), k));
      pos.max_violation = std::max(pos.max_violation, -full);
      // B = A - P^T P / 4 precedes A; Sigma is linear in the first slot.
      auto lower = mats;
      lower[0] = mats[0] - 0.25 * sampling::positive_definite(rng);
      const double below = sigma_polarized<double>(std::span<const SymMat4>(lower.data(), k));
      mono.max_violation = std::max(mono.max_violation, below - full);
    }
  }

  // T_{k-1} is monotone along positive definite increments within Gamma_k+.
  {
    auto rng = root.fork();
    auto& c = add("newton_monotone", "inequality", inequality_slack);
    for (std::size_t i = 0; i < n; ++i) {
      const int k = 1 + static_cast<int>(i % 4);
      const auto a = sampling::cone_matrix(rng, ConeLevel{k});
      const auto b = a + sampling::positive_definite(rng);
      c.max_violation = std::max(c.max_violation, -detail::min_eigenvalue(newton(b, k - 1) - newton(a, k - 1)));
    }
  }

  // Rank-one drop and its companion identity.
  {
    auto rng = root.fork();
    auto& drop = add("rank_one_drop", "identity", identity_tolerance);
    auto& pair = add("rank_one_newton_pairing", "identity", identity_tolerance);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = sampling::symmetric(rng);
      const auto x = sampling::vector(rng);
      for (int k = 1; k <= 4; ++k)
        drop.max_violation = std::max(drop.max_violation, std::abs(rank_one_drop(a, x, ConeLevel{k}).difference()));
      for (int k = 0; k <= 3; ++k)
        pair.max_violation = std::max(pair.max_violation, std::abs(rank_one_newton_pairing(a, x, k).difference()));
    }
  }

  // <T_1(B), A>^2 >= 4 sigma_2(A) sigma_2(B).
  {
    auto rng = root.fork();
    auto& c = add("t1_cauchy_schwarz", "inequality", inequality_slack);
    for (std::size_t i = 0; i < n; ++i) {
      auto a = sampling::cone_matrix(rng, ConeLevel{2});
      const auto b = sampling::cone_matrix(rng, ConeLevel{2});
      if (opt.break_cone && i == n / 2) a = SymMat4::diagonal(1.0, -1.0, -1.0, 0.5);
      c.max_violation = std::max(c.max_violation, -t1_cauchy_schwarz(a, b).difference());
    }
    auto& eq = add("t1_cauchy_schwarz_equality", "equality-case", 0.0);
    eq.samples = 1;
    const auto half = SymMat4::identity(0.5);
    eq.max_violation = std::abs(t1_cauchy_schwarz(half, half).difference());
  }

  // The sectional-curvature quadratic is nonpositive on Gamma_2+.
  {
    auto rng = root.fork();
    auto& c = add("sg_quadratic_nonpositive", "inequality", inequality_slack);
    auto& eq = add("sg_quadratic_parallel", "equality-case", 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = sampling::cone_matrix(rng, ConeLevel{2});
      const auto x = sampling::vector(rng);
      const auto y = sampling::vector(rng);
      c.max_violation = std::max(c.max_violation, sg_quadratic(a, x, y));
      // Y = 2X: scaling by two is exact, so the cancellation is too.
      const Vec4 y2{2 * x[0], 2 * x[1], 2 * x[2], 2 * x[3]};
      eq.max_violation = std::max(eq.max_violation, std::abs(sg_quadratic(a, x, x)) + std::abs(sg_quadratic(a, x, y2)));
    }
  }

  return rep;
}

}  // namespace sigma2
