#pragma once

// Shared fixtures for the test suite: random monotone affine operators, a
// resolvent-call counting decorator, and small brute-force oracles that stay
// independent of the library code paths they check.

#include <atomic>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "opsplit/dense.hpp"
#include "opsplit/operators.hpp"
#include "opsplit/rational.hpp"
#include "opsplit/rng.hpp"

namespace testutil {

using namespace opsplit;

// Independent membership oracle: c lies in the row space of m exactly when
// the transposed system M^T y = c^T is consistent, decided by eliminating
// the augmented transpose and looking for a contradictory row.
inline bool rowspace_implies_bruteforce(const RatMatrix& m, const RatRow& c) {
    const std::size_t cols = c.size();
    const std::size_t k = m.size();
    RatMatrix aug(cols, RatRow(k + 1, Rational(0)));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < cols; ++j) aug[j][i] = m[i][j];
    for (std::size_t j = 0; j < cols; ++j) aug[j][k] = c[j];

    std::size_t r = 0;
    for (std::size_t col = 0; col < k && r < cols; ++col) {
        std::size_t piv = r;
        while (piv < cols && aug[piv][col] == 0) ++piv;
        if (piv == cols) continue;
        std::swap(aug[r], aug[piv]);
        for (std::size_t i = 0; i < cols; ++i) {
            if (i == r || aug[i][col] == 0) continue;
            Rational f = aug[i][col] / aug[r][col];
            for (std::size_t jj = col; jj <= k; ++jj) aug[i][jj] -= f * aug[r][jj];
        }
        ++r;
    }
    for (std::size_t i = r; i < cols; ++i)
        if (aug[i][k] != 0) return false;
    return true;
}

// M = G^T G + (H - H^T) with ~1/sqrt(d) scaling keeps the symmetric part
// positive semidefinite and the conditioning moderate.
inline OpPtr random_monotone_affine(SplitMix64& rng, std::size_t d, double sym_scale = 1.0,
                                    double skew_scale = 1.0, double offset_scale = 1.0) {
    const double s = sym_scale / std::sqrt(double(d));
    Matrix g(d, d), m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) g(i, j) = s * rng.normal();
    m = gram(g);
    const double k = skew_scale / std::sqrt(double(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double h = k * rng.normal();
            m(i, j) += h;
            m(j, i) -= h;
        }
    Vector c(d);
    for (auto& v : c) v = offset_scale * rng.normal();
    return make_affine(std::move(m), std::move(c));
}

// Decorator that counts resolvent and forward evaluations; used by the
// frugality tests.
class CountingOp final : public MonotoneOp {
  public:
    explicit CountingOp(OpPtr inner) : inner_(std::move(inner)) {}
    Vector resolvent(double alpha, const Vector& z) const override {
        ++resolvent_calls_;
        return inner_->resolvent(alpha, z);
    }
    Vector forward(const Vector& x) const override {
        ++forward_calls_;
        return inner_->forward(x);
    }
    bool single_valued() const override { return inner_->single_valued(); }
    std::string name() const override { return inner_->name(); }
    std::optional<std::size_t> dim() const override { return inner_->dim(); }
    std::size_t resolvent_calls() const { return resolvent_calls_.load(); }
    std::size_t forward_calls() const { return forward_calls_.load(); }
    void reset() {
        resolvent_calls_ = 0;
        forward_calls_ = 0;
    }

  private:
    OpPtr inner_;
    mutable std::atomic<std::size_t> resolvent_calls_{0};
    mutable std::atomic<std::size_t> forward_calls_{0};
};

// Exhaustive simplex projection for d <= 6: tries every support set, solves
// the equality-constrained projection on it, keeps the feasible candidate
// with the smallest distance.
inline Vector simplex_projection_bruteforce(const Vector& z) {
    const std::size_t d = z.size();
    Vector best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
        std::vector<std::size_t> support;
        for (std::size_t i = 0; i < d; ++i)
            if (mask & (1u << i)) support.push_back(i);
        // On a fixed support the optimum is z_i - t with t chosen so the
        // entries sum to one.
        double sum = 0.0;
        for (std::size_t i : support) sum += z[i];
        const double t = (sum - 1.0) / double(support.size());
        Vector x(d, 0.0);
        bool feasible = true;
        for (std::size_t i : support) {
            x[i] = z[i] - t;
            if (x[i] < -1e-12) feasible = false;
        }
        if (!feasible) continue;
        // KKT: off-support entries need z_i <= t.
        for (std::size_t i = 0; i < d; ++i)
            if (!(mask & (1u << i)) && z[i] - t > 1e-12) feasible = false;
        if (!feasible) continue;
        const double dist = dist2(x, z);
        if (dist < best_dist) {
            best_dist = dist;
            best = x;
        }
    }
    return best;
}

// Prox of |q - p| by bisection on the gap subgradient; independent of the
// closed form under test.
inline std::pair<double, double> tv_pair_prox_bisect(double p0, double q0, double alpha) {
    // Minimize |g| + (g - g0)^2 / (4 alpha) over the gap g = q - p; the mean
    // is unaffected.  phi'(g) = sign(g) + (g - g0) / (2 alpha).
    const double g0 = q0 - p0;
    double g;
    if (std::abs(g0) <= 2.0 * alpha) {
        g = 0.0;  // subgradient 0 attainable at the kink
    } else {
        double lo, hi;
        if (g0 > 0) {
            lo = 0.0;
            hi = g0;
        } else {
            lo = g0;
            hi = 0.0;
        }
        // phi(g) = |g| + (g - g0)^2 / (4 alpha) is convex with increasing
        // derivative, so plain bisection on the sign of phi' converges.
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double s = mid > 0 ? 1.0 : (mid < 0 ? -1.0 : (g0 > 0 ? 1.0 : -1.0));
            const double grad = s + (mid - g0) / (2.0 * alpha);
            if (grad > 0)
                hi = mid;
            else
                lo = mid;
        }
        g = 0.5 * (lo + hi);
    }
    const double mean = 0.5 * (p0 + q0);
    return {mean - g / 2.0, mean + g / 2.0};
}

}  // namespace testutil
