#pragma once

// Maximal monotone operator kinds.  Each operator exposes its resolvent
// J_{aA} = (I + aA)^{-1} for any step a > 0 and, when it is a single-valued
// map, the forward evaluation A(x).  Operators are immutable after
// construction; resolvent caches (factorizations keyed on the step) are
// guarded by a mutex so concurrent evaluation stays safe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "opsplit/common.hpp"
#include "opsplit/dense.hpp"
#include "opsplit/transforms.hpp"

namespace opsplit {

inline void check_step(double alpha, const char* where) {
    if (!(alpha > 0.0))
        throw std::invalid_argument(std::string(where) + ": step must be positive");
}

inline double soft_threshold(double t, double tau) {
    if (t > tau) return t - tau;
    if (t < -tau) return t + tau;
    return 0.0;
}

// Euclidean projection onto the probability simplex {x >= 0, sum x = 1},
// via the sorted-threshold rule.
inline Vector project_simplex(const Vector& z) {
    const std::size_t d = z.size();
    if (d == 0) throw DimensionError("project_simplex: empty vector");
    Vector u(z);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < d; ++j) {
        cum += u[j];
        double t = (cum - 1.0) / double(j + 1);
        if (u[j] - t > 0.0) {
            rho = j + 1;
            tau = t;
        }
    }
    Vector x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = std::max(z[i] - tau, 0.0);
    return x;
}

class MonotoneOp {
  public:
    virtual ~MonotoneOp() = default;

    // J_{aA}(z); total on R^d for every a > 0 by maximal monotonicity.
    virtual Vector resolvent(double alpha, const Vector& z) const = 0;

    // A(x) where the operator is a single-valued map; SetValuedError otherwise.
    virtual Vector forward(const Vector& x) const {
        throw SetValuedError(name() + ": forward evaluation of a set-valued operator");
    }

    virtual bool single_valued() const { return false; }
    virtual std::string name() const = 0;

    // Intrinsic dimension when the operator carries data; nullopt means the
    // operator acts on any dimension.
    virtual std::optional<std::size_t> dim() const { return std::nullopt; }
};

using OpPtr = std::shared_ptr<const MonotoneOp>;

class ZeroOp final : public MonotoneOp {
  public:
    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "ZeroOp");
        return z;
    }
    Vector forward(const Vector& x) const override { return Vector(x.size(), 0.0); }
    bool single_valued() const override { return true; }
    std::string name() const override { return "zero"; }
};

// x -> Mx + c with M + M^T positive semidefinite.
class AffineLinearOp final : public MonotoneOp {
  public:
    AffineLinearOp(Matrix m, Vector c) : m_(std::move(m)), c_(std::move(c)) {
        if (m_.rows() != m_.cols()) throw DimensionError("AffineLinear: matrix not square");
        check_dim(c_, m_.rows(), "AffineLinear");
        Matrix sym(m_.rows(), m_.rows());
        for (std::size_t i = 0; i < m_.rows(); ++i)
            for (std::size_t j = 0; j < m_.rows(); ++j)
                sym(i, j) = 0.5 * (m_(i, j) + m_(j, i));
        if (min_symmetric_eigenvalue(sym) < -1e-10)
            throw InfeasibleParams("AffineLinear: M + M^T has a negative eigenvalue");
    }

    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "AffineLinear");
        check_dim(z, m_.rows(), "AffineLinear::resolvent");
        std::shared_ptr<const LuFactor> f;
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (!lu_ || cached_alpha_ != alpha) {
                Matrix s = Matrix::identity(m_.rows());
                for (std::size_t i = 0; i < m_.rows(); ++i)
                    for (std::size_t j = 0; j < m_.rows(); ++j) s(i, j) += alpha * m_(i, j);
                lu_ = std::make_shared<LuFactor>(std::move(s));
                cached_alpha_ = alpha;
            }
            f = lu_;
        }
        return f->solve(axpy(z, -alpha, c_));
    }

    Vector forward(const Vector& x) const override {
        check_dim(x, m_.rows(), "AffineLinear::forward");
        return add(m_.matvec(x), c_);
    }

    bool single_valued() const override { return true; }
    std::string name() const override { return "affine_linear"; }
    std::optional<std::size_t> dim() const override { return m_.rows(); }

    const Matrix& matrix() const { return m_; }
    const Vector& offset() const { return c_; }

  private:
    Matrix m_;
    Vector c_;
    mutable std::mutex mu_;
    mutable double cached_alpha_ = -1.0;
    mutable std::shared_ptr<const LuFactor> lu_;
};

// Skew action kappa * [[0,1],[-1,0]] on the first two coordinates, zero map
// on the rest.  The resolvent has the closed-form 2x2 inverse, so no solve.
class SkewRotation2DOp final : public MonotoneOp {
  public:
    explicit SkewRotation2DOp(double kappa) : kappa_(kappa) {}

    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "SkewRotation2D");
        if (z.size() < 2) throw DimensionError("SkewRotation2D: dimension must be at least 2");
        const double ak = alpha * kappa_;
        const double det = 1.0 + ak * ak;
        Vector x(z);
        x[0] = (z[0] - ak * z[1]) / det;
        x[1] = (ak * z[0] + z[1]) / det;
        return x;
    }

    Vector forward(const Vector& x) const override {
        if (x.size() < 2) throw DimensionError("SkewRotation2D: dimension must be at least 2");
        Vector y(x.size(), 0.0);
        y[0] = kappa_ * x[1];
        y[1] = -kappa_ * x[0];
        return y;
    }

    bool single_valued() const override { return true; }
    std::string name() const override { return "skew_rotation_2d"; }
    double kappa() const { return kappa_; }

  private:
    double kappa_;
};

// Subdifferential of weight * ||x_mask - a||_1; coordinates off the mask are
// unpenalized, so the resolvent leaves them alone.
class L1OffsetOp final : public MonotoneOp {
  public:
    L1OffsetOp(Vector a, std::vector<std::size_t> mask, double weight)
        : a_(std::move(a)), mask_(std::move(mask)), weight_(weight) {
        if (a_.size() != mask_.size())
            throw DimensionError("L1Offset: offset and mask sizes differ");
        if (!(weight_ > 0.0)) throw InfeasibleParams("L1Offset: weight must be positive");
    }

    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "L1Offset");
        Vector x(z);
        const double tau = alpha * weight_;
        for (std::size_t k = 0; k < mask_.size(); ++k) {
            std::size_t i = mask_[k];
            if (i >= z.size()) throw DimensionError("L1Offset: mask index out of range");
            x[i] = a_[k] + soft_threshold(z[i] - a_[k], tau);
        }
        return x;
    }

    std::string name() const override { return "l1_offset"; }
    const Vector& offset() const { return a_; }
    const std::vector<std::size_t>& mask() const { return mask_; }
    double weight() const { return weight_; }

  private:
    Vector a_;
    std::vector<std::size_t> mask_;
    double weight_;
};

// Subdifferential of weight * ||Ux - b||_1 for an orthogonal U; the prox is
// a soft-threshold conjugated by the transform.
class UnitaryL1Op final : public MonotoneOp {
  public:
    UnitaryL1Op(TransformPtr u, Vector b, double weight)
        : u_(std::move(u)), b_(std::move(b)), weight_(weight) {
        if (!u_) throw MalformedSystem("UnitaryL1: null transform handle");
        if (!(weight_ > 0.0)) throw InfeasibleParams("UnitaryL1: weight must be positive");
    }

    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "UnitaryL1");
        check_dim(z, b_.size(), "UnitaryL1::resolvent");
        Vector w = u_->forward(z);
        const double tau = alpha * weight_;
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = b_[i] + soft_threshold(w[i] - b_[i], tau);
        return u_->inverse(w);
    }

    std::string name() const override { return "unitary_l1"; }
    std::optional<std::size_t> dim() const override { return b_.size(); }
    const TransformPtr& transform() const { return u_; }
    const Vector& target() const { return b_; }
    double weight() const { return weight_; }

  private:
    TransformPtr u_;
    Vector b_;
    double weight_;
};

class IndicatorNonnegOp final : public MonotoneOp {
  public:
    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "IndicatorNonneg");
        Vector x(z);
        for (auto& v : x) v = std::max(v, 0.0);
        return x;
    }
    std::string name() const override { return "indicator_nonneg"; }
};

class IndicatorSimplexOp final : public MonotoneOp {
  public:
    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "IndicatorSimplex");
        return project_simplex(z);
    }
    std::string name() const override { return "indicator_simplex"; }
};

// Normal cone of {x : mu^T x >= b}.
class IndicatorHalfspaceOp final : public MonotoneOp {
  public:
    IndicatorHalfspaceOp(Vector mu, double b) : mu_(std::move(mu)), b_(b) {
        mu_norm2_ = dot(mu_, mu_);
        if (mu_norm2_ == 0.0) throw InfeasibleParams("IndicatorHalfspace: normal must be nonzero");
    }

    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "IndicatorHalfspace");
        check_dim(z, mu_.size(), "IndicatorHalfspace::resolvent");
        const double g = dot(mu_, z);
        if (g >= b_) return z;
        return axpy(z, (b_ - g) / mu_norm2_, mu_);
    }

    std::string name() const override { return "indicator_halfspace"; }
    std::optional<std::size_t> dim() const override { return mu_.size(); }
    const Vector& normal() const { return mu_; }
    double level() const { return b_; }

  private:
    Vector mu_;
    double b_;
    double mu_norm2_;
};

// Gradient of f(x) = 1/2 sum_i (a_i^T x - b)^2 over the rows a_i of A.  The
// resolvent solves (I + a A^T A) x = z + a A^T (b 1); the Cholesky factor is
// cached and rebuilt only when the step changes.
class QuadraticLSOp final : public MonotoneOp {
  public:
    QuadraticLSOp(Matrix a, double target) : a_(std::move(a)), target_(target) {
        if (a_.rows() == 0 || a_.cols() == 0)
            throw DimensionError("QuadraticLS: empty data matrix");
        atb_ = Vector(a_.cols(), 0.0);
        for (std::size_t i = 0; i < a_.rows(); ++i)
            for (std::size_t j = 0; j < a_.cols(); ++j) atb_[j] += a_(i, j) * target_;
    }

    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "QuadraticLS");
        check_dim(z, a_.cols(), "QuadraticLS::resolvent");
        std::shared_ptr<const CholeskyFactor> f;
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (!chol_ || cached_alpha_ != alpha) {
                Matrix s = gram(a_);
                for (std::size_t i = 0; i < s.rows(); ++i)
                    for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) *= alpha;
                for (std::size_t i = 0; i < s.rows(); ++i) s(i, i) += 1.0;
                chol_ = std::make_shared<CholeskyFactor>(std::move(s));
                cached_alpha_ = alpha;
            }
            f = chol_;
        }
        return f->solve(axpy(z, alpha, atb_));
    }

    Vector forward(const Vector& x) const override {
        check_dim(x, a_.cols(), "QuadraticLS::forward");
        Vector r = a_.matvec(x);
        for (auto& v : r) v -= target_;
        return a_.tmatvec(r);
    }

    bool single_valued() const override { return true; }
    std::string name() const override { return "quadratic_ls"; }
    std::optional<std::size_t> dim() const override { return a_.cols(); }
    const Matrix& rows_matrix() const { return a_; }
    double target() const { return target_; }

  private:
    Matrix a_;
    double target_;
    Vector atb_;
    mutable std::mutex mu_;
    mutable double cached_alpha_ = -1.0;
    mutable std::shared_ptr<const CholeskyFactor> chol_;
};

// Gradient of weight * sum_i (-y_i log x_i + x_i).  The resolvent has an
// elementwise closed form and maps into the operator's domain.
class PoissonNLLOp final : public MonotoneOp {
  public:
    PoissonNLLOp(Vector y, double weight) : y_(std::move(y)), weight_(weight) {
        for (double v : y_)
            if (v < 0.0) throw InfeasibleParams("PoissonNLL: counts must be nonnegative");
        if (!(weight_ > 0.0)) throw InfeasibleParams("PoissonNLL: weight must be positive");
    }

    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "PoissonNLL");
        check_dim(z, y_.size(), "PoissonNLL::resolvent");
        const double al = alpha * weight_;
        Vector x(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double t = z[i] - al;
            x[i] = 0.5 * (t + std::sqrt(t * t + 4.0 * al * y_[i]));
        }
        return x;
    }

    Vector forward(const Vector& x) const override {
        check_dim(x, y_.size(), "PoissonNLL::forward");
        Vector g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] <= 0.0)
                throw NumericalError("PoissonNLL::forward: point outside the domain x > 0");
            g[i] = weight_ * (1.0 - y_[i] / x[i]);
        }
        return g;
    }

    bool single_valued() const override { return true; }
    std::string name() const override { return "poisson_nll"; }
    std::optional<std::size_t> dim() const override { return y_.size(); }
    const Vector& counts() const { return y_; }
    double weight() const { return weight_; }

  private:
    Vector y_;
    double weight_;
};

// Normal cone of the singleton {0}; resolvent collapses everything to 0.
class NormalConeZeroOp final : public MonotoneOp {
  public:
    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "NormalConeZero");
        return Vector(z.size(), 0.0);
    }
    std::string name() const override { return "normal_cone_zero"; }
};

inline OpPtr make_zero() { return std::make_shared<ZeroOp>(); }
inline OpPtr make_affine(Matrix m, Vector c) {
    return std::make_shared<AffineLinearOp>(std::move(m), std::move(c));
}
inline OpPtr make_skew_rotation(double kappa) {
    return std::make_shared<SkewRotation2DOp>(kappa);
}
inline OpPtr make_l1_offset(Vector a, std::vector<std::size_t> mask, double weight) {
    return std::make_shared<L1OffsetOp>(std::move(a), std::move(mask), weight);
}
inline OpPtr make_unitary_l1(TransformPtr u, Vector b, double weight) {
    return std::make_shared<UnitaryL1Op>(std::move(u), std::move(b), weight);
}
inline OpPtr make_indicator_nonneg() { return std::make_shared<IndicatorNonnegOp>(); }
inline OpPtr make_indicator_simplex() { return std::make_shared<IndicatorSimplexOp>(); }
inline OpPtr make_indicator_halfspace(Vector mu, double b) {
    return std::make_shared<IndicatorHalfspaceOp>(std::move(mu), b);
}
inline OpPtr make_quadratic_ls(Matrix a, double target) {
    return std::make_shared<QuadraticLSOp>(std::move(a), target);
}
inline OpPtr make_poisson_nll(Vector y, double weight) {
    return std::make_shared<PoissonNLLOp>(std::move(y), weight);
}
inline OpPtr make_normal_cone_zero() { return std::make_shared<NormalConeZeroOp>(); }

}  // namespace opsplit
