#pragma once

// Small dense linear algebra: row-major matrices, LU and Cholesky
// factorizations for resolvent solves, and a Jacobi eigenvalue sweep used to
// certify monotonicity of affine operators.  Sizes stay small (at most a few
// hundred), so simplicity beats cleverness here.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "opsplit/common.hpp"

namespace opsplit {

class Matrix {
  public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    Vector matvec(const Vector& x) const {
        check_dim(x, cols_, "matvec");
        Vector y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += a_[i * cols_ + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    Vector tmatvec(const Vector& x) const {  // transpose times x
        check_dim(x, rows_, "tmatvec");
        Vector y(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) y[j] += a_[i * cols_ + j] * x[i];
        return y;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

  private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

// Gram matrix R^T R of the rows of R.
inline Matrix gram(const Matrix& r) {
    Matrix g(r.cols(), r.cols());
    for (std::size_t k = 0; k < r.rows(); ++k)
        for (std::size_t i = 0; i < r.cols(); ++i) {
            double rki = r(k, i);
            if (rki == 0.0) continue;
            for (std::size_t j = 0; j < r.cols(); ++j) g(i, j) += rki * r(k, j);
        }
    return g;
}

// LU with partial pivoting; kept around for repeated solves.
class LuFactor {
  public:
    explicit LuFactor(Matrix m) : lu_(std::move(m)), piv_(lu_.rows()) {
        const std::size_t n = lu_.rows();
        if (lu_.cols() != n) throw DimensionError("LuFactor: matrix not square");
        for (std::size_t i = 0; i < n; ++i) piv_[i] = i;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                double v = std::abs(lu_(i, k));
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (best == 0.0) throw NumericalError("LuFactor: singular matrix");
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
                std::swap(piv_[k], piv_[p]);
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                lu_(i, k) /= lu_(k, k);
                double lik = lu_(i, k);
                if (lik == 0.0) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= lik * lu_(k, j);
            }
        }
    }

    Vector solve(const Vector& b) const {
        const std::size_t n = lu_.rows();
        check_dim(b, n, "LuFactor::solve");
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[piv_[i]];
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
        for (std::size_t ii = n; ii-- > 0;) {
            for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu_(ii, j) * x[j];
            x[ii] /= lu_(ii, ii);
        }
        return x;
    }

  private:
    Matrix lu_;
    std::vector<std::size_t> piv_;
};

// Cholesky of a symmetric positive definite matrix.
class CholeskyFactor {
  public:
    explicit CholeskyFactor(Matrix m) : l_(std::move(m)) {
        const std::size_t n = l_.rows();
        if (l_.cols() != n) throw DimensionError("CholeskyFactor: matrix not square");
        for (std::size_t j = 0; j < n; ++j) {
            double d = l_(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
            if (d <= 0.0) throw NumericalError("CholeskyFactor: matrix not positive definite");
            l_(j, j) = std::sqrt(d);
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = l_(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
                l_(i, j) = s / l_(j, j);
            }
        }
    }

    Vector solve(const Vector& b) const {
        const std::size_t n = l_.rows();
        check_dim(b, n, "CholeskyFactor::solve");
        Vector x(b);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) x[i] -= l_(i, k) * x[k];
            x[i] /= l_(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= l_(k, ii) * x[k];
            x[ii] /= l_(ii, ii);
        }
        return x;
    }

  private:
    Matrix l_;
};

// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double min_symmetric_eigenvalue(Matrix a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionError("min_symmetric_eigenvalue: matrix not square");
    if (n == 0) return 0.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (tau >= 0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    double mn = a(0, 0);
    for (std::size_t i = 1; i < n; ++i) mn = std::min(mn, a(i, i));
    return mn;
}

}  // namespace opsplit
