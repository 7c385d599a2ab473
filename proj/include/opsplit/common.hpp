#pragma once

// Shared scalar/vector plumbing and the error taxonomy used across the
// library.  Vectors are plain std::vector<double>; every consumer checks
// dimensions at its boundary and throws DimensionError on mismatch.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace opsplit {

using Vector = std::vector<double>;

struct DimensionError : std::invalid_argument {
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by forward() on operators that are not single-valued maps.
struct SetValuedError : std::logic_error {
    explicit SetValuedError(const std::string& what) : std::logic_error(what) {}
};

struct NonPowerOfTwoError : std::invalid_argument {
    explicit NonPowerOfTwoError(const std::string& what) : std::invalid_argument(what) {}
};

struct InfeasibleParams : std::invalid_argument {
    explicit InfeasibleParams(const std::string& what) : std::invalid_argument(what) {}
};

struct MalformedSystem : std::invalid_argument {
    explicit MalformedSystem(const std::string& what) : std::invalid_argument(what) {}
};

struct NonConvergedReference : std::runtime_error {
    explicit NonConvergedReference(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroStart : std::invalid_argument {
    explicit ZeroStart(const std::string& what) : std::invalid_argument(what) {}
};

inline void check_dim(const Vector& v, std::size_t d, const char* where) {
    if (v.size() != d)
        throw DimensionError(std::string(where) + ": expected dimension " +
                             std::to_string(d) + ", got " + std::to_string(v.size()));
}

inline void check_same_dim(const Vector& a, const Vector& b, const char* where) {
    if (a.size() != b.size())
        throw DimensionError(std::string(where) + ": dimensions " + std::to_string(a.size()) +
                             " and " + std::to_string(b.size()) + " differ");
}

inline double dot(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline double sup_norm(const Vector& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline Vector add(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "add");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vector sub(const Vector& a, const Vector& b) {
    check_same_dim(a, b, "sub");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vector scale(double s, const Vector& a) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

// r = a + s*b
inline Vector axpy(const Vector& a, double s, const Vector& b) {
    check_same_dim(a, b, "axpy");
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
    return r;
}

inline double dist2(const Vector& a, const Vector& b) { return norm2(sub(a, b)); }

inline bool all_finite(const Vector& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace opsplit
