#pragma once

// Orthogonal transforms usable inside composed-L1 proximal operators.  The
// only built-in is the orthonormal Haar wavelet transform on power-of-two
// lengths; forward and inverse are exact transposes of each other.

#include <cmath>
#include <memory>
#include <string>

#include "opsplit/common.hpp"

namespace opsplit {

class UnitaryTransform {
  public:
    virtual ~UnitaryTransform() = default;
    virtual Vector forward(const Vector& x) const = 0;
    virtual Vector inverse(const Vector& y) const = 0;
    virtual std::string name() const = 0;
};

using TransformPtr = std::shared_ptr<const UnitaryTransform>;

// Coefficient layout: index 0 holds the DC average, then details from the
// coarsest level down to the finest (pairwise differences) in the tail half.
inline Vector haar_forward(const Vector& x) {
    const std::size_t d = x.size();
    if (!is_power_of_two(d)) throw NonPowerOfTwoError("haar_forward: length must be a power of two");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vector out(x), buf(d);
    for (std::size_t len = d; len > 1; len /= 2) {
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            buf[i] = (out[2 * i] + out[2 * i + 1]) * inv_sqrt2;
            buf[half + i] = (out[2 * i] - out[2 * i + 1]) * inv_sqrt2;
        }
        for (std::size_t i = 0; i < len; ++i) out[i] = buf[i];
    }
    return out;
}

inline Vector haar_inverse(const Vector& y) {
    const std::size_t d = y.size();
    if (!is_power_of_two(d)) throw NonPowerOfTwoError("haar_inverse: length must be a power of two");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vector out(y), buf(d);
    for (std::size_t len = 2; len <= d; len *= 2) {
        const std::size_t half = len / 2;
        for (std::size_t i = 0; i < half; ++i) {
            buf[2 * i] = (out[i] + out[half + i]) * inv_sqrt2;
            buf[2 * i + 1] = (out[i] - out[half + i]) * inv_sqrt2;
        }
        for (std::size_t i = 0; i < len; ++i) out[i] = buf[i];
    }
    return out;
}

class HaarTransform final : public UnitaryTransform {
  public:
    Vector forward(const Vector& x) const override { return haar_forward(x); }
    Vector inverse(const Vector& y) const override { return haar_inverse(y); }
    std::string name() const override { return "haar"; }
};

inline TransformPtr make_haar() { return std::make_shared<HaarTransform>(); }

}  // namespace opsplit
