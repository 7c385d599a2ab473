#pragma once

// Divergence witnesses for the two-operator family with unequal resolvent
// steps.  A pair of skew rotations makes the family map a scaled rotation
// whose spectral radius exceeds one whenever the steps differ, so iterates
// grow geometrically from any nonzero start.

#include <cmath>
#include <string>

#include "opsplit/common.hpp"
#include "opsplit/operators.hpp"
#include "opsplit/splittings.hpp"

namespace opsplit {

struct RotationPairParams {
    double alpha = 1.0;
    double beta = 1.0;
    double omega = 0.5;  // angle in (0, pi/2)
    std::size_t dim = 2;

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw InfeasibleParams("rotation pair: steps must be positive");
        if (!(omega > 0.0 && omega < M_PI / 2.0))
            throw InfeasibleParams("rotation pair: omega must lie in (0, pi/2)");
        if (dim < 2) throw DimensionError("rotation pair: dimension must be at least 2");
    }
};

// A carries the rotation scaled by 1/alpha, B the opposite rotation scaled
// by 1/beta, so J_{alpha A} and J_{beta B} are inverse rotations of each
// other up to the common shrink factor 1/(1 + tan^2 w).
inline std::pair<OpPtr, OpPtr> build_rotation_pair(const RotationPairParams& p) {
    p.validate();
    const double t = std::tan(p.omega);
    return {make_skew_rotation(t / p.alpha), make_skew_rotation(-t / p.beta)};
}

// Modulus of the family map's eigenvalue pair on the rotation instance.
// Both resolvents reduce to cos(w)-scaled rotations by -w and +w, and the
// identity parts cancel exactly, leaving T = I + theta (1 - beta/alpha)
// sin(w) cos(w) R with R the 90-degree rotation; hence the eigenvalues are
// 1 +- i c and |lambda| = sqrt(1 + c^2) with
// c = theta (1 - beta/alpha) sin(w) cos(w) = (theta/2)(1 - beta/alpha) sin(2w).
inline double predicted_growth(const RotationPairParams& p, double theta) {
    p.validate();
    const double c = theta * (1.0 - p.beta / p.alpha) * std::cos(p.omega) * std::sin(p.omega);
    return std::sqrt(1.0 + c * c);
}

// Geometric mean of per-step norm ratios under the family map, accumulated
// in log space so growing iterates cannot overflow the product.
inline double measure_growth(const MonotoneOp& a, const MonotoneOp& b, const FamilyParams& fam,
                             const Vector& z0, std::size_t k) {
    fam.validate();
    if (k == 0) throw InfeasibleParams("measure_growth: need at least one step");
    if (norm2(z0) == 0.0) throw ZeroStart("measure_growth: start must be nonzero");
    Vector z = z0;
    double log_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        Vector t = step_family(fam, a, b, z).t;
        const double num = norm2(t), den = norm2(z);
        if (num == 0.0 || !std::isfinite(num))
            throw NumericalError("measure_growth: iterate left the measurable range");
        log_sum += std::log(num / den);
        z = std::move(t);
    }
    return std::exp(log_sum / double(k));
}

// Behavior of the family on (0, N_{{0}}): the map is multiplication by
// (1 - theta), classified by its modulus.
struct ThetaRangeReport {
    double theta = 0.0;
    double factor = 0.0;  // 1 - theta
    std::string regime;   // contraction | oscillation | divergence
};

inline ThetaRangeReport theta_range_report(double theta) {
    if (theta == 0.0) throw InfeasibleParams("theta_range_report: theta must be nonzero");
    ThetaRangeReport r;
    r.theta = theta;
    r.factor = 1.0 - theta;
    const double m = std::abs(r.factor);
    r.regime = m < 1.0 ? "contraction" : (m == 1.0 ? "oscillation" : "divergence");
    return r;
}

}  // namespace opsplit
