#pragma once

// Fixed-point maps of the splitting methods.  Each step_* function performs
// one application of the method's map T on the (possibly lifted) iterate and
// also returns the solution read-out S and the resolvent outputs, evaluating
// every operator's resolvent exactly once.
//
// Conventions: a lifted point is an ordered list of equally sized blocks;
// methods with one block keep the ambient dimension, two-fold lifting keeps
// two copies, and so on.

#include <array>
#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "opsplit/common.hpp"
#include "opsplit/operators.hpp"

namespace opsplit {

struct LiftedPoint {
    std::vector<Vector> blocks;

    LiftedPoint() = default;
    explicit LiftedPoint(std::vector<Vector> b) : blocks(std::move(b)) {}
    static LiftedPoint zeros(std::size_t nblocks, std::size_t dim) {
        return LiftedPoint(std::vector<Vector>(nblocks, Vector(dim, 0.0)));
    }
};

inline double lifted_norm(const LiftedPoint& p) {
    double s = 0.0;
    for (const auto& b : p.blocks) s += dot(b, b);
    return std::sqrt(s);
}

inline double lifted_dist(const LiftedPoint& a, const LiftedPoint& b) {
    if (a.blocks.size() != b.blocks.size())
        throw DimensionError("lifted_dist: block counts differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        Vector d = sub(a.blocks[i], b.blocks[i]);
        s += dot(d, d);
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Two-operator family: resolvent steps a (on A) and b (on B), relaxation
// theta, solution mix eta.
//   x1 = J_{aA}(z)
//   x2 = J_{bB}((1 + b/a) x1 - (b/a) z)
//   Tz = z + theta (x2 - x1)
//   Sz = eta x1 + (1 - eta) x2
// theta = 1 with a = b is Douglas-Rachford, theta = 2 is Peaceman-Rachford.

struct FamilyParams {
    double alpha = 1.0;
    double beta = 1.0;
    double theta = 1.0;
    double eta = 0.0;

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw InfeasibleParams("family: resolvent steps must be positive");
        if (theta == 0.0) throw InfeasibleParams("family: theta must be nonzero");
    }
};

struct FamilyStepResult {
    Vector t, s, x1, x2;
};

inline FamilyStepResult step_family(const FamilyParams& p, const MonotoneOp& a,
                                    const MonotoneOp& b, const Vector& z) {
    p.validate();
    const double r = p.beta / p.alpha;
    FamilyStepResult out;
    out.x1 = a.resolvent(p.alpha, z);
    out.x2 = b.resolvent(p.beta, sub(scale(1.0 + r, out.x1), scale(r, z)));
    out.t = axpy(z, p.theta, sub(out.x2, out.x1));
    out.s = add(scale(p.eta, out.x1), scale(1.0 - p.eta, out.x2));
    return out;
}

// ---------------------------------------------------------------------------
// Three-operator splitting with two-fold lifting (the minimal amount):
//   x1 = J_{aA}(z1)
//   x2 = J_{aB}(x1 + z2)
//   x3 = J_{aC}(x1 - z1 + x2 - z2)
//   T1 = z1 + theta (x3 - x1)
//   T2 = z2 + theta (x3 - x2)
//   Sz = (x1 + x2 + x3) / 3
// Convergence is guaranteed for theta in (0,1); theta = 1 keeps T
// nonexpansive and larger theta is admitted for experimentation.

struct Ryu3Params {
    double alpha = 1.0;
    double theta = 0.5;

    void validate() const {
        if (!(alpha > 0.0)) throw InfeasibleParams("ryu3: alpha must be positive");
        if (!(theta > 0.0)) throw InfeasibleParams("ryu3: theta must be positive");
    }
};

struct Ryu3StepResult {
    LiftedPoint t;
    Vector s, x1, x2, x3;
};

inline Ryu3StepResult step_ryu3(const Ryu3Params& p, const MonotoneOp& a,
                                const MonotoneOp& b, const MonotoneOp& c,
                                const LiftedPoint& z) {
    p.validate();
    if (z.blocks.size() != 2) throw DimensionError("ryu3: expected a 2-block lifted point");
    const Vector& z1 = z.blocks[0];
    const Vector& z2 = z.blocks[1];
    Ryu3StepResult out;
    out.x1 = a.resolvent(p.alpha, z1);
    out.x2 = b.resolvent(p.alpha, add(out.x1, z2));
    out.x3 = c.resolvent(p.alpha, add(sub(out.x1, z1), sub(out.x2, z2)));
    out.t.blocks.resize(2);
    out.t.blocks[0] = axpy(z1, p.theta, sub(out.x3, out.x1));
    out.t.blocks[1] = axpy(z2, p.theta, sub(out.x3, out.x2));
    out.s = scale(1.0 / 3.0, add(add(out.x1, out.x2), out.x3));
    return out;
}

// ---------------------------------------------------------------------------
// PPXA with three blocks, weights w summing to one, penalty gamma:
//   xi = J_{(gamma/wi) Ai}(zi),  xbar = sum wi xi,  zbar = sum wi zi
//   Ti = zi + theta (2 xbar - zbar - xi)
//   Sz = x1 (the first block's resolvent output)

struct PpxaParams {
    double gamma = 1.0;
    std::array<double, 3> omega{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double theta = 1.0;

    void validate() const {
        if (!(gamma > 0.0)) throw InfeasibleParams("ppxa: gamma must be positive");
        double sum = 0.0;
        for (double w : omega) {
            if (!(w > 0.0)) throw InfeasibleParams("ppxa: weights must be strictly positive");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw InfeasibleParams("ppxa: weights must sum to one");
        if (!(theta > 0.0 && theta < 2.0))
            throw InfeasibleParams("ppxa: theta must lie in (0,2)");
    }
};

struct PpxaStepResult {
    LiftedPoint t;
    Vector s, x1, x2, x3;
};

inline PpxaStepResult step_ppxa(const PpxaParams& p, const MonotoneOp& a,
                                const MonotoneOp& b, const MonotoneOp& c,
                                const LiftedPoint& z) {
    p.validate();
    if (z.blocks.size() != 3) throw DimensionError("ppxa: expected a 3-block lifted point");
    PpxaStepResult out;
    out.x1 = a.resolvent(p.gamma / p.omega[0], z.blocks[0]);
    out.x2 = b.resolvent(p.gamma / p.omega[1], z.blocks[1]);
    out.x3 = c.resolvent(p.gamma / p.omega[2], z.blocks[2]);
    const std::size_t d = out.x1.size();
    Vector xbar(d, 0.0), zbar(d, 0.0);
    const std::array<const Vector*, 3> xs{&out.x1, &out.x2, &out.x3};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            xbar[k] += p.omega[i] * (*xs[i])[k];
            zbar[k] += p.omega[i] * z.blocks[i][k];
        }
    out.t.blocks.resize(3);
    for (std::size_t i = 0; i < 3; ++i) {
        Vector dir(d);
        for (std::size_t k = 0; k < d; ++k)
            dir[k] = 2.0 * xbar[k] - zbar[k] - (*xs[i])[k];
        out.t.blocks[i] = axpy(z.blocks[i], p.theta, dir);
    }
    out.s = out.x1;
    return out;
}

// ---------------------------------------------------------------------------
// Three-operator splitting without lifting, with C evaluated forward:
//   u  = J_{aB}(z)
//   w  = J_{aA}(2u - z - a C(u))
//   Tz = z - u + w
//   Sz = u

struct DysParams {
    double alpha = 1.0;

    void validate() const {
        if (!(alpha > 0.0)) throw InfeasibleParams("dys: alpha must be positive");
    }
};

struct DysStepResult {
    Vector t, s, u, w;
};

inline DysStepResult step_dys(const DysParams& p, const MonotoneOp& a, const MonotoneOp& b,
                              const MonotoneOp& c_forward, const Vector& z) {
    p.validate();
    DysStepResult out;
    out.u = b.resolvent(p.alpha, z);
    Vector arg = sub(sub(scale(2.0, out.u), z), scale(p.alpha, c_forward.forward(out.u)));
    out.w = a.resolvent(p.alpha, arg);
    out.t = add(sub(z, out.u), out.w);
    out.s = out.u;
    return out;
}

// ---------------------------------------------------------------------------
// Primal-dual hybrid gradient, product-space form with two dual blocks:
//   x+ = J_{tau A}(x - tau (u + v))
//   u+ = wu - sigma J_{(1/sigma) B}(wu / sigma),  wu = u + sigma (2 x+ - x)
//   v+ = wv - sigma J_{(1/sigma) C}(wv / sigma),  wv = v + sigma (2 x+ - x)
//   Sz = x+
// Requires 2 tau sigma <= 1.

struct Pdhg3Params {
    double tau = 0.5;
    double sigma = 0.5;

    void validate() const {
        if (!(tau > 0.0) || !(sigma > 0.0))
            throw InfeasibleParams("pdhg3: stepsizes must be positive");
        if (2.0 * tau * sigma > 1.0 + 1e-12)
            throw InfeasibleParams("pdhg3: requires 2 tau sigma <= 1");
    }
};

struct Pdhg3StepResult {
    LiftedPoint t;
    Vector s;
};

inline Pdhg3StepResult step_pdhg3(const Pdhg3Params& p, const MonotoneOp& a,
                                  const MonotoneOp& b, const MonotoneOp& c,
                                  const LiftedPoint& z) {
    p.validate();
    if (z.blocks.size() != 3) throw DimensionError("pdhg3: expected a 3-block lifted point");
    const Vector& x = z.blocks[0];
    const Vector& u = z.blocks[1];
    const Vector& v = z.blocks[2];
    Pdhg3StepResult out;
    Vector xp = a.resolvent(p.tau, sub(x, scale(p.tau, add(u, v))));
    Vector ref = sub(scale(2.0, xp), x);  // 2 x+ - x, shared by both dual blocks
    Vector wu = axpy(u, p.sigma, ref);
    Vector wv = axpy(v, p.sigma, ref);
    Vector ju = b.resolvent(1.0 / p.sigma, scale(1.0 / p.sigma, wu));
    Vector jv = c.resolvent(1.0 / p.sigma, scale(1.0 / p.sigma, wv));
    out.t.blocks.resize(3);
    out.t.blocks[0] = std::move(xp);
    out.t.blocks[1] = axpy(wu, -p.sigma, ju);
    out.t.blocks[2] = axpy(wv, -p.sigma, jv);
    out.s = out.t.blocks[0];
    return out;
}

// ---------------------------------------------------------------------------
// Uniform wrapper used by the iteration engine and the CLI.

struct StepOutput {
    LiftedPoint t;
    Vector s;
};

using StepFn = std::function<StepOutput(const LiftedPoint&)>;

struct MethodConfig {
    std::string method;  // ppm, drs, prs, family, ryu3, ppxa, dys, pdhg3
    double alpha = 1.0;
    double beta = std::nan("");   // family only; defaults to alpha
    double theta = std::nan("");  // defaults depend on the method
    double eta = 0.0;
    double gamma = 1.0;
    std::array<double, 3> omega{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double tau = 0.5;
    double sigma = 0.5;
};

inline std::size_t method_arity(const std::string& method) {
    if (method == "ppm") return 1;
    if (method == "drs" || method == "prs" || method == "family") return 2;
    if (method == "ryu3" || method == "ppxa" || method == "dys" || method == "pdhg3") return 3;
    throw InfeasibleParams("unknown method: " + method);
}

inline std::size_t method_lifting(const std::string& method) {
    if (method == "ryu3") return 2;
    if (method == "ppxa" || method == "pdhg3") return 3;
    method_arity(method);  // validates the name
    return 1;
}

struct Splitting {
    std::string method;
    std::size_t dim = 0;
    std::size_t lifting = 1;
    StepFn step;

    LiftedPoint origin() const { return LiftedPoint::zeros(lifting, dim); }
};

// Binds a method configuration to concrete operators.  Warns (stderr) when
// ryu3 runs outside its guaranteed relaxation range.
inline Splitting make_splitting(const MethodConfig& cfg, const std::vector<OpPtr>& ops,
                                std::size_t dim) {
    const std::size_t arity = method_arity(cfg.method);
    if (ops.size() != arity)
        throw InfeasibleParams(cfg.method + ": expected " + std::to_string(arity) +
                               " operators, got " + std::to_string(ops.size()));
    for (const auto& op : ops) {
        if (!op) throw InfeasibleParams("make_splitting: null operator");
        if (op->dim() && *op->dim() != dim)
            throw DimensionError("make_splitting: operator dimension " +
                                 std::to_string(*op->dim()) + " does not match problem dimension " +
                                 std::to_string(dim));
    }

    Splitting sp;
    sp.method = cfg.method;
    sp.dim = dim;
    sp.lifting = method_lifting(cfg.method);

    auto theta_or = [&](double dflt) { return std::isnan(cfg.theta) ? dflt : cfg.theta; };

    if (cfg.method == "ppm") {
        double alpha = cfg.alpha;
        OpPtr a = ops[0];
        if (!(alpha > 0.0)) throw InfeasibleParams("ppm: alpha must be positive");
        sp.step = [a, alpha](const LiftedPoint& z) {
            StepOutput out;
            out.t.blocks = {a->resolvent(alpha, z.blocks.at(0))};
            out.s = out.t.blocks[0];
            return out;
        };
        return sp;
    }

    if (cfg.method == "drs" || cfg.method == "prs" || cfg.method == "family") {
        FamilyParams p;
        p.alpha = cfg.alpha;
        p.beta = std::isnan(cfg.beta) ? cfg.alpha : cfg.beta;
        p.eta = cfg.eta;
        if (cfg.method == "drs") {
            p.beta = p.alpha;
            p.theta = theta_or(1.0);
            if (!(p.theta > 0.0 && p.theta < 2.0))
                throw InfeasibleParams("drs: theta must lie in (0,2)");
        } else if (cfg.method == "prs") {
            p.beta = p.alpha;
            p.theta = 2.0;
        } else {
            p.theta = theta_or(1.0);
        }
        p.validate();
        OpPtr a = ops[0], b = ops[1];
        sp.step = [p, a, b](const LiftedPoint& z) {
            FamilyStepResult r = step_family(p, *a, *b, z.blocks.at(0));
            StepOutput out;
            out.t.blocks = {std::move(r.t)};
            out.s = std::move(r.s);
            return out;
        };
        return sp;
    }

    if (cfg.method == "ryu3") {
        Ryu3Params p;
        p.alpha = cfg.alpha;
        p.theta = theta_or(0.5);
        p.validate();
        if (!(p.theta > 0.0 && p.theta < 1.0))
            std::cerr << "warning: ryu3 theta=" << p.theta
                      << " lies outside the guaranteed range (0,1)\n";
        OpPtr a = ops[0], b = ops[1], c = ops[2];
        sp.step = [p, a, b, c](const LiftedPoint& z) {
            Ryu3StepResult r = step_ryu3(p, *a, *b, *c, z);
            return StepOutput{std::move(r.t), std::move(r.s)};
        };
        return sp;
    }

    if (cfg.method == "ppxa") {
        PpxaParams p;
        p.gamma = cfg.gamma;
        p.omega = cfg.omega;
        p.theta = theta_or(1.0);
        p.validate();
        OpPtr a = ops[0], b = ops[1], c = ops[2];
        sp.step = [p, a, b, c](const LiftedPoint& z) {
            PpxaStepResult r = step_ppxa(p, *a, *b, *c, z);
            return StepOutput{std::move(r.t), std::move(r.s)};
        };
        return sp;
    }

    if (cfg.method == "dys") {
        DysParams p;
        p.alpha = cfg.alpha;
        p.validate();
        OpPtr a = ops[0], b = ops[1], c = ops[2];
        if (!c->single_valued())
            throw InfeasibleParams("dys: the third operator must be single-valued");
        sp.step = [p, a, b, c](const LiftedPoint& z) {
            DysStepResult r = step_dys(p, *a, *b, *c, z.blocks.at(0));
            StepOutput out;
            out.t.blocks = {std::move(r.t)};
            out.s = std::move(r.s);
            return out;
        };
        return sp;
    }

    // pdhg3
    Pdhg3Params p;
    p.tau = cfg.tau;
    p.sigma = cfg.sigma;
    p.validate();
    OpPtr a = ops[0], b = ops[1], c = ops[2];
    sp.step = [p, a, b, c](const LiftedPoint& z) {
        Pdhg3StepResult r = step_pdhg3(p, *a, *b, *c, z);
        return StepOutput{std::move(r.t), std::move(r.s)};
    };
    return sp;
}

}  // namespace opsplit
