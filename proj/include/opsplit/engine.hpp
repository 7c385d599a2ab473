#pragma once

// Fixed-point iteration driver shared by every splitting.  Runs z <- T(z)
// until the residual ||Tz - z|| drops below fp_tol, the iterate norm crosses
// the divergence bound, or the budget runs out, recording a trace row every
// record_every steps plus the terminal step.
//
// Traces are deterministic byte for byte given the same configuration and
// inputs; wall-clock timing is therefore off by default and only fills the
// elapsed_ns column when explicitly requested.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "opsplit/common.hpp"
#include "opsplit/splittings.hpp"

namespace opsplit {

struct IterationConfig {
    std::size_t max_iters = 10000;
    double fp_tol = 1e-9;
    double divergence_bound = 1e12;
    std::size_t record_every = 1;
    bool record_timing = false;

    void validate() const {
        if (max_iters == 0) throw InfeasibleParams("engine: max_iters must be positive");
        if (!(fp_tol > 0.0)) throw InfeasibleParams("engine: fp_tol must be positive");
        if (!(fp_tol < divergence_bound))
            throw InfeasibleParams("engine: fp_tol must be smaller than the divergence bound");
        if (record_every == 0) throw InfeasibleParams("engine: record_every must be positive");
    }
};

enum class IterStatus { Converged, MaxIters, Diverged };

inline const char* to_string(IterStatus s) {
    switch (s) {
        case IterStatus::Converged: return "Converged";
        case IterStatus::MaxIters: return "MaxIters";
        default: return "Diverged";
    }
}

struct TraceRow {
    std::size_t iter = 0;
    double fp_residual = 0.0;
    double z_norm = 0.0;
    std::optional<double> objective;
    std::optional<double> rel_change;
    std::optional<double> dist_to_ref;
    std::optional<std::uint64_t> elapsed_ns;
};

// Optional per-iteration diagnostics; objective and reference distance are
// evaluated at the solution read-out S(z^k).
struct Metrics {
    std::function<double(const Vector&)> objective;
    std::optional<Vector> reference;
};

struct IterateResult {
    IterStatus status = IterStatus::MaxIters;
    LiftedPoint z;            // iterate after the last applied step
    Vector solution;          // S read-out of the last step
    std::size_t iters = 0;    // steps actually applied
    double final_residual = 0.0;
    std::vector<TraceRow> trace;
};

inline IterateResult iterate(const StepFn& step, LiftedPoint z0, const IterationConfig& cfg,
                             const Metrics* metrics = nullptr) {
    cfg.validate();
    IterateResult res;
    LiftedPoint z = std::move(z0);
    std::optional<double> prev_objective;
    const auto t_start = std::chrono::steady_clock::now();

    for (std::size_t k = 0; k < cfg.max_iters; ++k) {
        StepOutput out = step(z);
        const double residual = lifted_dist(out.t, z);
        const double znorm = lifted_norm(z);
        const double next_norm = lifted_norm(out.t);

        bool finite = std::isfinite(residual) && std::isfinite(next_norm);
        bool diverged = !finite || next_norm >= cfg.divergence_bound;
        bool converged = finite && residual <= cfg.fp_tol;
        bool terminal = diverged || converged || k + 1 == cfg.max_iters;

        if (k % cfg.record_every == 0 || terminal) {
            TraceRow row;
            row.iter = k;
            row.fp_residual = residual;
            row.z_norm = znorm;
            if (metrics && metrics->objective) {
                double f = metrics->objective(out.s);
                row.objective = f;
                if (prev_objective && *prev_objective != 0.0)
                    row.rel_change = std::abs(f - *prev_objective) / std::abs(*prev_objective);
                prev_objective = f;
            }
            if (metrics && metrics->reference)
                row.dist_to_ref = dist2(out.s, *metrics->reference);
            if (cfg.record_timing)
                row.elapsed_ns = std::uint64_t(std::chrono::duration_cast<std::chrono::nanoseconds>(
                                                   std::chrono::steady_clock::now() - t_start)
                                                   .count());
            res.trace.push_back(std::move(row));
        }

        res.iters = k + 1;
        res.final_residual = residual;
        res.solution = std::move(out.s);
        z = std::move(out.t);

        if (diverged) {
            res.status = IterStatus::Diverged;
            break;
        }
        if (converged) {
            res.status = IterStatus::Converged;
            break;
        }
    }
    res.z = std::move(z);
    if (res.status != IterStatus::Converged && res.status != IterStatus::Diverged)
        res.status = IterStatus::MaxIters;
    return res;
}

inline double fp_residual(const StepFn& step, const LiftedPoint& z) {
    return lifted_dist(step(z).t, z);
}

// One trace row per line; optional metrics leave their field empty.
inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "iter,fp_residual,z_norm,objective,rel_change,dist_to_ref,elapsed_ns\n";
    for (const auto& r : rows) {
        os << r.iter << ',' << fmt(r.fp_residual) << ',' << fmt(r.z_norm) << ',';
        if (r.objective) os << fmt(*r.objective);
        os << ',';
        if (r.rel_change) os << fmt(*r.rel_change);
        os << ',';
        if (r.dist_to_ref) os << fmt(*r.dist_to_ref);
        os << ',';
        if (r.elapsed_ns) os << *r.elapsed_ns;
        os << '\n';
    }
}

// High-accuracy run used as a surrogate ground truth: ten times the iteration
// budget at a thousandth of the tolerance, starting from the origin.
inline Vector compute_reference(const Splitting& sp, const IterationConfig& base) {
    IterationConfig cfg = base;
    cfg.max_iters = base.max_iters * 10;
    cfg.fp_tol = base.fp_tol / 1e3;
    cfg.record_every = cfg.max_iters;  // keep the trace tiny
    IterateResult r = iterate(sp.step, sp.origin(), cfg);
    if (r.status != IterStatus::Converged)
        throw NonConvergedReference("compute_reference: high-accuracy run ended with status " +
                                    std::string(to_string(r.status)) + " at residual " +
                                    std::to_string(r.final_residual));
    return r.solution;
}

}  // namespace opsplit
