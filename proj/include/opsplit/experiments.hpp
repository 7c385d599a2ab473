#pragma once

// Desk-scale experiment problems: sparse denoising with a wavelet L1 term,
// constrained portfolio least squares, and Poisson TV smoothing.  Each
// problem bundles three operators in a canonical (A, B, C) order, an exact
// objective (indicator terms included), and JSON round-trip of the generated
// data so a dumped problem reloads into the identical instance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "opsplit/common.hpp"
#include "opsplit/dense.hpp"
#include "opsplit/engine.hpp"
#include "opsplit/operators.hpp"
#include "opsplit/rng.hpp"
#include "opsplit/splittings.hpp"
#include "opsplit/transforms.hpp"

namespace opsplit {

// Prox of (p, q) -> |q - p| with step a: the pair mean is preserved and the
// gap shrinks by 2a, collapsing to the mean when it cannot cover the shrink.
inline std::pair<double, double> tv_pair_prox(double p, double q, double alpha) {
    check_step(alpha, "tv_pair_prox");
    const double gap = q - p;
    const double t = std::min(alpha, std::abs(gap) / 2.0);
    const double s = gap > 0 ? 1.0 : (gap < 0 ? -1.0 : 0.0);
    return {p + t * s, q - t * s};
}

// Sum of |x_{i+1} - x_i| over disjoint pairs starting at `offset`; the prox
// splits into independent two-point problems.
class TvPairsOp final : public MonotoneOp {
  public:
    explicit TvPairsOp(std::size_t offset) : offset_(offset) {
        if (offset_ > 1) throw InfeasibleParams("TvPairs: offset must be 0 or 1");
    }

    Vector resolvent(double alpha, const Vector& z) const override {
        check_step(alpha, "TvPairs");
        Vector x(z);
        for (std::size_t i = offset_; i + 1 < z.size(); i += 2) {
            auto [p, q] = tv_pair_prox(z[i], z[i + 1], alpha);
            x[i] = p;
            x[i + 1] = q;
        }
        return x;
    }

    std::string name() const override { return "tv_pairs"; }
    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

inline OpPtr make_tv_pairs(std::size_t offset) { return std::make_shared<TvPairsOp>(offset); }

inline double tv_pairs_value(const Vector& x, std::size_t offset) {
    double s = 0.0;
    for (std::size_t i = offset; i + 1 < x.size(); i += 2) s += std::abs(x[i + 1] - x[i]);
    return s;
}

// ---------------------------------------------------------------------------
// Problems.

struct ObjectiveValue {
    double value = 0.0;       // exact value, +inf when an indicator is violated
    double finite_part = 0.0; // smooth + L1 terms only
    double slack = 0.0;       // largest constraint violation
};

struct Problem {
    std::string kind;  // denoise_l1 | portfolio | poisson_tv
    std::uint64_t seed = 0;
    std::size_t dim = 0;
    double lambda = 1.0;

    // denoise_l1
    std::vector<std::size_t> mask;
    Vector a_obs;
    Vector b_coeffs;

    // portfolio
    Matrix returns;
    Vector mu;
    double target = 0.0;

    // poisson_tv
    Vector counts;

    Vector truth;  // generating signal where one exists (not used by solvers)

    std::vector<OpPtr> ops;  // canonical (A, B, C)

    bool dist_to_ref_enabled() const { return kind != "denoise_l1"; }

    ObjectiveValue objective(const Vector& x) const {
        check_dim(x, dim, "Problem::objective");
        const double inf = std::numeric_limits<double>::infinity();
        ObjectiveValue out;
        if (kind == "denoise_l1") {
            double f = 0.0;
            for (std::size_t k = 0; k < mask.size(); ++k) f += std::abs(x[mask[k]] - a_obs[k]);
            Vector w = haar_forward(x);
            for (std::size_t i = 0; i < w.size(); ++i) f += lambda * std::abs(w[i] - b_coeffs[i]);
            double neg = 0.0;
            for (double v : x) neg = std::max(neg, -v);
            out.finite_part = f;
            out.slack = neg;
            out.value = neg > 0.0 ? inf : f;
            return out;
        }
        if (kind == "portfolio") {
            Vector r = returns.matvec(x);
            double f = 0.0;
            for (double v : r) f += 0.5 * (v - target) * (v - target);
            double sum = 0.0, neg = 0.0;
            for (double v : x) {
                sum += v;
                neg = std::max(neg, -v);
            }
            const double ret_gap = std::max(0.0, target - dot(mu, x));
            out.finite_part = f;
            out.slack = std::max({std::abs(sum - 1.0), neg, ret_gap});
            out.value = out.slack > 0.0 ? inf : f;
            return out;
        }
        if (kind == "poisson_tv") {
            double f = 0.0;
            bool infeasible = false;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (counts[i] > 0.0) {
                    if (x[i] <= 0.0) infeasible = true;
                    const double xi = std::max(x[i], 1e-300);
                    f += lambda * (-counts[i] * std::log(xi) + x[i]);
                } else {
                    // Zero counts keep the linear likelihood term; the
                    // operator's resolvent charges it on every coordinate,
                    // so dropping it here would score the methods against a
                    // different function than the one they minimize.
                    if (x[i] < 0.0) infeasible = true;
                    f += lambda * x[i];
                }
            }
            f += tv_pairs_value(x, 0) + tv_pairs_value(x, 1);
            double neg = 0.0;
            for (double v : x) neg = std::max(neg, -v);
            out.finite_part = f;
            out.slack = neg;
            out.value = infeasible ? inf : f;
            return out;
        }
        throw MalformedSystem("objective: unknown problem kind '" + kind + "'");
    }
};

// ---------------------------------------------------------------------------
// Generators.  All randomness flows through named SplitMix64 substreams of
// the given seed, so a (kind, seed, params) triple pins the instance.

struct DenoiseParams {
    std::size_t dim = 1024;
    double lambda = 1.0;
};

struct PortfolioParams {
    std::size_t n_obs = 300;
    std::size_t dim = 100;
};

struct PoissonParams {
    std::size_t dim = 1001;
    double lambda = 1.0;
};

namespace detail {

inline Vector piecewise_constant(std::size_t d, std::size_t nseg, double lo, double hi,
                                 SplitMix64& rng) {
    std::vector<std::size_t> cuts{0, d};
    for (std::size_t k = 1; k < nseg; ++k) cuts.push_back(1 + std::size_t(rng.below(d - 1)));
    std::sort(cuts.begin(), cuts.end());
    Vector x(d, 0.0);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double level = rng.uniform(lo, hi);
        for (std::size_t i = cuts[s]; i < cuts[s + 1]; ++i) x[i] = level;
    }
    return x;
}

}  // namespace detail

inline Problem generate_denoise(const DenoiseParams& p, std::uint64_t seed) {
    if (!is_power_of_two(p.dim))
        throw NonPowerOfTwoError("denoise: dimension must be a power of two");
    if (!(p.lambda > 0.0)) throw InfeasibleParams("denoise: lambda must be positive");
    Problem prob;
    prob.kind = "denoise_l1";
    prob.seed = seed;
    prob.dim = p.dim;
    prob.lambda = p.lambda;

    SplitMix64 truth_rng = derive_stream(seed, "denoise/truth");
    prob.truth = detail::piecewise_constant(p.dim, 8 + std::size_t(truth_rng.below(8)), 0.5, 4.5,
                                            truth_rng);

    SplitMix64 mask_rng = derive_stream(seed, "denoise/mask");
    std::vector<std::size_t> idx(p.dim);
    for (std::size_t i = 0; i < p.dim; ++i) idx[i] = i;
    const std::size_t nobs = std::max<std::size_t>(1, p.dim / 5);
    for (std::size_t i = 0; i < nobs; ++i) {
        std::size_t j = i + std::size_t(mask_rng.below(p.dim - i));
        std::swap(idx[i], idx[j]);
    }
    prob.mask.assign(idx.begin(), idx.begin() + nobs);
    std::sort(prob.mask.begin(), prob.mask.end());

    SplitMix64 noise_rng = derive_stream(seed, "denoise/noise");
    prob.a_obs.resize(nobs);
    for (std::size_t k = 0; k < nobs; ++k) {
        double v = prob.truth[prob.mask[k]] + 0.1 * noise_rng.normal();
        if (noise_rng.uniform01() < 0.10) {  // outlier fraction
            const double sign = noise_rng.uniform01() < 0.5 ? -1.0 : 1.0;
            v += sign * noise_rng.uniform(1.0, 3.0);
        }
        prob.a_obs[k] = v;
    }
    prob.b_coeffs = Vector(p.dim, 0.0);

    prob.ops = {make_l1_offset(prob.a_obs, prob.mask, 1.0),
                make_unitary_l1(make_haar(), prob.b_coeffs, p.lambda),
                make_indicator_nonneg()};
    return prob;
}

inline Problem generate_portfolio(const PortfolioParams& p, std::uint64_t seed) {
    if (p.n_obs == 0 || p.dim == 0) throw DimensionError("portfolio: empty shape");
    Problem prob;
    prob.kind = "portfolio";
    prob.seed = seed;
    prob.dim = p.dim;

    SplitMix64 drift_rng = derive_stream(seed, "portfolio/drift");
    Vector drift(p.dim);
    for (auto& m : drift) m = drift_rng.uniform(0.02, 0.10);

    SplitMix64 ret_rng = derive_stream(seed, "portfolio/returns");
    prob.returns = Matrix(p.n_obs, p.dim);
    for (std::size_t i = 0; i < p.n_obs; ++i)
        for (std::size_t j = 0; j < p.dim; ++j)
            prob.returns(i, j) = drift[j] + 0.1 * ret_rng.normal();

    prob.mu.assign(p.dim, 0.0);
    for (std::size_t i = 0; i < p.n_obs; ++i)
        for (std::size_t j = 0; j < p.dim; ++j) prob.mu[j] += prob.returns(i, j);
    for (auto& m : prob.mu) m /= double(p.n_obs);

    double mean_mu = 0.0;
    for (double m : prob.mu) mean_mu += m;
    mean_mu /= double(p.dim);
    if (!(mean_mu > 0.0))
        throw InfeasibleParams("portfolio: uniform portfolio has nonpositive expected return");
    // The uniform portfolio earns mean_mu, so this target keeps it feasible.
    prob.target = 0.8 * mean_mu;

    prob.ops = {make_quadratic_ls(prob.returns, prob.target), make_indicator_simplex(),
                make_indicator_halfspace(prob.mu, prob.target)};
    return prob;
}

inline Problem generate_poisson_tv(const PoissonParams& p, std::uint64_t seed) {
    if (p.dim < 3) throw DimensionError("poisson_tv: dimension too small");
    if (!(p.lambda > 0.0)) throw InfeasibleParams("poisson_tv: lambda must be positive");
    Problem prob;
    prob.kind = "poisson_tv";
    prob.seed = seed;
    prob.dim = p.dim;
    prob.lambda = p.lambda;

    SplitMix64 rate_rng = derive_stream(seed, "poisson/rates");
    prob.truth = detail::piecewise_constant(p.dim, 6 + std::size_t(rate_rng.below(5)), 1.0, 15.0,
                                            rate_rng);

    SplitMix64 count_rng = derive_stream(seed, "poisson/counts");
    prob.counts.resize(p.dim);
    for (std::size_t i = 0; i < p.dim; ++i)
        prob.counts[i] = double(count_rng.poisson(prob.truth[i]));

    prob.ops = {make_poisson_nll(prob.counts, p.lambda), make_tv_pairs(0), make_tv_pairs(1)};
    return prob;
}

// ---------------------------------------------------------------------------
// JSON round-trip.

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw MalformedSystem("matrix JSON: expected rows");
    Matrix m(j.size(), j.front().size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& row = j.at(i);
        if (row.size() != m.cols()) throw MalformedSystem("matrix JSON: ragged rows");
        for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = row.at(k).get<double>();
    }
    return m;
}

}  // namespace detail

inline nlohmann::json problem_to_json(const Problem& p) {
    nlohmann::json j;
    j["kind"] = p.kind;
    j["seed"] = p.seed;
    j["dim"] = p.dim;
    j["lambda"] = p.lambda;
    nlohmann::json data;
    if (p.kind == "denoise_l1") {
        data["mask"] = p.mask;
        data["a"] = p.a_obs;
        data["b"] = p.b_coeffs;
        data["truth"] = p.truth;
    } else if (p.kind == "portfolio") {
        data["returns"] = detail::matrix_to_json(p.returns);
        data["mu"] = p.mu;
        data["target"] = p.target;
    } else if (p.kind == "poisson_tv") {
        data["counts"] = p.counts;
        data["truth"] = p.truth;
    } else {
        throw MalformedSystem("problem_to_json: unknown kind '" + p.kind + "'");
    }
    j["data"] = std::move(data);
    return j;
}

inline Problem problem_from_json(const nlohmann::json& j) {
    Problem p;
    try {
        p.kind = j.at("kind").get<std::string>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.dim = j.at("dim").get<std::size_t>();
        p.lambda = j.at("lambda").get<double>();
        const auto& data = j.at("data");
        if (p.kind == "denoise_l1") {
            p.mask = data.at("mask").get<std::vector<std::size_t>>();
            p.a_obs = data.at("a").get<Vector>();
            p.b_coeffs = data.at("b").get<Vector>();
            p.truth = data.at("truth").get<Vector>();
            p.ops = {make_l1_offset(p.a_obs, p.mask, 1.0),
                     make_unitary_l1(make_haar(), p.b_coeffs, p.lambda),
                     make_indicator_nonneg()};
        } else if (p.kind == "portfolio") {
            p.returns = detail::matrix_from_json(data.at("returns"));
            p.mu = data.at("mu").get<Vector>();
            p.target = data.at("target").get<double>();
            p.ops = {make_quadratic_ls(p.returns, p.target), make_indicator_simplex(),
                     make_indicator_halfspace(p.mu, p.target)};
        } else if (p.kind == "poisson_tv") {
            p.counts = data.at("counts").get<Vector>();
            p.truth = data.at("truth").get<Vector>();
            p.ops = {make_poisson_nll(p.counts, p.lambda), make_tv_pairs(0), make_tv_pairs(1)};
        } else {
            throw MalformedSystem("problem JSON: unknown kind '" + p.kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedSystem(std::string("problem JSON: ") + e.what());
    }
    return p;
}

// ---------------------------------------------------------------------------
// Standalone operator lists, for toy problems fed to the CLI runner.

inline nlohmann::json op_to_json(const OpPtr& op);

inline OpPtr op_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "zero") return make_zero();
        if (kind == "normal_cone_zero") return make_normal_cone_zero();
        if (kind == "indicator_nonneg") return make_indicator_nonneg();
        if (kind == "indicator_simplex") return make_indicator_simplex();
        if (kind == "affine_linear")
            return make_affine(detail::matrix_from_json(j.at("matrix")),
                               j.at("offset").get<Vector>());
        if (kind == "skew_rotation_2d") return make_skew_rotation(j.at("kappa").get<double>());
        if (kind == "l1_offset")
            return make_l1_offset(j.at("a").get<Vector>(),
                                  j.at("mask").get<std::vector<std::size_t>>(),
                                  j.at("weight").get<double>());
        if (kind == "unitary_l1") {
            const std::string tr = j.at("transform").get<std::string>();
            if (tr != "haar") throw MalformedSystem("op JSON: unknown transform '" + tr + "'");
            return make_unitary_l1(make_haar(), j.at("b").get<Vector>(),
                                   j.at("weight").get<double>());
        }
        if (kind == "indicator_halfspace")
            return make_indicator_halfspace(j.at("mu").get<Vector>(), j.at("b").get<double>());
        if (kind == "quadratic_ls")
            return make_quadratic_ls(detail::matrix_from_json(j.at("rows")),
                                     j.at("target").get<double>());
        if (kind == "poisson_nll")
            return make_poisson_nll(j.at("y").get<Vector>(), j.at("weight").get<double>());
        if (kind == "tv_pairs") return make_tv_pairs(j.at("offset").get<std::size_t>());
        throw MalformedSystem("op JSON: unknown kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw MalformedSystem(std::string("op JSON: ") + e.what());
    }
}

inline nlohmann::json op_to_json(const OpPtr& op) {
    nlohmann::json j;
    j["kind"] = op->name();
    if (auto* a = dynamic_cast<const AffineLinearOp*>(op.get())) {
        j["matrix"] = detail::matrix_to_json(a->matrix());
        j["offset"] = a->offset();
    } else if (auto* s = dynamic_cast<const SkewRotation2DOp*>(op.get())) {
        j["kappa"] = s->kappa();
    } else if (auto* l = dynamic_cast<const L1OffsetOp*>(op.get())) {
        j["a"] = l->offset();
        j["mask"] = l->mask();
        j["weight"] = l->weight();
    } else if (auto* u = dynamic_cast<const UnitaryL1Op*>(op.get())) {
        j["transform"] = u->transform()->name();
        j["b"] = u->target();
        j["weight"] = u->weight();
    } else if (auto* h = dynamic_cast<const IndicatorHalfspaceOp*>(op.get())) {
        j["mu"] = h->normal();
        j["b"] = h->level();
    } else if (auto* q = dynamic_cast<const QuadraticLSOp*>(op.get())) {
        j["rows"] = detail::matrix_to_json(q->rows_matrix());
        j["target"] = q->target();
    } else if (auto* pn = dynamic_cast<const PoissonNLLOp*>(op.get())) {
        j["y"] = pn->counts();
        j["weight"] = pn->weight();
    } else if (auto* tv = dynamic_cast<const TvPairsOp*>(op.get())) {
        j["offset"] = tv->offset();
    }
    return j;
}

// ---------------------------------------------------------------------------
// Experiment driver.

struct MethodRun {
    MethodConfig cfg;
    IterateResult result;
    ObjectiveValue final_objective;
};

struct ExperimentResult {
    std::vector<MethodRun> runs;
    Vector reference;
    double reference_objective = 0.0;  // finite part at the reference point
};

// Methods exercised on each problem by default; stepsizes are tuned to the
// desk-scale instances.
inline std::vector<MethodConfig> default_methods(const Problem& p) {
    std::vector<MethodConfig> out;
    if (p.kind == "portfolio") {
        MethodConfig ryu{.method = "ryu3"};
        ryu.alpha = 0.5;
        ryu.theta = 0.9;
        MethodConfig ppxa{.method = "ppxa"};
        ppxa.gamma = 0.2;
        ppxa.theta = 1.0;
        MethodConfig dys{.method = "dys"};
        dys.alpha = 0.01;
        out = {ryu, ppxa, dys};
        return out;
    }
    MethodConfig ryu{.method = "ryu3"};
    ryu.alpha = 1.0;
    ryu.theta = 0.9;
    MethodConfig ppxa{.method = "ppxa"};
    ppxa.gamma = 0.5;
    ppxa.theta = 1.0;
    MethodConfig pdhg{.method = "pdhg3"};
    pdhg.tau = 0.5;
    pdhg.sigma = 1.0;
    out = {ryu, ppxa, pdhg};
    return out;
}

// The method order a problem's canonical operators take for a given method:
// dys wants its forward-evaluated (single-valued) operator last, which in
// the canonical order is the first.
inline std::vector<OpPtr> ops_for_method(const Problem& p, const std::string& method) {
    if (method == "dys") return {p.ops[1], p.ops[2], p.ops[0]};
    return p.ops;
}

inline Splitting make_problem_splitting(const Problem& p, const MethodConfig& cfg) {
    return make_splitting(cfg, ops_for_method(p, cfg.method), p.dim);
}

// Runs every method from the origin with shared metrics; the reference point
// comes from a high-accuracy run of the first method (dist_to_ref is skipped
// for problems with non-unique solutions).
inline ExperimentResult run_experiment(const Problem& p, const std::vector<MethodConfig>& methods,
                                       const IterationConfig& cfg, bool parallel = false) {
    if (methods.empty()) throw InfeasibleParams("run_experiment: no methods given");
    ExperimentResult out;
    out.reference = compute_reference(make_problem_splitting(p, methods.front()), cfg);
    out.reference_objective = p.objective(out.reference).finite_part;

    Metrics metrics;
    metrics.objective = [&p](const Vector& x) { return p.objective(x).finite_part; };
    if (p.dist_to_ref_enabled()) metrics.reference = out.reference;

    auto run_one = [&p, &cfg, &metrics](const MethodConfig& m) {
        Splitting sp = make_problem_splitting(p, m);
        MethodRun r;
        r.cfg = m;
        r.result = iterate(sp.step, sp.origin(), cfg, &metrics);
        r.final_objective = p.objective(r.result.solution);
        return r;
    };

    if (parallel) {
        std::vector<std::future<MethodRun>> futs;
        futs.reserve(methods.size());
        for (const auto& m : methods)
            futs.push_back(std::async(std::launch::async, run_one, m));
        for (auto& f : futs) out.runs.push_back(f.get());
    } else {
        for (const auto& m : methods) out.runs.push_back(run_one(m));
    }
    return out;
}

}  // namespace opsplit
