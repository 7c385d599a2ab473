#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "opsplit/experiments.hpp"

using namespace opsplit;
using testutil::tv_pair_prox_bisect;

TEST_CASE("pair prox at frozen values", "[experiments]") {
    auto [p, q] = tv_pair_prox(0.0, 1.0, 10.0);
    CHECK_THAT(p, Catch::Matchers::WithinAbs(0.5, 1e-15));  // cap at the midpoint
    CHECK_THAT(q, Catch::Matchers::WithinAbs(0.5, 1e-15));

    std::tie(p, q) = tv_pair_prox(0.0, 4.0, 1.0);
    CHECK_THAT(p, Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(q, Catch::Matchers::WithinAbs(3.0, 1e-15));

    std::tie(p, q) = tv_pair_prox(4.0, 0.0, 1.0);
    CHECK_THAT(p, Catch::Matchers::WithinAbs(3.0, 1e-15));
    CHECK_THAT(q, Catch::Matchers::WithinAbs(1.0, 1e-15));

    std::tie(p, q) = tv_pair_prox(2.0, 2.0, 1.0);
    CHECK(p == 2.0);
    CHECK(q == 2.0);
}

TEST_CASE("pair prox matches the bisection oracle", "[experiments][oracle]") {
    SplitMix64 rng(67);
    for (int rep = 0; rep < 10000; ++rep) {
        const double p0 = rng.uniform(-5.0, 5.0);
        const double q0 = rng.uniform(-5.0, 5.0);
        const double alpha = rng.uniform(0.01, 4.0);
        auto [pf, qf] = tv_pair_prox(p0, q0, alpha);
        auto [pb, qb] = tv_pair_prox_bisect(p0, q0, alpha);
        REQUIRE_THAT(pf, Catch::Matchers::WithinAbs(pb, 1e-10));
        REQUIRE_THAT(qf, Catch::Matchers::WithinAbs(qb, 1e-10));
    }
}

TEST_CASE("pair total-variation operator acts on disjoint pairs", "[experiments]") {
    auto even = make_tv_pairs(0);
    Vector x = even->resolvent(1.0, {0.0, 4.0, 1.0, 1.0, 9.0});
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 3.0);
    CHECK(x[2] == 1.0);
    CHECK(x[3] == 1.0);
    CHECK(x[4] == 9.0);  // unpaired tail element

    auto odd = make_tv_pairs(1);
    x = odd->resolvent(1.0, {7.0, 0.0, 4.0, 2.0, 2.0});
    CHECK(x[0] == 7.0);  // unpaired head element
    CHECK(x[1] == 1.0);
    CHECK(x[2] == 3.0);
    CHECK(x[3] == 2.0);
    CHECK(x[4] == 2.0);

    CHECK(tv_pairs_value({0.0, 4.0, 1.0, 1.0, 9.0}, 0) == 4.0);
    CHECK(tv_pairs_value({0.0, 4.0, 1.0, 1.0, 9.0}, 1) == 3.0 + 8.0);
    CHECK_THROWS_AS(TvPairsOp(2), InfeasibleParams);
}

TEST_CASE("pair total-variation resolvent is firmly nonexpansive", "[experiments]") {
    SplitMix64 rng(71);
    for (std::size_t offset : {0u, 1u}) {
        auto op = make_tv_pairs(offset);
        for (double alpha : {0.1, 1.0, 10.0}) {
            for (int rep = 0; rep < 20; ++rep) {
                Vector za = rng.normal_vector(9), zb = rng.normal_vector(9);
                Vector xa = op->resolvent(alpha, za), xb = op->resolvent(alpha, zb);
                Vector dx = sub(xa, xb), dz = sub(za, zb);
                REQUIRE(dot(dx, dx) <= dot(dz, dx) + 1e-10);
            }
        }
    }
}

TEST_CASE("generators are deterministic per seed", "[experiments]") {
    auto d1 = generate_denoise({.dim = 64}, 11);
    auto d2 = generate_denoise({.dim = 64}, 11);
    CHECK(d1.mask == d2.mask);
    CHECK(d1.a_obs == d2.a_obs);
    CHECK(d1.truth == d2.truth);
    CHECK(problem_to_json(d1).dump() == problem_to_json(d2).dump());
    auto d3 = generate_denoise({.dim = 64}, 12);
    CHECK(problem_to_json(d1).dump() != problem_to_json(d3).dump());

    auto p1 = generate_portfolio({.n_obs = 30, .dim = 10}, 5);
    auto p2 = generate_portfolio({.n_obs = 30, .dim = 10}, 5);
    CHECK(problem_to_json(p1).dump() == problem_to_json(p2).dump());

    auto s1 = generate_poisson_tv({.dim = 101}, 7);
    auto s2 = generate_poisson_tv({.dim = 101}, 7);
    CHECK(problem_to_json(s1).dump() == problem_to_json(s2).dump());
}

TEST_CASE("generator shape and range invariants", "[experiments]") {
    auto den = generate_denoise({.dim = 128, .lambda = 0.7}, 3);
    CHECK(den.mask.size() == 128 / 5);
    for (std::size_t k = 1; k < den.mask.size(); ++k) REQUIRE(den.mask[k - 1] < den.mask[k]);
    CHECK(den.a_obs.size() == den.mask.size());
    for (double v : den.truth) {
        REQUIRE(v >= 0.5);
        REQUIRE(v <= 4.5);
    }
    CHECK(den.ops.size() == 3);
    CHECK(!den.dist_to_ref_enabled());
    CHECK_THROWS_AS(generate_denoise({.dim = 100}, 1), NonPowerOfTwoError);

    auto port = generate_portfolio({.n_obs = 40, .dim = 12}, 3);
    CHECK(port.returns.rows() == 40);
    CHECK(port.returns.cols() == 12);
    CHECK(port.target > 0.0);
    CHECK(port.dist_to_ref_enabled());
    double mean_mu = 0.0;
    for (double m : port.mu) mean_mu += m;
    mean_mu /= double(port.mu.size());
    CHECK_THAT(port.target, Catch::Matchers::WithinRel(0.8 * mean_mu, 1e-12));

    auto poi = generate_poisson_tv({.dim = 101, .lambda = 2.0}, 3);
    CHECK(poi.counts.size() == 101);
    for (double c : poi.counts) {
        REQUIRE(c >= 0.0);
        REQUIRE(c == std::floor(c));
    }
    for (double r : poi.truth) {
        REQUIRE(r >= 1.0);
        REQUIRE(r <= 15.0);
    }
}

TEST_CASE("objective at hand-built instances", "[experiments]") {
    // Noise-free observations and wavelet targets taken from the signal
    // itself: the objective at the signal is exactly zero for any lambda.
    Problem den;
    den.kind = "denoise_l1";
    den.dim = 8;
    den.truth = {1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 3.0};
    den.mask = {1, 4, 6};
    den.a_obs = {den.truth[1], den.truth[4], den.truth[6]};
    den.b_coeffs = haar_forward(den.truth);
    for (double lambda : {0.5, 1.0, 7.0}) {
        den.lambda = lambda;
        auto v = den.objective(den.truth);
        CHECK_THAT(v.value, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK(v.slack == 0.0);
    }
    Vector dipped = den.truth;
    dipped[3] = -0.25;
    auto v = den.objective(dipped);
    CHECK(std::isinf(v.value));
    CHECK(std::isfinite(v.finite_part));
    CHECK(v.slack == 0.25);

    // Unit counts at a unit-constant signal: the likelihood term is exactly
    // lambda per coordinate and the variation terms vanish.
    Problem poi;
    poi.kind = "poisson_tv";
    poi.dim = 5;
    poi.lambda = 2.0;
    poi.counts = Vector(5, 1.0);
    auto pv = poi.objective(Vector(5, 1.0));
    CHECK_THAT(pv.value, Catch::Matchers::WithinAbs(2.0 * 5.0, 1e-12));
    CHECK(pv.slack == 0.0);
    pv = poi.objective(Vector(5, -0.5));
    CHECK(std::isinf(pv.value));
    CHECK(pv.slack == 0.5);
}

TEST_CASE("portfolio slack reports the orthant violation", "[experiments]") {
    // Dyadic uniform weights keep every partial sum of the budget exact, so
    // the feasible point has literally zero slack; the return margin is the
    // 20 percent gap the generator leaves below the uniform portfolio.
    auto port = generate_portfolio({.n_obs = 40, .dim = 8}, 9);
    Vector x(8, 0.125);
    auto ok = port.objective(x);
    CHECK(ok.slack == 0.0);
    CHECK(std::isfinite(ok.value));
    // Move the low-return asset's mass (and a bit more) to the high-return
    // asset: the budget stays exact, the return margin grows, and the only
    // violation left is the dipped coordinate.
    std::size_t lo = 0, hi = 0;
    for (std::size_t j = 1; j < port.mu.size(); ++j) {
        if (port.mu[j] < port.mu[lo]) lo = j;
        if (port.mu[j] > port.mu[hi]) hi = j;
    }
    REQUIRE(lo != hi);
    x[lo] -= 0.125 + 1e-3;
    x[hi] += 0.125 + 1e-3;
    auto bad = port.objective(x);
    CHECK(std::isinf(bad.value));
    CHECK_THAT(bad.slack, Catch::Matchers::WithinAbs(1e-3, 1e-12));
    CHECK_THAT(bad.finite_part, Catch::Matchers::WithinRel(ok.finite_part, 0.5));
}

TEST_CASE("problem json round-trip rebuilds the same operators", "[experiments]") {
    SplitMix64 rng(73);
    for (auto kind : {0, 1, 2}) {
        Problem p;
        if (kind == 0) p = generate_denoise({.dim = 64}, 21);
        if (kind == 1) p = generate_portfolio({.n_obs = 25, .dim = 8}, 21);
        if (kind == 2) p = generate_poisson_tv({.dim = 41}, 21);
        auto back = problem_from_json(problem_to_json(p));
        CHECK(back.kind == p.kind);
        CHECK(back.dim == p.dim);
        REQUIRE(back.ops.size() == p.ops.size());
        for (std::size_t i = 0; i < p.ops.size(); ++i) {
            CHECK(back.ops[i]->name() == p.ops[i]->name());
            Vector z = rng.normal_vector(p.dim);
            REQUIRE(dist2(back.ops[i]->resolvent(0.9, z), p.ops[i]->resolvent(0.9, z)) == 0.0);
        }
        // Identical dumps after one loop through JSON.
        CHECK(problem_to_json(back).dump() == problem_to_json(p).dump());
    }
}

TEST_CASE("operator json round-trip covers every kind", "[experiments]") {
    SplitMix64 rng(79);
    std::vector<OpPtr> ops = {
        make_zero(),
        make_normal_cone_zero(),
        make_indicator_nonneg(),
        make_indicator_simplex(),
        testutil::random_monotone_affine(rng, 4),
        make_skew_rotation(2.5),
        make_l1_offset({1.0, -2.0}, {0, 2}, 0.4),
        make_unitary_l1(make_haar(), Vector(4, 0.25), 1.1),
        make_indicator_halfspace({1.0, 2.0, 0.0, -1.0}, 0.5),
        make_quadratic_ls(Matrix::identity(4), 1.5),
        make_poisson_nll({0.0, 2.0, 5.0, 1.0}, 0.7),
        make_tv_pairs(1),
    };
    for (const auto& op : ops) {
        auto back = op_from_json(op_to_json(op));
        CHECK(back->name() == op->name());
        Vector z = rng.normal_vector(4);
        if (op->name() == "poisson_nll")
            for (auto& vv : z) vv = std::abs(vv) + 0.1;
        REQUIRE(dist2(back->resolvent(1.3, z), op->resolvent(1.3, z)) <= 1e-14);
    }
    CHECK_THROWS_AS(op_from_json(nlohmann::json{{"kind", "mystery"}}), MalformedSystem);
    CHECK_THROWS_AS(op_from_json(nlohmann::json{{"kind", "unitary_l1"},
                                                {"transform", "fourier"},
                                                {"b", Vector{0.0}},
                                                {"weight", 1.0}}),
                    MalformedSystem);
}

TEST_CASE("three affine operators: every method finds the common zero", "[experiments]") {
    // A(x) = x - a, B(x) = x - b, C(x) = x - c sum to zero exactly at the
    // mean of the offsets.
    const Vector za = {3.0, 0.0}, zb = {0.0, 3.0}, zc = {0.0, 0.0};
    const Vector want = {1.0, 1.0};
    auto mk = [](const Vector& v) {
        return make_affine(Matrix::identity(2), {-v[0], -v[1]});
    };
    std::vector<OpPtr> ops = {mk(za), mk(zb), mk(zc)};

    IterationConfig cfg;
    cfg.max_iters = 200000;
    cfg.fp_tol = 1e-11;
    for (const std::string method : {"ryu3", "ppxa", "dys", "pdhg3"}) {
        MethodConfig mc;
        mc.method = method;
        Splitting sp = make_splitting(mc, ops, 2);
        auto res = iterate(sp.step, sp.origin(), cfg);
        INFO(method << " status " << to_string(res.status) << " after " << res.iters);
        REQUIRE(res.status == IterStatus::Converged);
        REQUIRE(dist2(res.solution, want) <= 1e-6);
    }
}

TEST_CASE("experiment driver produces agreeing methods on a small instance",
          "[experiments][slow]") {
    auto prob = generate_poisson_tv({.dim = 101, .lambda = 1.0}, 2);
    IterationConfig cfg;
    cfg.max_iters = 20000;
    cfg.fp_tol = 1e-9;
    cfg.record_every = 100;
    auto methods = default_methods(prob);
    REQUIRE(methods.size() == 3);
    auto result = run_experiment(prob, methods, cfg);
    CHECK(result.reference.size() == prob.dim);
    CHECK(std::isfinite(result.reference_objective));
    for (const auto& run : result.runs) {
        INFO(run.cfg.method << " status " << to_string(run.result.status));
        REQUIRE(run.result.status == IterStatus::Converged);
        REQUIRE_THAT(run.final_objective.finite_part,
                     Catch::Matchers::WithinRel(result.reference_objective, 1e-3));
    }

    // Parallel execution reproduces the sequential traces byte for byte.
    auto par = run_experiment(prob, methods, cfg, true);
    REQUIRE(par.runs.size() == result.runs.size());
    for (std::size_t i = 0; i < par.runs.size(); ++i) {
        std::ostringstream seq_os, par_os;
        write_trace_csv(seq_os, result.runs[i].result.trace);
        write_trace_csv(par_os, par.runs[i].result.trace);
        REQUIRE(seq_os.str() == par_os.str());
    }
}

TEST_CASE("method defaults and operator ordering", "[experiments]") {
    auto poi = generate_poisson_tv({.dim = 21}, 1);
    auto table = default_methods(poi);
    REQUIRE(table.size() == 3);
    CHECK(table[0].method == "ryu3");
    CHECK(table[1].method == "ppxa");
    CHECK(table[2].method == "pdhg3");

    auto port = generate_portfolio({.n_obs = 20, .dim = 6}, 1);
    auto ptable = default_methods(port);
    CHECK(ptable[2].method == "dys");

    // dys gets the smooth operator last so it can be evaluated forward.
    auto rotated = ops_for_method(port, "dys");
    CHECK(rotated[2]->name() == "quadratic_ls");
    CHECK(rotated[0]->name() == "indicator_simplex");
    auto unchanged = ops_for_method(port, "ryu3");
    CHECK(unchanged[0]->name() == "quadratic_ls");
}
