#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "helpers.hpp"
#include "opsplit/splittings.hpp"

using namespace opsplit;
using testutil::CountingOp;
using testutil::random_monotone_affine;

TEST_CASE("three-operator two-block step at frozen values", "[splittings]") {
    // All zero operators: the resolvents are identities, so the step reduces
    // to explicit affine arithmetic on the scalar blocks.
    auto z3 = make_zero();
    Ryu3Params p;
    p.alpha = 1.0;
    p.theta = 0.5;
    LiftedPoint z(std::vector<Vector>{{3.0}, {2.0}});
    auto r = step_ryu3(p, *z3, *z3, *z3, z);
    CHECK(r.x1 == Vector{3.0});
    CHECK(r.x2 == Vector{5.0});
    CHECK(r.x3 == Vector{3.0});
    CHECK(r.t.blocks[0] == Vector{3.0});
    CHECK(r.t.blocks[1] == Vector{1.0});
    CHECK_THAT(r.s[0], Catch::Matchers::WithinAbs(11.0 / 3.0, 1e-15));
}

TEST_CASE("ppxa step at frozen values", "[splittings]") {
    auto z3 = make_zero();
    PpxaParams p;  // gamma 1, equal weights, theta 1
    LiftedPoint z(std::vector<Vector>{{3.0}, {0.0}, {0.0}});
    auto r = step_ppxa(p, *z3, *z3, *z3, z);
    CHECK_THAT(r.t.blocks[0][0], Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(r.t.blocks[1][0], Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK_THAT(r.t.blocks[2][0], Catch::Matchers::WithinAbs(1.0, 1e-15));
    CHECK(r.s == Vector{3.0});  // S reads the first resolvent output
}

TEST_CASE("forward-step three-operator map at frozen values", "[splittings]") {
    auto zero = make_zero();
    Matrix eye = Matrix::identity(1);
    auto ident = make_affine(std::move(eye), {0.0});
    DysParams p;  // alpha 1
    auto r = step_dys(p, *zero, *zero, *ident, {2.0});
    CHECK(r.u == Vector{2.0});
    CHECK(r.w == Vector{0.0});  // 2u - z - alpha C(u) = 0
    CHECK(r.t == Vector{0.0});
    CHECK(r.s == Vector{2.0});
}

TEST_CASE("primal-dual step at frozen values", "[splittings]") {
    auto z3 = make_zero();
    Pdhg3Params p;  // tau = sigma = 1/2
    LiftedPoint z(std::vector<Vector>{{4.0}, {2.0}, {2.0}});
    auto r = step_pdhg3(p, *z3, *z3, *z3, z);
    CHECK(r.t.blocks[0] == Vector{2.0});
    CHECK(r.t.blocks[1] == Vector{0.0});
    CHECK(r.t.blocks[2] == Vector{0.0});
    CHECK(r.s == Vector{2.0});
}

TEST_CASE("family step on a projection pair at frozen values", "[splittings]") {
    auto nc = make_normal_cone_zero();
    auto zero = make_zero();
    FamilyParams p;  // alpha = beta = theta = 1, eta = 0
    auto r = step_family(p, *nc, *zero, {5.0, -2.0});
    CHECK(r.x1 == Vector{0.0, 0.0});
    CHECK(r.x2 == Vector{-5.0, 2.0});  // (1+1)x1 - z
    CHECK(r.t == Vector{0.0, 0.0});
    CHECK(r.s == Vector{-5.0, 2.0});
}

TEST_CASE("two-block map restricted to block one is the two-operator map", "[splittings]") {
    SplitMix64 rng(21);
    const std::size_t d = 6;
    auto a = random_monotone_affine(rng, d);
    auto c = random_monotone_affine(rng, d);
    auto zero = make_zero();
    for (double theta : {0.3, 1.0, 1.7}) {
        Ryu3Params rp;
        rp.alpha = 0.8;
        rp.theta = theta;
        FamilyParams fp;
        fp.alpha = 0.8;
        fp.beta = 0.8;
        fp.theta = theta;
        for (int rep = 0; rep < 334; ++rep) {
            Vector z1 = rng.normal_vector(d);
            LiftedPoint z(std::vector<Vector>{z1, Vector(d, 0.0)});
            auto r3 = step_ryu3(rp, *a, *zero, *c, z);
            auto r2 = step_family(fp, *a, *c, z1);
            REQUIRE(dist2(r3.x2, r3.x1) == 0.0);  // middle resolvent is inert
            REQUIRE(dist2(r3.t.blocks[0], r2.t) <= 1e-12);
        }
    }
}

TEST_CASE("family map equals the averaged reflection composition", "[splittings]") {
    // With equal steps, T = (1 - th/2) I + (th/2) (2 J_B - I)(2 J_A - I).
    SplitMix64 rng(31);
    const std::size_t d = 7;
    auto a = random_monotone_affine(rng, d);
    auto b = random_monotone_affine(rng, d);
    for (double theta : {0.5, 1.0, 2.0}) {
        FamilyParams p;
        p.alpha = 1.3;
        p.beta = 1.3;
        p.theta = theta;
        for (int rep = 0; rep < 50; ++rep) {
            Vector z = rng.normal_vector(d);
            Vector t = step_family(p, *a, *b, z).t;
            Vector ra = axpy(scale(2.0, a->resolvent(1.3, z)), -1.0, z);
            Vector rb = axpy(scale(2.0, b->resolvent(1.3, ra)), -1.0, ra);
            Vector composed = add(scale(1.0 - theta / 2.0, z), scale(theta / 2.0, rb));
            REQUIRE(dist2(t, composed) <= 1e-12);
        }
    }
}

TEST_CASE("family map with theta=1 and equal steps is nonexpansive", "[splittings]") {
    SplitMix64 rng(41);
    const std::size_t d = 5;
    for (int inst = 0; inst < 20; ++inst) {
        auto a = random_monotone_affine(rng, d);
        auto b = random_monotone_affine(rng, d);
        FamilyParams p;
        p.alpha = rng.uniform(0.2, 3.0);
        p.beta = p.alpha;
        p.theta = 1.0;
        for (int rep = 0; rep < 10; ++rep) {
            Vector y = rng.normal_vector(d), z = rng.normal_vector(d);
            Vector ty = step_family(p, *a, *b, y).t;
            Vector tz = step_family(p, *a, *b, z).t;
            REQUIRE(dist2(ty, tz) <= dist2(y, z) + 1e-10);
        }
    }
}

TEST_CASE("two-block map with theta=1 is nonexpansive", "[splittings]") {
    SplitMix64 rng(43);
    const std::size_t d = 5;
    for (int inst = 0; inst < 20; ++inst) {
        auto a = random_monotone_affine(rng, d);
        auto b = random_monotone_affine(rng, d);
        auto c = random_monotone_affine(rng, d);
        Ryu3Params p;
        p.alpha = rng.uniform(0.2, 3.0);
        p.theta = 1.0;
        for (int rep = 0; rep < 10; ++rep) {
            LiftedPoint y(std::vector<Vector>{rng.normal_vector(d), rng.normal_vector(d)});
            LiftedPoint z(std::vector<Vector>{rng.normal_vector(d), rng.normal_vector(d)});
            auto ty = step_ryu3(p, *a, *b, *c, y);
            auto tz = step_ryu3(p, *a, *b, *c, z);
            REQUIRE(lifted_dist(ty.t, tz.t) <= lifted_dist(y, z) + 1e-10);
        }
    }
}

TEST_CASE("every method evaluates each resolvent exactly once per step", "[splittings]") {
    SplitMix64 rng(51);
    const std::size_t d = 4;
    auto ca = std::make_shared<CountingOp>(random_monotone_affine(rng, d));
    auto cb = std::make_shared<CountingOp>(random_monotone_affine(rng, d));
    auto cc = std::make_shared<CountingOp>(random_monotone_affine(rng, d));
    std::vector<std::shared_ptr<CountingOp>> counters{ca, cb, cc};
    auto reset = [&] {
        for (auto& c : counters) c->reset();
    };

    const Vector z1 = rng.normal_vector(d);

    reset();
    step_family(FamilyParams{}, *ca, *cb, z1);
    CHECK(ca->resolvent_calls() == 1);
    CHECK(cb->resolvent_calls() == 1);

    reset();
    step_ryu3(Ryu3Params{}, *ca, *cb, *cc,
              LiftedPoint(std::vector<Vector>{z1, z1}));
    for (auto& c : counters) CHECK(c->resolvent_calls() == 1);

    reset();
    step_ppxa(PpxaParams{}, *ca, *cb, *cc,
              LiftedPoint(std::vector<Vector>{z1, z1, z1}));
    for (auto& c : counters) CHECK(c->resolvent_calls() == 1);

    reset();
    step_dys(DysParams{}, *ca, *cb, *cc, z1);
    CHECK(ca->resolvent_calls() == 1);
    CHECK(cb->resolvent_calls() == 1);
    CHECK(cc->resolvent_calls() == 0);
    CHECK(cc->forward_calls() == 1);

    reset();
    step_pdhg3(Pdhg3Params{}, *ca, *cb, *cc,
               LiftedPoint(std::vector<Vector>{z1, z1, z1}));
    for (auto& c : counters) CHECK(c->resolvent_calls() == 1);
}

TEST_CASE("primal-dual map with inert duals reduces to resolvent iteration", "[splittings]") {
    SplitMix64 rng(61);
    const std::size_t d = 5;
    auto a = random_monotone_affine(rng, d);
    auto zero = make_zero();
    Pdhg3Params p;
    p.tau = 1.0 / std::sqrt(2.0);
    p.sigma = 1.0 / std::sqrt(2.0);

    // Zero dual operators collapse both dual blocks to rounding error, so
    // the primal block follows the plain resolvent iteration on A.
    LiftedPoint z = LiftedPoint::zeros(3, d);
    Vector x_ppm(d, 0.0);
    for (int k = 0; k < 10; ++k) {
        auto r = step_pdhg3(p, *a, *zero, *zero, z);
        x_ppm = a->resolvent(p.tau, x_ppm);
        REQUIRE(dist2(r.t.blocks[0], x_ppm) <= 1e-12 * (1.0 + norm2(x_ppm)));
        REQUIRE(norm2(r.t.blocks[1]) <= 1e-13);
        REQUIRE(norm2(r.t.blocks[2]) <= 1e-13);
        z = std::move(r.t);
    }
}

TEST_CASE("parameter validation rejects out-of-range values", "[splittings][errors]") {
    CHECK_THROWS_AS((FamilyParams{.alpha = 0.0}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((FamilyParams{.beta = -1.0}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((FamilyParams{.theta = 0.0}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((Ryu3Params{.alpha = -1.0}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((Ryu3Params{.theta = 0.0}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((PpxaParams{.gamma = 0.0}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((PpxaParams{.omega = {0.5, 0.2, 0.2}}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((PpxaParams{.theta = 2.0}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((DysParams{.alpha = 0.0}.validate()), InfeasibleParams);
    CHECK_THROWS_AS((Pdhg3Params{.tau = 1.0, .sigma = 1.0}.validate()), InfeasibleParams);
    CHECK_NOTHROW((Pdhg3Params{.tau = 0.5, .sigma = 1.0}.validate()));
}

TEST_CASE("method tables and binding checks", "[splittings]") {
    CHECK(method_arity("ppm") == 1);
    CHECK(method_arity("drs") == 2);
    CHECK(method_arity("prs") == 2);
    CHECK(method_arity("family") == 2);
    CHECK(method_arity("ryu3") == 3);
    CHECK(method_arity("ppxa") == 3);
    CHECK(method_arity("dys") == 3);
    CHECK(method_arity("pdhg3") == 3);
    CHECK_THROWS_AS(method_arity("nope"), InfeasibleParams);

    CHECK(method_lifting("ryu3") == 2);
    CHECK(method_lifting("ppxa") == 3);
    CHECK(method_lifting("pdhg3") == 3);
    CHECK(method_lifting("drs") == 1);
    CHECK(method_lifting("dys") == 1);

    SplitMix64 rng(71);
    auto a = random_monotone_affine(rng, 3);
    auto b = random_monotone_affine(rng, 3);
    auto zero = make_zero();

    CHECK_THROWS_AS(make_splitting(MethodConfig{.method = "drs"}, {a}, 3), InfeasibleParams);
    CHECK_THROWS_AS(make_splitting(MethodConfig{.method = "drs"}, {a, b}, 4), DimensionError);
    CHECK_THROWS_AS(make_splitting(MethodConfig{.method = "drs", .theta = 2.0}, {a, b}, 3),
                    InfeasibleParams);
    CHECK_THROWS_AS(
        make_splitting(MethodConfig{.method = "dys"}, {zero, zero, make_indicator_nonneg()}, 3),
        InfeasibleParams);

    Splitting sp = make_splitting(MethodConfig{.method = "ryu3"}, {a, b, zero}, 3);
    CHECK(sp.lifting == 2);
    CHECK(sp.origin().blocks.size() == 2);
    CHECK(sp.origin().blocks[0].size() == 3);

    // prs is the theta = 2 member of the family.
    Splitting prs = make_splitting(MethodConfig{.method = "prs", .alpha = 0.7}, {a, b}, 3);
    FamilyParams fp;
    fp.alpha = 0.7;
    fp.beta = 0.7;
    fp.theta = 2.0;
    Vector z = rng.normal_vector(3);
    LiftedPoint lp(std::vector<Vector>{z});
    CHECK(dist2(prs.step(lp).t.blocks[0], step_family(fp, *a, *b, z).t) == 0.0);
}
