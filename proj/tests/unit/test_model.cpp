#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rrwqbd/model.hpp"
#include "support/instances.hpp"

using namespace rrwqbd;
namespace ts = testing_support;
using Catch::Approx;

TEST_CASE("classify partitions the quarter plane") {
    CHECK(classify({0, 0}) == Region::Origin);
    CHECK(classify({3, 0}) == Region::Face1);
    CHECK(classify({0, 7}) == Region::Face2);
    CHECK(classify({2, 5}) == Region::Interior);
}

TEST_CASE("support excludes moves below the axes") {
    CHECK(in_support(Region::Interior, {-1, -1}));
    CHECK_FALSE(in_support(Region::Face1, {0, -1}));
    CHECK(in_support(Region::Face1, {-1, 0}));
    CHECK_FALSE(in_support(Region::Face2, {-1, 1}));
    CHECK(in_support(Region::Face2, {1, -1}));
    CHECK_FALSE(in_support(Region::Origin, {-1, 0}));
    CHECK(in_support(Region::Origin, {1, 1}));
}

TEST_CASE("jackson laws match the hand-written cooperative-server laws") {
    for (const auto& inst : ts::instances()) {
        const auto spec = jackson_spec(ts::params(inst));
        for (Region r : kAllRegions) {
            const auto expected = ts::jackson_law(r, inst.l1, inst.l2, inst.s1, inst.s2, inst.q1, inst.q2);
            double total = 0.0;
            for (int dx = -1; dx <= 1; ++dx)
                for (int dy = -1; dy <= 1; ++dy) {
                    auto it = expected.find({dx, dy});
                    const double want = it == expected.end() ? 0.0 : it->second;
                    CHECK(spec.law(r).prob(dx, dy) == Approx(want).margin(1e-15));
                    total += spec.law(r).prob(dx, dy);
                }
            CHECK(total == Approx(1.0).margin(1e-14));
        }
        CHECK(validate_spec(spec).ok());
    }
}

TEST_CASE("jackson loads solve the traffic equations") {
    for (const auto& inst : ts::instances()) {
        const auto [r1, r2] = ts::params(inst).loads();
        const auto [e1, e2] = ts::loads(inst.l1, inst.l2, inst.s1, inst.s2, inst.q1, inst.q2);
        CHECK(r1 == Approx(e1).epsilon(1e-13));
        CHECK(r2 == Approx(e2).epsilon(1e-13));
    }
    // symmetric instance: a = 0.1 / 0.5 = 0.2, rho = 0.5
    const auto [r1, r2] = JacksonParams(0.1, 0.1, 0.4, 0.4, 0.5, 0.5).loads();
    CHECK(r1 == Approx(0.5));
    CHECK(r2 == Approx(0.5));
}

TEST_CASE("jackson params reject bad input") {
    CHECK_THROWS_AS(JacksonParams(0.0, 0.1, 0.4, 0.4, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(JacksonParams(0.1, 0.1, -0.4, 0.4, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(JacksonParams(0.1, 0.1, 0.4, 0.4, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(JacksonParams(0.1, 0.1, 0.4, 0.4, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("validation reports each violation kind") {
    const auto good = jackson_spec(JacksonParams(0.1, 0.1, 0.4, 0.4, 0.5, 0.5));

    SECTION("support") {
        TransitionLaw f1 = good.law(Region::Face1);
        f1.set({0, -1}, 0.01);
        f1.set({0, 0}, f1.prob(0, 0) - 0.01);
        const RandomWalkSpec bad(good.law(Region::Origin), f1, good.law(Region::Face2),
                                 good.law(Region::Interior));
        const auto rep = validate_spec(bad);
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.violations.front().kind == ViolationKind::Support);
        CHECK(rep.violations.front().region == Region::Face1);
    }
    SECTION("normalization") {
        TransitionLaw in = good.law(Region::Interior);
        in.set({1, 0}, in.prob(1, 0) + 0.05);
        const RandomWalkSpec bad(good.law(Region::Origin), good.law(Region::Face1),
                                 good.law(Region::Face2), in);
        const auto rep = validate_spec(bad);
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.violations.front().kind == ViolationKind::Normalization);
        const auto fixed = renormalized(bad);
        CHECK(fixed.law(Region::Interior).total() == Approx(1.0).margin(1e-15));
        CHECK(validate_spec(fixed).ok());
    }
    SECTION("range") {
        TransitionLaw in = good.law(Region::Interior);
        in.set({-1, -1}, -0.1);
        in.set({1, 0}, in.prob(1, 0) + 0.1);
        const RandomWalkSpec bad(good.law(Region::Origin), good.law(Region::Face1),
                                 good.law(Region::Face2), in);
        const auto rep = validate_spec(bad);
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.violations.front().kind == ViolationKind::Range);
    }
    SECTION("irreducibility") {
        // the walk can never leave the first axis
        const TransitionLaw o(Region::Origin, {{{1, 0}, 0.5}, {{0, 0}, 0.5}});
        const TransitionLaw f1(Region::Face1, {{{1, 0}, 0.3}, {{-1, 0}, 0.7}});
        const TransitionLaw f2(Region::Face2, {{{0, -1}, 1.0}});
        const TransitionLaw in(Region::Interior, {{{-1, 0}, 0.5}, {{0, -1}, 0.5}});
        const auto rep = validate_spec(RandomWalkSpec(o, f1, f2, in));
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.violations.front().kind == ViolationKind::Irreducibility);
    }
    SECTION("aperiodicity") {
        // every move changes n1 + n2 by exactly one
        const TransitionLaw o(Region::Origin, {{{1, 0}, 0.5}, {{0, 1}, 0.5}});
        const TransitionLaw f1(Region::Face1, {{{1, 0}, 0.2}, {{0, 1}, 0.2}, {{-1, 0}, 0.6}});
        const TransitionLaw f2(Region::Face2, {{{1, 0}, 0.2}, {{0, 1}, 0.2}, {{0, -1}, 0.6}});
        const TransitionLaw in(Region::Interior,
                               {{{1, 0}, 0.1}, {{0, 1}, 0.1}, {{-1, 0}, 0.4}, {{0, -1}, 0.4}});
        const auto rep = validate_spec(RandomWalkSpec(o, f1, f2, in));
        REQUIRE_FALSE(rep.ok());
        CHECK(rep.violations.front().kind == ViolationKind::Aperiodicity);
    }
}

TEST_CASE("mean drift and wedge") {
    const TransitionLaw law(Region::Interior, {{{1, 0}, 0.25}, {{-1, 1}, 0.25}, {{0, -1}, 0.5}});
    const auto mu = mean_drift(law);
    CHECK(mu.mu1 == Approx(0.0).margin(1e-16));
    CHECK(mu.mu2 == Approx(-0.25));
    CHECK(wedge(Vec2{1, 0}, Vec2{0, 1}) == 1.0);
    CHECK(wedge(Vec2{0, 1}, Vec2{1, 0}) == -1.0);
}

TEST_CASE("stability verdict on reference instances") {
    for (const auto& inst : ts::instances()) {
        const auto spec = jackson_spec(ts::params(inst));
        const auto v = check_stability(spec);
        CHECK(v.stable);
        CHECK(check_assumption2(spec).holds);
        CHECK(v.diagnostics.size() == 12);
    }
    const auto unstable = jackson_spec(JacksonParams(0.45, 0.05, 0.25, 0.25, 0.5, 0.5));
    CHECK_FALSE(check_stability(unstable).stable);
}

TEST_CASE("stability verdict follows the hand-computed case A inequalities") {
    // Case A for Jackson laws: interior drifts negative in both coordinates and
    // the wedge conditions against each face drift.
    std::mt19937_64 rng(7);
    int checked = 0;
    for (int t = 0; t < 2000; ++t) {
        const auto d = ts::draw(rng);
        const auto spec = jackson_spec(JacksonParams(d.l1, d.l2, d.s1, d.s2, d.q1, d.q2));
        auto drift = [&](Region r) {
            const auto law = ts::jackson_law(r, d.l1, d.l2, d.s1, d.s2, d.q1, d.q2);
            double m1 = 0, m2 = 0;
            for (const auto& [m, p] : law) m1 += p * m.first, m2 += p * m.second;
            return Vec2{m1, m2};
        };
        const Vec2 e = drift(Region::Interior), f1 = drift(Region::Face1), f2 = drift(Region::Face2);
        const double w1 = e[0] * f1[1] - e[1] * f1[0];
        const double w2 = e[0] * f2[1] - e[1] * f2[0];
        const double band = 1e-9;
        if (std::abs(e[0]) < band || std::abs(e[1]) < band || std::abs(w1) < band || std::abs(w2) < band)
            continue;
        const bool case_a = e[0] < 0 && e[1] < 0 && w1 < 0 && w2 > 0;
        const auto v = check_stability(spec);
        if (case_a) {
            CHECK(v.stable);
            CHECK(v.which == StabilityCase::A);
        } else {
            CHECK(v.which != StabilityCase::A);
        }
        ++checked;
    }
    CHECK(checked > 1900);
}

TEST_CASE("loads below one imply stability; every disagreement has loads at least one") {
    std::mt19937_64 rng(20261019);
    int disagreements = 0;
    for (int t = 0; t < 3000; ++t) {
        const auto d = ts::draw(rng);
        const auto [r1, r2] = ts::loads(d.l1, d.l2, d.s1, d.s2, d.q1, d.q2);
        if (std::abs(r1 - 1) < 1e-9 || std::abs(r2 - 1) < 1e-9) continue;
        const bool rho_stable = r1 < 1 && r2 < 1;
        const bool a1 = check_stability(jackson_spec(JacksonParams(d.l1, d.l2, d.s1, d.s2, d.q1, d.q2))).stable;
        if (rho_stable) CHECK(a1);
        if (a1 != rho_stable) ++disagreements;
    }
    // cooperative servers enlarge the stability region, so disagreements exist
    CHECK(disagreements > 0);
}

TEST_CASE("step distribution sums to one and stays in the quarter plane") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const auto spec = ts::random_spec(rng);
        REQUIRE(validate_spec(spec).ok());
        for (State s : {State{0, 0}, State{4, 0}, State{0, 4}, State{3, 3}}) {
            double total = 0.0;
            for (const auto& [to, p] : step_distribution(spec, s)) {
                CHECK(to.n1 >= 0);
                CHECK(to.n2 >= 0);
                CHECK(std::abs(to.n1 - s.n1) <= 1);
                CHECK(std::abs(to.n2 - s.n2) <= 1);
                CHECK(p > 0.0);
                total += p;
            }
            CHECK(total == Approx(1.0).margin(1e-14));
        }
    }
}
