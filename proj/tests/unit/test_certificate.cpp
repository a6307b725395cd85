#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "rrwqbd/certificate.hpp"
#include "support/instances.hpp"

using namespace rrwqbd;
namespace ts = testing_support;
using Catch::Approx;

namespace {

double oracle_margin(const ts::Jackson& j, double t1, double t2) {
    double worst = 0.0;
    for (Region r : kNonOriginRegions)
        worst = std::max(worst, ts::mgf(ts::jackson_law(r, j.l1, j.l2, j.s1, j.s2, j.q1, j.q2), t1, t2));
    return 1.0 - worst;
}

}  // namespace

TEST_CASE("gamma equals the hand-computed MGF") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& inst : ts::instances()) {
        const auto spec = jackson_spec(ts::params(inst));
        for (int t = 0; t < 50; ++t) {
            const Vec2 th{u(rng), u(rng)};
            for (Region r : kAllRegions) {
                const auto law = ts::jackson_law(r, inst.l1, inst.l2, inst.s1, inst.s2, inst.q1, inst.q2);
                CHECK(gamma(spec, r, th) == Approx(ts::mgf(law, th[0], th[1])).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("gamma is one at the origin of the tilt space") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 30; ++t) {
        const auto spec = ts::random_spec(rng);
        for (Region r : kAllRegions) CHECK(gamma(spec, r, {0.0, 0.0}) == Approx(1.0).margin(1e-14));
    }
}

TEST_CASE("theta search on the symmetric instance") {
    const auto& sym = ts::instances()[0];
    const auto spec = jackson_spec(ts::params(sym));
    const auto s = find_theta(spec);
    CHECK(s.theta.theta1() == Approx(0.34657).margin(2e-4));
    CHECK(s.theta.theta2() == Approx(0.34657).margin(2e-4));
    CHECK(s.margin == Approx(0.034315).margin(1e-5));
    CHECK(s.margin >= s.grid_margin);
    CHECK(s.margin == Approx(oracle_margin(sym, s.theta.theta1(), s.theta.theta2())).margin(1e-15));
    // symmetric optimum: on the diagonal, gamma^E(t,t) has its minimum at t = ln(2)/2
    CHECK(s.theta.theta1() == Approx(std::log(2.0) / 2).margin(2e-4));
}

TEST_CASE("theta search beats every grid point of a coarse independent scan") {
    for (const auto& inst : ts::instances()) {
        const auto spec = jackson_spec(ts::params(inst));
        const auto s = find_theta(spec);
        double best = -1.0;
        for (int a = 0; a < 60; ++a)
            for (int b = 0; b < 60; ++b) {
                const double t1 = 1e-3 * std::pow(3000.0, a / 59.0);
                const double t2 = 1e-3 * std::pow(3000.0, b / 59.0);
                best = std::max(best, oracle_margin(inst, t1, t2));
            }
        CHECK(s.margin >= best - 1e-12);
        CHECK(in_feasible_region(spec, s.theta));
    }
}

TEST_CASE("theta search fails when no tilt is feasible") {
    const auto spec = jackson_spec(JacksonParams(0.45, 0.05, 0.25, 0.25, 0.5, 0.5));
    CHECK_THROWS_AS(find_theta(spec), CertificateError);
}

TEST_CASE("theta tilde lies on the ray at the requested fraction") {
    for (const auto& inst : ts::instances()) {
        const auto spec = jackson_spec(ts::params(inst));
        const auto th = find_theta(spec).theta;
        const auto tt = find_theta_tilde(spec, th);
        const double s = tt.ray_used;
        CHECK(s == Approx(0.9 * tt.ray_max).epsilon(1e-12));
        CHECK(tt.theta_tilde.theta1() == Approx(th.theta1() + s).epsilon(1e-14));
        CHECK(tt.theta_tilde.theta2() == Approx(th.theta2() + s).epsilon(1e-14));
        CHECK(oracle_margin(inst, th.theta1() + s, th.theta2() + s) > 0.0);
        // just beyond the boundary the tilt is infeasible
        const double over = tt.ray_max + 1e-6;
        CHECK(oracle_margin(inst, th.theta1() + over, th.theta2() + over) < 0.0);
    }
}

TEST_CASE("certificate constants match the closed-form definitions") {
    for (const auto& inst : ts::instances()) {
        const auto spec = jackson_spec(ts::params(inst));
        const auto th = find_theta(spec).theta;
        const auto tt = find_theta_tilde(spec, th).theta_tilde;
        const auto cert = drift_certificate(spec, th, tt);
        const auto origin = ts::jackson_law(Region::Origin, inst.l1, inst.l2, inst.s1, inst.s2, inst.q1, inst.q2);
        const double c = oracle_margin(inst, th.theta1(), th.theta2());
        const double b = 1 + (ts::mgf(origin, th.theta1(), th.theta2()) - 1) / c;
        CHECK(cert.c == Approx(c).epsilon(1e-12));
        CHECK(cert.b == Approx(b).epsilon(1e-12));
        const double ct = oracle_margin(inst, tt.theta1(), tt.theta2());
        const double bt = 1 + (ts::mgf(origin, tt.theta1(), tt.theta2()) - 1) / ct;
        CHECK(cert.c_tilde == Approx(ct).epsilon(1e-12));
        CHECK(cert.b_tilde == Approx(bt).epsilon(1e-12));
        CHECK(cert.b >= 1.0);
    }
    const auto spec = jackson_spec(ts::params(ts::instances()[0]));
    const auto th = find_theta(spec).theta;
    const auto cert = drift_certificate(spec, th, find_theta_tilde(spec, th).theta_tilde);
    CHECK(cert.c == Approx(0.0343146).margin(1e-6));
    CHECK(cert.b == Approx(3.41419).margin(1e-4));
}

TEST_CASE("drift certificate rejects bad tilts") {
    const auto spec = jackson_spec(ts::params(ts::instances()[0]));
    const auto th = find_theta(spec).theta;
    CHECK_THROWS_AS(drift_certificate(spec, th, th), CertificateError);
    CHECK_THROWS_AS(drift_certificate(spec, th, Tilt(5.0, 5.0)), CertificateError);
    CHECK_THROWS_AS(Tilt(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("resolve theta tilde shrinks infeasible requests") {
    const auto spec = jackson_spec(ts::params(ts::instances()[0]));
    const auto th = find_theta(spec).theta;
    const auto t = resolve_theta_tilde(spec, th, {4.0, 4.0});
    CHECK(in_feasible_region(spec, t));
    CHECK(t.theta1() > th.theta1());
    CHECK(t.theta2() > th.theta2());
    const auto ok = resolve_theta_tilde(spec, th, {0.5, 0.5});
    CHECK(ok.theta1() == 0.5);
}

TEST_CASE("drift condition holds for the certificate and fails when c is inflated") {
    for (const auto& inst : ts::instances()) {
        const auto spec = jackson_spec(ts::params(inst));
        const auto th = find_theta(spec).theta;
        const auto cert = drift_certificate(spec, th, find_theta_tilde(spec, th).theta_tilde);
        const auto base = check_drift_condition(spec, cert, LyapunovVariant::Base);
        const auto tilde = check_drift_condition(spec, cert, LyapunovVariant::Tilde);
        CHECK(base.passed);
        CHECK(tilde.passed);
        CHECK(base.states_checked == 61 * 61);
        const auto bad = check_drift_condition(spec, with_scaled_c(cert, 2.0), LyapunovVariant::Base);
        CHECK_FALSE(bad.passed);
        CHECK(bad.violations > 0);
    }
}

TEST_CASE("drift inequality by direct summation on random specs") {
    // property: for any feasible theta, P v <= (1 - c) v + b 1_0 at sampled states
    std::mt19937_64 rng(42);
    int tried = 0;
    for (int t = 0; t < 200 && tried < 25; ++t) {
        const auto spec = ts::random_spec(rng, 0.8);
        if (!check_stability(spec).stable || !check_assumption2(spec).holds) continue;
        ThetaSearchOptions opts;
        opts.grid_points = 40;
        ThetaSearch s = [&] {
            try {
                return find_theta(spec, opts);
            } catch (const CertificateError&) {
                return ThetaSearch{Tilt(1, 1), 0, -1, 0, 0, false};
            }
        }();
        if (s.margin <= 0) continue;
        ++tried;
        const auto tt = find_theta_tilde(spec, s.theta).theta_tilde;
        const auto cert = drift_certificate(spec, s.theta, tt);
        for (State x : {State{0, 0}, State{5, 0}, State{0, 5}, State{3, 4}, State{12, 9}}) {
            double pv = 0.0;
            for (const auto& [to, p] : step_distribution(spec, x)) pv += p * lyapunov_v(cert, to).value;
            const double v = lyapunov_v(cert, x).value;
            const double rhs = (1 - cert.c) * v + (x == State{0, 0} ? cert.b : 0.0);
            CHECK(pv <= rhs * (1 + 1e-12));
        }
    }
    CHECK(tried > 0);
}

TEST_CASE("lyapunov value in log space") {
    const auto spec = jackson_spec(ts::params(ts::instances()[0]));
    const auto th = find_theta(spec).theta;
    const auto cert = drift_certificate(spec, th, find_theta_tilde(spec, th).theta_tilde);
    const auto v = lyapunov_v(cert, {3, 2});
    CHECK(v.value == Approx(std::exp(3 * th.theta1() + 2 * th.theta2()) / cert.c));
    const auto huge = lyapunov_v(cert, {100000, 100000});
    CHECK(huge.saturated);
    CHECK(std::isfinite(huge.log_value));
}
