#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rrwqbd/bounds.hpp"
#include "support/instances.hpp"

using namespace rrwqbd;
namespace ts = testing_support;
using Catch::Approx;

namespace {

DriftCertificate certificate_for(const RandomWalkSpec& spec) {
    const auto th = find_theta(spec).theta;
    return drift_certificate(spec, th, find_theta_tilde(spec, th).theta_tilde);
}

// E(n) straight from its definition, summing the top layer far enough that
// the geometric remainder is negligible.
double oracle_E(const QbdSolution& sol, const DriftCertificate& cert) {
    const double t1 = cert.theta.theta1(), t2 = cert.theta.theta2();
    const int n = sol.n;
    double sum = 0.0;
    Eigen::VectorXd x = sol.pi0;
    for (int k = 0; k < 20000; ++k) {
        if (k == 1) x = sol.pi1;
        if (k >= 2) x = sol.rate.R.transpose() * x;
        if (x[n] == 0.0) break;
        sum += x[n] * (std::exp(t1 + t2 + k * t1 + n * t2) + cert.b);
    }
    return 12.0 / cert.c * sum;
}

double oracle_E_tilde(const DriftCertificate& c, int n) {
    const double t1 = c.theta.theta1(), t2 = c.theta.theta2();
    const double u1 = c.theta_tilde.theta1(), u2 = c.theta_tilde.theta2();
    return 12.0 * c.b_tilde / c.c *
           (std::exp(t1 + t2) * std::exp(-n * (u2 - t2)) / (1 - std::exp(-(u1 - t1))) +
            c.b * std::exp(-n * u2) / (1 - std::exp(-u1)));
}

}  // namespace

TEST_CASE("E(n) on the symmetric instance") {
    const auto spec = jackson_spec(ts::params(ts::instances()[0]));
    const auto cert = certificate_for(spec);
    const std::array<std::pair<int, double>, 4> expected = {
        {{5, 26.093}, {10, 1.99979}, {20, 0.0224539}, {40, 4.7735e-6}}};
    for (const auto& [n, want] : expected) {
        const auto sol = solve_qbd(spec, n);
        const double E = error_bound_E(sol, cert);
        CHECK(E == Approx(want).epsilon(2e-4));
        CHECK(E == Approx(oracle_E(sol, cert)).epsilon(1e-10));
        CHECK(E >= oracle_E(sol, cert) * (1 - 1e-13));
    }
    CHECK(error_bound_E_tilde(cert, 5) == Approx(18808.46).epsilon(1e-4));
    CHECK(error_bound_E_tilde(cert, 40) == Approx(0.29227).epsilon(1e-4));
}

TEST_CASE("E tilde matches its closed form and dominates E") {
    for (const auto& inst : ts::instances()) {
        const auto spec = jackson_spec(ts::params(inst));
        const auto cert = certificate_for(spec);
        for (int n : {3, 5, 10, 20, 40}) {
            const auto sol = solve_qbd(spec, n);
            const auto rep = error_bound_report(sol, cert);
            CHECK(rep.E_tilde == Approx(oracle_E_tilde(cert, n)).epsilon(1e-12));
            CHECK(rep.E <= rep.E_tilde);
            if (std::isfinite(rep.E_closed_form)) CHECK(rep.E == Approx(rep.E_closed_form).epsilon(1e-9));
        }
        for (int n : {100, 500, 2000})
            CHECK(log_error_bound_E_tilde(cert, n) == Approx(std::log(oracle_E_tilde(cert, n))).epsilon(1e-12));
        CHECK(std::isfinite(log_error_bound_E_tilde(cert, 100000)));
    }
}

TEST_CASE("E(n) decreases along n") {
    const auto spec = jackson_spec(ts::params(ts::instances()[2]));
    const auto cert = certificate_for(spec);
    double prev = INFINITY;
    for (int n = 4; n <= 40; n += 4) {
        const double E = error_bound_E(solve_qbd(spec, n), cert);
        CHECK(E < prev);
        prev = E;
    }
}

TEST_CASE("functional parsing round-trips") {
    const std::vector<FunctionalSpec> fs = {ones(), ones(0.5), scaled_lyapunov(0.25),
                                            window_indicator({0, 3, 1, 4}),
                                            truncated_coordinate(2, 20, 1.0 / 21)};
    for (const auto& f : fs) {
        const auto back = parse_functional(f.description());
        CHECK(back.description() == f.description());
        CHECK(back.kind == f.kind);
        CHECK(back.scale == f.scale);
    }
    for (const char* bad : {"", "twos", "coord:3,10", "window:3,1,0,0", "ones:1", "ones@0", "coord:1"})
        CHECK_THROWS_AS(parse_functional(bad), std::invalid_argument);
}

TEST_CASE("functional validation against c v") {
    const auto spec = jackson_spec(ts::params(ts::instances()[0]));
    const auto cert = certificate_for(spec);
    CHECK(validate_functional(ones(), cert).valid);
    CHECK_FALSE(validate_functional(ones(1.5), cert).valid);
    CHECK(validate_functional(scaled_lyapunov(1.0), cert).valid);
    CHECK_FALSE(validate_functional(scaled_lyapunov(1.01), cert).valid);
    CHECK(validate_functional(window_indicator({0, 3, 0, 3}), cert).valid);
    const auto raw = validate_functional(truncated_coordinate(1, 20), cert);
    CHECK_FALSE(raw.valid);
    REQUIRE(raw.witness.has_value());
    // the witness really violates g <= c v
    const auto w = *raw.witness;
    CHECK(evaluate(truncated_coordinate(1, 20), cert, w) > cert.c * lyapunov_v(cert, w).value);
    CHECK(validate_functional(truncated_coordinate(1, 20, 1.0 / 21), cert).valid);
}

TEST_CASE("validation agrees with a brute-force scan") {
    const auto spec = jackson_spec(ts::params(ts::instances()[3]));
    const auto cert = certificate_for(spec);
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> cap(1, 40), axis(1, 2);
    std::uniform_real_distribution<double> scale(0.01, 1.5);
    for (int t = 0; t < 60; ++t) {
        const auto f = truncated_coordinate(axis(rng), cap(rng), scale(rng));
        bool ok = true;
        for (int k = 0; k <= 80 && ok; ++k)
            for (int i = 0; i <= 80 && ok; ++i) {
                const double cv = std::exp(k * cert.theta.theta1() + i * cert.theta.theta2());
                ok = evaluate(f, cert, {k, i}) <= cv;
            }
        CHECK(validate_functional(f, cert).valid == ok);
    }
}

TEST_CASE("certified functional intervals") {
    const auto spec = jackson_spec(ts::params(ts::instances()[0]));
    const auto cert = certificate_for(spec);
    const auto sol = solve_qbd(spec, 20);
    const double E = error_bound_E(sol, cert);
    const auto one = certify_functional(sol, cert, ones(), E);
    CHECK(one.approx.value == Approx(1.0).margin(1e-10));
    CHECK(one.informative);
    REQUIRE(one.interval_hi.has_value());
    CHECK(one.interval_lo <= one.approx.partial);
    CHECK(*one.interval_hi >= one.approx.value);

    const auto weak = certify_functional(solve_qbd(spec, 5), cert, ones(), error_bound_E(solve_qbd(spec, 5), cert));
    CHECK_FALSE(weak.informative);
    CHECK_FALSE(weak.interval_hi.has_value());
    CHECK(weak.note == "bound uninformative at this n");

    CHECK_THROWS_AS(certify_functional(sol, cert, truncated_coordinate(1, 20), E), std::invalid_argument);
}

TEST_CASE("qbd expectation of coordinates by brute force") {
    const auto spec = jackson_spec(ts::params(ts::instances()[1]));
    const auto cert = certificate_for(spec);
    const auto sol = solve_qbd(spec, 8);
    const auto f = truncated_coordinate(1, 20, 1.0 / 21);
    double brute = 0.0;
    for (int k = 0; k < 2000; ++k)
        for (int i = 0; i <= 8; ++i) brute += pi_at(sol, k, i) * (1 + std::min(k, 20)) / 21.0;
    const auto s = qbd_expectation(sol, cert, f);
    CHECK(s.partial <= brute * (1 + 1e-12));
    CHECK(s.value >= brute * (1 - 1e-12));
    CHECK(s.value == Approx(brute).epsilon(1e-10));
}
