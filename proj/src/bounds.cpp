#include "rrwqbd/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rrwqbd {

namespace {

double combine_E(const DriftCertificate& cert, int n, double weighted, double unweighted) {
    const double t1 = cert.theta.theta1();
    const double t2 = cert.theta.theta2();
    const double lead = std::exp(t1 + t2 + static_cast<double>(n) * t2 + std::log(weighted));
    return 12.0 / cert.c * ((weighted > 0.0 ? lead : 0.0) + cert.b * unweighted);
}

}  // namespace

double error_bound_E(const QbdSolution& sol, const DriftCertificate& cert, const TailOptions& opts) {
    const TopLayerSums t = top_layer_sums(sol, cert, opts);
    return combine_E(cert, sol.n, t.weighted.value, t.unweighted.value);
}

double log_error_bound_E_tilde(const DriftCertificate& cert, int n) {
    const double t1 = cert.theta.theta1(), t2 = cert.theta.theta2();
    const double u1 = cert.theta_tilde.theta1(), u2 = cert.theta_tilde.theta2();
    const double nn = static_cast<double>(n);
    const double log_a = t1 + t2 - nn * (u2 - t2) - std::log(-std::expm1(-(u1 - t1)));
    const double log_b = std::log(cert.b) - nn * u2 - std::log(-std::expm1(-u1));
    const double hi = std::max(log_a, log_b), lo = std::min(log_a, log_b);
    return std::log(12.0 * cert.b_tilde / cert.c) + hi + std::log1p(std::exp(lo - hi));
}

double error_bound_E_tilde(const DriftCertificate& cert, int n) {
    return std::exp(log_error_bound_E_tilde(cert, n));
}

ErrorBoundReport error_bound_report(const QbdSolution& sol, const DriftCertificate& cert,
                                    const TailOptions& opts) {
    ErrorBoundReport r;
    r.n = sol.n;
    r.certificate = cert;
    r.tail = top_layer_sums(sol, cert, opts);
    r.E = combine_E(cert, sol.n, r.tail.weighted.value, r.tail.unweighted.value);
    r.E_closed_form =
        std::isnan(r.tail.weighted_closed_form) || std::isnan(r.tail.unweighted_closed_form)
            ? std::numeric_limits<double>::quiet_NaN()
            : combine_E(cert, sol.n, r.tail.weighted_closed_form, r.tail.unweighted_closed_form);
    r.E_tilde = error_bound_E_tilde(cert, sol.n);
    return r;
}

TailSum qbd_expectation(const QbdSolution& sol, const DriftCertificate& cert,
                        const FunctionalSpec& f, const TailOptions& opts) {
    return certified_level_sum(
        sol, cert, [&](std::int64_t k, std::int64_t i) { return evaluate(f, cert, State{k, i}); },
        growth_of(f, cert), opts);
}

CertifiedFunctional certify_functional(const QbdSolution& sol, const DriftCertificate& cert,
                                       const FunctionalSpec& f, double E, const TailOptions& opts) {
    CertifiedFunctional out;
    out.functional = f;
    out.validation = validate_functional(f, cert);
    if (!out.validation.valid)
        throw std::invalid_argument("functional " + f.description() + " is not below c v");
    out.approx = qbd_expectation(sol, cert, f, opts);
    out.relative_error_bound = E;
    // The true pi_n g lies in [partial, value]; widen the interval accordingly.
    out.interval_lo = out.approx.partial / (1.0 + E);
    if (E < 1.0) {
        out.interval_hi = out.approx.value / (1.0 - E);
        out.informative = true;
    } else {
        out.note = "bound uninformative at this n";
    }
    return out;
}

}  // namespace rrwqbd
