#include "rrwqbd/certificate.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

namespace rrwqbd {

Tilt::Tilt(double theta1, double theta2) : t1_(theta1), t2_(theta2) {
    if (!(theta1 > 0.0) || !(theta2 > 0.0) || !std::isfinite(theta1) || !std::isfinite(theta2))
        throw std::invalid_argument("tilt components must be positive and finite");
}

double gamma(const RandomWalkSpec& spec, Region region, const Vec2& theta) {
    double sum = 0.0;
    for (const auto& [m, p] : spec.law(region).support())
        sum += p * std::exp(theta[0] * m.dx + theta[1] * m.dy);
    return sum;
}

double tilt_margin(const RandomWalkSpec& spec, const Vec2& theta) {
    double worst = -std::numeric_limits<double>::infinity();
    for (Region r : kNonOriginRegions) worst = std::max(worst, gamma(spec, r, theta));
    return 1.0 - worst;
}

bool in_feasible_region(const RandomWalkSpec& spec, const Tilt& theta) {
    return tilt_margin(spec, theta.vec()) > 0.0;
}

namespace {

struct PolishContext {
    const RandomWalkSpec* spec;
    double box_hi;
};

double negative_margin(const gsl_vector* x, void* params) {
    const auto* ctx = static_cast<const PolishContext*>(params);
    const Vec2 t{gsl_vector_get(x, 0), gsl_vector_get(x, 1)};
    if (!(t[0] > 0.0 && t[1] > 0.0 && t[0] <= ctx->box_hi && t[1] <= ctx->box_hi)) return 2.0;
    return -tilt_margin(*ctx->spec, t);
}

struct GslVectorFree {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct GslMinimizerFree {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

}  // namespace

ThetaSearch find_theta(const RandomWalkSpec& spec, const ThetaSearchOptions& opts) {
    if (!(opts.box_lo > 0.0 && opts.box_hi > opts.box_lo) || opts.grid_points < 2)
        throw std::invalid_argument("invalid tilt search box");

    const int g = opts.grid_points;
    const double log_lo = std::log(opts.box_lo);
    const double step = (std::log(opts.box_hi) - log_lo) / (g - 1);
    std::vector<double> axis(g);
    for (int i = 0; i < g; ++i) axis[i] = std::exp(log_lo + step * i);
    axis.back() = opts.box_hi;

    // Lexicographic scan with strict improvement keeps the smallest tilt on ties.
    double best = -std::numeric_limits<double>::infinity();
    Vec2 best_t{axis[0], axis[0]};
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            const Vec2 t{axis[i], axis[j]};
            const double m = tilt_margin(spec, t);
            if (m > best) {
                best = m;
                best_t = t;
            }
        }
    if (!(best > 0.0)) {
        std::ostringstream os;
        os << "no feasible tilt found in (" << opts.box_lo << ", " << opts.box_hi
           << "]^2; best margin " << best;
        throw CertificateError(os.str());
    }

    ThetaSearch out{Tilt(best_t[0], best_t[1]), best, best, g, 0, false};
    if (opts.polish_iterations <= 0) return out;

    gsl_set_error_handler_off();
    PolishContext ctx{&spec, opts.box_hi};
    gsl_multimin_function fn{&negative_margin, 2, &ctx};
    std::unique_ptr<gsl_vector, GslVectorFree> x(gsl_vector_alloc(2));
    std::unique_ptr<gsl_vector, GslVectorFree> sizes(gsl_vector_alloc(2));
    const double ratio = std::exp(step) - 1.0;
    for (int k = 0; k < 2; ++k) {
        gsl_vector_set(x.get(), k, best_t[k]);
        gsl_vector_set(sizes.get(), k, best_t[k] * ratio);
    }
    std::unique_ptr<gsl_multimin_fminimizer, GslMinimizerFree> nm(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2));
    gsl_multimin_fminimizer_set(nm.get(), &fn, x.get(), sizes.get());
    int it = 0;
    while (it < opts.polish_iterations) {
        ++it;
        if (gsl_multimin_fminimizer_iterate(nm.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm.get()), opts.polish_tolerance) ==
            GSL_SUCCESS)
            break;
    }
    out.polish_iterations = it;
    const gsl_vector* xm = gsl_multimin_fminimizer_x(nm.get());
    const Vec2 polished{gsl_vector_get(xm, 0), gsl_vector_get(xm, 1)};
    if (polished[0] > 0.0 && polished[1] > 0.0 && polished[0] <= opts.box_hi &&
        polished[1] <= opts.box_hi) {
        const double m = tilt_margin(spec, polished);
        if (m > best) {
            out.theta = Tilt(polished[0], polished[1]);
            out.margin = m;
            out.polished = true;
        }
    }
    return out;
}

ThetaTildeSearch find_theta_tilde(const RandomWalkSpec& spec, const Tilt& theta,
                                  const ThetaTildeOptions& opts) {
    if (!in_feasible_region(spec, theta))
        throw CertificateError("theta is not in the feasible region");
    if (!(opts.kappa > 0.0 && opts.kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0,1)");

    auto feasible = [&](double s) {
        return tilt_margin(spec, {theta.theta1() + s, theta.theta2() + s}) > 0.0;
    };
    double lo = 0.0;
    double hi = std::min(1.0, opts.ray_cap);
    while (feasible(hi) && hi < opts.ray_cap) {
        lo = hi;
        hi = std::min(2.0 * hi, opts.ray_cap);
    }
    double s_max = hi;
    if (!feasible(hi)) {
        while (hi - lo > opts.tolerance) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? lo : hi) = mid;
        }
        s_max = lo;
    }
    const double s = opts.kappa * s_max;
    if (!(s > 0.0)) throw CertificateError("feasible ray beyond theta is empty to tolerance");
    return {Tilt(theta.theta1() + s, theta.theta2() + s), s_max, s};
}

Tilt resolve_theta_tilde(const RandomWalkSpec& spec, const Tilt& theta, const Vec2& requested) {
    if (!(requested[0] > theta.theta1() && requested[1] > theta.theta2()))
        throw CertificateError("requested theta_tilde does not dominate theta componentwise");
    Vec2 t = requested;
    for (int i = 0; i < 200; ++i) {
        if (tilt_margin(spec, t) > 0.0 && t[0] > theta.theta1() && t[1] > theta.theta2())
            return Tilt(t[0], t[1]);
        t = {0.5 * (theta.theta1() + t[0]), 0.5 * (theta.theta2() + t[1])};
    }
    throw CertificateError("could not shrink theta_tilde into the feasible region");
}

RegionGammas region_gammas(const RandomWalkSpec& spec, const Vec2& theta) {
    return {gamma(spec, Region::Origin, theta), gamma(spec, Region::Face1, theta),
            gamma(spec, Region::Face2, theta), gamma(spec, Region::Interior, theta)};
}

DriftCertificate drift_certificate(const RandomWalkSpec& spec, const Tilt& theta,
                                   const Tilt& theta_tilde) {
    if (!(theta_tilde.theta1() > theta.theta1() && theta_tilde.theta2() > theta.theta2()))
        throw CertificateError("theta_tilde must dominate theta componentwise");
    DriftCertificate cert;
    cert.theta = theta;
    cert.theta_tilde = theta_tilde;
    cert.gammas = region_gammas(spec, theta.vec());
    cert.gammas_tilde = region_gammas(spec, theta_tilde.vec());

    auto constants = [](const RegionGammas& g, const char* which, double& c, double& b) {
        c = 1.0 - std::max({g.face1, g.face2, g.interior});
        if (!(c > 0.0)) {
            std::ostringstream os;
            os << which << " is infeasible: max gamma = " << 1.0 - c;
            throw CertificateError(os.str());
        }
        b = 1.0 + (g.origin - 1.0) / c;
    };
    constants(cert.gammas, "theta", cert.c, cert.b);
    constants(cert.gammas_tilde, "theta_tilde", cert.c_tilde, cert.b_tilde);
    return cert;
}

DriftCertificate with_scaled_c(DriftCertificate cert, double factor) {
    cert.c *= factor;
    return cert;
}

LyapunovValue lyapunov_v(const DriftCertificate& cert, State s, LyapunovVariant variant) {
    const bool tilde = variant == LyapunovVariant::Tilde;
    const Tilt& t = tilde ? cert.theta_tilde : cert.theta;
    const double c = tilde ? cert.c_tilde : cert.c;
    LyapunovValue out;
    out.log_value = -std::log(c) + t.theta1() * static_cast<double>(s.n1) +
                    t.theta2() * static_cast<double>(s.n2);
    out.value = std::exp(out.log_value);
    out.saturated = !std::isfinite(out.value);
    return out;
}

DriftCheck check_drift_condition(const RandomWalkSpec& spec, const DriftCertificate& cert,
                                 LyapunovVariant variant, int window, double rel_tol) {
    const bool tilde = variant == LyapunovVariant::Tilde;
    const Tilt& t = tilde ? cert.theta_tilde : cert.theta;
    const double c = tilde ? cert.c_tilde : cert.c;
    const double b = tilde ? cert.b_tilde : cert.b;

    DriftCheck out;
    out.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::int64_t a = 0; a <= window; ++a)
        for (std::int64_t bb = 0; bb <= window; ++bb) {
            const State s{a, bb};
            // Both sides divided by exp<theta, s>.
            double lhs = 0.0;
            for (const auto& [next, p] : step_distribution(spec, s))
                lhs += p * std::exp(t.theta1() * static_cast<double>(next.n1 - a) +
                                    t.theta2() * static_cast<double>(next.n2 - bb)) / c;
            const double rhs = (1.0 - c) / c + ((a == 0 && bb == 0) ? b : 0.0);
            const double excess = (lhs - rhs) / std::abs(rhs);
            ++out.states_checked;
            if (lhs > rhs + rel_tol * std::abs(rhs)) ++out.violations;
            if (excess > out.worst_excess) {
                out.worst_excess = excess;
                out.worst_state = s;
            }
        }
    out.passed = out.violations == 0;
    return out;
}

}  // namespace rrwqbd
