#pragma once

// Exponential tilts and the geometric drift certificate.
//
// For a tilt theta > 0 lying in every sublevel set {gamma^A < 1} of the
// non-origin increment MGFs, v(n) = exp<theta, n> / c satisfies
//   P v - v <= -c v + b 1_{(0,0)}
// with c = 1 - max_A gamma^A(theta) and b = 1 + (gamma^origin(theta) - 1) / c.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "rrwqbd/model.hpp"

namespace rrwqbd {

class CertificateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strictly positive tilt vector.
class Tilt {
public:
    Tilt(double theta1, double theta2);

    double theta1() const { return t1_; }
    double theta2() const { return t2_; }
    Vec2 vec() const { return {t1_, t2_}; }

    bool operator==(const Tilt&) const = default;

private:
    double t1_, t2_;
};

/// E[exp<theta, X^region>], summed over the law's support.
double gamma(const RandomWalkSpec& spec, Region region, const Vec2& theta);

/// 1 - max over the non-origin regions of gamma; positive iff feasible.
double tilt_margin(const RandomWalkSpec& spec, const Vec2& theta);

bool in_feasible_region(const RandomWalkSpec& spec, const Tilt& theta);

struct ThetaSearchOptions {
    double box_lo = 1e-3;
    double box_hi = 3.0;
    int grid_points = 200;       ///< per axis, logarithmically spaced
    int polish_iterations = 50;  ///< simplex polish steps
    double polish_tolerance = 1e-10;
};

struct ThetaSearch {
    Tilt theta;
    double grid_margin = 0.0;  ///< best margin among grid points
    double margin = 0.0;       ///< margin at the returned tilt
    int grid_points = 0;
    int polish_iterations = 0;  ///< simplex iterations actually run
    bool polished = false;      ///< polish improved on the grid point
};

/// Maximizes the margin over the search box. Throws CertificateError when no
/// grid point is feasible (the face drift condition fails, or the box is too
/// small).
ThetaSearch find_theta(const RandomWalkSpec& spec, const ThetaSearchOptions& opts = {});

struct ThetaTildeOptions {
    double kappa = 0.9;        ///< fraction of the feasible ray length used
    double tolerance = 1e-10;  ///< bisection tolerance on the ray length
    double ray_cap = 64.0;     ///< longest ray length considered
};

struct ThetaTildeSearch {
    Tilt theta_tilde;
    double ray_max = 0.0;  ///< largest feasible s (to tolerance)
    double ray_used = 0.0;
};

/// Searches theta + s (1,1) for the feasible segment and returns the point at
/// s = kappa * s_max.
ThetaTildeSearch find_theta_tilde(const RandomWalkSpec& spec, const Tilt& theta,
                                  const ThetaTildeOptions& opts = {});

/// Accepts a requested theta_tilde, shrinking it toward theta until it is
/// feasible and strictly dominates theta.
Tilt resolve_theta_tilde(const RandomWalkSpec& spec, const Tilt& theta, const Vec2& requested);

struct RegionGammas {
    double origin = 0.0;
    double face1 = 0.0;
    double face2 = 0.0;
    double interior = 0.0;
};

RegionGammas region_gammas(const RandomWalkSpec& spec, const Vec2& theta);

struct DriftCertificate {
    Tilt theta{1.0, 1.0};
    double c = 0.0;
    double b = 0.0;
    Tilt theta_tilde{1.0, 1.0};
    double c_tilde = 0.0;
    double b_tilde = 0.0;
    RegionGammas gammas;        ///< at theta
    RegionGammas gammas_tilde;  ///< at theta_tilde
};

/// Throws CertificateError unless both tilts are feasible and
/// theta_tilde > theta componentwise.
DriftCertificate drift_certificate(const RandomWalkSpec& spec, const Tilt& theta,
                                   const Tilt& theta_tilde);

/// Debug hook for negative controls: multiplies c by `factor`, leaving every
/// other field untouched.
DriftCertificate with_scaled_c(DriftCertificate cert, double factor);

enum class LyapunovVariant { Base, Tilde };

struct LyapunovValue {
    double log_value = 0.0;
    double value = 0.0;      ///< exp(log_value), +inf when not representable
    bool saturated = false;  ///< value overflowed double range
};

LyapunovValue lyapunov_v(const DriftCertificate& cert, State s,
                         LyapunovVariant variant = LyapunovVariant::Base);

struct DriftCheck {
    std::int64_t states_checked = 0;
    std::int64_t violations = 0;
    double worst_excess = 0.0;  ///< max of (lhs - rhs) / rhs over the window
    State worst_state;
    bool passed = false;
};

/// Brute-force check of P v <= (1 - c) v + b 1_{(0,0)} on {0..window}^2,
/// summing the one-step law state by state. Values are scaled by
/// exp(-<theta, s>) so no overflow occurs.
DriftCheck check_drift_condition(const RandomWalkSpec& spec, const DriftCertificate& cert,
                                 LyapunovVariant variant, int window = 60,
                                 double rel_tol = 1e-10);

}  // namespace rrwqbd
