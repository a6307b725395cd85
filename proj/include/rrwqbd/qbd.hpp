#pragma once

// Level-n QBD approximation. The level is the first coordinate, the phase is
// the second coordinate clamped at n: from phase n an upward phase move stays
// at n.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rrwqbd/certificate.hpp"
#include "rrwqbd/model.hpp"

namespace rrwqbd {

class QbdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QbdBlocks {
    int n = 0;
    Eigen::MatrixXd a_minus, a_zero, a_plus;  ///< levels >= 1
    Eigen::MatrixXd b_zero, b_plus;           ///< level 0
};

/// Phase 0 rows use the face-1 law (A) or the origin law (B); other rows use
/// the interior law (A) or the face-2 law (B). Throws QbdError for n < 1.
QbdBlocks build_blocks(const RandomWalkSpec& spec, int n);

struct RateMatrix {
    Eigen::MatrixXd R;
    Eigen::MatrixXd G;     ///< companion minimal solution of the downward equation
    double residual = 0.0;  ///< inf-norm of A+ + R A0 + R^2 A- - R
    double spectral_radius = 0.0;
    int iterations = 0;
    std::string method;  ///< "logarithmic_reduction" or "natural_iteration"
};

struct RateOptions {
    double tol = 1e-13;
    int max_iterations = 100000;
};

/// Minimal nonnegative solution of R = A+ + R A0 + R^2 A-. Throws QbdError
/// with the final residual when no method converges.
RateMatrix solve_r(const QbdBlocks& blocks, const RateOptions& opts = {});

struct QbdSolution {
    int n = 0;
    QbdBlocks blocks;
    RateMatrix rate;
    Eigen::VectorXd pi0, pi1;
    Eigen::VectorXd tail_ones;  ///< (I - R)^{-1} 1
    double normalization_residual = 0.0;
    double balance_residual = 0.0;  ///< L1 norm over levels 0..balance_levels
    int balance_levels = 0;
};

/// Boundary equations for levels 0 and 1, normalized through the geometric
/// tail. Throws QbdError when the boundary system is singular.
QbdSolution solve_stationary(const QbdBlocks& blocks, const RateMatrix& rate, int check_levels = 50);

/// build_blocks + solve_r + solve_stationary.
QbdSolution solve_qbd(const RandomWalkSpec& spec, int n, const RateOptions& opts = {},
                      int check_levels = 50);

/// Level-k row vector (length n+1).
Eigen::VectorXd level_vector(const QbdSolution& sol, std::int64_t k);

/// Level vectors 0..max_level.
std::vector<Eigen::VectorXd> level_vectors(const QbdSolution& sol, std::int64_t max_level);

/// Zero for phases beyond n.
double pi_at(const QbdSolution& sol, std::int64_t k, std::int64_t i);

/// L1 balance residual of [n]pi [n]P - [n]pi over levels 0..levels.
double balance_residual(const QbdSolution& sol, int levels);

/// sum_k sum_i pi(k,i) e^{a k} w_i in closed form. Requires sp(e^a R) < 1;
/// returns NaN otherwise.
double closed_form_weighted_mass(const QbdSolution& sol, double level_tilt,
                                 const Eigen::VectorXd& phase_weights);

enum class TailMethod { SeriesClosedForm, TruncatedWithCertifiedTail };
std::string_view to_string(TailMethod m);

struct TailSum {
    double value = 0.0;  ///< partial sum + remainder bound
    double partial = 0.0;
    double remainder_bound = 0.0;
    std::int64_t terms_used = 0;
    TailMethod method = TailMethod::TruncatedWithCertifiedTail;
    bool converged = false;  ///< remainder reached the requested tolerance
};

struct TailOptions {
    double rel_tol = 1e-12;               ///< stop when remainder <= rel_tol * partial
    std::int64_t max_terms = 200000;
    double closed_form_margin = 1e-6;     ///< required 1 - sp(e^{theta1} R)
};

struct TopLayerSums {
    TailSum weighted;    ///< sum_k pi(k,n) e^{k theta1}
    TailSum unweighted;  ///< sum_k pi(k,n)
    /// Closed-form values for the cross-check; NaN when sp(e^{theta1} R) is
    /// too close to 1.
    double weighted_closed_form = 0.0;
    double unweighted_closed_form = 0.0;
};

/// Certified top-layer sums. The remainder after K terms uses
/// pi(k,n) <= b~ e^{-k theta~1 - n theta~2}.
TailSum top_layer_weighted_sum(const QbdSolution& sol, double theta1, const DriftCertificate& cert,
                               const TailOptions& opts = {});
TopLayerSums top_layer_sums(const QbdSolution& sol, const DriftCertificate& cert,
                            const TailOptions& opts = {});

/// Growth envelope g(k,i) <= scale * e^{a1 k + a2 i}; needs a < theta~.
struct Growth {
    double scale = 1.0;
    double a1 = 0.0;
    double a2 = 0.0;
};

/// Certified sum over all states of pi(k,i) g(k,i): exact over levels
/// 0..K plus the tail bound pi(k,i) <= b~ e^{-<theta~, (k,i)>} beyond K.
template <class G>
TailSum certified_level_sum(const QbdSolution& sol, const DriftCertificate& cert, G&& g,
                            const Growth& growth, const TailOptions& opts = {});

/// Remainder bound for levels > K under the growth envelope.
double level_tail_bound(const QbdSolution& sol, const DriftCertificate& cert, const Growth& growth,
                        std::int64_t K);

template <class G>
TailSum certified_level_sum(const QbdSolution& sol, const DriftCertificate& cert, G&& g,
                            const Growth& growth, const TailOptions& opts) {
    if (!(growth.a1 < cert.theta_tilde.theta1()) || !(growth.a2 < cert.theta_tilde.theta2()))
        throw QbdError("growth envelope is not dominated by theta_tilde");
    TailSum out;
    Eigen::VectorXd x = sol.pi0;
    for (std::int64_t k = 0;; ++k) {
        if (k == 1) x = sol.pi1;
        if (k >= 2) x = sol.rate.R.transpose() * x;
        double level = 0.0;
        for (int i = 0; i <= sol.n; ++i) level += x[i] * g(k, static_cast<std::int64_t>(i));
        out.partial += level;
        out.terms_used = k + 1;
        out.remainder_bound = level_tail_bound(sol, cert, growth, k);
        if (out.remainder_bound <= opts.rel_tol * out.partial) {
            out.converged = true;
            break;
        }
        if (out.terms_used >= opts.max_terms) break;
    }
    out.value = out.partial + out.remainder_bound;
    return out;
}

}  // namespace rrwqbd
