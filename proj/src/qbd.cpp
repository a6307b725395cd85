#include "rrwqbd/qbd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rrwqbd/gth.hpp"

namespace rrwqbd {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void fill_block(MatrixXd& M, const TransitionLaw& edge, const TransitionLaw& inner, int k, int n) {
    M = MatrixXd::Zero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) {
        const TransitionLaw& law = i == 0 ? edge : inner;
        for (int dj = -1; dj <= 1; ++dj) {
            const double p = law.prob(k, dj);
            if (p == 0.0) continue;
            const int j = std::min(i + dj, n);
            if (j < 0) throw QbdError("phase move below zero in " + std::string(to_string(law.region())));
            M(i, j) += p;
        }
    }
}

double inf_norm(const MatrixXd& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); }

double r_residual(const QbdBlocks& b, const MatrixXd& R) {
    return inf_norm(b.a_plus + R * b.a_zero + R * R * b.a_minus - R);
}

double spectral_radius(const MatrixXd& M) {
    Eigen::EigenSolver<MatrixXd> es(M, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool logarithmic_reduction(const QbdBlocks& b, const RateOptions& opts, RateMatrix& out) {
    const Eigen::Index m = b.a_zero.rows();
    const MatrixXd I = MatrixXd::Identity(m, m);
    Eigen::PartialPivLU<MatrixXd> lu(I - b.a_zero);
    MatrixXd up = lu.solve(b.a_plus);
    MatrixXd down = lu.solve(b.a_minus);
    MatrixXd G = down;
    MatrixXd T = up;
    const VectorXd ones = VectorXd::Ones(m);
    int it = 0;
    bool converged = false;
    while (it < std::min(opts.max_iterations, 200)) {
        ++it;
        const MatrixXd U = up * down + down * up;
        Eigen::PartialPivLU<MatrixXd> lu_u(I - U);
        const MatrixXd up2 = up * up;
        const MatrixXd down2 = down * down;
        up = lu_u.solve(up2);
        down = lu_u.solve(down2);
        G += T * down;
        T = T * up;
        if (!G.allFinite()) return false;
        if ((ones - G * ones).cwiseAbs().maxCoeff() < opts.tol || inf_norm(T) < opts.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) return false;
    out.G = G;
    out.R = b.a_plus * (I - b.a_zero - b.a_plus * G).inverse();
    out.iterations = it;
    out.method = "logarithmic_reduction";
    return out.R.allFinite();
}

bool natural_iteration(const QbdBlocks& b, const RateOptions& opts, RateMatrix& out) {
    const Eigen::Index m = b.a_zero.rows();
    MatrixXd R = MatrixXd::Zero(m, m);
    for (int it = 1; it <= opts.max_iterations; ++it) {
        MatrixXd next = b.a_plus + R * b.a_zero + R * R * b.a_minus;
        const double step = inf_norm(next - R);
        R.swap(next);
        if (step < opts.tol) {
            out.R = R;
            out.G.resize(0, 0);
            out.iterations = it;
            out.method = "natural_iteration";
            return true;
        }
    }
    out.R = R;
    out.iterations = opts.max_iterations;
    return false;
}

}  // namespace

QbdBlocks build_blocks(const RandomWalkSpec& spec, int n) {
    if (n < 1) throw QbdError("truncation level n must be at least 1");
    QbdBlocks b;
    b.n = n;
    const auto& origin = spec.law(Region::Origin);
    const auto& f1 = spec.law(Region::Face1);
    const auto& f2 = spec.law(Region::Face2);
    const auto& in = spec.law(Region::Interior);
    fill_block(b.a_minus, f1, in, -1, n);
    fill_block(b.a_zero, f1, in, 0, n);
    fill_block(b.a_plus, f1, in, 1, n);
    fill_block(b.b_zero, origin, f2, 0, n);
    fill_block(b.b_plus, origin, f2, 1, n);
    return b;
}

RateMatrix solve_r(const QbdBlocks& blocks, const RateOptions& opts) {
    RateMatrix out;
    // Accept at ten times the iteration tolerance: the final product and
    // inverse add a few ulps on top of the iteration's own stopping rule.
    const double accept = 10.0 * opts.tol;
    bool ok = logarithmic_reduction(blocks, opts, out);
    if (ok) out.residual = r_residual(blocks, out.R);
    if (!ok || !(out.residual <= accept)) {
        RateMatrix fallback;
        const bool nat = natural_iteration(blocks, opts, fallback);
        fallback.residual = r_residual(blocks, fallback.R);
        if (!nat || !(fallback.residual <= accept)) {
            std::ostringstream os;
            os.precision(3);
            os << "rate matrix did not converge: residual "
               << (ok ? out.residual : fallback.residual) << " after "
               << fallback.iterations << " natural iterations";
            throw QbdError(os.str());
        }
        out = std::move(fallback);
    }
    out.R = out.R.cwiseMax(0.0);
    out.residual = r_residual(blocks, out.R);
    out.spectral_radius = spectral_radius(out.R);
    if (!(out.spectral_radius < 1.0)) throw QbdError("sp(R) >= 1: the QBD is not positive recurrent");
    return out;
}

QbdSolution solve_stationary(const QbdBlocks& blocks, const RateMatrix& rate, int check_levels) {
    const int m = blocks.n + 1;
    MatrixXd C(2 * m, 2 * m);
    C << blocks.b_zero, blocks.b_plus, blocks.a_minus, blocks.a_zero + rate.R * blocks.a_minus;
    VectorXd x;
    try {
        x = gth_stationary(C);
    } catch (const std::runtime_error& e) {
        throw QbdError(std::string("singular boundary system: ") + e.what());
    }
    QbdSolution sol;
    sol.n = blocks.n;
    sol.blocks = blocks;
    sol.rate = rate;
    const MatrixXd I = MatrixXd::Identity(m, m);
    sol.tail_ones = (I - rate.R).partialPivLu().solve(VectorXd::Ones(m));
    VectorXd pi0 = x.head(m);
    VectorXd pi1 = x.tail(m);
    const double norm = pi0.sum() + pi1.dot(sol.tail_ones);
    sol.pi0 = pi0 / norm;
    sol.pi1 = pi1 / norm;
    sol.normalization_residual = std::abs(sol.pi0.sum() + sol.pi1.dot(sol.tail_ones) - 1.0);
    sol.balance_levels = check_levels;
    sol.balance_residual = balance_residual(sol, check_levels);
    return sol;
}

QbdSolution solve_qbd(const RandomWalkSpec& spec, int n, const RateOptions& opts, int check_levels) {
    const QbdBlocks blocks = build_blocks(spec, n);
    return solve_stationary(blocks, solve_r(blocks, opts), check_levels);
}

Eigen::VectorXd level_vector(const QbdSolution& sol, std::int64_t k) {
    if (k < 0) throw std::out_of_range("negative level");
    if (k == 0) return sol.pi0;
    VectorXd x = sol.pi1;
    for (std::int64_t j = 1; j < k; ++j) x = sol.rate.R.transpose() * x;
    return x;
}

std::vector<Eigen::VectorXd> level_vectors(const QbdSolution& sol, std::int64_t max_level) {
    std::vector<VectorXd> out;
    out.reserve(static_cast<std::size_t>(max_level + 1));
    out.push_back(sol.pi0);
    if (max_level >= 1) out.push_back(sol.pi1);
    for (std::int64_t k = 2; k <= max_level; ++k) out.push_back(sol.rate.R.transpose() * out.back());
    return out;
}

double pi_at(const QbdSolution& sol, std::int64_t k, std::int64_t i) {
    if (i < 0 || k < 0 || i > sol.n) return 0.0;
    return level_vector(sol, k)[i];
}

double balance_residual(const QbdSolution& sol, int levels) {
    const auto xs = level_vectors(sol, levels + 1);
    const QbdBlocks& b = sol.blocks;
    auto row = [](const VectorXd& x, const MatrixXd& M) -> VectorXd { return M.transpose() * x; };
    double total = (row(xs[0], b.b_zero) + row(xs[1], b.a_minus) - xs[0]).lpNorm<1>();
    if (levels >= 1)
        total += (row(xs[0], b.b_plus) + row(xs[1], b.a_zero) + row(xs[2], b.a_minus) - xs[1]).lpNorm<1>();
    for (int k = 2; k <= levels; ++k)
        total += (row(xs[k - 1], b.a_plus) + row(xs[k], b.a_zero) + row(xs[k + 1], b.a_minus) - xs[k])
                     .lpNorm<1>();
    return total;
}

double closed_form_weighted_mass(const QbdSolution& sol, double level_tilt,
                                 const Eigen::VectorXd& phase_weights) {
    const double scale = std::exp(level_tilt);
    if (!(scale * sol.rate.spectral_radius < 1.0)) return std::numeric_limits<double>::quiet_NaN();
    const int m = sol.n + 1;
    const MatrixXd M = MatrixXd::Identity(m, m) - scale * sol.rate.R;
    const VectorXd y = M.partialPivLu().solve(phase_weights);
    return sol.pi0.dot(phase_weights) + scale * sol.pi1.dot(y);
}

std::string_view to_string(TailMethod m) {
    return m == TailMethod::SeriesClosedForm ? "series_closed_form" : "truncated_with_certified_tail";
}

TailSum top_layer_weighted_sum(const QbdSolution& sol, double theta1, const DriftCertificate& cert,
                               const TailOptions& opts) {
    const double delta = cert.theta_tilde.theta1() - theta1;
    if (!(delta > 0.0)) throw QbdError("top-layer tilt must be below theta_tilde_1");
    const double n = sol.n;
    const double log_head =
        std::log(cert.b_tilde) - n * cert.theta_tilde.theta2() - std::log(-std::expm1(-delta));
    TailSum out;
    VectorXd x = sol.pi0;
    for (std::int64_t k = 0;; ++k) {
        if (k == 1) x = sol.pi1;
        if (k >= 2) x = sol.rate.R.transpose() * x;
        out.partial += x[sol.n] * std::exp(theta1 * static_cast<double>(k));
        out.terms_used = k + 1;
        out.remainder_bound = std::exp(log_head - static_cast<double>(k + 1) * delta);
        if (out.remainder_bound <= opts.rel_tol * out.partial) {
            out.converged = true;
            break;
        }
        if (out.terms_used >= opts.max_terms) break;
    }
    out.value = out.partial + out.remainder_bound;
    return out;
}

TopLayerSums top_layer_sums(const QbdSolution& sol, const DriftCertificate& cert,
                            const TailOptions& opts) {
    TopLayerSums out;
    const double t1 = cert.theta.theta1();
    out.weighted = top_layer_weighted_sum(sol, t1, cert, opts);
    out.unweighted = top_layer_weighted_sum(sol, 0.0, cert, opts);
    VectorXd e_n = VectorXd::Zero(sol.n + 1);
    e_n[sol.n] = 1.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.weighted_closed_form = std::exp(t1) * sol.rate.spectral_radius < 1.0 - opts.closed_form_margin
                                   ? closed_form_weighted_mass(sol, t1, e_n)
                                   : nan;
    out.unweighted_closed_form = sol.rate.spectral_radius < 1.0 - opts.closed_form_margin
                                     ? closed_form_weighted_mass(sol, 0.0, e_n)
                                     : nan;
    return out;
}

double level_tail_bound(const QbdSolution& sol, const DriftCertificate& cert, const Growth& growth,
                        std::int64_t K) {
    const double d1 = cert.theta_tilde.theta1() - growth.a1;
    const double d2 = cert.theta_tilde.theta2() - growth.a2;
    const double phases = -std::expm1(-static_cast<double>(sol.n + 1) * d2) / -std::expm1(-d2);
    return growth.scale * cert.b_tilde * phases *
           std::exp(-static_cast<double>(K + 1) * d1 - std::log(-std::expm1(-d1)));
}

}  // namespace rrwqbd
