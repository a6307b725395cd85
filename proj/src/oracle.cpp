#include "rrwqbd/oracle.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "rrwqbd/philox.hpp"

namespace rrwqbd {

namespace {

template <class F>
void for_each_transition(const RandomWalkSpec& spec, const ClampedWindow& w, F&& f) {
    for (std::int64_t k = 0; k <= w.M1; ++k)
        for (std::int64_t i = 0; i <= w.M2; ++i) {
            const std::int64_t from = w.index(k, i);
            for (const auto& [m, p] : spec.law_at({k, i}).support()) {
                const std::int64_t k2 = std::min(k + m.dx, w.M1);
                const std::int64_t i2 = std::min(i + m.dy, w.M2);
                f(from, w.index(k2, i2), p);
            }
        }
}

void guard_memory(const ClampedWindow& w, const OracleOptions& opts) {
    const double bytes = BandMatrix::bytes_for(w.size(), w.half_width());
    if (bytes > opts.memory_limit_bytes) {
        std::ostringstream os;
        os << "window (" << w.M1 << ", " << w.M2 << ") needs " << bytes / 1e9
           << " GB of band storage, above the limit of " << opts.memory_limit_bytes / 1e9
           << " GB; use a smaller window (a sparse solver is not implemented)";
        throw OracleMemoryError(os.str());
    }
}

ReferenceDistribution solve_window(const RandomWalkSpec& spec, const ClampedWindow& w) {
    ReferenceDistribution ref;
    ref.window = w;
    ref.pi = gth_stationary(clamped_chain(spec, w));
    ref.residual = clamped_residual(spec, w, ref.pi);
    return ref;
}

}  // namespace

BandMatrix clamped_chain(const RandomWalkSpec& spec, const ClampedWindow& w) {
    if (w.M1 < 1 || w.M2 < 1) throw std::invalid_argument("window must be at least 2 x 2");
    BandMatrix P(w.size(), w.half_width());
    for_each_transition(spec, w, [&](std::int64_t a, std::int64_t b, double p) { P.add(a, b, p); });
    return P;
}

Eigen::MatrixXd clamped_chain_dense(const RandomWalkSpec& spec, const ClampedWindow& w) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(w.size(), w.size());
    for_each_transition(spec, w, [&](std::int64_t a, std::int64_t b, double p) { P(a, b) += p; });
    return P;
}

double clamped_residual(const RandomWalkSpec& spec, const ClampedWindow& w, const Eigen::VectorXd& pi) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(pi.size());
    for_each_transition(spec, w, [&](std::int64_t a, std::int64_t b, double p) { next[b] += pi[a] * p; });
    return (next - pi).lpNorm<1>();
}

double ReferenceDistribution::at(std::int64_t k, std::int64_t i) const {
    if (k < 0 || i < 0 || k > window.M1 || i > window.M2) return 0.0;
    return pi[window.index(k, i)];
}

ReferenceDistribution dense_stationary(const RandomWalkSpec& spec, std::int64_t M1, std::int64_t M2,
                                       const OracleOptions& opts) {
    if (M1 < 2 || M2 < 2) throw std::invalid_argument("oracle window must be at least 2 in each axis");
    const ClampedWindow w{M1, M2};
    const ClampedWindow big{M1 + opts.delta, M2 + opts.delta};
    guard_memory(opts.estimate_gap ? big : w, opts);
    ReferenceDistribution ref = solve_window(spec, w);
    if (opts.estimate_gap) {
        const ReferenceDistribution wide = solve_window(spec, big);
        ref.truncation_gap = tv_distance(ref, wide);
        ref.gap_window = big;
    }
    return ref;
}

double reference_error_budget(const ReferenceDistribution& ref) {
    return ref.truncation_gap + ref.residual + static_cast<double>(ref.window.size()) * 0x1.0p-53;
}

double tv_distance(const ReferenceDistribution& a, const ReferenceDistribution& b) {
    const std::int64_t K = std::max(a.window.M1, b.window.M1);
    const std::int64_t I = std::max(a.window.M2, b.window.M2);
    double sum = 0.0;
    for (std::int64_t k = 0; k <= K; ++k)
        for (std::int64_t i = 0; i <= I; ++i) sum += std::abs(a.at(k, i) - b.at(k, i));
    return 0.5 * sum;
}

double expectation(const ReferenceDistribution& ref, const std::function<double(State)>& h) {
    double sum = 0.0;
    for (std::int64_t idx = 0; idx < ref.window.size(); ++idx) sum += ref.pi[idx] * h(ref.window.state(idx));
    return sum;
}

double expectation(const ReferenceDistribution& ref, const FunctionalSpec& f, const DriftCertificate& cert) {
    return expectation(ref, [&](State s) { return evaluate(f, cert, s); });
}

ObservedError reference_vs_qbd(const QbdSolution& sol, const DriftCertificate& cert,
                               const ReferenceDistribution& ref, const FunctionalSpec& f) {
    if (sol.n > ref.window.M2) throw std::invalid_argument("reference window is lower than the QBD phase cap");
    ObservedError out;
    const auto levels = level_vectors(sol, ref.window.M1);
    double abs_sum = 0.0, signed_sum = 0.0;
    for (std::int64_t k = 0; k <= ref.window.M1; ++k)
        for (std::int64_t i = 0; i <= ref.window.M2; ++i) {
            const double q = i <= sol.n ? levels[k][i] : 0.0;
            const double p = ref.at(k, i);
            const double g = evaluate(f, cert, {k, i});
            abs_sum += std::abs(q - p) * g;
            signed_sum += (q - p) * g;
            out.pi_star_g += p * g;
            out.qbd_g += q * g;
        }
    // Beyond the window pi* vanishes, so |pi_n - pi*| g = pi_n g there.
    out.beyond_window = level_tail_bound(sol, cert, growth_of(f, cert), ref.window.M1);
    abs_sum += out.beyond_window;
    out.qbd_g += out.beyond_window;
    out.weighted_abs = abs_sum / out.pi_star_g;
    out.signed_abs = (std::abs(signed_sum) + out.beyond_window) / out.pi_star_g;
    return out;
}

double tv_qbd_vs_window(const QbdSolution& sol, const ReferenceDistribution& ref) {
    const auto levels = level_vectors(sol, ref.window.M1 + 1);
    double sum = 0.0;
    for (std::int64_t k = 0; k <= ref.window.M1; ++k) {
        for (std::int64_t i = 0; i <= std::max<std::int64_t>(sol.n, ref.window.M2); ++i) {
            const double q = i <= sol.n ? levels[k][i] : 0.0;
            sum += std::abs(q - ref.at(k, i));
        }
    }
    sum += levels[ref.window.M1 + 1].dot(sol.tail_ones);
    return 0.5 * sum;
}

// ---------------------------------------------------------------------------

std::string_view to_string(DeviationMethod m) {
    return m == DeviationMethod::FundamentalMatrix ? "fundamental_matrix" : "partial_series";
}

int chain_period(const Eigen::MatrixXd& P) {
    const Eigen::Index n = P.rows();
    std::vector<std::int64_t> level(n, -1);
    std::queue<Eigen::Index> q;
    level[0] = 0;
    q.push(0);
    while (!q.empty()) {
        const Eigen::Index u = q.front();
        q.pop();
        for (Eigen::Index v = 0; v < n; ++v)
            if (P(u, v) > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                q.push(v);
            }
    }
    if (std::any_of(level.begin(), level.end(), [](std::int64_t l) { return l < 0; }))
        throw std::invalid_argument("chain is reducible");
    // Strong connectivity: every state reaches 0.
    std::vector<bool> back(n, false);
    back[0] = true;
    q.push(0);
    while (!q.empty()) {
        const Eigen::Index v = q.front();
        q.pop();
        for (Eigen::Index u = 0; u < n; ++u)
            if (P(u, v) > 0.0 && !back[u]) {
                back[u] = true;
                q.push(u);
            }
    }
    if (std::find(back.begin(), back.end(), false) != back.end())
        throw std::invalid_argument("chain is reducible");
    std::int64_t g = 0;
    for (Eigen::Index u = 0; u < n; ++u)
        for (Eigen::Index v = 0; v < n; ++v)
            if (P(u, v) > 0.0) g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
    return static_cast<int>(g);
}

DeviationMatrixFinite deviation_matrix(const Eigen::MatrixXd& P, DeviationMethod method) {
    if (chain_period(P) != 1) throw std::invalid_argument("chain is periodic");
    const Eigen::Index n = P.rows();
    DeviationMatrixFinite out;
    out.method = method;
    out.pi = gth_stationary(P);
    const Eigen::MatrixXd E = Eigen::VectorXd::Ones(n) * out.pi.transpose();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    if (method == DeviationMethod::FundamentalMatrix) {
        out.D = (I - P + E).partialPivLu().solve(I - E);
        return out;
    }
    // P^l - e pi = (P - e pi)^l for l >= 1. The powers of P - e pi decay to
    // zero, whereas P^l - e pi stalls at the rounding level of pi.
    out.D = I - E;
    const Eigen::MatrixXd Q = P - E;
    Eigen::MatrixXd term = Q;
    out.terms = 1;
    const std::int64_t cap = 1000000;
    for (std::int64_t l = 1; l < cap; ++l) {
        out.D += term;
        out.terms = l + 1;
        if (term.cwiseAbs().maxCoeff() < 1e-18) return out;
        term = term * Q;
    }
    throw std::runtime_error("deviation series did not converge");
}

DeviationBoundReport check_deviation_bound(const RandomWalkSpec& spec, const DriftCertificate& cert,
                                           const ClampedWindow& w, const FunctionalSpec& f,
                                           std::int64_t row_stride, const OracleOptions& opts) {
    DeviationBoundReport out;
    out.window = w;
    const ReferenceDistribution ref = dense_stationary(spec, w.M1, w.M2, opts);
    out.truncation_gap = ref.truncation_gap;
    out.pi_g = expectation(ref, f, cert);

    // Row d of D solves d (I - P) = e_s - pi with d 1 = 0. Pinning d_0 = 0
    // and dropping the first column equation leaves a nonsingular banded
    // system in (I - P)^T.
    const lapack_int N = static_cast<lapack_int>(w.size());
    const lapack_int m = N - 1;
    const lapack_int kl = static_cast<lapack_int>(w.half_width());
    const lapack_int ku = kl;
    const lapack_int ldab = 2 * kl + ku + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * m, 0.0);
    auto put = [&](lapack_int i, lapack_int j, double v) {  // 0-based in the reduced system
        ab[static_cast<std::size_t>(kl + ku + i - j) + static_cast<std::size_t>(j) * ldab] += v;
    };
    for (lapack_int r = 0; r < m; ++r) put(r, r, 1.0);
    for_each_transition(spec, w, [&](std::int64_t a, std::int64_t b, double p) {
        // (I - P)^T entry (b, a) receives -p.
        if (a == 0 || b == 0) return;
        put(static_cast<lapack_int>(b - 1), static_cast<lapack_int>(a - 1), -p);
    });
    std::vector<lapack_int> ipiv(m);
    if (LAPACKE_dgbtrf(LAPACK_COL_MAJOR, m, m, kl, ku, ab.data(), ldab, ipiv.data()) != 0)
        throw std::runtime_error("banded LU failed on the deviation system");

    std::vector<std::int64_t> rows;
    for (std::int64_t k = 0; k <= w.M1; k += row_stride)
        for (std::int64_t i = 0; i <= w.M2; i += row_stride) rows.push_back(w.index(k, i));
    const lapack_int nrhs = static_cast<lapack_int>(rows.size());
    std::vector<double> rhs(static_cast<std::size_t>(m) * nrhs);
    for (lapack_int c = 0; c < nrhs; ++c)
        for (lapack_int r = 0; r < m; ++r)
            rhs[static_cast<std::size_t>(c) * m + r] = (rows[c] == r + 1 ? 1.0 : 0.0) - ref.pi[r + 1];
    if (LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', m, kl, ku, nrhs, ab.data(), ldab, ipiv.data(), rhs.data(), m) != 0)
        throw std::runtime_error("banded solve failed on the deviation system");

    std::vector<double> g(static_cast<std::size_t>(N));
    for (lapack_int j = 0; j < N; ++j) g[j] = evaluate(f, cert, w.state(j));
    out.min_margin = std::numeric_limits<double>::infinity();
    for (lapack_int c = 0; c < nrhs; ++c) {
        const double* y = &rhs[static_cast<std::size_t>(c) * m];
        double ysum = 0.0;
        for (lapack_int r = 0; r < m; ++r) ysum += y[r];
        double lhs = std::abs(0.0 - ysum * ref.pi[0]) * g[0];
        for (lapack_int r = 0; r < m; ++r) lhs += std::abs(y[r] - ysum * ref.pi[r + 1]) * g[r + 1];
        const State s = w.state(rows[c]);
        const double rhs_val = (out.pi_g + 1.0) * (lyapunov_v(cert, s).value + cert.b / cert.c);
        const double margin = (rhs_val - lhs) / rhs_val;
        ++out.rows_checked;
        if (margin < 0.0) ++out.violations;
        if (margin < out.min_margin) {
            out.min_margin = margin;
            out.worst_state = s;
            out.worst_lhs = lhs;
            out.worst_rhs = rhs_val;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct StepTable {
    std::array<std::vector<std::pair<Offset, double>>, 4> cumulative;

    explicit StepTable(const RandomWalkSpec& spec) {
        for (Region r : kAllRegions) {
            double acc = 0.0;
            for (const auto& [m, p] : spec.law(r).support()) {
                acc += p;
                cumulative[index_of(r)].push_back({m, acc});
            }
        }
    }

    State step(State s, double u) const {
        const auto& table = cumulative[index_of(classify(s))];
        // Rounding can leave the last cumulative value just under u; the last
        // offset absorbs it.
        for (std::size_t j = 0; j + 1 < table.size(); ++j)
            if (u < table[j].second) return {s.n1 + table[j].first.dx, s.n2 + table[j].first.dy};
        return {s.n1 + table.back().first.dx, s.n2 + table.back().first.dy};
    }
};

}  // namespace

std::vector<SimulationResult> simulate_many(const RandomWalkSpec& spec, const DriftCertificate& cert,
                                            std::int64_t steps, std::uint64_t seed,
                                            const std::vector<FunctionalSpec>& fs, int batches) {
    if (batches < 2) throw std::invalid_argument("need at least two batches");
    if (steps < batches) throw std::invalid_argument("fewer steps than batches");
    const StepTable table(spec);
    Philox4x32 rng(seed);
    const std::int64_t batch_len = steps / batches;
    const std::size_t nf = fs.size();
    std::vector<std::vector<double>> batch_means(nf, std::vector<double>(batches, 0.0));
    State s{0, 0};
    for (int bi = 0; bi < batches; ++bi) {
        std::vector<double> acc(nf, 0.0);
        for (std::int64_t t = 0; t < batch_len; ++t) {
            for (std::size_t j = 0; j < nf; ++j) acc[j] += evaluate(fs[j], cert, s);
            s = table.step(s, rng.uniform());
        }
        for (std::size_t j = 0; j < nf; ++j) batch_means[j][bi] = acc[j] / static_cast<double>(batch_len);
    }
    const boost::math::students_t dist(batches - 1);
    const double tq = boost::math::quantile(dist, 0.975);
    std::vector<SimulationResult> out;
    for (std::size_t j = 0; j < nf; ++j) {
        const auto& bm = batch_means[j];
        const double mean = std::accumulate(bm.begin(), bm.end(), 0.0) / batches;
        double ss = 0.0;
        for (double x : bm) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / (batches - 1));
        SimulationResult r;
        r.functional = fs[j].description();
        r.estimate = mean;
        r.half_width = tq * sd / std::sqrt(static_cast<double>(batches));
        r.steps = batch_len * batches;
        r.seed = seed;
        r.batches = batches;
        r.rng = Philox4x32::kName;
        out.push_back(r);
    }
    return out;
}

SimulationResult simulate(const RandomWalkSpec& spec, const DriftCertificate& cert, std::int64_t steps,
                          std::uint64_t seed, const FunctionalSpec& f, int batches) {
    return simulate_many(spec, cert, steps, seed, {f}, batches).front();
}

State simulate_path_end(const RandomWalkSpec& spec, std::int64_t steps, std::uint64_t seed) {
    const StepTable table(spec);
    Philox4x32 rng(seed);
    State s{0, 0};
    for (std::int64_t t = 0; t < steps; ++t) s = table.step(s, rng.uniform());
    return s;
}

}  // namespace rrwqbd
