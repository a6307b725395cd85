#pragma once

// Brute-force references: stationary vectors of finite clamped chains,
// deviation matrices of small chains, and Monte Carlo simulation of the walk.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rrwqbd/certificate.hpp"
#include "rrwqbd/functional.hpp"
#include "rrwqbd/gth.hpp"
#include "rrwqbd/model.hpp"
#include "rrwqbd/qbd.hpp"

namespace rrwqbd {

class OracleMemoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Chain on {0..M1} x {0..M2} obtained by clamping each coordinate of the
/// next state with min(., M). State (k, i) has index k (M2 + 1) + i.
struct ClampedWindow {
    std::int64_t M1 = 0, M2 = 0;

    std::int64_t size() const { return (M1 + 1) * (M2 + 1); }
    std::int64_t index(std::int64_t k, std::int64_t i) const { return k * (M2 + 1) + i; }
    State state(std::int64_t idx) const { return {idx / (M2 + 1), idx % (M2 + 1)}; }
    std::int64_t half_width() const { return M2 + 2; }
};

BandMatrix clamped_chain(const RandomWalkSpec& spec, const ClampedWindow& w);

/// Dense transition matrix (small windows only).
Eigen::MatrixXd clamped_chain_dense(const RandomWalkSpec& spec, const ClampedWindow& w);

/// L1 norm of pi P - pi on the clamped chain, streaming over transitions.
double clamped_residual(const RandomWalkSpec& spec, const ClampedWindow& w, const Eigen::VectorXd& pi);

struct OracleOptions {
    std::int64_t delta = 50;           ///< window growth for the truncation gap
    double memory_limit_bytes = 2.5e9;  ///< per band matrix
    bool estimate_gap = true;
};

struct ReferenceDistribution {
    ClampedWindow window;
    Eigen::VectorXd pi;
    double residual = 0.0;
    double truncation_gap = 0.0;  ///< TV distance to the solve on the enlarged window
    ClampedWindow gap_window;

    double at(std::int64_t k, std::int64_t i) const;
};

/// Stationary vector of the clamped chain by banded GTH. Throws
/// OracleMemoryError when the band storage would exceed the limit.
ReferenceDistribution dense_stationary(const RandomWalkSpec& spec, std::int64_t M1, std::int64_t M2,
                                       const OracleOptions& opts = {});

/// Error budget for assertions against the reference: truncation gap plus
/// balance residual plus the rounding of a sum over the window.
double reference_error_budget(const ReferenceDistribution& ref);

/// Total variation distance, both vectors extended by zeros.
double tv_distance(const ReferenceDistribution& a, const ReferenceDistribution& b);

/// sum over the window of pi*(s) h(s).
double expectation(const ReferenceDistribution& ref, const std::function<double(State)>& h);
double expectation(const ReferenceDistribution& ref, const FunctionalSpec& f,
                   const DriftCertificate& cert);

struct ObservedError {
    double pi_star_g = 0.0;
    double qbd_g = 0.0;         ///< pi_n g over the window plus beyond-window bound
    double weighted_abs = 0.0;  ///< |pi_n - pi*| g / pi* g
    double signed_abs = 0.0;    ///< |(pi_n - pi*) g| / pi* g
    double beyond_window = 0.0;  ///< certified bound on pi_n g over levels > M1
};

/// pi_n extended by zeros above phase n; needs n <= M2.
ObservedError reference_vs_qbd(const QbdSolution& sol, const DriftCertificate& cert,
                               const ReferenceDistribution& ref, const FunctionalSpec& f);

/// TV distance between pi_n (extended by zeros) and a vector on a window,
/// with the pi_n mass beyond the window's last level added in full.
double tv_qbd_vs_window(const QbdSolution& sol, const ReferenceDistribution& ref);

// ---------------------------------------------------------------------------
// Deviation matrix D = sum_l (P^l - e pi) of a finite chain

enum class DeviationMethod { FundamentalMatrix, PartialSeries };
std::string_view to_string(DeviationMethod m);

struct DeviationMatrixFinite {
    Eigen::MatrixXd D;
    Eigen::VectorXd pi;
    DeviationMethod method = DeviationMethod::FundamentalMatrix;
    std::int64_t terms = 0;  ///< series terms used (PartialSeries)
};

/// Period of an irreducible chain; throws std::invalid_argument if reducible.
int chain_period(const Eigen::MatrixXd& P);

/// Throws std::invalid_argument for periodic or reducible chains and
/// std::runtime_error if the series fails to converge.
DeviationMatrixFinite deviation_matrix(const Eigen::MatrixXd& P, DeviationMethod method);

struct DeviationBoundReport {
    ClampedWindow window;
    std::int64_t rows_checked = 0;
    std::int64_t violations = 0;
    double min_margin = 0.0;  ///< min over checked rows of (rhs - lhs) / rhs
    State worst_state;
    double worst_lhs = 0.0, worst_rhs = 0.0;
    double pi_g = 0.0;
    double truncation_gap = 0.0;
    std::string label = "DIAGNOSTIC";
};

/// Compares |D| g with (pi g + 1)(v + (b/c) e) on the clamped chain, for rows
/// on a grid of the given stride. Rows of D come from banded LU solves.
DeviationBoundReport check_deviation_bound(const RandomWalkSpec& spec, const DriftCertificate& cert,
                                           const ClampedWindow& w, const FunctionalSpec& f,
                                           std::int64_t row_stride = 10,
                                           const OracleOptions& opts = {});

// ---------------------------------------------------------------------------
// Simulation

struct SimulationResult {
    std::string functional;
    double estimate = 0.0;
    double half_width = 0.0;  ///< 95% batch-means interval
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    int batches = 20;
    std::string rng;
};

/// Runs the walk from (0,0) for `steps` steps and averages every functional
/// along the same path.
std::vector<SimulationResult> simulate_many(const RandomWalkSpec& spec, const DriftCertificate& cert,
                                            std::int64_t steps, std::uint64_t seed,
                                            const std::vector<FunctionalSpec>& fs, int batches = 20);

SimulationResult simulate(const RandomWalkSpec& spec, const DriftCertificate& cert, std::int64_t steps,
                          std::uint64_t seed, const FunctionalSpec& f, int batches = 20);

/// Path endpoint after `steps` steps, for determinism checks.
State simulate_path_end(const RandomWalkSpec& spec, std::int64_t steps, std::uint64_t seed);

}  // namespace rrwqbd
