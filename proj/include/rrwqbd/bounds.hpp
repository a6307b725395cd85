#pragma once

// Relative error bounds for the level-n QBD approximation:
//
//   E(n) = (12/c) sum_k pi_n(k,n) { e^{theta1+theta2} e^{k theta1 + n theta2} + b }
//   E~(n) = (12 b~/c) [ e^{theta1+theta2} e^{-n(theta~2-theta2)} / (1 - e^{-(theta~1-theta1)})
//                       + b e^{-n theta~2} / (1 - e^{-theta~1}) ]
//
// For 0 < g <= c v, |pi_n g - pi g| <= E(n) pi g, and E(n) <= E~(n).

#include <optional>
#include <string>

#include "rrwqbd/certificate.hpp"
#include "rrwqbd/functional.hpp"
#include "rrwqbd/qbd.hpp"

namespace rrwqbd {

struct ErrorBoundReport {
    int n = 0;
    double E = 0.0;        ///< certified upper value
    double E_tilde = 0.0;
    TopLayerSums tail;
    /// E(n) recomputed from the closed-form top-layer sums (NaN if
    /// unavailable); a cross-check only, never the reported value.
    double E_closed_form = 0.0;
    DriftCertificate certificate;
};

/// Certified E(n): both top-layer sums include their remainder bounds.
double error_bound_E(const QbdSolution& sol, const DriftCertificate& cert,
                     const TailOptions& opts = {});

double error_bound_E_tilde(const DriftCertificate& cert, int n);

/// log E~(n), usable where E~(n) itself would underflow.
double log_error_bound_E_tilde(const DriftCertificate& cert, int n);

ErrorBoundReport error_bound_report(const QbdSolution& sol, const DriftCertificate& cert,
                                    const TailOptions& opts = {});

struct CertifiedFunctional {
    FunctionalSpec functional;
    FunctionalValidation validation;
    TailSum approx;  ///< pi_n g with certified level tail
    double relative_error_bound = 0.0;
    double interval_lo = 0.0;
    std::optional<double> interval_hi;  ///< absent when E(n) >= 1
    bool informative = false;
    std::string note;
};

/// Throws std::invalid_argument when g fails validation.
CertifiedFunctional certify_functional(const QbdSolution& sol, const DriftCertificate& cert,
                                       const FunctionalSpec& f, double E,
                                       const TailOptions& opts = {});

/// pi_n g with the certified level tail of the growth envelope.
TailSum qbd_expectation(const QbdSolution& sol, const DriftCertificate& cert,
                        const FunctionalSpec& f, const TailOptions& opts = {});

}  // namespace rrwqbd
