#pragma once

// Catalog of test functionals g for which 0 <= g <= c v can be checked in
// closed form. Every kind carries a positive multiplier `scale`; relative
// errors do not depend on it, so it only serves to bring g under c v.

#include <cstdint>
#include <optional>
#include <string>

#include "rrwqbd/certificate.hpp"
#include "rrwqbd/model.hpp"
#include "rrwqbd/qbd.hpp"

namespace rrwqbd {

enum class FunctionalKind { Ones, ScaledLyapunov, WindowIndicator, TruncatedCoordinate };

struct Rect {
    std::int64_t k_lo = 0, k_hi = 0;  ///< first coordinate, inclusive
    std::int64_t i_lo = 0, i_hi = 0;  ///< second coordinate, inclusive
};

struct FunctionalSpec {
    FunctionalKind kind = FunctionalKind::Ones;
    double scale = 1.0;
    double alpha = 1.0;  ///< ScaledLyapunov: g = alpha * c * v
    Rect rect;           ///< WindowIndicator
    int axis = 1;        ///< TruncatedCoordinate: 1 or 2
    std::int64_t cap = 0;

    std::string description() const;
};

FunctionalSpec ones(double scale = 1.0);
FunctionalSpec scaled_lyapunov(double alpha);
FunctionalSpec window_indicator(Rect rect, double scale = 1.0);
FunctionalSpec truncated_coordinate(int axis, std::int64_t cap, double scale = 1.0);

/// Parses "ones", "lyapunov:ALPHA", "window:K0,K1,I0,I1", "coord:AXIS,CAP"
/// with an optional "@SCALE" suffix (e.g. "coord:1,20@0.047619").
/// Throws std::invalid_argument.
FunctionalSpec parse_functional(const std::string& text);

/// g(s). ScaledLyapunov needs the certificate's theta.
double evaluate(const FunctionalSpec& f, const DriftCertificate& cert, State s);

/// Envelope g(k,i) <= scale * e^{a1 k + a2 i} used for certified level tails.
Growth growth_of(const FunctionalSpec& f, const DriftCertificate& cert);

/// sup g, or +inf for unbounded kinds.
double sup_of(const FunctionalSpec& f);

struct FunctionalValidation {
    bool valid = false;
    std::optional<State> witness;  ///< a state where g > c v
    std::string note;
};

/// Checks 0 <= g <= c v on all of Z_+^2. The window indicator vanishes off
/// its rectangle; it is admitted because (1 - e) g + e 1 is strictly positive
/// and below c v for every e in (0,1), and both sides of the relative error
/// bound are continuous in e.
FunctionalValidation validate_functional(const FunctionalSpec& f, const DriftCertificate& cert);

}  // namespace rrwqbd
