#include "rrwqbd/functional.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rrwqbd {

std::string FunctionalSpec::description() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case FunctionalKind::Ones: os << "ones"; break;
        case FunctionalKind::ScaledLyapunov: os << "lyapunov:" << alpha; break;
        case FunctionalKind::WindowIndicator:
            os << "window:" << rect.k_lo << ',' << rect.k_hi << ',' << rect.i_lo << ',' << rect.i_hi;
            break;
        case FunctionalKind::TruncatedCoordinate: os << "coord:" << axis << ',' << cap; break;
    }
    if (scale != 1.0) os << '@' << scale;
    return os.str();
}

FunctionalSpec ones(double scale) {
    FunctionalSpec f;
    f.kind = FunctionalKind::Ones;
    f.scale = scale;
    return f;
}

FunctionalSpec scaled_lyapunov(double alpha) {
    FunctionalSpec f;
    f.kind = FunctionalKind::ScaledLyapunov;
    f.alpha = alpha;
    return f;
}

FunctionalSpec window_indicator(Rect rect, double scale) {
    if (rect.k_lo < 0 || rect.i_lo < 0 || rect.k_hi < rect.k_lo || rect.i_hi < rect.i_lo)
        throw std::invalid_argument("window must be a nonempty rectangle in Z_+^2");
    FunctionalSpec f;
    f.kind = FunctionalKind::WindowIndicator;
    f.rect = rect;
    f.scale = scale;
    return f;
}

FunctionalSpec truncated_coordinate(int axis, std::int64_t cap, double scale) {
    if (axis != 1 && axis != 2) throw std::invalid_argument("axis must be 1 or 2");
    if (cap < 0) throw std::invalid_argument("cap must be nonnegative");
    FunctionalSpec f;
    f.kind = FunctionalKind::TruncatedCoordinate;
    f.axis = axis;
    f.cap = cap;
    f.scale = scale;
    return f;
}

namespace {

std::vector<double> numbers(const std::string& text, std::size_t count) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + end, v);
        if (ec != std::errc() || ptr != text.data() + end)
            throw std::invalid_argument("malformed number in functional '" + text + "'");
        out.push_back(v);
        start = end + 1;
    }
    if (out.size() != count)
        throw std::invalid_argument("functional '" + text + "' needs " + std::to_string(count) +
                                    " arguments");
    return out;
}

std::int64_t integral(double v) {
    if (v != std::floor(v)) throw std::invalid_argument("expected an integer argument");
    return static_cast<std::int64_t>(v);
}

}  // namespace

FunctionalSpec parse_functional(const std::string& text) {
    std::string body = text;
    double scale = 1.0;
    if (auto at = text.find('@'); at != std::string::npos) {
        scale = numbers(text.substr(at + 1), 1)[0];
        body = text.substr(0, at);
    }
    if (!(scale > 0.0)) throw std::invalid_argument("functional scale must be positive");
    const auto colon = body.find(':');
    const std::string name = body.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : body.substr(colon + 1);
    if (name == "ones" && colon == std::string::npos) return ones(scale);
    if (name == "lyapunov") {
        FunctionalSpec f = scaled_lyapunov(numbers(args, 1)[0]);
        f.scale = scale;
        return f;
    }
    if (name == "window") {
        const auto v = numbers(args, 4);
        return window_indicator({integral(v[0]), integral(v[1]), integral(v[2]), integral(v[3])}, scale);
    }
    if (name == "coord") {
        const auto v = numbers(args, 2);
        return truncated_coordinate(static_cast<int>(integral(v[0])), integral(v[1]), scale);
    }
    throw std::invalid_argument("unknown functional '" + text + "'");
}

double evaluate(const FunctionalSpec& f, const DriftCertificate& cert, State s) {
    switch (f.kind) {
        case FunctionalKind::Ones: return f.scale;
        case FunctionalKind::ScaledLyapunov:
            return f.scale * f.alpha *
                   std::exp(cert.theta.theta1() * static_cast<double>(s.n1) +
                            cert.theta.theta2() * static_cast<double>(s.n2));
        case FunctionalKind::WindowIndicator:
            return (s.n1 >= f.rect.k_lo && s.n1 <= f.rect.k_hi && s.n2 >= f.rect.i_lo &&
                    s.n2 <= f.rect.i_hi)
                       ? f.scale
                       : 0.0;
        case FunctionalKind::TruncatedCoordinate: {
            const std::int64_t x = f.axis == 1 ? s.n1 : s.n2;
            return f.scale * static_cast<double>(1 + std::min(x, f.cap));
        }
    }
    return 0.0;
}

Growth growth_of(const FunctionalSpec& f, const DriftCertificate& cert) {
    if (f.kind == FunctionalKind::ScaledLyapunov)
        return {f.scale * f.alpha, cert.theta.theta1(), cert.theta.theta2()};
    return {sup_of(f), 0.0, 0.0};
}

double sup_of(const FunctionalSpec& f) {
    switch (f.kind) {
        case FunctionalKind::Ones:
        case FunctionalKind::WindowIndicator: return f.scale;
        case FunctionalKind::ScaledLyapunov: return std::numeric_limits<double>::infinity();
        case FunctionalKind::TruncatedCoordinate: return f.scale * static_cast<double>(1 + f.cap);
    }
    return 0.0;
}

FunctionalValidation validate_functional(const FunctionalSpec& f, const DriftCertificate& cert) {
    // c v(s) = exp<theta, s> >= 1, with equality only at the origin.
    FunctionalValidation out;
    if (!(f.scale > 0.0)) {
        out.note = "scale must be positive";
        return out;
    }
    switch (f.kind) {
        case FunctionalKind::Ones:
            out.valid = f.scale <= 1.0;
            if (!out.valid) out.witness = State{0, 0};
            out.note = "g <= 1 <= c v";
            break;
        case FunctionalKind::ScaledLyapunov:
            out.valid = f.alpha > 0.0 && f.scale * f.alpha <= 1.0;
            if (!out.valid) out.witness = State{0, 0};
            out.note = "g = alpha c v with alpha in (0,1]";
            break;
        case FunctionalKind::WindowIndicator: {
            // The minimum of c v over the rectangle sits at its lower corner.
            const State corner{f.rect.k_lo, f.rect.i_lo};
            const double cv = std::exp(cert.theta.theta1() * static_cast<double>(corner.n1) +
                                       cert.theta.theta2() * static_cast<double>(corner.n2));
            out.valid = f.scale <= cv;
            if (!out.valid) out.witness = corner;
            out.note = "nonnegative indicator, admitted through the positive perturbation limit";
            break;
        }
        case FunctionalKind::TruncatedCoordinate: {
            // Worst case has the other coordinate at 0; beyond the cap g is
            // flat while c v grows, so only x in 0..cap needs checking.
            const double t = f.axis == 1 ? cert.theta.theta1() : cert.theta.theta2();
            out.valid = true;
            for (std::int64_t x = 0; x <= f.cap; ++x) {
                if (f.scale * static_cast<double>(1 + x) > std::exp(t * static_cast<double>(x))) {
                    out.valid = false;
                    out.witness = f.axis == 1 ? State{x, 0} : State{0, x};
                    break;
                }
            }
            out.note = "checked 1 + min(x, cap) against exp(theta_axis x) for x in 0..cap";
            break;
        }
    }
    return out;
}

}  // namespace rrwqbd
