#pragma once

// Two-dimensional reflecting random walks on the quarter plane.
//
// The walk moves on Z_+^2 with increments in {-1,0,1}^2. Its one-step law
// depends only on which region the current state occupies: the origin, the
// horizontal face N x {0}, the vertical face {0} x N, or the interior N^2.

#include <array>
#include <compare>
#include <initializer_list>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rrwqbd {

inline constexpr double kProbabilityTolerance = 1e-12;

using Vec2 = std::array<double, 2>;

struct Offset {
    int dx = 0;
    int dy = 0;

    auto operator<=>(const Offset&) const = default;
};

struct State {
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;

    auto operator<=>(const State&) const = default;
};

enum class Region { Origin, Face1, Face2, Interior };

inline constexpr std::array<Region, 4> kAllRegions = {Region::Origin, Region::Face1, Region::Face2,
                                                      Region::Interior};
/// Regions whose laws enter the stability and drift conditions.
inline constexpr std::array<Region, 3> kNonOriginRegions = {Region::Face1, Region::Face2,
                                                            Region::Interior};

std::string_view to_string(Region r);
std::size_t index_of(Region r);
Region classify(State s);

/// Whether an increment is admissible in a region: faces cannot push the walk
/// below the axis they live on, the origin cannot decrease either coordinate.
bool in_support(Region r, Offset m);

/// Distribution of the increment in one region. Stores all nine offsets of
/// {-1,0,1}^2; entries outside the region's support are representable so that
/// malformed input can be reported instead of silently dropped.
class TransitionLaw {
public:
    TransitionLaw() = default;
    explicit TransitionLaw(Region region) : region_(region) {}
    TransitionLaw(Region region, std::initializer_list<std::pair<Offset, double>> entries);

    Region region() const { return region_; }
    double prob(Offset m) const;
    double prob(int dx, int dy) const { return prob(Offset{dx, dy}); }
    void set(Offset m, double p);
    double total() const;

    /// Offsets with strictly positive probability, in lexicographic order.
    std::vector<std::pair<Offset, double>> support() const;

    bool operator==(const TransitionLaw&) const = default;

private:
    static std::size_t slot(Offset m);

    Region region_ = Region::Interior;
    std::array<double, 9> probs_{};
};

class RandomWalkSpec {
public:
    RandomWalkSpec();
    RandomWalkSpec(TransitionLaw origin, TransitionLaw face1, TransitionLaw face2,
                   TransitionLaw interior);

    const TransitionLaw& law(Region r) const { return laws_[index_of(r)]; }
    const TransitionLaw& law_at(State s) const { return law(classify(s)); }

    bool operator==(const RandomWalkSpec&) const = default;

private:
    std::array<TransitionLaw, 4> laws_;
};

/// Divides every law by its total mass. Only called on explicit request.
RandomWalkSpec renormalized(const RandomWalkSpec& spec);

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind { Support, Range, Normalization, Irreducibility, Aperiodicity };

std::string_view to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::optional<Region> region;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    int window = 0;

    bool ok() const { return violations.empty(); }
};

/// Irreducibility and aperiodicity are checked on the finite window
/// {0..window}^2 using only transitions that stay inside it. This is a
/// pragmatic screen, not a proof about the infinite chain.
ValidationReport validate_spec(const RandomWalkSpec& spec, int window = 30);

// ---------------------------------------------------------------------------
// Drifts and stability

struct MeanDrift {
    double mu1 = 0.0;
    double mu2 = 0.0;

    Vec2 vec() const { return {mu1, mu2}; }
};

MeanDrift mean_drift(const TransitionLaw& law);

double wedge(const Vec2& x, const Vec2& y);
inline double wedge(const MeanDrift& x, const MeanDrift& y) { return wedge(x.vec(), y.vec()); }

enum class StabilityCase { A, B, C };

std::string_view to_string(StabilityCase c);

struct Inequality {
    std::string name;      ///< e.g. "A: mu_E ^ mu_1 < 0"
    std::string relation;  ///< "<", ">", ">=", or "conditional"
    double value = 0.0;
    bool holds = false;
    bool tie = false;  ///< |value| within the tie band of zero
};

struct StabilityVerdict {
    bool stable = false;
    std::optional<StabilityCase> which;
    std::vector<Inequality> diagnostics;
};

/// Evaluates every inequality of the three stability cases. Strict
/// inequalities are tightened by `margin` (0 by default). The first case that
/// holds, in order A, B, C, is reported.
StabilityVerdict check_stability(const RandomWalkSpec& spec, double margin = 0.0);

struct NegativeDriftCheck {
    bool holds = false;
    double mu1_face1 = 0.0;
    double mu2_face2 = 0.0;
    double face_wedge = 0.0;  ///< mu^{1} ^ mu^{2}
};

/// Negative drift on both faces plus mu^{1} ^ mu^{2} > 0.
NegativeDriftCheck check_assumption2(const RandomWalkSpec& spec);

// ---------------------------------------------------------------------------
// Two-node Jackson network with cooperative servers

class JacksonParams {
public:
    /// Rates are rescaled so that lambda1 + lambda2 + sigma1 + sigma2 = 1.
    /// Throws std::invalid_argument on nonpositive rates or q outside (0,1).
    JacksonParams(double lambda1, double lambda2, double sigma1, double sigma2, double q1,
                  double q2);

    double lambda1() const { return lambda1_; }
    double lambda2() const { return lambda2_; }
    double sigma1() const { return sigma1_; }
    double sigma2() const { return sigma2_; }
    double q1() const { return q1_; }
    double q2() const { return q2_; }

    /// Classical traffic intensities (rho1, rho2).
    std::pair<double, double> loads() const;

private:
    double lambda1_, lambda2_, sigma1_, sigma2_, q1_, q2_;
};

RandomWalkSpec jackson_spec(const JacksonParams& p);

// ---------------------------------------------------------------------------
// Dynamics

/// Next-state distribution from `s`; entries with zero probability are
/// omitted. Targets always lie in Z_+^2 for a valid spec.
std::vector<std::pair<State, double>> step_distribution(const RandomWalkSpec& spec, State s);

}  // namespace rrwqbd
