#include "rrwqbd/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rrwqbd {

std::string_view to_string(Region r) {
    switch (r) {
        case Region::Origin: return "origin";
        case Region::Face1: return "face1";
        case Region::Face2: return "face2";
        case Region::Interior: return "interior";
    }
    return "?";
}

std::size_t index_of(Region r) { return static_cast<std::size_t>(r); }

Region classify(State s) {
    if (s.n1 < 0 || s.n2 < 0) throw std::out_of_range("state outside the quarter plane");
    if (s.n1 == 0 && s.n2 == 0) return Region::Origin;
    if (s.n2 == 0) return Region::Face1;
    if (s.n1 == 0) return Region::Face2;
    return Region::Interior;
}

bool in_support(Region r, Offset m) {
    if (m.dx < -1 || m.dx > 1 || m.dy < -1 || m.dy > 1) return false;
    switch (r) {
        case Region::Origin: return m.dx >= 0 && m.dy >= 0;
        case Region::Face1: return m.dy >= 0;
        case Region::Face2: return m.dx >= 0;
        case Region::Interior: return true;
    }
    return false;
}

// ---------------------------------------------------------------------------

TransitionLaw::TransitionLaw(Region region,
                             std::initializer_list<std::pair<Offset, double>> entries)
    : region_(region) {
    for (const auto& [m, p] : entries) set(m, p);
}

std::size_t TransitionLaw::slot(Offset m) {
    if (m.dx < -1 || m.dx > 1 || m.dy < -1 || m.dy > 1)
        throw std::out_of_range("increment components must lie in {-1,0,1}");
    return static_cast<std::size_t>((m.dx + 1) * 3 + (m.dy + 1));
}

double TransitionLaw::prob(Offset m) const {
    if (m.dx < -1 || m.dx > 1 || m.dy < -1 || m.dy > 1) return 0.0;
    return probs_[slot(m)];
}

void TransitionLaw::set(Offset m, double p) { probs_[slot(m)] = p; }

double TransitionLaw::total() const {
    double s = 0.0;
    for (double p : probs_) s += p;
    return s;
}

std::vector<std::pair<Offset, double>> TransitionLaw::support() const {
    std::vector<std::pair<Offset, double>> out;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
            double p = prob(dx, dy);
            if (p > 0.0) out.emplace_back(Offset{dx, dy}, p);
        }
    return out;
}

RandomWalkSpec::RandomWalkSpec()
    : laws_{TransitionLaw(Region::Origin), TransitionLaw(Region::Face1),
            TransitionLaw(Region::Face2), TransitionLaw(Region::Interior)} {}

RandomWalkSpec::RandomWalkSpec(TransitionLaw origin, TransitionLaw face1, TransitionLaw face2,
                               TransitionLaw interior)
    : laws_{std::move(origin), std::move(face1), std::move(face2), std::move(interior)} {
    for (Region r : kAllRegions)
        if (laws_[index_of(r)].region() != r)
            throw std::invalid_argument("transition law passed for the wrong region");
}

RandomWalkSpec renormalized(const RandomWalkSpec& spec) {
    std::array<TransitionLaw, 4> laws;
    for (Region r : kAllRegions) {
        const auto& src = spec.law(r);
        double total = src.total();
        if (!(total > 0.0)) throw std::invalid_argument("cannot renormalize a law with zero mass");
        TransitionLaw law(r);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) law.set({dx, dy}, src.prob(dx, dy) / total);
        laws[index_of(r)] = law;
    }
    return RandomWalkSpec(laws[0], laws[1], laws[2], laws[3]);
}

// ---------------------------------------------------------------------------
// Validation

std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::Support: return "support";
        case ViolationKind::Range: return "range";
        case ViolationKind::Normalization: return "normalization";
        case ViolationKind::Irreducibility: return "irreducibility";
        case ViolationKind::Aperiodicity: return "aperiodicity";
    }
    return "?";
}

namespace {

// Transition graph of the walk restricted to {0..w}^2 (edges leaving the
// window are dropped).
struct WindowGraph {
    int side;
    std::vector<std::vector<int>> out;
    std::vector<std::vector<int>> in;

    int id(std::int64_t a, std::int64_t b) const { return static_cast<int>(a * side + b); }
};

WindowGraph window_graph(const RandomWalkSpec& spec, int w) {
    WindowGraph g{w + 1, {}, {}};
    const int count = g.side * g.side;
    g.out.resize(count);
    g.in.resize(count);
    for (int a = 0; a <= w; ++a)
        for (int b = 0; b <= w; ++b) {
            const State s{a, b};
            for (const auto& [m, p] : spec.law_at(s).support()) {
                if (!in_support(classify(s), m)) continue;
                std::int64_t ta = a + m.dx, tb = b + m.dy;
                if (ta < 0 || tb < 0 || ta > w || tb > w) continue;
                g.out[g.id(a, b)].push_back(g.id(ta, tb));
                g.in[g.id(ta, tb)].push_back(g.id(a, b));
            }
        }
    return g;
}

std::vector<int> bfs_levels(const std::vector<std::vector<int>>& adj, int root) {
    std::vector<int> level(adj.size(), -1);
    std::vector<int> queue{root};
    level[root] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int u = queue[head];
        for (int v : adj[u])
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
    }
    return level;
}

std::string offset_str(Offset m) {
    std::ostringstream os;
    os << '(' << m.dx << ',' << m.dy << ')';
    return os.str();
}

}  // namespace

ValidationReport validate_spec(const RandomWalkSpec& spec, int window) {
    ValidationReport report;
    report.window = window;
    auto add = [&](ViolationKind k, std::optional<Region> r, std::string msg) {
        report.violations.push_back({k, r, std::move(msg)});
    };

    for (Region r : kAllRegions) {
        const auto& law = spec.law(r);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy) {
                const double p = law.prob(dx, dy);
                const Offset m{dx, dy};
                if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                    std::ostringstream os;
                    os << "probability of offset " << offset_str(m) << " in " << to_string(r)
                       << " is " << p << ", not in [0,1]";
                    add(ViolationKind::Range, r, os.str());
                } else if (p > 0.0 && !in_support(r, m)) {
                    std::ostringstream os;
                    os << "offset " << offset_str(m) << " has probability " << p
                       << " but lies outside the support of " << to_string(r);
                    add(ViolationKind::Support, r, os.str());
                }
            }
        const double total = law.total();
        if (!(std::abs(total - 1.0) <= kProbabilityTolerance)) {
            std::ostringstream os;
            os.precision(17);
            os << to_string(r) << " law sums to " << total;
            add(ViolationKind::Normalization, r, os.str());
        }
    }

    if (window < 1) return report;
    const WindowGraph g = window_graph(spec, window);
    const auto fwd = bfs_levels(g.out, 0);
    const auto bwd = bfs_levels(g.in, 0);
    std::size_t unreachable = 0;
    for (std::size_t v = 0; v < fwd.size(); ++v)
        if (fwd[v] < 0 || bwd[v] < 0) ++unreachable;
    if (unreachable > 0) {
        std::ostringstream os;
        os << unreachable << " of " << fwd.size() << " window states do not communicate with (0,0)"
           << " on {0.." << window << "}^2";
        add(ViolationKind::Irreducibility, std::nullopt, os.str());
        return report;
    }

    // Period of a strongly connected graph: gcd of level[u] + 1 - level[v]
    // over all edges u -> v of a BFS layering.
    long period = 0;
    for (std::size_t u = 0; u < g.out.size(); ++u)
        for (int v : g.out[u]) period = std::gcd(period, std::labs(fwd[u] + 1L - fwd[v]));
    if (period != 1) {
        std::ostringstream os;
        os << "transition graph on the window has period " << period;
        add(ViolationKind::Aperiodicity, std::nullopt, os.str());
    }
    return report;
}

// ---------------------------------------------------------------------------
// Drifts and stability

MeanDrift mean_drift(const TransitionLaw& law) {
    MeanDrift d;
    for (const auto& [m, p] : law.support()) {
        d.mu1 += p * m.dx;
        d.mu2 += p * m.dy;
    }
    return d;
}

double wedge(const Vec2& x, const Vec2& y) { return x[0] * y[1] - x[1] * y[0]; }

std::string_view to_string(StabilityCase c) {
    switch (c) {
        case StabilityCase::A: return "A";
        case StabilityCase::B: return "B";
        case StabilityCase::C: return "C";
    }
    return "?";
}

StabilityVerdict check_stability(const RandomWalkSpec& spec, double margin) {
    const MeanDrift e = mean_drift(spec.law(Region::Interior));
    const MeanDrift f1 = mean_drift(spec.law(Region::Face1));
    const MeanDrift f2 = mean_drift(spec.law(Region::Face2));
    const double we1 = wedge(e, f1);
    const double we2 = wedge(e, f2);

    StabilityVerdict verdict;
    auto record = [&](std::string name, std::string rel, double value) {
        bool holds = false;
        if (rel == "<") holds = value < -margin;
        else if (rel == ">") holds = value > margin;
        else if (rel == ">=") holds = value >= 0.0;
        verdict.diagnostics.push_back(
            {std::move(name), std::move(rel), value, holds, std::abs(value) <= kProbabilityTolerance});
        return holds;
    };
    // "y < 0 if x = 0": vacuous unless x is zero within the tie band.
    auto record_conditional = [&](std::string name, double x, double y) {
        const bool x_zero = std::abs(x) <= kProbabilityTolerance;
        const bool holds = !x_zero || y < -margin;
        verdict.diagnostics.push_back({std::move(name), "conditional", y, holds, x_zero});
        return holds;
    };

    const bool a = record("A: mu1_E < 0", "<", e.mu1) & record("A: mu2_E < 0", "<", e.mu2) &
                   record("A: mu_E ^ mu_1 < 0", "<", we1) & record("A: mu_E ^ mu_2 > 0", ">", we2);
    const bool b = record("B: mu1_E >= 0", ">=", e.mu1) & record("B: mu2_E < 0", "<", e.mu2) &
                   record("B: mu_E ^ mu_1 < 0", "<", we1) &
                   record_conditional("B: mu2_2 < 0 if mu1_2 = 0", f2.mu1, f2.mu2);
    const bool c = record("C: mu1_E < 0", "<", e.mu1) & record("C: mu2_E >= 0", ">=", e.mu2) &
                   record("C: mu_E ^ mu_2 > 0", ">", we2) &
                   record_conditional("C: mu1_1 < 0 if mu2_1 = 0", f1.mu2, f1.mu1);

    if (a) verdict.which = StabilityCase::A;
    else if (b) verdict.which = StabilityCase::B;
    else if (c) verdict.which = StabilityCase::C;
    verdict.stable = verdict.which.has_value();
    return verdict;
}

NegativeDriftCheck check_assumption2(const RandomWalkSpec& spec) {
    const MeanDrift f1 = mean_drift(spec.law(Region::Face1));
    const MeanDrift f2 = mean_drift(spec.law(Region::Face2));
    NegativeDriftCheck out;
    out.mu1_face1 = f1.mu1;
    out.mu2_face2 = f2.mu2;
    out.face_wedge = wedge(f1, f2);
    out.holds = f1.mu1 < 0.0 && f2.mu2 < 0.0 && out.face_wedge > 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Jackson network

JacksonParams::JacksonParams(double lambda1, double lambda2, double sigma1, double sigma2,
                             double q1, double q2) {
    for (double r : {lambda1, lambda2, sigma1, sigma2})
        if (!(r > 0.0) || !std::isfinite(r))
            throw std::invalid_argument("Jackson rates must be positive and finite");
    for (double q : {q1, q2})
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("Jackson routing probabilities must lie in (0,1)");
    const double total = lambda1 + lambda2 + sigma1 + sigma2;
    lambda1_ = lambda1 / total;
    lambda2_ = lambda2 / total;
    sigma1_ = sigma1 / total;
    sigma2_ = sigma2 / total;
    q1_ = q1;
    q2_ = q2;
}

std::pair<double, double> JacksonParams::loads() const {
    const double denom = 1.0 - q1_ * q2_;
    return {(lambda1_ + lambda2_ * q2_) / (sigma1_ * denom),
            (lambda2_ + lambda1_ * q1_) / (sigma2_ * denom)};
}

RandomWalkSpec jackson_spec(const JacksonParams& p) {
    const double s = p.sigma1() + p.sigma2();
    // Arrivals are identical in every region; an idle server joins the other node.
    TransitionLaw origin(Region::Origin,
                         {{{0, 0}, s}, {{1, 0}, p.lambda1()}, {{0, 1}, p.lambda2()}});
    TransitionLaw face1(Region::Face1, {{{1, 0}, p.lambda1()},
                                        {{0, 1}, p.lambda2()},
                                        {{-1, 1}, s * p.q1()},
                                        {{-1, 0}, s * (1.0 - p.q1())}});
    TransitionLaw face2(Region::Face2, {{{1, 0}, p.lambda1()},
                                        {{0, 1}, p.lambda2()},
                                        {{1, -1}, s * p.q2()},
                                        {{0, -1}, s * (1.0 - p.q2())}});
    TransitionLaw interior(Region::Interior, {{{1, 0}, p.lambda1()},
                                              {{0, 1}, p.lambda2()},
                                              {{-1, 1}, p.sigma1() * p.q1()},
                                              {{1, -1}, p.sigma2() * p.q2()},
                                              {{-1, 0}, p.sigma1() * (1.0 - p.q1())},
                                              {{0, -1}, p.sigma2() * (1.0 - p.q2())}});
    return RandomWalkSpec(origin, face1, face2, interior);
}

// ---------------------------------------------------------------------------

std::vector<std::pair<State, double>> step_distribution(const RandomWalkSpec& spec, State s) {
    std::vector<std::pair<State, double>> out;
    for (const auto& [m, p] : spec.law_at(s).support())
        out.push_back({State{s.n1 + m.dx, s.n2 + m.dy}, p});
    return out;
}

}  // namespace rrwqbd
