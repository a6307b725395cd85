#pragma once

// Test instances and independent reference computations. Nothing here calls
// into the library's numerical code; formulas are written out from the model
// definitions so they can serve as oracles.

#include <cmath>
#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rrwqbd/model.hpp"

namespace testing_support {

struct Jackson {
    double l1, l2, s1, s2, q1, q2;
    std::string name;
};

inline const std::vector<Jackson>& instances() {
    static const std::vector<Jackson> all = {
        {0.1, 0.1, 0.4, 0.4, 0.5, 0.5, "symmetric"},
        {0.15, 0.05, 0.4, 0.4, 0.3, 0.6, "asym_a"},
        {0.1, 0.12, 0.3, 0.48, 0.5, 0.2, "asym_b"},
        {0.08, 0.1, 0.5, 0.32, 0.7, 0.4, "asym_c"},
    };
    return all;
}

inline rrwqbd::JacksonParams params(const Jackson& j) {
    return rrwqbd::JacksonParams(j.l1, j.l2, j.s1, j.s2, j.q1, j.q2);
}

using Law = std::map<std::pair<int, int>, double>;

/// Cooperative-server laws, region by region, from the network description:
/// arrivals everywhere; in the interior each server works on its own queue;
/// on a face the idle server joins the busy one; at the origin both idle.
inline Law jackson_law(rrwqbd::Region r, double l1, double l2, double s1, double s2, double q1,
                       double q2) {
    const double sum = l1 + l2 + s1 + s2;
    l1 /= sum, l2 /= sum, s1 /= sum, s2 /= sum;
    Law law;
    law[{1, 0}] += l1;
    law[{0, 1}] += l2;
    const double both = s1 + s2;
    switch (r) {
        case rrwqbd::Region::Origin: law[{0, 0}] += both; break;
        case rrwqbd::Region::Face1:  // queue 2 empty: both servers at node 1
            law[{-1, 1}] += both * q1;
            law[{-1, 0}] += both * (1 - q1);
            break;
        case rrwqbd::Region::Face2:
            law[{1, -1}] += both * q2;
            law[{0, -1}] += both * (1 - q2);
            break;
        case rrwqbd::Region::Interior:
            law[{-1, 1}] += s1 * q1;
            law[{-1, 0}] += s1 * (1 - q1);
            law[{1, -1}] += s2 * q2;
            law[{0, -1}] += s2 * (1 - q2);
            break;
    }
    return law;
}

/// Traffic equations a1 = l1 + a2 q2, a2 = l2 + a1 q1 solved by hand.
inline std::pair<double, double> loads(double l1, double l2, double s1, double s2, double q1, double q2) {
    const double det = 1.0 - q1 * q2;
    const double a1 = (l1 + l2 * q2) / det;
    const double a2 = (l2 + l1 * q1) / det;
    return {a1 / s1, a2 / s2};
}

inline double mgf(const Law& law, double t1, double t2) {
    double s = 0.0;
    for (const auto& [m, p] : law) s += p * std::exp(t1 * m.first + t2 * m.second);
    return s;
}

/// Random parameters: rates uniform in (0.01, 1), routing uniform in
/// (0.01, 0.99); normalization happens in the constructor.
struct JacksonDraw {
    double l1, l2, s1, s2, q1, q2;
};

inline JacksonDraw draw(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> rate(0.01, 1.0);
    std::uniform_real_distribution<double> route(0.01, 0.99);
    return {rate(rng), rate(rng), rate(rng), rate(rng), route(rng), route(rng)};
}

/// A random valid general spec: each region law is a random distribution on
/// its support with every support point given positive mass. A positive
/// `pull` tilts the weights by exp(-pull (dx + dy)) toward the origin.
inline rrwqbd::RandomWalkSpec random_spec(std::mt19937_64& rng, double pull = 0.0) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::array<rrwqbd::TransitionLaw, 4> laws;
    for (rrwqbd::Region r : rrwqbd::kAllRegions) {
        rrwqbd::TransitionLaw law(r);
        std::vector<std::pair<rrwqbd::Offset, double>> w;
        double total = 0.0;
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                if (rrwqbd::in_support(r, {dx, dy})) {
                    const double x = u(rng) * std::exp(-pull * (dx + dy));
                    w.push_back({{dx, dy}, x});
                    total += x;
                }
        for (auto& [m, x] : w) law.set(m, x / total);
        laws[rrwqbd::index_of(r)] = law;
    }
    return rrwqbd::RandomWalkSpec(laws[0], laws[1], laws[2], laws[3]);
}

}  // namespace testing_support
