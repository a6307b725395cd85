#include "rrwqbd/report.hpp"

#include <cmath>
#include <cstdio>

namespace rrwqbd::report {

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

json tilt(const Tilt& t) { return json::array({t.theta1(), t.theta2()}); }

json gammas(const RegionGammas& g) {
    return {{"origin", g.origin}, {"face1", g.face1}, {"face2", g.face2}, {"interior", g.interior}};
}

json state(State s) { return json::array({s.n1, s.n2}); }

}  // namespace

json to_json(const ValidationReport& r) {
    json v = json::array();
    for (const auto& x : r.violations) {
        json e = {{"kind", std::string(to_string(x.kind))}, {"message", x.message}};
        e["region"] = x.region ? json(std::string(to_string(*x.region))) : json(nullptr);
        v.push_back(e);
    }
    return {{"valid", r.ok()}, {"window", r.window}, {"violations", v}};
}

json to_json(const StabilityVerdict& s) {
    json d = json::array();
    for (const auto& q : s.diagnostics)
        d.push_back({{"inequality", q.name},
                     {"relation", q.relation},
                     {"value", number(q.value)},
                     {"holds", q.holds},
                     {"tie", q.tie}});
    return {{"stable", s.stable},
            {"case", s.which ? json(std::string(to_string(*s.which))) : json(nullptr)},
            {"diagnostics", d}};
}

json to_json(const NegativeDriftCheck& a) {
    return {{"holds", a.holds},
            {"mu1_face1", a.mu1_face1},
            {"mu2_face2", a.mu2_face2},
            {"face_wedge", a.face_wedge}};
}

json drifts_json(const RandomWalkSpec& spec) {
    json regions = json::object();
    for (Region r : kAllRegions) {
        const MeanDrift d = mean_drift(spec.law(r));
        regions[std::string(to_string(r))] = json::array({d.mu1, d.mu2});
    }
    const MeanDrift e = mean_drift(spec.law(Region::Interior));
    const MeanDrift f1 = mean_drift(spec.law(Region::Face1));
    const MeanDrift f2 = mean_drift(spec.law(Region::Face2));
    return {{"mean_drift", regions},
            {"wedge",
             {{"interior_face1", wedge(e, f1)}, {"interior_face2", wedge(e, f2)}, {"face1_face2", wedge(f1, f2)}}}};
}

json to_json(const JacksonParams& p) {
    const auto [r1, r2] = p.loads();
    return {{"lambda1", p.lambda1()}, {"lambda2", p.lambda2()}, {"sigma1", p.sigma1()},
            {"sigma2", p.sigma2()},   {"q1", p.q1()},           {"q2", p.q2()},
            {"rho1", r1},             {"rho2", r2}};
}

json to_json(const DriftCertificate& c) {
    return {{"theta", tilt(c.theta)},
            {"c", c.c},
            {"b", c.b},
            {"theta_tilde", tilt(c.theta_tilde)},
            {"c_tilde", c.c_tilde},
            {"b_tilde", c.b_tilde},
            {"gamma_theta", gammas(c.gammas)},
            {"gamma_theta_tilde", gammas(c.gammas_tilde)}};
}

json to_json(const ThetaSearch& s) {
    return {{"grid_points_per_axis", s.grid_points},
            {"grid_margin", s.grid_margin},
            {"margin", s.margin},
            {"polish_iterations", s.polish_iterations},
            {"polished", s.polished}};
}

json to_json(const ThetaTildeSearch& s) {
    return {{"ray_max", s.ray_max}, {"ray_used", s.ray_used}};
}

json to_json(const TailSum& t) {
    return {{"value", number(t.value)},
            {"partial", number(t.partial)},
            {"remainder_bound", number(t.remainder_bound)},
            {"terms_used", t.terms_used},
            {"method", std::string(to_string(t.method))},
            {"converged", t.converged}};
}

json solution_json(const QbdSolution& sol, bool include_vectors) {
    json j = {{"n", sol.n},
              {"spectral_radius_R", sol.rate.spectral_radius},
              {"R_residual", sol.rate.residual},
              {"R_method", sol.rate.method},
              {"R_iterations", sol.rate.iterations},
              {"normalization_residual", sol.normalization_residual},
              {"balance_residual", sol.balance_residual},
              {"balance_levels", sol.balance_levels}};
    if (include_vectors) {
        j["pi0"] = vec(sol.pi0);
        j["pi1"] = vec(sol.pi1);
    }
    return j;
}

json to_json(const ErrorBoundReport& r) {
    return {{"n", r.n},
            {"E", number(r.E)},
            {"E_tilde", number(r.E_tilde)},
            {"E_closed_form_check", number(r.E_closed_form)},
            {"top_layer_weighted", to_json(r.tail.weighted)},
            {"top_layer_unweighted", to_json(r.tail.unweighted)}};
}

json to_json(const CertifiedFunctional& f) {
    json j = {{"functional", f.functional.description()},
              {"valid", f.validation.valid},
              {"approx_value", to_json(f.approx)},
              {"relative_error_bound", number(f.relative_error_bound)},
              {"interval_lo", number(f.interval_lo)},
              {"interval_hi", f.interval_hi ? number(*f.interval_hi) : json(nullptr)},
              {"informative", f.informative}};
    if (!f.note.empty()) j["note"] = f.note;
    return j;
}

json reference_json(const ReferenceDistribution& r) {
    return {{"window", json::array({r.window.M1, r.window.M2})},
            {"residual", r.residual},
            {"truncation_gap", r.truncation_gap},
            {"gap_window", json::array({r.gap_window.M1, r.gap_window.M2})}};
}

json to_json(const ObservedError& e) {
    return {{"pi_star_g", e.pi_star_g},
            {"qbd_g", e.qbd_g},
            {"weighted_abs_error", e.weighted_abs},
            {"signed_error", e.signed_abs},
            {"beyond_window_bound", e.beyond_window}};
}

json to_json(const SimulationResult& s) {
    return {{"functional", s.functional}, {"estimate", s.estimate}, {"half_width", s.half_width},
            {"steps", s.steps},           {"seed", s.seed},         {"batches", s.batches},
            {"rng", s.rng}};
}

json to_json(const DeviationBoundReport& d) {
    return {{"label", d.label},
            {"window", json::array({d.window.M1, d.window.M2})},
            {"rows_checked", d.rows_checked},
            {"violations", d.violations},
            {"min_margin", number(d.min_margin)},
            {"worst_state", state(d.worst_state)},
            {"worst_lhs", d.worst_lhs},
            {"worst_rhs", d.worst_rhs},
            {"pi_g", d.pi_g},
            {"truncation_gap", d.truncation_gap}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace rrwqbd::report
