// rrwqbd: command-line front end.
//
// Exit codes:
//   0  success
//   1  model fails validation
//   2  parse or usage error
//   3  unstable model
//   4  negative-drift condition fails, or no feasible tilt
//   5  oracle window exceeds the memory guard
//   6  verification reported a FAIL

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "rrwqbd/bounds.hpp"
#include "rrwqbd/certificate.hpp"
#include "rrwqbd/model.hpp"
#include "rrwqbd/model_io.hpp"
#include "rrwqbd/oracle.hpp"
#include "rrwqbd/qbd.hpp"
#include "rrwqbd/report.hpp"

using namespace rrwqbd;
using report::json;

namespace {

enum ExitCode { kOk = 0, kInvalid = 1, kParse = 2, kUnstable = 3, kInfeasible = 4, kMemory = 5, kFail = 6 };

struct Exit : std::runtime_error {
    Exit(int code, const std::string& what, json partial = nullptr)
        : std::runtime_error(what), code(code), partial(std::move(partial)) {}
    int code;
    json partial;
};

struct Config {
    std::string model;
    int n = 10;
    std::vector<int> n_list;
    std::vector<double> theta;
    std::vector<double> theta_tilde;
    double kappa = 0.9;
    std::int64_t oracle_window = 300;
    double tail_tol = 1e-12;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "json";
    std::int64_t steps = 1000000;
    int batches = 20;
    std::vector<std::string> functionals;
    double debug_scale_c = 1.0;
    std::int64_t marginal_window = 50;
    bool timings = false;
};

class Clock {
public:
    explicit Clock(bool on) : on_(on) {}
    void mark(const std::string& name) {
        if (!on_) return;
        const auto now = std::chrono::steady_clock::now();
        t_[name] = std::chrono::duration<double>(now - last_).count();
        last_ = now;
    }
    void attach(json& j) const {
        if (on_) j["timings_seconds"] = t_;
    }

private:
    bool on_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
    json t_ = json::object();
};

int thread_count() {
    if (const char* env = std::getenv("RRW_QBD_THREADS")) {
        const int t = std::atoi(env);
        if (t >= 1) return t;
    }
    return 1;
}

/// Runs f(0..count-1) on up to RRW_QBD_THREADS threads; results are written
/// by index so the output order never depends on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& f) {
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += threads) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void emit(const Config& cfg, const std::string& text) {
    if (cfg.out.empty() || cfg.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw Exit(kParse, "cannot write " + cfg.out);
    f << text;
}

json header(const Config& cfg, const std::string& command) {
    return {{"tool", "rrwqbd"}, {"version", report::kToolVersion}, {"command", command}, {"model", cfg.model}};
}

void require_json(const Config& cfg, const std::string& command) {
    if (cfg.format != "json") throw Exit(kParse, command + " only supports --format json");
}

ModelFile load(const Config& cfg) {
    try {
        return load_model(cfg.model);
    } catch (const ModelParseError& e) {
        throw Exit(kParse, cfg.model + ": " + e.what());
    } catch (const std::exception& e) {
        throw Exit(kParse, e.what());
    }
}

std::vector<int> n_values(const Config& cfg) {
    std::vector<int> ns = cfg.n_list.empty() ? std::vector<int>{cfg.n} : cfg.n_list;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    for (int n : ns)
        if (n < 1) throw Exit(kParse, "n must be at least 1");
    return ns;
}

struct Pipeline {
    explicit Pipeline(ModelFile m) : model(std::move(m)) {}

    ModelFile model;
    json verdicts = json::object();
    DriftCertificate cert;
    json certificate_json;
};

void gate_valid(const Config& cfg, Pipeline& p) {
    const ValidationReport v = validate_spec(p.model.spec);
    p.verdicts["validation"] = report::to_json(v);
    if (!v.ok()) {
        std::ostringstream os;
        os << "model is invalid:";
        for (const auto& x : v.violations) os << "\n  " << x.message;
        throw Exit(kInvalid, os.str(), p.verdicts);
    }
    (void)cfg;
}

void gate_stable(Pipeline& p) {
    const StabilityVerdict s = check_stability(p.model.spec);
    p.verdicts["stability"] = report::to_json(s);
    if (p.model.jackson) p.verdicts["jackson"] = report::to_json(*p.model.jackson);
    if (!s.stable) {
        std::ostringstream os;
        os << "model is unstable: no case of the stability condition holds";
        if (p.model.jackson) {
            const auto [r1, r2] = p.model.jackson->loads();
            os << " (rho1 = " << report::num(r1) << ", rho2 = " << report::num(r2) << ")";
        }
        throw Exit(kUnstable, os.str(), p.verdicts);
    }
}

void gate_negative_drift(Pipeline& p) {
    const NegativeDriftCheck a = check_assumption2(p.model.spec);
    p.verdicts["negative_drift"] = report::to_json(a);
    if (!a.holds) throw Exit(kInfeasible, "negative-drift condition fails on the faces", p.verdicts);
}

std::string gamma_text(const RandomWalkSpec& spec, const Vec2& t) {
    const RegionGammas g = region_gammas(spec, t);
    std::ostringstream os;
    os << "gamma_face1 = " << report::num(g.face1) << ", gamma_face2 = " << report::num(g.face2)
       << ", gamma_interior = " << report::num(g.interior);
    return os.str();
}

void build_certificate(const Config& cfg, Pipeline& p) {
    const RandomWalkSpec& spec = p.model.spec;
    json meta = json::object();
    std::optional<Tilt> theta;
    try {
        if (!cfg.theta.empty()) {
            const Vec2 t{cfg.theta[0], cfg.theta[1]};
            if (!(t[0] > 0.0 && t[1] > 0.0) || tilt_margin(spec, t) <= 0.0)
                throw Exit(kInfeasible, "theta override is infeasible: " + gamma_text(spec, t), p.verdicts);
            theta.emplace(t[0], t[1]);
            meta["theta_source"] = "override";
        } else {
            const ThetaSearch s = find_theta(spec);
            theta = s.theta;
            meta["theta_source"] = "search";
            meta["theta_search"] = report::to_json(s);
        }
        Tilt theta_tilde = *theta;
        if (!cfg.theta_tilde.empty()) {
            theta_tilde = resolve_theta_tilde(spec, *theta, {cfg.theta_tilde[0], cfg.theta_tilde[1]});
            meta["theta_tilde_source"] = "override";
            meta["theta_tilde_shrunk"] =
                !(theta_tilde.theta1() == cfg.theta_tilde[0] && theta_tilde.theta2() == cfg.theta_tilde[1]);
        } else {
            ThetaTildeOptions o;
            o.kappa = cfg.kappa;
            const ThetaTildeSearch s = find_theta_tilde(spec, *theta, o);
            theta_tilde = s.theta_tilde;
            meta["theta_tilde_source"] = "ray";
            meta["kappa"] = cfg.kappa;
            meta["theta_tilde_search"] = report::to_json(s);
        }
        p.cert = drift_certificate(spec, *theta, theta_tilde);
    } catch (const CertificateError& e) {
        throw Exit(kInfeasible, e.what(), p.verdicts);
    } catch (const std::invalid_argument& e) {
        throw Exit(kParse, e.what());
    }
    if (cfg.debug_scale_c != 1.0) {
        p.cert = with_scaled_c(p.cert, cfg.debug_scale_c);
        meta["debug_scale_c"] = cfg.debug_scale_c;
    }
    p.certificate_json = report::to_json(p.cert);
    p.certificate_json["search"] = meta;
}

Pipeline full_pipeline(const Config& cfg) {
    Pipeline p(load(cfg));
    gate_valid(cfg, p);
    gate_stable(p);
    gate_negative_drift(p);
    build_certificate(cfg, p);
    return p;
}

std::vector<FunctionalSpec> functionals(const Config& cfg, const std::vector<FunctionalSpec>& fallback) {
    if (cfg.functionals.empty()) return fallback;
    std::vector<FunctionalSpec> out;
    try {
        for (const auto& s : cfg.functionals) out.push_back(parse_functional(s));
    } catch (const std::invalid_argument& e) {
        throw Exit(kParse, e.what());
    }
    return out;
}

std::vector<FunctionalSpec> default_catalog() {
    return {ones(), scaled_lyapunov(1.0), window_indicator({0, 3, 0, 3}),
            truncated_coordinate(1, 20, 1.0 / 21.0), truncated_coordinate(2, 20, 1.0 / 21.0)};
}

TailOptions tail_options(const Config& cfg) {
    TailOptions t;
    t.rel_tol = cfg.tail_tol;
    return t;
}

std::vector<QbdSolution> solve_all(const RandomWalkSpec& spec, const std::vector<int>& ns) {
    std::vector<QbdSolution> sols(ns.size());
    parallel_for(ns.size(), [&](std::size_t i) { sols[i] = solve_qbd(spec, ns[i]); });
    return sols;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Config& cfg) {
    require_json(cfg, "validate");
    const ModelFile m = load(cfg);
    const ValidationReport v = validate_spec(m.spec);
    json j = header(cfg, "validate");
    j["kind"] = m.kind;
    j["validation"] = report::to_json(v);
    emit(cfg, report::dump(j));
    if (!v.ok()) {
        for (const auto& x : v.violations) std::cerr << "violation: " << x.message << "\n";
        return kInvalid;
    }
    return kOk;
}

int cmd_drifts(const Config& cfg) {
    require_json(cfg, "drifts");
    Pipeline p(load(cfg));
    gate_valid(cfg, p);
    json j = header(cfg, "drifts");
    j["drifts"] = report::drifts_json(p.model.spec);
    emit(cfg, report::dump(j));
    return kOk;
}

int cmd_stability(const Config& cfg) {
    require_json(cfg, "stability");
    Pipeline p(load(cfg));
    gate_valid(cfg, p);
    json j = header(cfg, "stability");
    const StabilityVerdict s = check_stability(p.model.spec);
    j["stability"] = report::to_json(s);
    j["negative_drift"] = report::to_json(check_assumption2(p.model.spec));
    if (p.model.jackson) j["jackson"] = report::to_json(*p.model.jackson);
    emit(cfg, report::dump(j));
    if (!s.stable) {
        std::cerr << "model is unstable";
        if (p.model.jackson) {
            const auto [r1, r2] = p.model.jackson->loads();
            std::cerr << " (rho1 = " << report::num(r1) << ", rho2 = " << report::num(r2) << ")";
        }
        std::cerr << "\n";
        return kUnstable;
    }
    return kOk;
}

int cmd_theta(const Config& cfg) {
    require_json(cfg, "theta");
    Clock clock(cfg.timings);
    Pipeline p = full_pipeline(cfg);
    clock.mark("certificate");
    json j = header(cfg, "theta");
    j["verdicts"] = p.verdicts;
    j["certificate"] = p.certificate_json;
    clock.attach(j);
    emit(cfg, report::dump(j));
    return kOk;
}

int cmd_solve(const Config& cfg) {
    Pipeline p(load(cfg));
    gate_valid(cfg, p);
    gate_stable(p);
    const int n = n_values(cfg).front();
    Clock clock(cfg.timings);
    QbdSolution sol;
    try {
        sol = solve_qbd(p.model.spec, n);
    } catch (const QbdError& e) {
        throw Exit(kUnstable, e.what(), p.verdicts);
    }
    clock.mark("solve");
    if (cfg.format == "csv") {
        std::ostringstream os;
        os << "coordinate,value,probability\n";
        const auto levels = level_vectors(sol, cfg.marginal_window);
        for (std::int64_t k = 0; k <= cfg.marginal_window; ++k)
            os << "1," << k << ',' << report::num(levels[k].sum()) << '\n';
        for (int i = 0; i <= sol.n; ++i) {
            Eigen::VectorXd w = Eigen::VectorXd::Zero(sol.n + 1);
            w[i] = 1.0;
            os << "2," << i << ',' << report::num(closed_form_weighted_mass(sol, 0.0, w)) << '\n';
        }
        emit(cfg, os.str());
        return kOk;
    }
    json j = header(cfg, "solve");
    j["solution"] = report::solution_json(sol, true);
    clock.attach(j);
    emit(cfg, report::dump(j));
    return kOk;
}

int cmd_bound(const Config& cfg) {
    Clock clock(cfg.timings);
    Pipeline p = full_pipeline(cfg);
    clock.mark("certificate");
    const std::vector<int> ns = n_values(cfg);
    const std::vector<QbdSolution> sols = solve_all(p.model.spec, ns);
    clock.mark("solve");
    const TailOptions topts = tail_options(cfg);
    const std::vector<FunctionalSpec> fs = functionals(cfg, {});

    std::vector<ErrorBoundReport> rows(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) rows[i] = error_bound_report(sols[i], p.cert, topts);
    clock.mark("bounds");

    if (cfg.format == "csv") {
        std::ostringstream os;
        os << "n,E,E_tilde,tail_terms,weighted_remainder,unweighted_remainder\n";
        for (const auto& r : rows)
            os << r.n << ',' << report::num(r.E) << ',' << report::num(r.E_tilde) << ','
               << r.tail.weighted.terms_used << ',' << report::num(r.tail.weighted.remainder_bound) << ','
               << report::num(r.tail.unweighted.remainder_bound) << '\n';
        emit(cfg, os.str());
        return kOk;
    }
    json j = header(cfg, "bound");
    j["verdicts"] = p.verdicts;
    j["certificate"] = p.certificate_json;
    j["tail_tolerance"] = cfg.tail_tol;
    json jr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        json r = report::to_json(rows[i]);
        r["solution"] = report::solution_json(sols[i], false);
        if (!fs.empty()) {
            json cf = json::array();
            for (const auto& f : fs) {
                try {
                    cf.push_back(report::to_json(certify_functional(sols[i], p.cert, f, rows[i].E, topts)));
                } catch (const std::invalid_argument& e) {
                    const FunctionalValidation v = validate_functional(f, p.cert);
                    json bad = {{"functional", f.description()}, {"valid", false}, {"error", e.what()}};
                    if (v.witness) bad["witness"] = json::array({v.witness->n1, v.witness->n2});
                    cf.push_back(bad);
                }
            }
            r["functionals"] = cf;
        }
        jr.push_back(r);
    }
    j["rows"] = jr;
    clock.attach(j);
    emit(cfg, report::dump(j));
    return kOk;
}

struct Assertion {
    std::string name;
    std::string subject;
    double value;
    double limit;
    bool pass;
};

json to_json(const Assertion& a) {
    return {{"assertion", a.name},
            {"subject", a.subject},
            {"value", std::isfinite(a.value) ? json(a.value) : json(nullptr)},
            {"limit", std::isfinite(a.limit) ? json(a.limit) : json(nullptr)},
            {"result", a.pass ? "PASS" : "FAIL"}};
}

int cmd_verify(const Config& cfg) {
    Clock clock(cfg.timings);
    Pipeline p = full_pipeline(cfg);
    clock.mark("certificate");
    std::vector<int> ns = cfg.n_list.empty() ? std::vector<int>{5, 10, 20, 40} : n_values(cfg);
    std::vector<FunctionalSpec> fs = functionals(cfg, default_catalog());
    const TailOptions topts = tail_options(cfg);
    const RandomWalkSpec& spec = p.model.spec;
    const DriftCertificate& cert = p.cert;
    std::vector<Assertion> checks;

    for (auto variant : {LyapunovVariant::Base, LyapunovVariant::Tilde}) {
        const DriftCheck d = check_drift_condition(spec, cert, variant);
        checks.push_back({"drift_condition", variant == LyapunovVariant::Base ? "v" : "v_tilde", d.worst_excess,
                          1e-10, d.passed});
    }
    clock.mark("drift");

    ReferenceDistribution ref;
    try {
        ref = dense_stationary(spec, cfg.oracle_window, cfg.oracle_window);
    } catch (const OracleMemoryError& e) {
        throw Exit(kMemory, e.what());
    }
    const double eps = reference_error_budget(ref);
    checks.push_back({"reference_truncation_gap", "pi*", ref.truncation_gap, 1e-6, ref.truncation_gap < 1e-6});
    clock.mark("oracle");

    const double piv = expectation(ref, [&](State s) { return lyapunov_v(cert, s).value; });
    checks.push_back({"stationary_lyapunov", "pi* v <= b/c", piv, cert.b / cert.c + eps,
                      piv <= cert.b / cert.c + eps});

    for (const auto& f : fs)
        if (!validate_functional(f, cert).valid)
            throw Exit(kParse, "functional " + f.description() + " is not below c v");

    const std::vector<QbdSolution> sols = solve_all(spec, ns);
    clock.mark("solve");
    json rows = json::array();
    std::ostringstream csv;
    csv << "n,functional,E,E_tilde,observed,observed_signed,result\n";
    for (std::size_t idx = 0; idx < ns.size(); ++idx) {
        const QbdSolution& sol = sols[idx];
        const std::string sn = "n=" + std::to_string(sol.n);
        const ErrorBoundReport r = error_bound_report(sol, cert, topts);
        checks.push_back({"bound_ordering", sn, r.E, r.E_tilde, r.E <= r.E_tilde});

        Eigen::VectorXd w(sol.n + 1);
        for (int i = 0; i <= sol.n; ++i) w[i] = std::exp(cert.theta_tilde.theta2() * i) / cert.c_tilde;
        const double pv = closed_form_weighted_mass(sol, cert.theta_tilde.theta1(), w);
        const double lim = cert.b_tilde / cert.c_tilde;
        checks.push_back({"qbd_lyapunov", sn, pv, lim, std::isfinite(pv) && pv <= lim * (1.0 + 1e-12)});

        double worst = -std::numeric_limits<double>::infinity();
        const auto levels = level_vectors(sol, 50);
        for (int k = 0; k <= 50; ++k) {
            const double bound = cert.b_tilde * std::exp(-k * cert.theta_tilde.theta1() -
                                                         sol.n * cert.theta_tilde.theta2());
            worst = std::max(worst, levels[k][sol.n] / bound);
        }
        checks.push_back({"top_layer_tail", sn, worst, 1.0, worst <= 1.0});

        json fr = json::array();
        if (sol.n <= cfg.oracle_window) {
            for (const auto& f : fs) {
                const ObservedError o = reference_vs_qbd(sol, cert, ref, f);
                const bool ok = o.weighted_abs <= r.E + eps;
                checks.push_back({"bound_validity", sn + " " + f.description(), o.weighted_abs, r.E + eps, ok});
                checks.push_back({"triangle", sn + " " + f.description(), o.signed_abs, o.weighted_abs + eps,
                                  o.signed_abs <= o.weighted_abs + eps});
                json e = report::to_json(o);
                e["functional"] = f.description();
                e["result"] = ok ? "PASS" : "FAIL";
                fr.push_back(e);
                csv << sol.n << ",\"" << f.description() << "\"," << report::num(r.E) << ','
                    << report::num(r.E_tilde) << ',' << report::num(o.weighted_abs) << ','
                    << report::num(o.signed_abs) << ',' << (ok ? "PASS" : "FAIL") << '\n';
            }
        }
        json row = report::to_json(r);
        row["observed"] = fr;
        rows.push_back(row);
    }
    clock.mark("compare");

    bool all = true;
    json jc = json::array();
    for (const auto& c : checks) {
        all = all && c.pass;
        jc.push_back(to_json(c));
    }
    if (cfg.format == "csv") {
        emit(cfg, csv.str());
    } else {
        json j = header(cfg, "verify");
        j["verdicts"] = p.verdicts;
        j["certificate"] = p.certificate_json;
        j["reference"] = report::reference_json(ref);
        j["reference_error_budget"] = eps;
        j["rows"] = rows;
        j["assertions"] = jc;
        j["result"] = all ? "PASS" : "FAIL";
        clock.attach(j);
        emit(cfg, report::dump(j));
    }
    for (const auto& c : checks)
        if (!c.pass) std::cerr << "FAIL " << c.name << " (" << c.subject << "): " << report::num(c.value)
                               << " vs " << report::num(c.limit) << "\n";
    return all ? kOk : kFail;
}

int cmd_simulate(const Config& cfg) {
    Clock clock(cfg.timings);
    Pipeline p = full_pipeline(cfg);
    const std::vector<FunctionalSpec> fs = functionals(cfg, default_catalog());
    std::vector<SimulationResult> rs;
    try {
        rs = simulate_many(p.model.spec, p.cert, cfg.steps, cfg.seed, fs, cfg.batches);
    } catch (const std::invalid_argument& e) {
        throw Exit(kParse, e.what());
    }
    clock.mark("simulate");
    if (cfg.format == "csv") {
        std::ostringstream os;
        os << "functional,estimate,half_width,steps,seed,batches,rng\n";
        for (const auto& r : rs)
            os << '"' << r.functional << "\"," << report::num(r.estimate) << ',' << report::num(r.half_width) << ','
               << r.steps << ',' << r.seed << ',' << r.batches << ',' << r.rng << '\n';
        emit(cfg, os.str());
        return kOk;
    }
    json j = header(cfg, "simulate");
    j["certificate"] = p.certificate_json;
    json a = json::array();
    for (const auto& r : rs) a.push_back(report::to_json(r));
    j["results"] = a;
    clock.attach(j);
    emit(cfg, report::dump(j));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Level-truncated QBD approximations of 2D reflecting random walks with certified error bounds"};
    app.require_subcommand(1);
    Config cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--model", cfg.model, "model file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", cfg.out, "output path (default stdout)");
        sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    };
    auto certificate_opts = [&](CLI::App* sub) {
        sub->add_option("--theta", cfg.theta, "tilt override: theta1 theta2")->expected(2)->delimiter(',');
        sub->add_option("--theta-tilde", cfg.theta_tilde, "second tilt override")->expected(2)->delimiter(',');
        sub->add_option("--kappa", cfg.kappa, "fraction of the feasible ray used for theta_tilde")
            ->check(CLI::Range(0.0, 1.0));
        sub->add_option("--debug-scale-c", cfg.debug_scale_c, "multiply c by this factor (negative control)");
        sub->add_flag("--timings", cfg.timings, "include wall-clock timings in the report");
    };
    auto n_opts = [&](CLI::App* sub) {
        sub->add_option("--n", cfg.n, "truncation level")->check(CLI::PositiveNumber);
        sub->add_option("--n-list", cfg.n_list, "truncation levels, comma separated")->delimiter(',');
        sub->add_option("--tail-tol", cfg.tail_tol, "relative tolerance of certified tail sums")
            ->check(CLI::Range(0.0, 1.0));
    };

    auto* validate = app.add_subcommand("validate", "check supports, normalization and irreducibility");
    common(validate);
    auto* drifts = app.add_subcommand("drifts", "mean drifts and wedge products");
    common(drifts);
    auto* stability = app.add_subcommand("stability", "stability and negative-drift verdicts");
    common(stability);
    auto* theta = app.add_subcommand("theta", "tilt search and drift certificate");
    common(theta);
    certificate_opts(theta);
    auto* solve = app.add_subcommand("solve", "solve the level-n QBD");
    common(solve);
    solve->add_option("--n", cfg.n, "truncation level")->check(CLI::PositiveNumber);
    solve->add_option("--window", cfg.marginal_window, "levels in the CSV marginal")->check(CLI::NonNegativeNumber);
    solve->add_flag("--timings", cfg.timings, "include wall-clock timings in the report");
    auto* bound = app.add_subcommand("bound", "error bounds E(n) and E~(n)");
    bound->alias("analyze");
    common(bound);
    certificate_opts(bound);
    n_opts(bound);
    bound->add_option("--functional", cfg.functionals, "functionals to certify (e.g. ones, coord:1,20@0.05)")
        ->delimiter(';');
    auto* verify = app.add_subcommand("verify", "compare bounds with the brute-force oracle");
    common(verify);
    certificate_opts(verify);
    n_opts(verify);
    verify->add_option("--oracle-window", cfg.oracle_window, "oracle window size per axis")
        ->check(CLI::Range(2, 100000));
    verify->add_option("--functional", cfg.functionals, "functionals to check")->delimiter(';');
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate with batch-means interval");
    common(simulate);
    certificate_opts(simulate);
    simulate->add_option("--steps", cfg.steps, "number of steps")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", cfg.seed, "generator seed");
    simulate->add_option("--batches", cfg.batches, "number of batches")->check(CLI::Range(2, 1000000));
    simulate->add_option("--functional", cfg.functionals, "functionals to estimate")->delimiter(';');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParse;
    }

    try {
        if (*validate) return cmd_validate(cfg);
        if (*drifts) return cmd_drifts(cfg);
        if (*stability) return cmd_stability(cfg);
        if (*theta) return cmd_theta(cfg);
        if (*solve) return cmd_solve(cfg);
        if (*bound) return cmd_bound(cfg);
        if (*verify) return cmd_verify(cfg);
        if (*simulate) return cmd_simulate(cfg);
    } catch (const Exit& e) {
        if (!e.partial.is_null()) {
            json j = header(cfg, app.get_subcommands().front()->get_name());
            j["verdicts"] = e.partial;
            j["error"] = e.what();
            try {
                emit(cfg, report::dump(j));
            } catch (...) {
            }
        }
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    }
    return kParse;
}
