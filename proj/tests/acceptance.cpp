// One PASS/FAIL line per acceptance criterion.
// usage: emfg_acceptance <path to emfg_cli> <configs dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "emfg/cce_scan.hpp"
#include "emfg/equilibria.hpp"
#include "emfg/model.hpp"
#include "emfg/simulate.hpp"
#include "oracles.hpp"

using namespace emfg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

constexpr double kNoLimit = INFINITY;

void report(int id, double limit_s, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limit_s) {
        o.pass = false;
        o.detail += " [runtime limit " + std::to_string(static_cast<int>(limit_s)) + " s exceeded]";
    }
    if (!o.pass) ++failures;
    std::printf("CRITERION %d: %s  %s  (%.2f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Closed-form Pareto moment of the reflected law, (γ+1)/(γ+1−k)·a^k, derived
// here from the density c·a^{γ+1}x^{−γ−2} rather than taken from the library.
double pareto_moment(const ModelParams& p, double a, double k) {
    double g = 2.0 * p.delta / (p.sigma * p.sigma);
    return (g + 1.0) / (g + 1.0 - k) * std::pow(a, k);
}

// Reward of the reflected policy whose stationary mean is θ, with price θ^β.
double f_oracle(const ModelParams& p, double theta) {
    double mf = (2.0 * p.delta + p.sigma * p.sigma) / (2.0 * p.delta);
    double a = theta / mf;
    return std::pow(theta, p.beta) * pareto_moment(p, a, p.alpha) - p.q * p.delta * pareto_moment(p, a, 1.0);
}

// argmax of a ↦ C(a, 1) from the first-order condition of the closed form.
double k_oracle(const ModelParams& p) {
    double g = 2.0 * p.delta / (p.sigma * p.sigma);
    double mf = (2.0 * p.delta + p.sigma * p.sigma) / (2.0 * p.delta);
    return std::pow(p.alpha * (g + 1.0) / ((g + 1.0 - p.alpha) * p.q * p.delta * mf), 1.0 / (1.0 - p.alpha));
}

double golden_log_max(const ModelParams& p, double lo, double hi) {
    double t = oracle::golden_max([&](double s) { return f_oracle(p, std::exp(s)); }, std::log(lo), std::log(hi),
                                  1e-15);
    return std::exp(t);
}

Outcome criterion1() {
    auto p = oracle::fig1();
    auto rep = mfc_solve(p);
    double ref = golden_log_max(p, 1e-3, 1e8);
    double err = oracle::rel(*rep.theta, ref);
    return {rep.status == Status::Unique && err < 1e-6,
            "theta_hat=" + fmt("%.10g", *rep.theta) + " golden=" + fmt("%.10g", ref) + " rel=" + fmt("%.2e", err)};
}

Outcome criterion2() {
    oracle::ParamSampler ps(2024);
    double worst = 0.0;
    int poa_ok = 0;
    for (int i = 0; i < 100; ++i) {
        auto p = ps.subcritical();
        auto ne = nash_solve(p);
        auto mfc = mfc_solve(p);
        double mf = (2.0 * p.delta + p.sigma * p.sigma) / (2.0 * p.delta);
        double th = *ne.theta;
        double lhs = mf * k_oracle(p) * std::pow(th, p.beta / (1.0 - p.alpha));
        worst = std::max(worst, oracle::rel(lhs, th));
        if (f_oracle(p, th) < f_oracle(p, *mfc.theta)) ++poa_ok;
    }
    return {worst < 1e-10 && poa_ok == 100,
            "max consistency rel=" + fmt("%.2e", worst) + " strict price of anarchy in " + std::to_string(poa_ok) +
                "/100"};
}

Outcome criterion3() {
    ModelParams left{1.0, 1.0, 1.0, 0.3, 0.7};
    ModelParams right{0.1, 0.2, 2.0, 0.3, 0.7};
    auto l = mfc_solve(left);
    auto r = mfc_solve(right);
    // on the knife edge f is linear; null optimality means a nonpositive slope
    bool l_cond = f_oracle(left, 1.0) <= 0.0;
    bool r_cond = f_oracle(right, 1.0) <= 0.0;
    bool pass = l.status == Status::NullOptimal && r.status != Status::NullOptimal && l_cond && !r_cond;
    return {pass, std::string("left=") + std::string(to_string(l.status)) + " (slope " +
                      fmt("%.4g", f_oracle(left, 1.0)) + ") right=" + std::string(to_string(r.status)) + " (slope " +
                      fmt("%.4g", f_oracle(right, 1.0)) + ")"};
}

Outcome criterion4() {
    oracle::ParamSampler ps(4048);
    double worst = 0.0;
    int holds = 0;
    for (int i = 0; i < 100; ++i) {
        auto p = ps.subcritical();
        auto ne = nash_solve(p);
        auto chk = cce_check(p, MomentTriple::point_mass(p, *ne.theta), CceClass::Singular);
        worst = std::max(worst, std::abs(chk.slack) / chk.rhs);
        if (chk.holds) ++holds;
    }
    return {worst <= 1e-9 && holds == 100,
            "max |slack|/RHS=" + fmt("%.2e", worst) + " holds in " + std::to_string(holds) + "/100"};
}

Outcome criterion5() {
    auto p = oracle::fig1();
    GridSpec g;  // 200×200 log grid on [1e-2, 1e2]²
    int s = 0, r = 0;
    for (const auto& c : scan_region(p, g, CceClass::Singular)) s += c.outperforms;
    for (const auto& c : scan_region(p, g, CceClass::Regular)) r += c.outperforms;
    return {s > 0 && r > 0, "outperforming cells singular=" + std::to_string(s) + " regular=" + std::to_string(r)};
}

Outcome criterion6() {
    auto p = oracle::fig1();
    double mfc = *mfc_solve(p).reward;
    double ne = *nash_solve(p).reward;
    auto s = best_cce(p, CceClass::Singular);
    auto r = best_cce(p, CceClass::Regular);
    if (s.status != SearchStatus::Found || r.status != SearchStatus::Found) return {false, "best CCE not found"};
    double is = (s.reward - ne) / mfc;
    double ir = (r.reward - ne) / mfc;
    bool pass = std::abs(is - 0.17) <= 0.03 && std::abs(ir - 0.12) <= 0.03;
    return {pass, "singular=" + fmt("%.4f", is) + " regular=" + fmt("%.4f", ir) + " (targets 0.17, 0.12 ±0.03)"};
}

Outcome criterion7() {
    ModelParams tmpl{1.0, 1.0, 0.5, 0.3, 0.4};
    double hi = std::sqrt(2.0) * (1.0 - 1e-3);
    auto pts = sweep(tmpl, SweepVariable::Sigma, 0.02, hi, 70);
    int singular_ok = 0, regular_nf = 0;
    // regular NotFound on a nonempty prefix of σ values and Found after it
    std::size_t prefix = 0;
    while (prefix < pts.size() && pts[prefix].regular_status == SearchStatus::NotFound) ++prefix;
    bool regular_pattern = prefix > 0;
    for (std::size_t i = prefix; i < pts.size(); ++i)
        if (pts[i].regular_status == SearchStatus::NotFound) regular_pattern = false;
    for (const auto& s : pts) {
        regular_nf += s.regular_status == SearchStatus::NotFound;
        if (s.singular_status == SearchStatus::Found && s.nash_reward && *s.best_cce_singular >= *s.nash_reward)
            ++singular_ok;
    }
    bool singular_pattern = singular_ok == static_cast<int>(pts.size());
    return {regular_pattern && singular_pattern,
            "singular found and >= Nash at " + std::to_string(singular_ok) + "/" + std::to_string(pts.size()) +
                " sigmas; regular NotFound at " + std::to_string(regular_nf) + " sigmas (prefix " +
                std::to_string(prefix) + "); smallest sigma regular best=" +
                (pts[0].best_cce_regular ? fmt("%.6g", *pts[0].best_cce_regular) : std::string("none"))};
}

Outcome criterion8() {
    double ab = alpha_bar_solve(0.1, 0.2, 2.0);
    double res = std::abs(knife_edge_residual(0.1, 0.2, 2.0, ab));
    auto us = u_star({0.1, 0.2, 2.0, ab, 1.0 - ab}, CceClass::Singular);
    // the inequality itself at the cap, independent of the search
    bool at_cap = ustar_holds({0.1, 0.2, 2.0, ab, 1.0 - ab}, CceClass::Singular, kUCap);
    return {res < 1e-12 && us.kind == UStarKind::Infinite && at_cap,
            "alpha_bar=" + fmt("%.15g", ab) + " residual=" + fmt("%.2e", res) + " u*=" +
                std::string(to_string(us.kind))};
}

Outcome criterion9() {
    auto p = oracle::fig1();
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 2000.0;
    cfg.n_paths = 64;
    cfg.seed = 20240501;
    double a = 1.0;
    auto st = simulate_reflected(p, a, cfg);
    double mean_ref = (2.0 * p.delta + p.sigma * p.sigma) / (2.0 * p.delta) * a;
    double reward_ref =
        oracle::pareto_moment(p.delta, p.sigma, a, p.alpha) - p.q * p.delta * oracle::pareto_moment(p.delta, p.sigma, a, 1.0);
    double em = oracle::rel(st.empirical_mean, mean_ref);
    double er = oracle::rel(st.time_avg_reward, reward_ref);
    auto rg = simulate_regular(p, 1.0, cfg);
    double ig = oracle::inverse_gamma_moment(p.delta, p.sigma, 1.0, p.alpha);
    double eg = oracle::rel(rg.time_avg_moments.at(p.alpha), ig);
    return {em < 0.01 && er < 0.02 && eg < 0.02,
            "mean rel=" + fmt("%.4f", em) + " reward rel=" + fmt("%.4f", er) + " regular E[x^alpha] rel=" +
                fmt("%.4f", eg)};
}

Outcome criterion10() {
    auto p = oracle::fig1();
    // Feasible law whose recommended barriers mostly exceed the deviation
    // barrier, so the finite-N price discount predicts a gap decreasing in N;
    // among such laws it maximises the predicted signal over the CI width.
    GammaLaw law{50.0, 0.2};
    auto chk = cce_check(p, gamma_moments_triple(p, law), CceClass::Singular);
    if (!chk.holds) return {false, "chosen law is not a singular CCE"};
    SimConfig cfg;
    cfg.n_replications = 200;
    cfg.seed = 20240501;
    auto est = estimate_epsilon_n(p, {EquilibriumSpec::Kind::CceSingular, law}, {2, 4, 8, 16, 32}, cfg);
    double slope = fitted_log_slope(est);
    const auto& a = est.front();
    const auto& b = est.back();
    bool beyond = b.gap + b.ci_halfwidth < a.gap - a.ci_halfwidth;
    std::string gaps;
    for (const auto& e : est) gaps += " " + std::to_string(e.n_players) + ":" + fmt("%.3e", e.gap) + "±" + fmt("%.1e", e.ci_halfwidth);
    return {slope < 0.0 && beyond, "slope=" + fmt("%.3e", slope) + " gaps" + gaps +
                                       (beyond ? "" : " (gap(32) not below gap(2) beyond combined CIs)")};
}

std::string slurp(const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion11(const std::string& cli, const fs::path& configs) {
    fs::path dir = fs::temp_directory_path() / ("emfg_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string fig1 = "--delta 0.1 --sigma 0.2 --q 2 --alpha 0.3 --beta 0.5";
    auto cfg = [&](const char* name) { return "--config '" + (configs / name).string() + "'"; };
    std::vector<std::pair<std::string, std::string>> cmds{
        {"mfc", "mfc " + fig1},
        {"nash", "nash " + fig1},
        {"cce-check", "cce-check " + fig1 + " --law gamma --u 0.35 --v 150"},
        {"cce-scan", "cce-scan " + cfg("fig1.json")},
        {"best-cce", "best-cce " + cfg("fig2.json")},
        {"sweep", "sweep " + cfg("fig3.json")},
        {"ustar", "ustar " + cfg("fig5.json")},
        {"simulate", "simulate " + cfg("simulate_fig1.json") + " --horizon 50 --burn-in 10 --paths 8"},
        {"epsilon", "epsilon " + cfg("epsilon_fig1.json") + " --horizon 20 --burn-in 5 --replications 8"},
    };
    int same = 0;
    std::string bad;
    for (const auto& [name, args] : cmds) {
        std::vector<std::string> runs;
        for (int k = 0; k < 2; ++k) {
            fs::path out = dir / (name + std::to_string(k) + ".out");
            std::string cmd = "'" + cli + "' " + args + " --seed 99 --out '" + out.string() + "' > /dev/null 2>&1";
            int rc = std::system(cmd.c_str());
            std::string body = rc == 0 ? slurp(out) : "exit " + std::to_string(rc);
            fs::path summary = out.string() + ".summary.json";
            if (fs::exists(summary)) body += slurp(summary);
            runs.push_back(body);
        }
        if (runs[0] == runs[1] && runs[0].rfind("exit ", 0) != 0 && !runs[0].empty())
            ++same;
        else
            bad += " " + name;
    }
    fs::remove_all(dir);
    return {same == static_cast<int>(cmds.size()),
            std::to_string(same) + "/" + std::to_string(cmds.size()) + " commands byte-identical" +
                (bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <emfg_cli> <configs dir>\n", argv[0]);
        return 2;
    }
    std::string cli = argv[1];
    fs::path configs = argv[2];
    report(1, 1.0, criterion1);
    report(2, 5.0, criterion2);
    report(3, kNoLimit, criterion3);
    report(4, kNoLimit, criterion4);
    report(5, 30.0, criterion5);
    report(6, 60.0, criterion6);
    report(7, kNoLimit, criterion7);
    report(8, 10.0, criterion8);
    report(9, 180.0, criterion9);
    report(10, 600.0, criterion10);
    report(11, kNoLimit, [&] { return criterion11(cli, configs); });
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
