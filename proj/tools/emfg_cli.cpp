#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emfg/cce_scan.hpp"
#include "emfg/equilibria.hpp"
#include "emfg/model.hpp"
#include "emfg/simulate.hpp"
#include "run_config.hpp"

using namespace emfg;
using namespace emfg::cli;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitUndefined = 3;
constexpr int kExitUnstable = 4;

// Thrown for requests the model leaves undefined (exit 3).
class UndefinedRequest : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------- formatting ----------

std::string f17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string f17(const std::optional<double>& x) { return x ? f17(*x) : ""; }

const char* tf(bool b) { return b ? "true" : "false"; }

std::string tf(const std::optional<bool>& b) { return b ? tf(*b) : ""; }

json params_json(const ModelParams& p) {
    return {{"delta", p.delta}, {"sigma", p.sigma}, {"q", p.q}, {"alpha", p.alpha}, {"beta", p.beta}};
}

json header(Command c, const ModelParams& p) {
    return {{"schema_version", kSchemaVersion}, {"command", std::string(command_name(c))}, {"params", params_json(p)}};
}

void put(json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
}

std::string class_name(CceClass c) { return std::string(to_string(c)); }

// ---------- output ----------

void write_text(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw OutputError("failed writing " + path);
}

void write_json(const json& j, const std::string& path) { write_text(j.dump(2) + "\n", path); }

// Companion JSON for commands whose main output is CSV.
void write_summary(const json& j, const RunConfig& rc) {
    std::string path = rc.summary_output;
    if (path.empty() && !rc.output.empty()) path = rc.output + ".summary.json";
    if (path.empty()) {
        std::cerr << j.dump(2) << "\n";
        return;
    }
    write_json(j, path);
}

// ---------- validation ----------

bool report_invalid(const ModelParams& p) {
    auto rep = validate(p);
    if (rep.ok) return false;
    std::cerr << "invalid parameters:\n";
    for (const auto& v : rep.violations) std::cerr << "  " << v << "\n";
    return true;
}

// ---------- commands ----------

int cmd_mfc(const RunConfig& rc) {
    const auto& p = rc.params;
    if (report_invalid(p)) return kExitValidation;
    auto rep = mfc_solve(p);
    json j = header(rc.command, p);
    j["regime"] = std::string(to_string(classify_regime(p)));
    j["status"] = std::string(to_string(rep.status));
    if (rep.has_solution()) {
        put(j, "a_hat", rep.barrier);
        put(j, "theta_hat", rep.theta);
        put(j, "reward", rep.reward);
        j["lambda_at_theta_hat"] = lagrange_multiplier(p, *rep.theta);
    }
    write_json(j, rc.output);
    return 0;
}

int cmd_nash(const RunConfig& rc) {
    const auto& p = rc.params;
    if (report_invalid(p)) return kExitValidation;
    auto rep = nash_solve(p);
    json j = header(rc.command, p);
    j["regime"] = std::string(to_string(classify_regime(p)));
    j["status"] = std::string(to_string(rep.status));
    if (classify_regime(p) == Regime::Critical)
        j["knife_edge_residual"] = knife_edge_residual(p.delta, p.sigma, p.q, p.alpha);
    if (rep.status == Status::Unique) {
        put(j, "a_star", rep.barrier);
        put(j, "theta_star", rep.theta);
        put(j, "reward", rep.reward);
    }
    write_json(j, rc.output);
    return 0;
}

int cmd_cce_check(const RunConfig& rc) {
    const auto& p = rc.params;
    if (report_invalid(p)) return kExitValidation;
    auto ne = nash_solve(p);
    MomentTriple m;
    json law;
    switch (rc.check_law.kind) {
        case CheckLaw::Kind::Gamma:
            m = gamma_moments_triple(p, rc.check_law.gamma);
            law = {{"kind", "gamma"}, {"u", rc.check_law.gamma.u}, {"v", rc.check_law.gamma.v}};
            break;
        case CheckLaw::Kind::PointMass:
            m = MomentTriple::point_mass(p, rc.check_law.theta);
            law = {{"kind", "point"}, {"theta", rc.check_law.theta}};
            break;
        case CheckLaw::Kind::Nash:
            if (ne.status != Status::Unique) throw UndefinedRequest("no unique Nash equilibrium to check");
            m = MomentTriple::point_mass(p, *ne.theta);
            law = {{"kind", "nash"}, {"theta", *ne.theta}};
            break;
    }
    json j = header(rc.command, p);
    j["law"] = law;
    j["moments"] = {{"m_beta", m.m_beta}, {"m_one", m.m_one}, {"m_ab", m.m_ab}};
    j["deviation_reward"] = reward_deviator(p, m);
    if (ne.status == Status::Unique) j["nash_reward"] = *ne.reward;
    json results = json::array();
    for (CceClass c : rc.classes) {
        auto chk = cce_check(p, m, c);
        double r = reward_class(p, m, c);
        json row = {{"class", class_name(c)},
                    {"holds", chk.holds},
                    {"slack", chk.slack},
                    {"normalized_slack", chk.normalized},
                    {"rhs", chk.rhs},
                    {"reward", r}};
        if (ne.status == Status::Unique) {
            row["margin_vs_nash"] = r - *ne.reward;
            row["outperforms_nash"] = r - *ne.reward >= 0.0;
        }
        results.push_back(row);
    }
    j["results"] = results;
    write_json(j, rc.output);
    return 0;
}

int cmd_cce_scan(const RunConfig& rc) {
    const auto& p = rc.params;
    if (report_invalid(p)) return kExitValidation;
    if (rc.outperform && nash_solve(p).status != Status::Unique)
        throw UndefinedRequest("outperformance is undefined without a unique Nash equilibrium");
    std::ostringstream out;
    out << "schema_version,class,u,v,exists,outperforms,reward,slack\n";
    for (CceClass c : rc.classes) {
        for (const auto& cell : scan_region(p, rc.grid, c, rc.outperform)) {
            out << kSchemaVersion << ',' << class_name(c) << ',' << f17(cell.u) << ',' << f17(cell.v) << ','
                << tf(cell.exists_cce) << ',' << tf(cell.outperforms) << ',' << f17(cell.reward) << ','
                << f17(cell.slack) << '\n';
        }
    }
    write_text(out.str(), rc.output);
    return 0;
}

int cmd_best_cce(const RunConfig& rc) {
    const auto& p = rc.params;
    if (report_invalid(p)) return kExitValidation;
    auto mfc = mfc_solve(p);
    auto ne = nash_solve(p);
    json j = header(rc.command, p);
    j["mfc"] = {{"status", std::string(to_string(mfc.status))}};
    if (mfc.has_solution()) j["mfc"]["reward"] = *mfc.reward;
    j["nash"] = {{"status", std::string(to_string(ne.status))}};
    if (ne.status == Status::Unique) j["nash"]["reward"] = *ne.reward;
    json results = json::array();
    for (CceClass c : rc.classes) {
        auto b = best_cce(p, c, rc.grid);
        json row = {{"class", class_name(c)}, {"status", std::string(to_string(b.status))}};
        if (b.status == SearchStatus::Found) {
            row["u"] = b.u;
            row["v"] = b.v;
            row["reward"] = b.reward;
            row["slack"] = b.slack;
            row["coarse_reward"] = b.coarse_reward;
            row["iterations"] = b.iterations;
            if (ne.status == Status::Unique && mfc.has_solution() && *mfc.reward != 0.0)
                row["improvement_over_nash_per_mfc"] = (b.reward - *ne.reward) / *mfc.reward;
        }
        results.push_back(row);
    }
    j["results"] = results;
    write_json(j, rc.output);
    return 0;
}

int cmd_sweep(const RunConfig& rc) {
    auto pts = sweep(rc.params, rc.sweep_variable, rc.sweep_lo, rc.sweep_hi, rc.sweep_n, rc.grid);
    std::ostringstream out;
    out << "schema_version,variable,value,valid,mfc,nash,best_singular,best_regular,mfc_status,nash_status,"
           "singular_status,regular_status,singular_outperforms,regular_outperforms,flags\n";
    const char* var = rc.sweep_variable == SweepVariable::Sigma ? "sigma" : "beta";
    for (const auto& s : pts) {
        std::vector<std::string> flags;
        if (!s.valid) flags.push_back("invalid");
        if (s.mfc_status && !s.mfc_reward) flags.push_back("mfc=" + std::string(to_string(*s.mfc_status)));
        if (s.nash_status && !s.nash_reward) flags.push_back("nash=" + std::string(to_string(*s.nash_status)));
        if (s.valid && !s.best_cce_singular)
            flags.push_back("singular=" + std::string(to_string(s.singular_status)));
        if (s.valid && !s.best_cce_regular) flags.push_back("regular=" + std::string(to_string(s.regular_status)));
        std::string joined;
        for (const auto& f : flags) joined += (joined.empty() ? "" : "|") + f;
        auto status_or_empty = [](const std::optional<Status>& st) {
            return st ? std::string(to_string(*st)) : std::string();
        };
        out << kSchemaVersion << ',' << var << ',' << f17(s.swept_value) << ',' << tf(s.valid) << ','
            << f17(s.mfc_reward) << ',' << f17(s.nash_reward) << ',' << f17(s.best_cce_singular) << ','
            << f17(s.best_cce_regular) << ',' << status_or_empty(s.mfc_status) << ','
            << status_or_empty(s.nash_status) << ',' << (s.valid ? to_string(s.singular_status) : "") << ','
            << (s.valid ? to_string(s.regular_status) : "") << ',' << tf(s.singular_outperforms) << ','
            << tf(s.regular_outperforms) << ',' << joined << '\n';
    }
    write_text(out.str(), rc.output);
    return 0;
}

int cmd_ustar(const RunConfig& rc) {
    ModelParams base = rc.params;
    base.alpha = 0.5;
    base.beta = 0.5;
    if (report_invalid(base)) return kExitValidation;
    std::optional<double> abar;
    try {
        abar = alpha_bar_solve(base.delta, base.sigma, base.q);
    } catch (const NoRoot&) {
    }
    std::vector<std::pair<double, bool>> alphas;
    for (int i = 0; i < rc.alpha_n; ++i) {
        double a = rc.alpha_n == 1 ? rc.alpha_min
                   : i == rc.alpha_n - 1
                       ? rc.alpha_max
                       : rc.alpha_min + (rc.alpha_max - rc.alpha_min) * i / (rc.alpha_n - 1);
        alphas.emplace_back(a, false);
    }
    if (abar) {
        auto pos = std::lower_bound(alphas.begin(), alphas.end(), std::make_pair(*abar, true));
        alphas.insert(pos, {*abar, true});
    }
    std::ostringstream out;
    out << "schema_version,alpha,u_star_regular,u_star_singular,regular_infinite,singular_infinite,regular_kind,"
           "singular_kind,is_alpha_bar,alpha_bar\n";
    for (const auto& [a, is_bar] : alphas) {
        ModelParams p = base;
        p.alpha = a;
        p.beta = 1.0 - a;
        auto r = u_star(p, CceClass::Regular);
        auto s = u_star(p, CceClass::Singular);
        auto value = [](const UStar& x) { return x.kind == UStarKind::Infinite ? std::string() : f17(x.value); };
        out << kSchemaVersion << ',' << f17(a) << ',' << value(r) << ',' << value(s) << ','
            << tf(r.kind == UStarKind::Infinite) << ',' << tf(s.kind == UStarKind::Infinite) << ','
            << to_string(r.kind) << ',' << to_string(s.kind) << ',' << tf(is_bar) << ',' << f17(abar) << '\n';
    }
    write_text(out.str(), rc.output);
    (rc.output.empty() ? std::cerr : std::cout) << "alpha_bar " << (abar ? f17(*abar) : "none") << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& rc) {
    const auto& p = rc.params;
    if (report_invalid(p)) return kExitValidation;
    bool reflected = rc.policy.kind == Policy::Kind::Reflected;
    double level = rc.policy.level;
    PathStats st = reflected ? simulate_reflected(p, level, rc.sim, rc.price)
                             : simulate_regular(p, level, rc.sim, rc.price);

    std::ostringstream out;
    out << "schema_version,path,time_avg_reward,time_avg_mean\n";
    for (std::size_t i = 0; i < st.path_rewards.size(); ++i)
        out << kSchemaVersion << ',' << i << ',' << f17(st.path_rewards[i]) << ',' << f17(st.path_means[i]) << '\n';

    AnalyticLaw law{reflected ? AnalyticLaw::Kind::Reflected : AnalyticLaw::Kind::Regular, level};
    double mean_ref = reflected ? p.mean_factor() * level : level;
    double reward_ref = reflected ? ergodic_reward_C(p, level, rc.price)
                                  : rc.price * analytic_moment(p, law, p.alpha) - p.q * p.delta * level;
    auto rel = [](double x, double ref) { return ref == 0.0 ? std::abs(x) : std::abs(x - ref) / std::abs(ref); };

    json j = header(rc.command, p);
    j["policy"] = {{"kind", reflected ? "reflected" : "regular"}, {"level", level}, {"price", rc.price}};
    j["sim"] = {{"dt", rc.sim.dt},           {"horizon", rc.sim.horizon}, {"burn_in", rc.sim.burn_in},
                {"n_paths", rc.sim.n_paths}, {"seed", rc.seed},           {"x0", rc.sim.x0_law.x0}};
    j["time_avg_reward"] = st.time_avg_reward;
    j["reward_ci_halfwidth"] = st.reward_ci_halfwidth;
    j["empirical_mean"] = st.empirical_mean;
    j["terminal_control"] = st.terminal_control;
    j["control_monotone"] = st.control_monotone;
    j["control_checkpoints"] = st.control_checkpoints;
    j["min_state_after_start"] = st.min_state_after_start;
    j["oracle"] = {{"mean", mean_ref},
                   {"reward", reward_ref},
                   {"mean_rel_error", rel(st.empirical_mean, mean_ref)},
                   {"reward_rel_error", rel(st.time_avg_reward, reward_ref)}};
    json moments = json::array();
    for (const auto& e : ks_moment_check(p, st, law))
        moments.push_back({{"k", e.k}, {"empirical", e.empirical}, {"analytic", e.analytic}, {"rel_error", e.rel_error}});
    j["moments"] = moments;

    write_text(out.str(), rc.output);
    write_summary(j, rc);
    return 0;
}

int cmd_epsilon(const RunConfig& rc) {
    const auto& p = rc.params;
    if (report_invalid(p)) return kExitValidation;
    const auto& eq = rc.equilibrium;
    MomentTriple m;
    double rec_ref = 0.0;
    json eqj;
    switch (eq.kind) {
        case EquilibriumSpec::Kind::CceSingular:
        case EquilibriumSpec::Kind::CceRegular: {
            bool sing = eq.kind == EquilibriumSpec::Kind::CceSingular;
            m = gamma_moments_triple(p, eq.law);
            rec_ref = sing ? reward_singular(p, m) : reward_regular(p, m);
            eqj = {{"kind", sing ? "singular" : "regular"}, {"u", eq.law.u}, {"v", eq.law.v}};
            eqj["is_cce"] = cce_check(p, m, sing ? CceClass::Singular : CceClass::Regular).holds;
            break;
        }
        case EquilibriumSpec::Kind::Nash: {
            auto ne = nash_solve(p);
            if (ne.status != Status::Unique) throw UndefinedRequest("no unique Nash equilibrium to simulate");
            m = MomentTriple::point_mass(p, *ne.theta);
            rec_ref = *ne.reward;
            eqj = {{"kind", "nash"}, {"theta", *ne.theta}};
            break;
        }
        case EquilibriumSpec::Kind::CentralPlanner: {
            auto mfc = mfc_solve(p);
            if (mfc.status != Status::Unique) throw UndefinedRequest("no unique MFC optimum to simulate");
            m = MomentTriple::point_mass(p, *mfc.theta);
            rec_ref = *mfc.reward;
            eqj = {{"kind", "central"}, {"theta", *mfc.theta}};
            break;
        }
    }
    double dev_ref = reward_deviator(p, m);
    auto est = estimate_epsilon_n(p, eq, rc.n_list, rc.sim);
    std::vector<double> env = nonincreasing_envelope(est);

    std::ostringstream out;
    out << "schema_version,n_players,gap,ci_halfwidth,deviation_payoff,recommendation_payoff,n_replications,"
           "envelope\n";
    for (std::size_t i = 0; i < est.size(); ++i) {
        const auto& e = est[i];
        out << kSchemaVersion << ',' << e.n_players << ',' << f17(e.gap) << ',' << f17(e.ci_halfwidth) << ','
            << f17(e.deviation_payoff) << ',' << f17(e.recommendation_payoff) << ',' << e.n_replications << ','
            << f17(env[i]) << '\n';
    }

    json j = header(rc.command, p);
    j["equilibrium"] = eqj;
    j["sim"] = {{"dt", rc.sim.dt},
                {"horizon", rc.sim.horizon},
                {"burn_in", rc.sim.burn_in},
                {"n_replications", rc.sim.n_replications},
                {"seed", rc.seed},
                {"x0", rc.sim.x0_law.x0}};
    j["n_list"] = rc.n_list;
    j["deviation_barrier"] = deviation_barrier(p, eq);
    if (est.size() >= 2) {
        const auto& a = est.front();
        const auto& b = est.back();
        j["log_slope"] = fitted_log_slope(est);
        j["last_below_first_beyond_ci"] = b.gap + b.ci_halfwidth < a.gap - a.ci_halfwidth;
    }
    j["envelope"] = env;
    const auto& last = est.back();
    j["oracle"] = {{"mean_field_recommendation_payoff", rec_ref},
                   {"mean_field_deviation_payoff", dev_ref},
                   {"mean_field_gap", dev_ref - rec_ref},
                   {"recommendation_rel_error_at_largest_n",
                    std::abs(last.recommendation_payoff - rec_ref) / std::abs(rec_ref)}};

    write_text(out.str(), rc.output);
    write_summary(j, rc);
    return 0;
}

int run(const RunConfig& rc) {
    switch (rc.command) {
        case Command::Mfc: return cmd_mfc(rc);
        case Command::Nash: return cmd_nash(rc);
        case Command::CceCheck: return cmd_cce_check(rc);
        case Command::CceScan: return cmd_cce_scan(rc);
        case Command::BestCce: return cmd_best_cce(rc);
        case Command::Sweep: return cmd_sweep(rc);
        case Command::UStar: return cmd_ustar(rc);
        case Command::Simulate: return cmd_simulate(rc);
        case Command::Epsilon: return cmd_epsilon(rc);
    }
    return 1;
}

// ---------- flags ----------

enum class FlagType { Num, Int, Seed, Str, Bool, IntList };

struct FlagSpec {
    std::string name;
    std::string pointer;
    FlagType type;
    std::string help;
};

struct BoundFlag {
    FlagSpec spec;
    std::string value;
    CLI::Option* opt = nullptr;
};

struct Subcommand {
    Command command;
    CLI::App* app = nullptr;
    std::string config_path;
    std::vector<std::unique_ptr<BoundFlag>> flags;
};

std::vector<FlagSpec> flag_specs(Command c) {
    std::vector<FlagSpec> f{
        {"--delta", "/params/delta", FlagType::Num, "mean-reversion rate"},
        {"--sigma", "/params/sigma", FlagType::Num, "volatility"},
        {"--q", "/params/q", FlagType::Num, "unit control cost"},
        {"--out", "/output", FlagType::Str, "output file (default: standard output)"},
        {"--seed", "/seed", FlagType::Seed, "RNG seed (overrides " + std::string(kSeedEnv) + " and the config)"},
    };
    if (c != Command::UStar) {
        f.push_back({"--alpha", "/params/alpha", FlagType::Num, "own-state exponent"});
        f.push_back({"--beta", "/params/beta", FlagType::Num, "interaction exponent"});
    } else {
        f.push_back({"--alpha-min", "/ustar/alpha_min", FlagType::Num, "first alpha of the grid"});
        f.push_back({"--alpha-max", "/ustar/alpha_max", FlagType::Num, "last alpha of the grid"});
        f.push_back({"--n", "/ustar/n", FlagType::Int, "number of alpha values"});
    }
    auto grid = [&] {
        f.push_back({"--u-min", "/grid/u_min", FlagType::Num, "smallest shape u"});
        f.push_back({"--u-max", "/grid/u_max", FlagType::Num, "largest shape u"});
        f.push_back({"--v-min", "/grid/v_min", FlagType::Num, "smallest scale v"});
        f.push_back({"--v-max", "/grid/v_max", FlagType::Num, "largest scale v"});
        f.push_back({"--nu", "/grid/nu", FlagType::Int, "grid points along u"});
        f.push_back({"--nv", "/grid/nv", FlagType::Int, "grid points along v"});
        f.push_back({"--spacing", "/grid/spacing", FlagType::Str, "log or linear"});
    };
    auto sim = [&] {
        f.push_back({"--dt", "/sim/dt", FlagType::Num, "time step"});
        f.push_back({"--horizon", "/sim/horizon", FlagType::Num, "simulated time T"});
        f.push_back({"--burn-in", "/sim/burn_in", FlagType::Num, "discarded initial time"});
        f.push_back({"--threads", "/sim/n_threads", FlagType::Int, "worker threads (0: all cores)"});
        f.push_back({"--checkpoints", "/sim/n_checkpoints", FlagType::Int, "control snapshots per path"});
        f.push_back({"--x0", "/sim/x0", FlagType::Num, "initial state"});
        f.push_back({"--summary", "/summary_output", FlagType::Str, "summary JSON path"});
    };
    switch (c) {
        case Command::Mfc:
        case Command::Nash:
        case Command::UStar:
            break;
        case Command::CceCheck:
            f.push_back({"--class", "/class", FlagType::Str, "singular, regular or both"});
            f.push_back({"--law", "/law/kind", FlagType::Str, "gamma, point or nash"});
            f.push_back({"--u", "/law/u", FlagType::Num, "Gamma shape"});
            f.push_back({"--v", "/law/v", FlagType::Num, "Gamma scale"});
            f.push_back({"--theta", "/law/theta", FlagType::Num, "point-mass location"});
            break;
        case Command::CceScan:
            f.push_back({"--class", "/class", FlagType::Str, "singular, regular or both"});
            f.push_back({"--outperform", "/outperform", FlagType::Bool, "compare against Nash (true/false)"});
            grid();
            break;
        case Command::BestCce:
            f.push_back({"--class", "/class", FlagType::Str, "singular, regular or both"});
            grid();
            break;
        case Command::Sweep:
            f.push_back({"--var", "/sweep/variable", FlagType::Str, "sigma or beta"});
            f.push_back({"--lo", "/sweep/lo", FlagType::Num, "first swept value"});
            f.push_back({"--hi", "/sweep/hi", FlagType::Num, "last swept value"});
            f.push_back({"--n", "/sweep/n", FlagType::Int, "number of swept values"});
            grid();
            break;
        case Command::Simulate:
            f.push_back({"--policy", "/policy/kind", FlagType::Str, "reflected or regular"});
            f.push_back({"--a", "/policy/level", FlagType::Num, "reflection barrier"});
            f.push_back({"--theta", "/policy/level", FlagType::Num, "regular target mean"});
            f.push_back({"--price", "/policy/price", FlagType::Num, "price multiplying x^alpha"});
            f.push_back({"--paths", "/sim/n_paths", FlagType::Int, "independent paths"});
            sim();
            break;
        case Command::Epsilon:
            f.push_back({"--kind", "/equilibrium/kind", FlagType::Str, "singular, regular, nash or central"});
            f.push_back({"--u", "/equilibrium/u", FlagType::Num, "Gamma shape of the correlation device"});
            f.push_back({"--v", "/equilibrium/v", FlagType::Num, "Gamma scale of the correlation device"});
            f.push_back({"--n", "/n_list", FlagType::IntList, "comma-separated player counts"});
            f.push_back({"--replications", "/sim/n_replications", FlagType::Int, "independent games per N"});
            sim();
            break;
    }
    return f;
}

json flag_value(const FlagSpec& s, const std::string& text) {
    auto bad = [&] { return ConfigError("invalid value '" + text + "' for " + s.name); };
    auto parse_ll = [&](const std::string& t) {
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(t, &pos);
        } catch (const std::exception&) {
            throw bad();
        }
        if (pos != t.size()) throw bad();
        return v;
    };
    switch (s.type) {
        case FlagType::Num: {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(text, &pos);
            } catch (const std::exception&) {
                throw bad();
            }
            if (pos != text.size() || !std::isfinite(v)) throw bad();
            return v;
        }
        case FlagType::Int:
            return parse_ll(text);
        case FlagType::Seed: {
            if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) throw bad();
            try {
                return static_cast<std::uint64_t>(std::stoull(text));
            } catch (const std::exception&) {
                throw bad();
            }
        }
        case FlagType::Str:
            return text;
        case FlagType::Bool:
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            throw bad();
        case FlagType::IntList: {
            json arr = json::array();
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) arr.push_back(parse_ll(item));
            if (arr.empty()) throw bad();
            return arr;
        }
    }
    throw bad();
}

json read_config_file(const std::string& path) {
    if (path.empty()) return nullptr;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ergodic mean-field games with singular controls: equilibria, correlated equilibria and simulation"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Subcommand>> subs;
    for (Command c : all_commands()) {
        auto sub = std::make_unique<Subcommand>();
        sub->command = c;
        sub->app = app.add_subcommand(std::string(command_name(c)));
        sub->app->add_option("--config", sub->config_path, "JSON config file")
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        for (auto& spec : flag_specs(c)) {
            auto bf = std::make_unique<BoundFlag>();
            bf->spec = spec;
            bf->opt = sub->app->add_option(spec.name, bf->value, spec.help)
                          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
            sub->flags.push_back(std::move(bf));
        }
        subs.push_back(std::move(sub));
    }
    // two flags share the policy level
    for (auto& s : subs) {
        if (s->command != Command::Simulate) continue;
        CLI::Option* a = nullptr;
        CLI::Option* theta = nullptr;
        for (auto& f : s->flags) {
            if (f->spec.name == "--a") a = f->opt;
            if (f->spec.name == "--theta") theta = f->opt;
        }
        a->excludes(theta);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitValidation;
    }

    Subcommand* active = nullptr;
    for (auto& s : subs)
        if (s->app->parsed()) active = s.get();

    RunConfig rc;
    try {
        json file = read_config_file(active->config_path);
        json flags = json::object();
        for (const auto& f : active->flags)
            if (f->opt->count() > 0) flags[json::json_pointer(f->spec.pointer)] = flag_value(f->spec, f->value);
        json merged = merge_layers(active->command, file, flags, std::getenv(kSeedEnv));
        rc = parse_config(active->command, merged);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        return run(rc);
    } catch (const UnstableStep& e) {
        std::cerr << "numerical instability: path " << e.path_index << ", step " << e.step_index << "\n";
        return kExitUnstable;
    } catch (const UndefinedRequest& e) {
        std::cerr << "undefined request: " << e.what() << "\n";
        return kExitUndefined;
    } catch (const NoNashEquilibrium& e) {
        std::cerr << "undefined request: " << e.what() << "\n";
        return kExitUndefined;
    } catch (const OutputError& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
