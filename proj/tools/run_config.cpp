#include "run_config.hpp"

#include <algorithm>
#include <map>

namespace emfg::cli {

namespace {

const std::map<Command, std::string_view>& names() {
    static const std::map<Command, std::string_view> m{
        {Command::Mfc, "mfc"},           {Command::Nash, "nash"},         {Command::CceCheck, "cce-check"},
        {Command::CceScan, "cce-scan"},  {Command::BestCce, "best-cce"},  {Command::Sweep, "sweep"},
        {Command::UStar, "ustar"},       {Command::Simulate, "simulate"}, {Command::Epsilon, "epsilon"},
    };
    return m;
}

const std::map<std::string, std::vector<std::string>>& block_keys() {
    static const std::map<std::string, std::vector<std::string>> m{
        {"params", {"delta", "sigma", "q", "alpha", "beta"}},
        {"grid", {"u_min", "u_max", "v_min", "v_max", "nu", "nv", "spacing"}},
        {"law", {"kind", "u", "v", "theta"}},
        {"sweep", {"variable", "lo", "hi", "n"}},
        {"ustar", {"alpha_min", "alpha_max", "n"}},
        {"sim", {"dt", "horizon", "burn_in", "n_paths", "n_replications", "n_threads", "n_checkpoints", "x0"}},
        {"policy", {"kind", "level", "price"}},
        {"equilibrium", {"kind", "u", "v"}},
    };
    return m;
}

json grid_defaults() {
    GridSpec g;
    return {{"u_min", g.u_min}, {"u_max", g.u_max}, {"v_min", g.v_min}, {"v_max", g.v_max},
            {"nu", g.nu},       {"nv", g.nv},       {"spacing", "log"}};
}

json sim_defaults() {
    SimConfig s;
    return {{"dt", s.dt},
            {"horizon", s.horizon},
            {"burn_in", s.burn_in},
            {"n_paths", s.n_paths},
            {"n_replications", s.n_replications},
            {"n_threads", s.n_threads},
            {"n_checkpoints", s.n_checkpoints},
            {"x0", s.x0_law.x0}};
}

std::string where(const std::string& block, const std::string& key) { return block.empty() ? key : block + "." + key; }

const json& need(const json& obj, const std::string& block, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError("missing required field " + where(block, key));
    return obj.at(key);
}

double num(const json& obj, const std::string& block, const std::string& key) {
    const json& v = need(obj, block, key);
    if (!v.is_number()) throw ConfigError(where(block, key) + " must be a number");
    return v.get<double>();
}

long long integer(const json& obj, const std::string& block, const std::string& key) {
    const json& v = need(obj, block, key);
    if (!v.is_number_integer()) throw ConfigError(where(block, key) + " must be an integer");
    return v.get<long long>();
}

int small_int(const json& obj, const std::string& block, const std::string& key) {
    long long v = integer(obj, block, key);
    if (v < -1000000000LL || v > 1000000000LL) throw ConfigError(where(block, key) + " is out of range");
    return static_cast<int>(v);
}

std::string str(const json& obj, const std::string& block, const std::string& key) {
    const json& v = need(obj, block, key);
    if (!v.is_string()) throw ConfigError(where(block, key) + " must be a string");
    return v.get<std::string>();
}

bool boolean(const json& obj, const std::string& block, const std::string& key) {
    const json& v = need(obj, block, key);
    if (!v.is_boolean()) throw ConfigError(where(block, key) + " must be a boolean");
    return v.get<bool>();
}

std::vector<CceClass> parse_classes(const std::string& s) {
    if (s == "singular") return {CceClass::Singular};
    if (s == "regular") return {CceClass::Regular};
    if (s == "both") return {CceClass::Singular, CceClass::Regular};
    throw ConfigError("class must be singular, regular or both");
}

std::uint64_t parse_seed_text(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError(std::string(kSeedEnv) + " must be a nonnegative integer");
    try {
        return std::stoull(s);
    } catch (const std::out_of_range&) {
        throw ConfigError(std::string(kSeedEnv) + " is out of range");
    }
}

void check_keys(const json& merged, Command c) {
    if (!merged.is_object()) throw ConfigError("config must be a JSON object");
    const auto& allowed = allowed_keys(c);
    for (const auto& [key, val] : merged.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("key '" + key + "' is not used by " + std::string(command_name(c)));
        auto bk = block_keys().find(key);
        if (bk == block_keys().end()) continue;
        if (!val.is_object()) throw ConfigError("block '" + key + "' must be an object");
        for (const auto& [sub, _] : val.items())
            if (std::find(bk->second.begin(), bk->second.end(), sub) == bk->second.end())
                throw ConfigError("unknown field " + key + "." + sub);
    }
}

}  // namespace

std::string_view command_name(Command c) { return names().at(c); }

std::optional<Command> command_from_name(std::string_view name) {
    for (const auto& [c, n] : names())
        if (n == name) return c;
    return std::nullopt;
}

const std::vector<Command>& all_commands() {
    static const std::vector<Command> v{Command::Mfc,   Command::Nash,  Command::CceCheck,
                                        Command::CceScan, Command::BestCce, Command::Sweep,
                                        Command::UStar, Command::Simulate, Command::Epsilon};
    return v;
}

const std::vector<std::string>& allowed_keys(Command c) {
    static const std::map<Command, std::vector<std::string>> m = [] {
        std::vector<std::string> common{"command", "params", "seed", "output"};
        auto with = [&](std::vector<std::string> extra) {
            extra.insert(extra.begin(), common.begin(), common.end());
            return extra;
        };
        return std::map<Command, std::vector<std::string>>{
            {Command::Mfc, with({})},
            {Command::Nash, with({})},
            {Command::CceCheck, with({"class", "law"})},
            {Command::CceScan, with({"class", "grid", "outperform"})},
            {Command::BestCce, with({"class", "grid"})},
            {Command::Sweep, with({"sweep", "grid"})},
            {Command::UStar, with({"ustar"})},
            {Command::Simulate, with({"sim", "policy", "summary_output"})},
            {Command::Epsilon, with({"sim", "equilibrium", "n_list", "summary_output"})},
        };
    }();
    return m.at(c);
}

json default_config(Command c) {
    json d = {{"seed", kDefaultSeed}, {"output", ""}};
    switch (c) {
        case Command::Mfc:
        case Command::Nash:
            break;
        case Command::CceCheck:
            d["class"] = "both";
            d["law"] = {{"kind", "nash"}};
            break;
        case Command::CceScan:
            d["class"] = "both";
            d["grid"] = grid_defaults();
            d["outperform"] = true;
            break;
        case Command::BestCce:
            d["class"] = "both";
            d["grid"] = grid_defaults();
            break;
        case Command::Sweep:
            d["sweep"] = {{"n", 50}};
            d["grid"] = grid_defaults();
            break;
        case Command::UStar:
            d["ustar"] = {{"alpha_min", 0.01}, {"alpha_max", 0.99}, {"n", 99}};
            break;
        case Command::Simulate:
            d["sim"] = sim_defaults();
            d["policy"] = {{"kind", "reflected"}, {"level", 1.0}, {"price", 1.0}};
            d["summary_output"] = "";
            break;
        case Command::Epsilon:
            d["sim"] = sim_defaults();
            d["equilibrium"] = {{"kind", "nash"}};
            d["n_list"] = {2, 4, 8, 16, 32};
            d["summary_output"] = "";
            break;
    }
    return d;
}

json merge_layers(Command c, const json& file, const json& flags, const char* env_seed) {
    json merged = default_config(c);
    if (!file.is_null()) {
        if (!file.is_object()) throw ConfigError("config must be a JSON object");
        merged.merge_patch(file);
    }
    if (env_seed != nullptr && *env_seed != '\0') merged["seed"] = parse_seed_text(env_seed);
    merged.merge_patch(flags);
    return merged;
}

RunConfig parse_config(Command c, const json& merged) {
    check_keys(merged, c);
    RunConfig rc;
    rc.command = c;
    if (merged.contains("command") && merged.at("command") != json(command_name(c)))
        throw ConfigError("config is for command " + merged.at("command").dump() + ", not " +
                          std::string(command_name(c)));

    const json& seed = need(merged, "", "seed");
    if (!seed.is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    rc.seed = seed.get<std::uint64_t>();
    rc.output = str(merged, "", "output");

    const json params = merged.value("params", json::object());
    rc.params.delta = num(params, "params", "delta");
    rc.params.sigma = num(params, "params", "sigma");
    rc.params.q = num(params, "params", "q");
    if (c != Command::UStar) {
        rc.params.alpha = num(params, "params", "alpha");
        rc.params.beta = num(params, "params", "beta");
    }

    if (merged.contains("class")) rc.classes = parse_classes(str(merged, "", "class"));
    if (merged.contains("outperform")) rc.outperform = boolean(merged, "", "outperform");

    if (merged.contains("grid")) {
        const json& g = merged.at("grid");
        rc.grid.u_min = num(g, "grid", "u_min");
        rc.grid.u_max = num(g, "grid", "u_max");
        rc.grid.v_min = num(g, "grid", "v_min");
        rc.grid.v_max = num(g, "grid", "v_max");
        rc.grid.nu = small_int(g, "grid", "nu");
        rc.grid.nv = small_int(g, "grid", "nv");
        std::string sp = str(g, "grid", "spacing");
        if (sp == "log")
            rc.grid.spacing = Spacing::Log;
        else if (sp == "linear")
            rc.grid.spacing = Spacing::Linear;
        else
            throw ConfigError("grid.spacing must be log or linear");
        try {
            rc.grid.check();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }

    if (merged.contains("law")) {
        const json& l = merged.at("law");
        std::string k = str(l, "law", "kind");
        if (k == "gamma") {
            rc.check_law.kind = CheckLaw::Kind::Gamma;
            rc.check_law.gamma = {num(l, "law", "u"), num(l, "law", "v")};
            if (!(rc.check_law.gamma.u > 0.0 && rc.check_law.gamma.v > 0.0))
                throw ConfigError("law.u and law.v must be positive");
        } else if (k == "point") {
            rc.check_law.kind = CheckLaw::Kind::PointMass;
            rc.check_law.theta = num(l, "law", "theta");
            if (!(rc.check_law.theta > 0.0)) throw ConfigError("law.theta must be positive");
        } else if (k == "nash") {
            rc.check_law.kind = CheckLaw::Kind::Nash;
        } else {
            throw ConfigError("law.kind must be gamma, point or nash");
        }
    }

    if (merged.contains("sweep")) {
        const json& s = merged.at("sweep");
        std::string v = str(s, "sweep", "variable");
        if (v == "sigma")
            rc.sweep_variable = SweepVariable::Sigma;
        else if (v == "beta")
            rc.sweep_variable = SweepVariable::Beta;
        else
            throw ConfigError("sweep.variable must be sigma or beta");
        rc.sweep_lo = num(s, "sweep", "lo");
        rc.sweep_hi = num(s, "sweep", "hi");
        rc.sweep_n = small_int(s, "sweep", "n");
        if (rc.sweep_n < 1) throw ConfigError("sweep.n must be at least 1");
        if (!(rc.sweep_lo <= rc.sweep_hi)) throw ConfigError("sweep.lo must not exceed sweep.hi");
    }

    if (merged.contains("ustar")) {
        const json& u = merged.at("ustar");
        rc.alpha_min = num(u, "ustar", "alpha_min");
        rc.alpha_max = num(u, "ustar", "alpha_max");
        rc.alpha_n = small_int(u, "ustar", "n");
        if (rc.alpha_n < 1) throw ConfigError("ustar.n must be at least 1");
        if (!(0.0 < rc.alpha_min && rc.alpha_min <= rc.alpha_max && rc.alpha_max < 1.0))
            throw ConfigError("ustar alpha range must satisfy 0 < alpha_min <= alpha_max < 1");
    }

    if (merged.contains("sim")) {
        const json& s = merged.at("sim");
        rc.sim.dt = num(s, "sim", "dt");
        rc.sim.horizon = num(s, "sim", "horizon");
        rc.sim.burn_in = num(s, "sim", "burn_in");
        rc.sim.n_paths = small_int(s, "sim", "n_paths");
        rc.sim.n_replications = small_int(s, "sim", "n_replications");
        rc.sim.n_threads = small_int(s, "sim", "n_threads");
        rc.sim.n_checkpoints = small_int(s, "sim", "n_checkpoints");
        rc.sim.x0_law.x0 = num(s, "sim", "x0");
        rc.sim.seed = rc.seed;
        if (rc.sim.n_threads < 0) throw ConfigError("sim.n_threads must be nonnegative");
        if (rc.sim.n_checkpoints < 1) throw ConfigError("sim.n_checkpoints must be at least 1");
        try {
            rc.sim.check();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }

    if (merged.contains("policy")) {
        const json& p = merged.at("policy");
        std::string k = str(p, "policy", "kind");
        double level = num(p, "policy", "level");
        if (k == "reflected") {
            if (!(level > 0.0)) throw ConfigError("policy.level must be positive for a reflected policy");
            rc.policy = Policy::reflected(level);
        } else if (k == "regular") {
            if (!(level >= 0.0)) throw ConfigError("policy.level must be nonnegative for a regular policy");
            rc.policy = Policy::regular(level);
        } else {
            throw ConfigError("policy.kind must be reflected or regular");
        }
        rc.price = num(p, "policy", "price");
        if (!(rc.price >= 0.0)) throw ConfigError("policy.price must be nonnegative");
    }

    if (merged.contains("summary_output")) rc.summary_output = str(merged, "", "summary_output");

    if (merged.contains("equilibrium")) {
        const json& e = merged.at("equilibrium");
        std::string k = str(e, "equilibrium", "kind");
        if (k == "singular" || k == "regular") {
            rc.equilibrium.kind =
                k == "singular" ? EquilibriumSpec::Kind::CceSingular : EquilibriumSpec::Kind::CceRegular;
            rc.equilibrium.law = {num(e, "equilibrium", "u"), num(e, "equilibrium", "v")};
            if (!(rc.equilibrium.law.u > 0.0 && rc.equilibrium.law.v > 0.0))
                throw ConfigError("equilibrium.u and equilibrium.v must be positive");
        } else if (k == "nash") {
            rc.equilibrium.kind = EquilibriumSpec::Kind::Nash;
        } else if (k == "central") {
            rc.equilibrium.kind = EquilibriumSpec::Kind::CentralPlanner;
        } else {
            throw ConfigError("equilibrium.kind must be singular, regular, nash or central");
        }
    }

    if (merged.contains("n_list")) {
        const json& n = merged.at("n_list");
        if (!n.is_array() || n.empty()) throw ConfigError("n_list must be a nonempty array of integers");
        for (const auto& x : n) {
            if (!x.is_number_integer() || x.get<long long>() < 2 || x.get<long long>() > 100000)
                throw ConfigError("n_list entries must be integers in [2, 100000]");
            rc.n_list.push_back(x.get<int>());
        }
        if (!std::is_sorted(rc.n_list.begin(), rc.n_list.end()) ||
            std::adjacent_find(rc.n_list.begin(), rc.n_list.end()) != rc.n_list.end())
            throw ConfigError("n_list must be strictly increasing");
    }
    return rc;
}

}  // namespace emfg::cli
