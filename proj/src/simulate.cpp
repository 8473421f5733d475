#include "emfg/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <random>
#include <thread>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "emfg/special.hpp"

namespace emfg {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t i, std::uint64_t j = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ tag);
    h = splitmix64(h ^ i);
    return splitmix64(h ^ j);
}

// One independent normal stream per work unit.
struct NormalStream {
    explicit NormalStream(std::uint64_t key) : eng(key) {}
    double operator()() { return nd(eng); }
    std::mt19937_64 eng;
    boost::random::normal_distribution<double> nd;
};

double draw_initial(const InitialLaw& law, std::mt19937_64& eng) {
    if (law.kind == InitialLaw::Kind::PointMass) return law.x0;
    boost::random::gamma_distribution<double> g(law.u, law.v);
    return g(eng);
}

struct KahanSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

// Runs fn(i) for i in [0, n) over a pool of worker threads. Exceptions are
// rethrown for the lowest failing index so the outcome is thread-count free.
void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    int t = n_threads > 0 ? n_threads : std::max(1, hw);
    t = std::min(t, n);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (t <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < t; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<double> exponents_for(const ModelParams& p, const SimConfig& cfg) {
    if (!cfg.moment_exponents.empty()) return cfg.moment_exponents;
    return {0.5, p.alpha, 1.0, p.alpha + p.beta, 2.0};
}

inline double power_of(double x, double lx, double k) {
    if (k == 1.0) return x;
    if (k == 2.0) return x * x;
    if (k == 0.5) return std::sqrt(x);
    if (k == 0.0) return 1.0;
    return std::exp(k * lx);
}

struct PathResult {
    double reward = 0.0;
    double mean = 0.0;
    double control = 0.0;
    double min_state = std::numeric_limits<double>::infinity();
    std::vector<double> moments;
    std::vector<double> checkpoints;
    bool monotone = true;
};

long long steps_of(double t, double dt) { return std::llround(t / dt); }

PathResult run_path(const ModelParams& p, Policy policy, const SimConfig& cfg, double price,
                    const std::vector<double>& ks, std::uint64_t path) {
    NormalStream rng(stream_key(cfg.seed, 0x51u, path));
    const long long n_steps = steps_of(cfg.horizon, cfg.dt);
    const long long burn = steps_of(cfg.burn_in, cfg.dt);
    const double window = static_cast<double>(n_steps - burn);
    const double sqdt = std::sqrt(cfg.dt);
    const double drift = p.delta * cfg.dt;
    const double vol = p.sigma * sqdt;
    const bool reflected = policy.kind == Policy::Kind::Reflected;
    const double a = policy.level;
    const double theta = policy.level;
    const double floor = 1e-12 * theta;
    const double reg_dnu = p.delta * theta * cfg.dt;

    PathResult res;
    res.moments.assign(ks.size(), 0.0);
    std::vector<double> acc(ks.size(), 0.0);
    double acc_alpha = 0.0, acc_x = 0.0, acc_cost = 0.0;

    double x = draw_initial(cfg.x0_law, rng.eng);
    double nu = 0.0;
    if (reflected && x < a) {
        nu += a - x;
        x = a;
    }
    const long long nc = std::max(cfg.n_checkpoints, 0);
    long long cp = 0;
    long long next_cp = nc > 0 ? n_steps / nc : -1;
    double last_nu = nu;

    for (long long n = 0; n < n_steps; ++n) {
        double z = rng();
        double dnu;
        if (reflected) {
            double prop = x * (1.0 - drift + vol * z);
            if (prop < a) {
                dnu = a - prop;
                x = a;
            } else {
                dnu = 0.0;
                x = prop;
            }
        } else {
            x = x + drift * (theta - x) + vol * x * z;
            if (x < floor) x = floor;
            dnu = reg_dnu;
        }
        if (!std::isfinite(x)) throw UnstableStep(static_cast<long long>(path), n);
        nu += dnu;
        if (x < res.min_state) res.min_state = x;
        if (n >= burn) {
            double lx = std::log(x);
            acc_alpha += std::exp(p.alpha * lx);
            acc_x += x;
            acc_cost += dnu;
            for (std::size_t i = 0; i < ks.size(); ++i) acc[i] += power_of(x, lx, ks[i]);
        }
        if (n + 1 == next_cp) {
            if (nu < last_nu) res.monotone = false;
            last_nu = nu;
            res.checkpoints.push_back(nu);
            ++cp;
            next_cp = cp < nc ? n_steps * (cp + 1) / nc : -1;
        }
    }
    res.reward = price * acc_alpha / window - p.q * acc_cost / (window * cfg.dt);
    res.mean = acc_x / window;
    res.control = nu;
    for (std::size_t i = 0; i < ks.size(); ++i) res.moments[i] = acc[i] / window;
    return res;
}

double ci95(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    KahanSum ss;
    for (double x : xs) ss.add((x - mean) * (x - mean));
    double var = ss.sum / static_cast<double>(xs.size() - 1);
    return 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
}

double mean_of(const std::vector<double>& xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.sum / static_cast<double>(xs.size());
}

PathStats simulate_policy(const ModelParams& p, Policy policy, const SimConfig& cfg, double price) {
    cfg.check();
    const auto ks = exponents_for(p, cfg);
    std::vector<PathResult> paths(static_cast<std::size_t>(cfg.n_paths));
    parallel_for(cfg.n_paths, cfg.n_threads, [&](int i) {
        paths[static_cast<std::size_t>(i)] = run_path(p, policy, cfg, price, ks, static_cast<std::uint64_t>(i));
    });

    PathStats st;
    st.n_paths = cfg.n_paths;
    for (const auto& r : paths) {
        st.path_rewards.push_back(r.reward);
        st.path_means.push_back(r.mean);
    }
    st.time_avg_reward = mean_of(st.path_rewards);
    st.reward_ci_halfwidth = ci95(st.path_rewards, st.time_avg_reward);
    st.empirical_mean = mean_of(st.path_means);

    KahanSum ctrl;
    st.min_state_after_start = std::numeric_limits<double>::infinity();
    for (const auto& r : paths) {
        ctrl.add(r.control);
        st.min_state_after_start = std::min(st.min_state_after_start, r.min_state);
        st.control_monotone = st.control_monotone && r.monotone;
    }
    st.terminal_control = ctrl.sum / cfg.n_paths;

    for (std::size_t i = 0; i < ks.size(); ++i) {
        KahanSum s;
        for (const auto& r : paths) s.add(r.moments[i]);
        st.time_avg_moments[ks[i]] = s.sum / cfg.n_paths;
    }
    std::size_t ncp = paths.front().checkpoints.size();
    for (std::size_t c = 0; c < ncp; ++c) {
        KahanSum s;
        for (const auto& r : paths) s.add(r.checkpoints[c]);
        st.control_checkpoints.push_back(s.sum / cfg.n_paths);
    }
    return st;
}

}  // namespace

void SimConfig::check() const {
    if (!(dt > 0.0)) throw DomainError("SimConfig: dt must be positive");
    if (!(dt < horizon)) throw DomainError("SimConfig: dt must be below the horizon");
    if (!(burn_in >= 0.0 && burn_in < horizon)) throw DomainError("SimConfig: burn_in must lie in [0, T)");
    if (n_paths < 1) throw DomainError("SimConfig: n_paths must be at least 1");
    if (n_replications < 1) throw DomainError("SimConfig: n_replications must be at least 1");
    if (x0_law.kind == InitialLaw::Kind::PointMass && !(x0_law.x0 > 0.0))
        throw DomainError("SimConfig: x0 must be positive");
    if (x0_law.kind == InitialLaw::Kind::Gamma && !(x0_law.u > 0.0 && x0_law.v > 0.0))
        throw DomainError("SimConfig: initial Gamma law needs u, v > 0");
    if (steps_of(horizon, dt) - steps_of(burn_in, dt) < 1) throw DomainError("SimConfig: empty averaging window");
}

PathStats simulate_reflected(const ModelParams& p, double a, const SimConfig& cfg, double price) {
    if (!(a > 0.0)) throw DomainError("simulate_reflected: barrier must be positive");
    return simulate_policy(p, Policy::reflected(a), cfg, price);
}

PathStats simulate_regular(const ModelParams& p, double theta, const SimConfig& cfg, double price) {
    if (!(theta >= 0.0)) throw DomainError("simulate_regular: theta must be nonnegative");
    return simulate_policy(p, Policy::regular(theta), cfg, price);
}

std::vector<ReflectionStep> trace_reflected(const ModelParams& p, double a, const SimConfig& cfg,
                                            std::uint64_t path_index, long long n_steps) {
    NormalStream rng(stream_key(cfg.seed, 0x51u, path_index));
    double x = draw_initial(cfg.x0_law, rng.eng);
    std::vector<ReflectionStep> out;
    out.reserve(static_cast<std::size_t>(n_steps) + 1);
    out.push_back({x, std::max(x, a), std::max(0.0, a - x)});
    x = std::max(x, a);
    const double sqdt = std::sqrt(cfg.dt);
    for (long long n = 0; n < n_steps; ++n) {
        double prop = x * (1.0 - p.delta * cfg.dt + p.sigma * sqdt * rng());
        ReflectionStep s{prop, prop < a ? a : prop, prop < a ? a - prop : 0.0};
        x = s.state;
        out.push_back(s);
    }
    return out;
}

RewardEstimate estimate_reward(const ModelParams& p, const Policy& policy, double price, const SimConfig& cfg) {
    auto st = policy.kind == Policy::Kind::Reflected ? simulate_reflected(p, policy.level, cfg, price)
                                                     : simulate_regular(p, policy.level, cfg, price);
    return {st.time_avg_reward, st.reward_ci_halfwidth, st.n_paths};
}

double deviation_barrier(const ModelParams& p, const EquilibriumSpec& eq) {
    double m_beta = 0.0;
    switch (eq.kind) {
        case EquilibriumSpec::Kind::CceSingular:
        case EquilibriumSpec::Kind::CceRegular: m_beta = gamma_moment(eq.law, p.beta); break;
        case EquilibriumSpec::Kind::Nash: {
            auto ne = nash_solve(p);
            if (ne.status != Status::Unique) throw NoNashEquilibrium("epsilon: Nash equilibrium is not unique");
            m_beta = std::pow(*ne.theta, p.beta);
            break;
        }
        case EquilibriumSpec::Kind::CentralPlanner: {
            auto mfc = mfc_solve(p);
            if (mfc.status != Status::Unique) throw DomainError("epsilon: MFC optimum is not unique");
            m_beta = std::pow(*mfc.theta, p.beta);
            break;
        }
    }
    return deviation_constant_K(p) * std::pow(m_beta, 1.0 / (1.0 - p.alpha));
}

std::vector<EpsilonEstimate> estimate_epsilon_n(const ModelParams& p, const EquilibriumSpec& eq,
                                                const std::vector<int>& n_players_list, const SimConfig& cfg) {
    require_valid(p);
    cfg.check();
    if (n_players_list.empty()) throw DomainError("estimate_epsilon_n: empty list of N");
    for (int n : n_players_list)
        if (n < 2) throw DomainError("estimate_epsilon_n: N must be at least 2");

    const double a_dev = deviation_barrier(p, eq);
    const bool cce = eq.kind == EquilibriumSpec::Kind::CceSingular || eq.kind == EquilibriumSpec::Kind::CceRegular;
    const bool regular = eq.kind == EquilibriumSpec::Kind::CceRegular;
    double fixed_level = 0.0;
    if (eq.kind == EquilibriumSpec::Kind::Nash) fixed_level = *nash_solve(p).barrier;
    if (eq.kind == EquilibriumSpec::Kind::CentralPlanner) fixed_level = *mfc_solve(p).barrier;

    const int n_max = *std::max_element(n_players_list.begin(), n_players_list.end());
    const int n_others = n_max - 1;
    const std::size_t n_list = n_players_list.size();
    const long long n_steps = steps_of(cfg.horizon, cfg.dt);
    const long long burn = steps_of(cfg.burn_in, cfg.dt);
    const double window = static_cast<double>(n_steps - burn);
    const double sqdt = std::sqrt(cfg.dt);
    const double drift = p.delta * cfg.dt;
    const double vol = p.sigma * sqdt;
    const double td = 2.0 * p.delta;

    struct Rep {
        std::vector<double> dev, rec;
    };
    std::vector<Rep> reps(static_cast<std::size_t>(cfg.n_replications));

    parallel_for(cfg.n_replications, cfg.n_threads, [&](int r) {
        const auto ur = static_cast<std::uint64_t>(r);
        double theta = 0.0;
        if (cce) {
            std::mt19937_64 eng(stream_key(cfg.seed, 0xe1u, ur));
            boost::random::gamma_distribution<double> g(eq.law.u, eq.law.v);
            theta = g(eng);
        }
        // recommended policy: a reflection level, or the regular drift target θ
        const double level = cce ? (regular ? theta : td * theta / (td + p.sigma2())) : fixed_level;
        const double floor = 1e-12 * level;
        const double reg_dnu = p.delta * level * cfg.dt;

        auto step_rec = [&](double x, double z, double& dnu) {
            if (regular) {
                x = x + drift * (level - x) + vol * x * z;
                if (x < floor) x = floor;
                dnu = reg_dnu;
                return x;
            }
            double prop = x * (1.0 - drift + vol * z);
            if (prop < level) {
                dnu = level - prop;
                return level;
            }
            dnu = 0.0;
            return prop;
        };

        std::vector<NormalStream> others;
        others.reserve(static_cast<std::size_t>(n_others));
        std::vector<double> xs(static_cast<std::size_t>(n_others));
        for (int j = 0; j < n_others; ++j) {
            others.emplace_back(stream_key(cfg.seed, 0xe2u, ur, static_cast<std::uint64_t>(j)));
            double x0 = draw_initial(cfg.x0_law, others.back().eng);
            xs[static_cast<std::size_t>(j)] = regular ? x0 : std::max(x0, level);
        }
        // player 1 uses one noise stream for both the recommended and the deviating control
        NormalStream own(stream_key(cfg.seed, 0xe3u, ur));
        double x1 = draw_initial(cfg.x0_law, own.eng);
        double xr = regular ? x1 : std::max(x1, level);
        double xd = std::max(x1, a_dev);
        double cost_r = 0.0, cost_d = 0.0;
        std::vector<double> acc_r(n_list, 0.0), acc_d(n_list, 0.0);
        std::vector<double> prefix(static_cast<std::size_t>(n_others) + 1, 0.0);

        for (long long n = 0; n < n_steps; ++n) {
            double run = 0.0;
            for (int j = 0; j < n_others; ++j) {
                double dn;
                double& x = xs[static_cast<std::size_t>(j)];
                x = step_rec(x, others[static_cast<std::size_t>(j)](), dn);
                run += x;
                prefix[static_cast<std::size_t>(j) + 1] = run;
            }
            double z = own();
            double dnr;
            xr = step_rec(xr, z, dnr);
            double prop = xd * (1.0 - drift + vol * z);
            double dnd = prop < a_dev ? a_dev - prop : 0.0;
            xd = prop < a_dev ? a_dev : prop;
            if (!std::isfinite(run) || !std::isfinite(xr) || !std::isfinite(xd)) throw UnstableStep(r, n);
            if (n < burn) continue;
            double pr = std::exp(p.alpha * std::log(xr));
            double pd = std::exp(p.alpha * std::log(xd));
            cost_r += dnr;
            cost_d += dnd;
            for (std::size_t k = 0; k < n_list; ++k) {
                int m = n_players_list[k] - 1;
                double y = std::exp(p.beta * std::log(prefix[static_cast<std::size_t>(m)] / m));
                acc_r[k] += pr * y;
                acc_d[k] += pd * y;
            }
        }
        Rep& out = reps[static_cast<std::size_t>(r)];
        for (std::size_t k = 0; k < n_list; ++k) {
            out.rec.push_back(acc_r[k] / window - p.q * cost_r / (window * cfg.dt));
            out.dev.push_back(acc_d[k] / window - p.q * cost_d / (window * cfg.dt));
        }
    });

    std::vector<EpsilonEstimate> res;
    for (std::size_t k = 0; k < n_list; ++k) {
        std::vector<double> gaps, dev, rec;
        for (const auto& rp : reps) {
            gaps.push_back(rp.dev[k] - rp.rec[k]);
            dev.push_back(rp.dev[k]);
            rec.push_back(rp.rec[k]);
        }
        EpsilonEstimate e;
        e.n_players = n_players_list[k];
        e.gap = mean_of(gaps);
        e.ci_halfwidth = ci95(gaps, e.gap);
        e.deviation_payoff = mean_of(dev);
        e.recommendation_payoff = mean_of(rec);
        e.n_replications = cfg.n_replications;
        res.push_back(e);
    }
    return res;
}

double fitted_log_slope(const std::vector<EpsilonEstimate>& est) {
    if (est.size() < 2) throw DomainError("fitted_log_slope: need at least two points");
    double n = static_cast<double>(est.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& e : est) {
        sx += std::log(static_cast<double>(e.n_players));
        sy += e.gap;
    }
    double mx = sx / n, my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& e : est) {
        double dx = std::log(static_cast<double>(e.n_players)) - mx;
        sxy += dx * (e.gap - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

std::vector<double> nonincreasing_envelope(const std::vector<EpsilonEstimate>& est) {
    struct Block {
        double value, weight;
        int count;
    };
    std::vector<Block> blocks;
    for (const auto& e : est) {
        double w = e.ci_halfwidth > 0.0 ? 1.0 / (e.ci_halfwidth * e.ci_halfwidth) : 1.0;
        blocks.push_back({e.gap, w, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].value < blocks.back().value) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            double w2 = a.weight + b.weight;
            a.value = (a.value * a.weight + b.value * b.weight) / w2;
            a.weight = w2;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    for (const auto& b : blocks) out.insert(out.end(), static_cast<std::size_t>(b.count), b.value);
    return out;
}

double analytic_moment(const ModelParams& p, const AnalyticLaw& law, double k) {
    if (law.kind == AnalyticLaw::Kind::Reflected) return stationary_moment({law.level, p}, k);
    // inverse-gamma kernel: shape γ+1, scale γθ
    double g = p.gamma_index();
    if (!(g + 1.0 - k > 0.0)) throw DomainError("analytic_moment: moment of order k is infinite");
    if (k == 0.0) return 1.0;
    return std::exp(k * std::log(g * law.level) + log_gamma_ratio(g + 1.0, -k));
}

std::vector<MomentError> ks_moment_check(const ModelParams& p, const PathStats& empirical, const AnalyticLaw& law,
                                         std::vector<double> ks) {
    if (ks.empty()) ks = {0.5, 1.0, p.alpha, p.alpha + p.beta};
    std::vector<MomentError> out;
    for (double k : ks) {
        MomentError e;
        e.k = k;
        e.analytic = analytic_moment(p, law, k);
        if (k == 0.0) {
            e.empirical = 1.0;
        } else {
            auto it = empirical.time_avg_moments.find(k);
            if (it == empirical.time_avg_moments.end())
                throw DomainError("ks_moment_check: exponent was not accumulated");
            e.empirical = it->second;
        }
        e.rel_error = std::abs(e.empirical - e.analytic) / e.analytic;
        out.push_back(e);
    }
    return out;
}

}  // namespace emfg
