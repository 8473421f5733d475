#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "emfg/equilibria.hpp"
#include "emfg/model.hpp"

namespace emfg {

struct InitialLaw {
    enum class Kind { PointMass, Gamma } kind = Kind::PointMass;
    double x0 = 1.0;
    double u = 1.0;
    double v = 1.0;
};

struct SimConfig {
    double dt = 1e-3;
    double horizon = 2000.0;
    double burn_in = 200.0;
    int n_paths = 64;
    std::uint64_t seed = 20240501;
    InitialLaw x0_law;
    int n_replications = 200;  // epsilon harness only
    int n_threads = 0;         // 0: hardware concurrency
    int n_checkpoints = 10;    // control snapshots per path
    std::vector<double> moment_exponents;  // empty: {0.5, α, 1, α+β, 2}

    void check() const;
};

struct PathStats {
    double time_avg_reward = 0.0;
    std::map<double, double> time_avg_moments;
    double terminal_control = 0.0;
    double empirical_mean = 0.0;

    int n_paths = 0;
    double reward_ci_halfwidth = 0.0;
    std::vector<double> path_rewards;
    std::vector<double> path_means;
    double min_state_after_start = 0.0;
    // control averaged over paths at evenly spaced times up to T
    std::vector<double> control_checkpoints;
    bool control_monotone = true;
};

class UnstableStep : public std::runtime_error {
public:
    UnstableStep(long long path, long long step)
        : std::runtime_error("nonfinite state at path " + std::to_string(path) + ", step " + std::to_string(step)),
          path_index(path),
          step_index(step) {}
    long long path_index;
    long long step_index;
};

PathStats simulate_reflected(const ModelParams& p, double a, const SimConfig& cfg, double price = 1.0);
PathStats simulate_regular(const ModelParams& p, double theta, const SimConfig& cfg, double price = 1.0);

// Single-path step record for the reflection scheme.
struct ReflectionStep {
    double proposal = 0.0;
    double state = 0.0;
    double d_control = 0.0;
};
std::vector<ReflectionStep> trace_reflected(const ModelParams& p, double a, const SimConfig& cfg,
                                            std::uint64_t path_index, long long n_steps);

struct Policy {
    enum class Kind { Reflected, Regular } kind = Kind::Reflected;
    double level = 1.0;  // barrier a, or θ for the regular drift

    static Policy reflected(double a) { return {Kind::Reflected, a}; }
    static Policy regular(double theta) { return {Kind::Regular, theta}; }
};

struct RewardEstimate {
    double mean = 0.0;
    double ci_halfwidth = 0.0;
    int n_paths = 0;
};

RewardEstimate estimate_reward(const ModelParams& p, const Policy& policy, double price, const SimConfig& cfg);

struct EquilibriumSpec {
    enum class Kind { CceSingular, CceRegular, Nash, CentralPlanner } kind = Kind::Nash;
    GammaLaw law;  // CCE kinds only
};

struct EpsilonEstimate {
    int n_players = 2;
    double gap = 0.0;
    double ci_halfwidth = 0.0;
    double deviation_payoff = 0.0;
    double recommendation_payoff = 0.0;
    int n_replications = 0;
};

// Barrier of the mean-field best response to the law's E[θ^β].
double deviation_barrier(const ModelParams& p, const EquilibriumSpec& eq);

std::vector<EpsilonEstimate> estimate_epsilon_n(const ModelParams& p, const EquilibriumSpec& eq,
                                                const std::vector<int>& n_players_list, const SimConfig& cfg);

// Least-squares slope of gap against log N.
double fitted_log_slope(const std::vector<EpsilonEstimate>& est);
// Nonincreasing least-squares fit (pool adjacent violators), weights 1/ci².
std::vector<double> nonincreasing_envelope(const std::vector<EpsilonEstimate>& est);

struct AnalyticLaw {
    enum class Kind { Reflected, Regular } kind = Kind::Reflected;
    double level = 1.0;  // barrier a, or θ
};

struct MomentError {
    double k = 0.0;
    double empirical = 0.0;
    double analytic = 0.0;
    double rel_error = 0.0;
};

double analytic_moment(const ModelParams& p, const AnalyticLaw& law, double k);
std::vector<MomentError> ks_moment_check(const ModelParams& p, const PathStats& empirical, const AnalyticLaw& law,
                                         std::vector<double> ks = {});

}  // namespace emfg
