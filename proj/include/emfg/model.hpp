#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emfg {

struct ModelParams {
    double delta = 0.0;  // mean-reversion rate
    double sigma = 0.0;  // volatility
    double q = 0.0;      // unit control cost
    double alpha = 0.0;  // own-state exponent
    double beta = 0.0;   // interaction exponent

    double sigma2() const { return sigma * sigma; }
    // (2δ+σ²)/(2δ): ratio between the stationary mean and the barrier
    double mean_factor() const { return (2.0 * delta + sigma2()) / (2.0 * delta); }
    // 2δ/σ²
    double gamma_index() const { return 2.0 * delta / sigma2(); }
};

inline constexpr double kRegimeTolerance = 1e-12;

enum class Regime { Subcritical, Critical, Supercritical };

Regime classify_regime(double alpha, double beta, double tol = kRegimeTolerance);
inline Regime classify_regime(const ModelParams& p, double tol = kRegimeTolerance) {
    return classify_regime(p.alpha, p.beta, tol);
}
std::string_view to_string(Regime r);

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

ValidationReport validate(const ModelParams& p);

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class InfeasibleMultiplier : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Throws DomainError with the joined violation list when params are invalid.
void require_valid(const ModelParams& p);

struct BarrierPolicy {
    double a = 1.0;
    ModelParams params;
};

double stationary_density(const BarrierPolicy& policy, double x);
double stationary_moment(const BarrierPolicy& policy, double k);
double stationary_mean(const BarrierPolicy& policy);

// C(a, p): long-run reward of the barrier policy at level a with price p.
double ergodic_reward_C(const ModelParams& p, double a, double price);

// a*(p, λ), argmax of the Lagrangian barrier problem.
double optimal_barrier(const ModelParams& p, double price, double lambda);

double deviation_constant_K(const ModelParams& p);

}  // namespace emfg
