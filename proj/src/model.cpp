#include "emfg/model.hpp"

#include <cmath>
#include <sstream>

namespace emfg {

Regime classify_regime(double alpha, double beta, double tol) {
    double d = alpha + beta - 1.0;
    if (std::abs(d) <= tol) return Regime::Critical;
    return d < 0.0 ? Regime::Subcritical : Regime::Supercritical;
}

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "Subcritical";
        case Regime::Critical: return "Critical";
        case Regime::Supercritical: return "Supercritical";
    }
    return "?";
}

ValidationReport validate(const ModelParams& p) {
    ValidationReport rep;
    auto fail = [&](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };
    if (!(p.delta > 0.0)) fail("delta>0 fails");
    if (!(p.sigma > 0.0)) fail("sigma>0 fails");
    if (!(p.q > 0.0)) fail("q>0 fails");
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) fail("0<alpha<1 fails");
    if (!(p.beta > 0.0 && p.beta < 1.0)) fail("0<beta<1 fails");
    if (!(2.0 * p.delta - p.sigma * p.sigma > 0.0)) fail("2δ−σ²>0 fails");
    return rep;
}

void require_valid(const ModelParams& p) {
    auto rep = validate(p);
    if (rep.ok) return;
    std::ostringstream os;
    os << "invalid parameters:";
    for (const auto& v : rep.violations) os << ' ' << v << ';';
    throw DomainError(os.str());
}

double stationary_density(const BarrierPolicy& policy, double x) {
    if (!(x > 0.0)) throw DomainError("stationary_density: x must be positive");
    const auto& p = policy.params;
    double a = policy.a;
    if (x < a) return 0.0;
    double s2 = p.sigma2();
    double g = p.gamma_index();
    // ((2δ+σ²)/σ²) a^{g+1} x^{-g-2}, evaluated as a power of the ratio a/x
    return ((2.0 * p.delta + s2) / s2) / a * std::pow(a / x, g + 2.0);
}

double stationary_moment(const BarrierPolicy& policy, double k) {
    if (!(k >= 0.0 && k <= 2.0)) throw DomainError("stationary_moment: k must lie in [0,2]");
    const auto& p = policy.params;
    double s2 = p.sigma2();
    double den = 2.0 * p.delta + s2 * (1.0 - k);
    if (!(den > 0.0)) throw DomainError("stationary_moment: moment of order k is infinite");
    if (k == 0.0) return 1.0;
    return (2.0 * p.delta + s2) / den * std::pow(policy.a, k);
}

double stationary_mean(const BarrierPolicy& policy) {
    return policy.params.mean_factor() * policy.a;
}

double ergodic_reward_C(const ModelParams& p, double a, double price) {
    double s2 = p.sigma2();
    return (2.0 * p.delta + s2) *
           (price * std::pow(a, p.alpha) / (2.0 * p.delta + s2 * (1.0 - p.alpha)) - 0.5 * p.q * a);
}

double optimal_barrier(const ModelParams& p, double price, double lambda) {
    double gap = p.q * p.delta - lambda;
    if (!(gap > 0.0)) throw InfeasibleMultiplier("optimal_barrier: qδ−λ must be positive");
    double s2 = p.sigma2();
    double lc = std::log(2.0 * p.alpha * p.delta / (2.0 * p.delta + s2 * (1.0 - p.alpha)));
    return std::exp((lc + std::log(price) - std::log(gap)) / (1.0 - p.alpha));
}

double deviation_constant_K(const ModelParams& p) {
    double s2 = p.sigma2();
    double base = 2.0 * p.alpha / (p.q * (2.0 * p.delta + s2 * (1.0 - p.alpha)));
    return std::exp(std::log(base) / (1.0 - p.alpha));
}

}  // namespace emfg
