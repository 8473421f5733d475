#include "emfg/equilibria.hpp"

#include <cmath>

#include "emfg/special.hpp"

namespace emfg {

std::string_view to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::MFC: return "MFC";
        case EquilibriumKind::Nash: return "Nash";
        case EquilibriumKind::CceRegular: return "CCE_regular";
        case EquilibriumKind::CceSingular: return "CCE_singular";
    }
    return "?";
}

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Unique: return "Unique";
        case Status::InfinitelyMany: return "InfinitelyMany";
        case Status::NonExistent: return "NonExistent";
        case Status::IllPosed: return "IllPosed";
        case Status::NullOptimal: return "NullOptimal";
    }
    return "?";
}

std::string_view to_string(CceClass c) { return c == CceClass::Regular ? "regular" : "singular"; }

MomentTriple MomentTriple::point_mass(const ModelParams& p, double theta) {
    return {std::pow(theta, p.beta), theta, std::pow(theta, p.alpha + p.beta)};
}

double mfc_coefficient(const ModelParams& p) {
    double s2 = p.sigma2();
    double td = 2.0 * p.delta;
    return (td + s2) / (td + s2 * (1.0 - p.alpha)) * std::pow(td / (td + s2), p.alpha);
}

double mfc_f(const ModelParams& p, double theta) {
    return mfc_coefficient(p) * std::pow(theta, p.alpha + p.beta) - p.q * p.delta * theta;
}

double mfc_f_prime(const ModelParams& p, double theta) {
    double ab = p.alpha + p.beta;
    return ab * mfc_coefficient(p) * std::pow(theta, ab - 1.0) - p.q * p.delta;
}

double lagrange_multiplier(const ModelParams& p, double theta) {
    double s2 = p.sigma2();
    double td = 2.0 * p.delta;
    double coef = std::pow(p.mean_factor(), 1.0 - p.alpha) * (td * p.alpha / (td + s2 * (1.0 - p.alpha)));
    return p.q * p.delta - coef * std::pow(theta, p.alpha + p.beta - 1.0);
}

EquilibriumReport mfc_solve(const ModelParams& p, double regime_tol) {
    require_valid(p);
    EquilibriumReport rep;
    rep.kind = EquilibriumKind::MFC;
    rep.inputs = p;
    switch (classify_regime(p, regime_tol)) {
        case Regime::Supercritical:
            rep.status = Status::IllPosed;
            return rep;
        case Regime::Critical:
            if (mfc_coefficient(p) < p.q * p.delta) {
                // null control: no pushing, the state decays to zero
                rep.status = Status::NullOptimal;
                rep.barrier = 0.0;
                rep.theta = 0.0;
                rep.reward = 0.0;
            } else {
                rep.status = Status::IllPosed;
            }
            return rep;
        case Regime::Subcritical: break;
    }
    double s2 = p.sigma2();
    double ab = p.alpha + p.beta;
    double expo = 1.0 / (1.0 - ab);
    double base = std::log(2.0 * ab / (p.q * (2.0 * p.delta + s2 * (1.0 - p.alpha))));
    double a_hat = std::exp((base + p.beta * std::log(p.mean_factor())) * expo);
    rep.status = Status::Unique;
    rep.barrier = a_hat;
    rep.theta = p.mean_factor() * a_hat;
    rep.reward = mfc_f(p, *rep.theta);
    return rep;
}

double knife_edge_residual(double delta, double sigma, double q, double alpha) {
    double r = sigma * sigma / (2.0 * delta);
    double rhs = std::exp((std::log(q * delta / alpha) + std::log1p((1.0 - alpha) * r)) / (1.0 - alpha));
    return 1.0 + r - rhs;
}

EquilibriumReport nash_solve(const ModelParams& p, double regime_tol) {
    require_valid(p);
    EquilibriumReport rep;
    rep.kind = EquilibriumKind::Nash;
    rep.inputs = p;
    if (classify_regime(p, regime_tol) == Regime::Critical) {
        double lhs = 1.0 + p.sigma2() / (2.0 * p.delta);
        double res = knife_edge_residual(p.delta, p.sigma, p.q, p.alpha);
        rep.status = std::abs(res) <= kKnifeEdgeTolerance * lhs ? Status::InfinitelyMany : Status::NonExistent;
        return rep;
    }
    double s2 = p.sigma2();
    double expo = 1.0 / (1.0 - p.alpha - p.beta);
    double lk = std::log(2.0 * p.alpha / (p.q * (2.0 * p.delta + s2 * (1.0 - p.alpha))));
    double lmf = std::log(p.mean_factor());
    rep.status = Status::Unique;
    rep.barrier = std::exp(p.beta * lmf * expo + lk * expo);
    rep.theta = std::exp((1.0 - p.alpha) * lmf * expo + lk * expo);
    rep.reward = mfc_f(p, *rep.theta);
    return rep;
}

CceConstants cce_constants(const ModelParams& p) {
    double s2 = p.sigma2();
    double g = p.gamma_index();
    CceConstants c;
    c.c_beta = (2.0 * p.delta + s2) * p.q / 2.0 * deviation_constant_K(p) * (1.0 - p.alpha) / p.alpha;
    c.c_one = p.delta * p.q;
    c.c_ab = std::exp(p.alpha * std::log(g) + log_gamma_ratio(g + 1.0, -p.alpha));
    c.c_ab_tilde = mfc_coefficient(p);
    return c;
}

double reward_deviator(const ModelParams& p, const MomentTriple& m) {
    return cce_constants(p).c_beta * std::pow(m.m_beta, 1.0 / (1.0 - p.alpha));
}

double reward_regular(const ModelParams& p, const MomentTriple& m) {
    auto c = cce_constants(p);
    return c.c_ab * m.m_ab - c.c_one * m.m_one;
}

double reward_singular(const ModelParams& p, const MomentTriple& m) {
    auto c = cce_constants(p);
    return c.c_ab_tilde * m.m_ab - c.c_one * m.m_one;
}

double reward_class(const ModelParams& p, const MomentTriple& m, CceClass c) {
    return c == CceClass::Regular ? reward_regular(p, m) : reward_singular(p, m);
}

CceCheck cce_check(const ModelParams& p, const MomentTriple& m, CceClass cls) {
    auto c = cce_constants(p);
    double lhs = c.c_beta * std::pow(m.m_beta, 1.0 / (1.0 - p.alpha)) + c.c_one * m.m_one;
    CceCheck out;
    out.rhs = c.c_class(cls) * m.m_ab;
    out.slack = out.rhs - lhs;
    out.normalized = out.slack / out.rhs;
    out.holds = out.slack >= -kZeroSlackTolerance * std::abs(out.rhs);
    return out;
}

double gamma_moment(const GammaLaw& law, double k) {
    if (!(law.u > 0.0 && law.v > 0.0)) throw DomainError("gamma_moment: u and v must be positive");
    if (!(k >= 0.0)) throw DomainError("gamma_moment: k must be nonnegative");
    if (k == 0.0) return 1.0;
    return std::exp(log_gamma_ratio(law.u, k) + k * std::log(law.v));
}

MomentTriple gamma_moments_triple(const ModelParams& p, const GammaLaw& law) {
    return {gamma_moment(law, p.beta), law.u * law.v, gamma_moment(law, p.alpha + p.beta)};
}

Outperformance outperforms_nash(const ModelParams& p, const GammaLaw& law, CceClass c) {
    auto ne = nash_solve(p);
    if (ne.status != Status::Unique)
        throw NoNashEquilibrium("outperforms_nash: no unique Nash equilibrium at alpha+beta=1");
    Outperformance out;
    out.margin = reward_class(p, gamma_moments_triple(p, law), c) - *ne.reward;
    out.holds = out.margin >= 0.0;
    return out;
}

double alpha_bar_solve(double delta, double sigma, double q) {
    constexpr int n = 1000;
    auto res = [&](double a) { return knife_edge_residual(delta, sigma, q, a); };
    double lo = kAlphaBarLo;
    double rlo = res(lo);
    for (int i = 1; i < n; ++i) {
        double hi = kAlphaBarLo + (kAlphaBarHi - kAlphaBarLo) * i / (n - 1);
        double rhi = res(hi);
        if (rlo == 0.0) return lo;
        if (std::signbit(rlo) != std::signbit(rhi)) {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                double rm = res(mid);
                if (std::abs(rm) < 1e-12) return mid;
                if (std::signbit(rm) == std::signbit(rlo)) {
                    lo = mid;
                    rlo = rm;
                } else {
                    hi = mid;
                }
            }
            double mid = 0.5 * (lo + hi);
            if (std::abs(res(mid)) < 1e-12) return mid;
            throw NoRoot("alpha_bar_solve: bisection stalled above the residual tolerance");
        }
        lo = hi;
        rlo = rhi;
    }
    throw NoRoot("alpha_bar_solve: no sign change of the knife-edge residual");
}

}  // namespace emfg
