#include "emfg/cce_scan.hpp"

#include <cmath>
#include <limits>

#include "emfg/optimize.hpp"
#include "emfg/special.hpp"

namespace emfg {

void GridSpec::check() const {
    if (!(u_min > 0.0 && v_min > 0.0)) throw DomainError("GridSpec: bounds must be positive");
    if (!(u_min < u_max && v_min < v_max)) throw DomainError("GridSpec: min must be below max");
    if (nu < 2 || nv < 2) throw DomainError("GridSpec: at least two points per axis");
}

namespace {

double axis(double lo, double hi, int n, int i, Spacing s) {
    if (i == 0) return lo;
    if (i == n - 1) return hi;
    double t = static_cast<double>(i) / (n - 1);
    if (s == Spacing::Linear) return lo + t * (hi - lo);
    return std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
}

}  // namespace

double GridSpec::u_at(int i) const { return axis(u_min, u_max, nu, i, spacing); }
double GridSpec::v_at(int j) const { return axis(v_min, v_max, nv, j, spacing); }

std::vector<RegionCell> scan_region(const ModelParams& p, const GridSpec& grid, CceClass cls, bool outperform) {
    require_valid(p);
    grid.check();
    double nash_reward = 0.0;
    if (outperform) {
        auto ne = nash_solve(p);
        if (ne.status != Status::Unique)
            throw NoNashEquilibrium("scan_region: outperformance undefined without a unique Nash equilibrium");
        nash_reward = *ne.reward;
    }
    std::vector<RegionCell> cells;
    cells.reserve(static_cast<std::size_t>(grid.nu) * grid.nv);
    for (int i = 0; i < grid.nu; ++i) {
        for (int j = 0; j < grid.nv; ++j) {
            RegionCell c;
            c.u = grid.u_at(i);
            c.v = grid.v_at(j);
            auto m = gamma_moments_triple(p, {c.u, c.v});
            auto chk = cce_check(p, m, cls);
            c.exists_cce = chk.holds;
            c.slack = chk.slack;
            c.reward = reward_class(p, m, cls);
            c.outperforms = outperform && c.exists_cce && c.reward - nash_reward >= 0.0;
            cells.push_back(c);
        }
    }
    return cells;
}

std::string_view to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::Found: return "Found";
        case SearchStatus::NotFound: return "NotFound";
        case SearchStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

std::string_view to_string(UStarKind k) {
    switch (k) {
        case UStarKind::Finite: return "Finite";
        case UStarKind::Infinite: return "Infinite";
        case UStarKind::Zero: return "Zero";
    }
    return "?";
}

BestCce best_cce(const ModelParams& p, CceClass cls, const GridSpec& bounds) {
    require_valid(p);
    bounds.check();
    BestCce out;

    if (classify_regime(p) == Regime::Critical) {
        // Feasibility no longer depends on v and the reward is (c − c_1)·u·v,
        // so any feasible u makes the reward unbounded in v.
        auto c = cce_constants(p);
        if (c.c_class(cls) - c.c_one <= 0.0) return out;
        for (int i = 0; i < bounds.nu; ++i) {
            if (ustar_holds(p, cls, bounds.u_at(i))) {
                out.status = SearchStatus::Unbounded;
                out.u = bounds.u_at(i);
                out.reward = std::numeric_limits<double>::infinity();
                return out;
            }
        }
        return out;
    }

    auto cells = scan_region(p, bounds, cls, false);
    const RegionCell* best = nullptr;
    for (const auto& c : cells)
        if (c.exists_cce && (!best || c.reward > best->reward)) best = &c;
    if (!best) return out;

    out.status = SearchStatus::Found;
    out.u = best->u;
    out.v = best->v;
    out.reward = best->reward;
    out.slack = best->slack;
    out.coarse_reward = best->reward;

    constexpr double inf = std::numeric_limits<double>::infinity();
    auto objective = [&](const std::array<double, 2>& x) {
        if (std::abs(x[0]) > 600.0 || std::abs(x[1]) > 600.0) return inf;
        GammaLaw law{std::exp(x[0]), std::exp(x[1])};
        auto m = gamma_moments_triple(p, law);
        if (!m.valid() || !std::isfinite(m.m_ab) || !std::isfinite(m.m_beta)) return inf;
        if (!cce_check(p, m, cls).holds) return inf;
        return -reward_class(p, m, cls);
    };

    auto step_of = [&](double lo, double hi, int n) {
        if (bounds.spacing == Spacing::Log) return (std::log(hi) - std::log(lo)) / (n - 1);
        return std::log1p((hi - lo) / (n - 1) / lo);
    };
    std::array<double, 2> step{step_of(bounds.u_min, bounds.u_max, bounds.nu),
                               step_of(bounds.v_min, bounds.v_max, bounds.nv)};
    std::array<double, 2> x0{std::log(out.u), std::log(out.v)};
    auto nm = nelder_mead_2d(objective, x0, step, 1e-10, 500);
    out.iterations = nm.iterations;
    if (std::isfinite(nm.fx) && -nm.fx >= out.reward) {
        out.u = std::exp(nm.x[0]);
        out.v = std::exp(nm.x[1]);
        auto m = gamma_moments_triple(p, {out.u, out.v});
        out.reward = reward_class(p, m, cls);
        out.slack = cce_check(p, m, cls).slack;
    }
    return out;
}

double ustar_slack(const ModelParams& p, CceClass cls, double u) {
    auto c = cce_constants(p);
    double lhs = c.c_beta * std::exp(log_gamma_ratio(u, 1.0 - p.alpha) / (1.0 - p.alpha));
    return (c.c_class(cls) - c.c_one) * u - lhs;
}

bool ustar_holds(const ModelParams& p, CceClass cls, double u) {
    auto c = cce_constants(p);
    return ustar_slack(p, cls, u) >= -kZeroSlackTolerance * std::abs(c.c_class(cls) * u);
}

UStar u_star(const ModelParams& p, CceClass cls) {
    require_valid(p);
    if (classify_regime(p) != Regime::Critical) throw DomainError("u_star: requires beta = 1 - alpha");

    constexpr double u_lo = 1e-12;
    constexpr int per_decade = 40;
    UStar out;
    if (!ustar_holds(p, cls, u_lo)) {
        out.kind = UStarKind::Zero;
        return out;
    }
    double l_lo = std::log(u_lo);
    double l_hi = std::log(kUCap);
    int n = static_cast<int>(std::ceil((std::log10(kUCap) - std::log10(u_lo)) * per_decade));
    double good = l_lo;
    for (int i = 1; i <= n; ++i) {
        double l = i == n ? l_hi : l_lo + (l_hi - l_lo) * i / n;
        if (ustar_holds(p, cls, std::exp(l))) {
            good = l;
            continue;
        }
        double bad = l;
        while (bad - good > 1e-14) {
            double mid = 0.5 * (good + bad);
            if (mid == good || mid == bad) break;
            if (ustar_holds(p, cls, std::exp(mid)))
                good = mid;
            else
                bad = mid;
        }
        out.value = std::exp(good);
        return out;
    }
    out.kind = UStarKind::Infinite;
    return out;
}

std::vector<SweepPoint> sweep(const ModelParams& tmpl, SweepVariable var, double lo, double hi, int n_points,
                              const GridSpec& bounds) {
    if (n_points < 1) throw DomainError("sweep: n_points must be positive");
    std::vector<SweepPoint> pts;
    pts.reserve(n_points);
    for (int i = 0; i < n_points; ++i) {
        double val = n_points == 1 ? lo : (i == n_points - 1 ? hi : lo + (hi - lo) * i / (n_points - 1));
        ModelParams p = tmpl;
        (var == SweepVariable::Sigma ? p.sigma : p.beta) = val;
        SweepPoint sp;
        sp.swept_value = val;
        auto rep = validate(p);
        if (!rep.ok) {
            sp.valid = false;
            for (const auto& v : rep.violations) sp.violations += (sp.violations.empty() ? "" : "; ") + v;
            pts.push_back(sp);
            continue;
        }
        auto mfc = mfc_solve(p);
        auto ne = nash_solve(p);
        sp.mfc_status = mfc.status;
        sp.nash_status = ne.status;
        sp.mfc_reward = mfc.reward;
        sp.nash_reward = ne.reward;

        auto bs = best_cce(p, CceClass::Singular, bounds);
        auto br = best_cce(p, CceClass::Regular, bounds);
        sp.singular_status = bs.status;
        sp.regular_status = br.status;
        if (bs.status == SearchStatus::Found) sp.best_cce_singular = bs.reward;
        if (br.status == SearchStatus::Found) sp.best_cce_regular = br.reward;
        if (ne.status == Status::Unique) {
            if (sp.best_cce_singular) sp.singular_outperforms = *sp.best_cce_singular >= *ne.reward;
            if (sp.best_cce_regular) sp.regular_outperforms = *sp.best_cce_regular >= *ne.reward;
        }
        pts.push_back(sp);
    }
    return pts;
}

}  // namespace emfg
