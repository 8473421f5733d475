#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emfg/equilibria.hpp"
#include "emfg/model.hpp"

namespace emfg {

enum class Spacing { Linear, Log };

struct GridSpec {
    double u_min = 1e-2;
    double u_max = 1e2;
    double v_min = 1e-2;
    double v_max = 1e2;
    int nu = 200;
    int nv = 200;
    Spacing spacing = Spacing::Log;

    void check() const;
    double u_at(int i) const;
    double v_at(int j) const;
};

struct RegionCell {
    double u = 0.0;
    double v = 0.0;
    bool exists_cce = false;
    bool outperforms = false;
    double reward = 0.0;
    double slack = 0.0;
};

// Row-major: u outer, v inner. With outperform=false the outperforms column is
// left false and no Nash baseline is needed.
std::vector<RegionCell> scan_region(const ModelParams& p, const GridSpec& grid, CceClass cls,
                                    bool outperform = true);

enum class SearchStatus { Found, NotFound, Unbounded };
std::string_view to_string(SearchStatus s);

struct BestCce {
    SearchStatus status = SearchStatus::NotFound;
    double u = 0.0;
    double v = 0.0;
    double reward = 0.0;
    double slack = 0.0;
    double coarse_reward = 0.0;  // incumbent before refinement
    int iterations = 0;
};

BestCce best_cce(const ModelParams& p, CceClass cls, const GridSpec& bounds = {});

inline constexpr double kUCap = 1e6;

enum class UStarKind { Finite, Infinite, Zero };
std::string_view to_string(UStarKind k);

struct UStar {
    UStarKind kind = UStarKind::Finite;
    double value = 0.0;  // set for Finite
};

// Slack of the v-free critical-case inequality at u (β must equal 1−α).
double ustar_slack(const ModelParams& p, CceClass cls, double u);
bool ustar_holds(const ModelParams& p, CceClass cls, double u);
UStar u_star(const ModelParams& p, CceClass cls);

enum class SweepVariable { Sigma, Beta };

struct SweepPoint {
    double swept_value = 0.0;
    bool valid = true;
    std::string violations;
    std::optional<Status> mfc_status;
    std::optional<Status> nash_status;
    std::optional<double> mfc_reward;
    std::optional<double> nash_reward;
    SearchStatus singular_status = SearchStatus::NotFound;
    SearchStatus regular_status = SearchStatus::NotFound;
    std::optional<double> best_cce_singular;
    std::optional<double> best_cce_regular;
    // empty when the Nash baseline is not unique
    std::optional<bool> singular_outperforms;
    std::optional<bool> regular_outperforms;
};

std::vector<SweepPoint> sweep(const ModelParams& tmpl, SweepVariable var, double lo, double hi, int n_points,
                              const GridSpec& bounds = {});

}  // namespace emfg
