#include "emfg/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace emfg {

NelderMeadResult nelder_mead_2d(const std::function<double(const std::array<double, 2>&)>& f,
                                std::array<double, 2> x0, std::array<double, 2> step, double ftol, int max_iter) {
    using Pt = std::array<double, 2>;
    std::array<Pt, 3> s{x0, Pt{x0[0] + step[0], x0[1]}, Pt{x0[0], x0[1] + step[1]}};
    std::array<double, 3> fs{};
    for (int i = 0; i < 3; ++i) fs[i] = f(s[i]);

    auto lin = [](const Pt& a, const Pt& b, double t) {
        return Pt{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    };

    NelderMeadResult res;
    int it = 0;
    for (; it < max_iter; ++it) {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        std::array<Pt, 3> ss{s[idx[0]], s[idx[1]], s[idx[2]]};
        std::array<double, 3> ff{fs[idx[0]], fs[idx[1]], fs[idx[2]]};
        s = ss;
        fs = ff;

        if (std::isfinite(fs[2]) && fs[2] - fs[0] <= ftol) {
            res.converged = true;
            break;
        }
        double size = std::max(std::abs(s[1][0] - s[0][0]) + std::abs(s[1][1] - s[0][1]),
                               std::abs(s[2][0] - s[0][0]) + std::abs(s[2][1] - s[0][1]));
        if (size < 1e-14) {
            res.converged = true;
            break;
        }

        Pt c{0.5 * (s[0][0] + s[1][0]), 0.5 * (s[0][1] + s[1][1])};
        Pt xr = lin(c, s[2], -1.0);
        double fr = f(xr);
        if (fr < fs[0]) {
            Pt xe = lin(c, s[2], -2.0);
            double fe = f(xe);
            if (fe < fr) {
                s[2] = xe;
                fs[2] = fe;
            } else {
                s[2] = xr;
                fs[2] = fr;
            }
            continue;
        }
        if (fr < fs[1]) {
            s[2] = xr;
            fs[2] = fr;
            continue;
        }
        bool outside = fr < fs[2];
        Pt xc = outside ? lin(c, s[2], -0.5) : lin(c, s[2], 0.5);
        double fc = f(xc);
        if (fc < (outside ? fr : fs[2])) {
            s[2] = xc;
            fs[2] = fc;
            continue;
        }
        for (int i = 1; i < 3; ++i) {
            s[i] = lin(s[0], s[i], 0.5);
            fs[i] = f(s[i]);
        }
    }
    int best = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
    res.x = s[best];
    res.fx = fs[best];
    res.iterations = it;
    return res;
}

}  // namespace emfg
