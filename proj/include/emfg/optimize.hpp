#pragma once

#include <array>
#include <functional>

namespace emfg {

struct NelderMeadResult {
    std::array<double, 2> x{};
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimizes f over R² starting from a simplex built around x0 with the given
// per-coordinate step. Infeasible points may return +inf.
NelderMeadResult nelder_mead_2d(const std::function<double(const std::array<double, 2>&)>& f,
                                std::array<double, 2> x0, std::array<double, 2> step, double ftol = 1e-10,
                                int max_iter = 500);

}  // namespace emfg
