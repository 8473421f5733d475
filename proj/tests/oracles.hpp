#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <functional>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "emfg/model.hpp"

namespace oracle {

// ∫_a^∞ x^k p_a(x) dx. Body by adaptive Gauss–Kronrod after x = a·e^t on
// [a, R·a]; the Pareto tail beyond R·a is integrated in closed form.
inline double pareto_moment(double delta, double sigma, double a, double k, double R = 1e6) {
    double s2 = sigma * sigma;
    double g = 2.0 * delta / s2;
    double c = (2.0 * delta + s2) / s2;
    auto density = [&](double x) { return c * std::pow(a, g + 1.0) * std::pow(x, -g - 2.0); };
    auto body = [&](double t) {
        double x = a * std::exp(t);
        return std::pow(x, k) * density(x) * x;
    };
    double err = 0.0;
    double inner = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(body, 0.0, std::log(R), 20, 1e-14,
                                                                                 &err);
    double tail = c * std::pow(a, g + 1.0) * std::pow(R * a, k - g - 1.0) / (g + 1.0 - k);
    return inner + tail;
}

// Inverse-gamma stationary kernel of the regular dynamics: shape γ+1, scale γθ.
inline double inverse_gamma_moment(double delta, double sigma, double theta, double k) {
    double g = 2.0 * delta / (sigma * sigma);
    double shape = g + 1.0, scale = g * theta;
    double lnorm = shape * std::log(scale) - std::lgamma(shape);
    auto body = [&](double t) {  // x = e^t
        double x = std::exp(t);
        return std::exp(lnorm + (k - shape - 1.0) * t - scale / x) * x;
    };
    double mode = std::log(scale / (shape + 1.0));
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(body, mode - 40.0, mode + 60.0, 25, 1e-14,
                                                                          &err);
}

inline double gamma_law_moment(double u, double v, double k) {
    double lnorm = -std::lgamma(u) - u * std::log(v);
    auto body = [&](double t) {  // x = e^t
        double x = std::exp(t);
        return std::exp(lnorm + (u + k) * t - x / v);
    };
    double c = std::log(u * v);
    double lo = c - 40.0 / (u + k) - 10.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(body, lo, c + 8.0 + 40.0 / u, 25, 1e-14,
                                                                          &err);
}

inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-13) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * (std::abs(a) + std::abs(b))) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline emfg::ModelParams fig1() { return {0.1, 0.2, 2.0, 0.3, 0.5}; }

// Random valid parameters with α+β < 1.
class ParamSampler {
public:
    explicit ParamSampler(unsigned long long seed) : eng_(seed) {}
    emfg::ModelParams subcritical() {
        emfg::ModelParams p;
        p.delta = uni(0.05, 2.0);
        p.sigma = std::sqrt(2.0 * p.delta) * uni(0.1, 0.9);
        p.q = uni(0.2, 3.0);
        p.alpha = uni(0.05, 0.85);
        p.beta = uni(0.05, 0.95 - p.alpha);
        return p;
    }
    double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }

private:
    std::mt19937_64 eng_;
};

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace oracle
