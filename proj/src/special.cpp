#include "emfg/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emfg {
namespace {

constexpr double kG = 607.0 / 128.0;

constexpr std::array<double, 15> kCoef = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4, .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,  -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4, .36899182659531622704e-5};

// Series part A(z) of the Lanczos form, z >= 0.5.
double lanczos_sum(double z) {
    double x = z - 1.0;
    double sum = kCoef[0];
    for (std::size_t i = 1; i < kCoef.size(); ++i) sum += kCoef[i] / (x + static_cast<double>(i));
    return sum;
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
    if (x < 0.5) {
        // reflection
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    double t = x - 0.5 + kG;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (x - 0.5) * std::log(t) - t +
           std::log(lanczos_sum(x));
}

double gamma_fn(double x) { return std::exp(log_gamma(x)); }

double log_gamma_ratio(double x, double k) {
    if (!(x > 0.0) || !(x + k > 0.0)) throw std::domain_error("log_gamma_ratio: arguments must be positive");
    if (k == 0.0) return 0.0;
    if (x < 0.5 || x + k < 0.5) return log_gamma(x + k) - log_gamma(x);
    double t = x - 0.5 + kG;
    return (x - 0.5) * std::log1p(k / t) + k * std::log(t + k) - k +
           std::log(lanczos_sum(x + k) / lanczos_sum(x));
}

}  // namespace emfg
