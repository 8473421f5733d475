#pragma once

namespace emfg {

// Lanczos approximation (g = 607/128, 15 terms). Valid for x > 0.
double log_gamma(double x);
double gamma_fn(double x);

// log(Gamma(x + k) / Gamma(x)) for x > 0, x + k > 0. Stays accurate for very
// large x where the two log-gammas would cancel.
double log_gamma_ratio(double x, double k);

}  // namespace emfg
