#include <cmath>
#include <limits>

#include "doctest.h"
#include "emfg/model.hpp"
#include "oracles.hpp"

using namespace emfg;

TEST_SUITE("model") {
    TEST_CASE("validate accepts the figure parameter sets") {
        CHECK(validate(oracle::fig1()).ok);
        CHECK(validate({1.0, 1.0, 0.5, 0.3, 0.4}).ok);
        CHECK(validate({1.0, 1.0, 1.0, 0.3, 0.7}).ok);
    }

    TEST_CASE("validate names the dissipativity violation") {
        auto rep = validate({0.1, 0.5, 2.0, 0.3, 0.5});
        REQUIRE_FALSE(rep.ok);
        REQUIRE(rep.violations.size() == 1);
        CHECK(rep.violations[0] == "2δ−σ²>0 fails");
    }

    TEST_CASE("validate reports every violated constraint") {
        auto rep = validate({-1.0, 0.0, 0.0, 1.0, 0.0});
        CHECK_FALSE(rep.ok);
        CHECK(rep.violations.size() == 6);
        CHECK_THROWS_AS(require_valid({-1.0, 0.0, 0.0, 1.0, 0.0}), DomainError);
    }

    TEST_CASE("regime classification uses the absolute tolerance") {
        CHECK(classify_regime(0.3, 0.5) == Regime::Subcritical);
        CHECK(classify_regime(0.6, 0.6) == Regime::Supercritical);
        CHECK(classify_regime(0.3, 0.7) == Regime::Critical);
        CHECK(classify_regime(0.3, 0.7 + 5e-13) == Regime::Critical);
        CHECK(classify_regime(0.3, 0.7 + 1e-9) == Regime::Supercritical);
        CHECK(classify_regime(0.3, 0.7 + 1e-9, 1e-8) == Regime::Critical);
    }

    TEST_CASE("density vanishes below the barrier and rejects nonpositive x") {
        BarrierPolicy pol{2.0, oracle::fig1()};
        CHECK(stationary_density(pol, 1.999) == 0.0);
        CHECK(stationary_density(pol, 2.0) > 0.0);
        CHECK_THROWS_AS(stationary_density(pol, 0.0), DomainError);
        CHECK_THROWS_AS(stationary_density(pol, -1.0), DomainError);
    }

    TEST_CASE("density integrates to one and its mean matches the closed form") {
        auto p = oracle::fig1();
        for (double a : {0.1, 1.0, 10.0}) {
            BarrierPolicy pol{a, p};
            // quadrature of the implemented density, not of the oracle formula
            auto body = [&](double t) {
                double x = a * std::exp(t);
                return stationary_density(pol, x) * x;
            };
            double err = 0.0;
            double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(body, 0.0, std::log(1e6), 20,
                                                                                        1e-14, &err);
            CHECK(std::abs(mass - 1.0) < 1e-8);
            auto body1 = [&](double t) {
                double x = a * std::exp(t);
                return stationary_density(pol, x) * x * x;
            };
            double m1 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(body1, 0.0, std::log(1e6), 20,
                                                                                      1e-14, &err);
            CHECK(oracle::rel(m1, stationary_mean(pol)) < 1e-6);
        }
    }

    TEST_CASE("moments match quadrature of the density") {
        oracle::ParamSampler ps(11);
        for (int i = 0; i < 20; ++i) {
            auto p = ps.subcritical();
            double a = ps.uni(0.1, 10.0);
            for (double k : {0.25, 0.5, p.alpha, 1.0, 1.5}) {
                double ref = oracle::pareto_moment(p.delta, p.sigma, a, k);
                CHECK(oracle::rel(stationary_moment({a, p}, k), ref) < 1e-6);
            }
        }
        auto p = oracle::fig1();
        CHECK(oracle::rel(stationary_moment({1.0, p}, p.alpha), oracle::pareto_moment(p.delta, p.sigma, 1.0, p.alpha)) <
              1e-8);
    }

    TEST_CASE("moment edge cases") {
        auto p = oracle::fig1();
        CHECK(stationary_moment({3.0, p}, 0.0) == 1.0);
        CHECK_THROWS_AS(stationary_moment({3.0, p}, -0.1), DomainError);
        CHECK_THROWS_AS(stationary_moment({3.0, p}, 2.1), DomainError);
        // outside the standing assumption the second moment diverges
        ModelParams bad{0.1, 0.5, 2.0, 0.3, 0.5};
        CHECK_THROWS_AS(stationary_moment({1.0, bad}, 2.0), DomainError);
    }

    TEST_CASE("mean identity holds to machine precision") {
        oracle::ParamSampler ps(12);
        for (int i = 0; i < 200; ++i) {
            auto p = ps.subcritical();
            double a = ps.uni(1e-3, 1e3);
            double expect = (2.0 * p.delta + p.sigma * p.sigma) / (2.0 * p.delta) * a;
            CHECK(oracle::rel(stationary_moment({a, p}, 1.0), expect) < 4 * std::numeric_limits<double>::epsilon());
            CHECK(oracle::rel(stationary_mean({a, p}), expect) < 4 * std::numeric_limits<double>::epsilon());
        }
    }

    TEST_CASE("reward C vanishes into pure cost at zero price") {
        auto p = oracle::fig1();
        for (double a : {0.5, 1.0, 4.0})
            CHECK(ergodic_reward_C(p, a, 0.0) == doctest::Approx(-p.q * (2 * p.delta + p.sigma * p.sigma) * a / 2));
    }

    TEST_CASE("reward C decomposes into revenue moment minus control cost") {
        oracle::ParamSampler ps(13);
        for (int i = 0; i < 200; ++i) {
            auto p = ps.subcritical();
            double a = ps.uni(0.01, 100.0), price = ps.uni(0.0, 5.0);
            double ref = price * stationary_moment({a, p}, p.alpha) - p.q * p.delta * stationary_moment({a, p}, 1.0);
            CHECK(std::abs(ergodic_reward_C(p, a, price) - ref) <= 1e-10 * std::max(std::abs(ref), 1e-300));
        }
        auto p = oracle::fig1();
        double ref = oracle::pareto_moment(p.delta, p.sigma, 1.0, p.alpha) -
                     p.q * p.delta * oracle::pareto_moment(p.delta, p.sigma, 1.0, 1.0);
        CHECK(oracle::rel(ergodic_reward_C(p, 1.0, 1.0), ref) < 1e-8);
    }

    TEST_CASE("optimal barrier maximizes C over a wide log grid") {
        oracle::ParamSampler ps(14);
        for (int i = 0; i < 100; ++i) {
            auto p = ps.subcritical();
            double price = ps.uni(0.1, 5.0);
            double astar = optimal_barrier(p, price, 0.0);
            double best = ergodic_reward_C(p, astar, price);
            bool ok = true;
            for (int j = 0; j < 10000; ++j) {
                double a = astar * std::pow(10.0, -3.0 + 6.0 * j / 9999.0);
                if (ergodic_reward_C(p, a, price) > best + 1e-12 * std::abs(best)) ok = false;
            }
            CHECK(ok);
        }
    }

    TEST_CASE("optimal barrier boundary behaviour") {
        auto p = oracle::fig1();
        double prev = optimal_barrier(p, 1.0, 0.0);
        for (double price : {1e-1, 1e-2, 1e-4, 1e-8}) {
            double a = optimal_barrier(p, price, 0.0);
            CHECK(a < prev);
            prev = a;
        }
        CHECK(prev < 1e-10);
        double qd = p.q * p.delta;
        double big = optimal_barrier(p, 1.0, qd - 1e-12);
        CHECK(std::isfinite(big));
        CHECK(big > 1e12);
        CHECK_THROWS_AS(optimal_barrier(p, 1.0, qd), InfeasibleMultiplier);
        CHECK_THROWS_AS(optimal_barrier(p, 1.0, qd + 1.0), InfeasibleMultiplier);
    }

    TEST_CASE("K reproduces the zero-multiplier barrier") {
        oracle::ParamSampler ps(15);
        for (int i = 0; i < 50; ++i) {
            auto p = ps.subcritical();
            double K = deviation_constant_K(p);
            for (double price : {0.5, 1.0, 2.0})
                CHECK(oracle::rel(optimal_barrier(p, price, 0.0), K * std::pow(price, 1.0 / (1.0 - p.alpha))) < 1e-12);
        }
        auto p = oracle::fig1();
        CHECK(deviation_constant_K(p) == doctest::Approx(1.4800160).epsilon(1e-6));
    }

    TEST_CASE("K increases with alpha") {
        auto p = oracle::fig1();
        double prev = 0.0;
        for (int i = 1; i < 100; ++i) {
            p.alpha = 0.99 * i / 100.0;
            double K = deviation_constant_K(p);
            CHECK(K > prev);
            prev = K;
        }
    }
}
