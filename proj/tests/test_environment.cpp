#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/special_functions/trigamma.hpp>

#include "qmt/environment.hpp"
#include "qmt/errors.hpp"

using namespace qmt;

TEST_CASE("temperature conversion and theta") {
    const auto t = Temperature::from_kelvin(2e-3);
    CHECK(t.theta(1e9) == doctest::Approx(3.8191162887888232).epsilon(1e-14));
    CHECK(t.kelvin() == doctest::Approx(2e-3).epsilon(1e-15));
    CHECK(Temperature::from_rad_per_s(0.5).theta(1.0) == 2.0);
    CHECK_THROWS_AS(Temperature::from_kelvin(0.0), Error);
    CHECK_THROWS_AS(Temperature::from_kelvin(-1.0), Error);
}

TEST_CASE("occupation and coth identity") {
    const auto t = Temperature::from_rad_per_s(1.0);
    for (double w : {1e-8, 1e-3, 0.5, 2.0, 30.0, 800.0}) {
        const double n = occupation(w, t);
        CHECK(coth_half(w) == doctest::Approx(1.0 + 2.0 * n).epsilon(1e-12));
    }
    CHECK_THROWS_AS(occupation(0.0, t), Error);
}

TEST_CASE("truncated thermal state reproduces the geometric-series mean") {
    const auto temp = Temperature::from_rad_per_s(1.0);
    for (double theta : {0.5, 1.0, 2.0, 5.0}) {
        const std::size_t d = required_truncation(theta, temp, 1e-12);
        const auto ts = thermal_state(theta, temp, d, "E1", 1e-12);
        double mean = 0.0;
        for (std::size_t n = 0; n < d; ++n)
            mean += static_cast<double>(n) * ts.state.matrix()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)).real();
        CHECK(mean == doctest::Approx(1.0 / std::expm1(theta)).epsilon(1e-9));
        CHECK(ts.leakage <= 1e-12);
        CHECK(std::abs(ts.state.matrix().trace().real() - 1.0) < 1e-14);
    }
    CHECK_THROWS_AS(thermal_state(1.0, temp, 3, "E1", 1e-10), Error);
    CHECK_THROWS_AS(thermal_state(0.0, temp, 3, "E1"), Error);
}

TEST_CASE("required truncation meets the tail tolerance") {
    const auto temp = Temperature::from_rad_per_s(1.0);
    for (double theta : {0.5, 1.0, 3.0, 10.0}) {
        const auto d = required_truncation(theta, temp, 1e-10);
        CHECK(std::exp(-theta * static_cast<double>(d)) <= 1e-10);
        CHECK(std::exp(-theta * static_cast<double>(d - 2)) > 1e-10);
    }
}

TEST_CASE("discrete bath integral is the coth-weighted sum") {
    const auto temp = Temperature::from_rad_per_s(0.5);
    const BathSpec bath(DiscreteBath{{{1.0, 0.2, 10}, {2.0, 0.1, 10}}});
    const double expect = 0.04 / std::tanh(1.0) + 0.01 / std::tanh(2.0);
    CHECK(bath_integral(bath, temp) == doctest::Approx(expect).epsilon(1e-15));
    CHECK_THROWS_AS(BathSpec(DiscreteBath{{{-1.0, 0.2, 10}}}), Error);
    CHECK_THROWS_AS(BathSpec(DiscreteBath{{{1.0, 0.2, 1}}}), Error);
}

TEST_CASE("Ohmic bath integral against the trigamma closed form") {
    // int eta w e^{-w/wc} coth(w/2T) dw = eta wc^2 + 2 eta T^2 trigamma(1 + T/wc)
    for (auto [eta, wc, T] : {std::tuple{0.1, 10.0, 1.0}, std::tuple{0.05, 1.0, 3.0}, std::tuple{1.0, 5.0, 0.01}}) {
        const BathSpec bath(ContinuumBath{SpectralDensityModel(OhmicDensity{eta, wc}), std::numeric_limits<double>::infinity()});
        const double exact = eta * wc * wc + 2.0 * eta * T * T * boost::math::trigamma(1.0 + T / wc);
        CHECK(bath_integral(bath, Temperature::from_rad_per_s(T)) == doctest::Approx(exact).epsilon(1e-9));
    }
    // wc >> T limit: eta wc^2 + eta T^2 pi^2 / 3.
    const BathSpec wide(ContinuumBath{SpectralDensityModel(OhmicDensity{0.2, 1e4}), std::numeric_limits<double>::infinity()});
    const double lim = 0.2 * 1e8 + 0.2 * std::numbers::pi * std::numbers::pi / 3.0;
    CHECK(bath_integral(wide, Temperature::from_rad_per_s(1.0)) == doctest::Approx(lim).epsilon(1e-6));
}

TEST_CASE("tabulated hat density matches a fine discrete comb") {
    const TabulatedDensity hat{{1.0, 2.0, 3.0}, {0.0, 0.5, 0.0}};
    const auto temp = Temperature::from_rad_per_s(0.7);
    const BathSpec cont(ContinuumBath{SpectralDensityModel(hat), 10.0});
    const SpectralDensityModel j(hat);
    DiscreteBath comb;
    const int n = 400;
    const double dw = 2.0 / n;
    for (int i = 0; i < n; ++i) {
        const double w = 1.0 + (i + 0.5) * dw;
        const double jw = j(w);
        if (jw > 0.0) comb.modes.push_back({w, std::sqrt(jw * dw), 2});
    }
    const double ic = bath_integral(cont, temp);
    const double id = bath_integral(BathSpec(comb), temp);
    CHECK(std::abs(ic - id) / ic < 0.01);
}

TEST_CASE("divergent and unrealizable baths") {
    const TabulatedDensity flat{{0.0, 1.0}, {0.3, 0.3}};
    const BathSpec b(ContinuumBath{SpectralDensityModel(flat), 1.0});
    try {
        bath_integral(b, Temperature::from_rad_per_s(1.0));
        FAIL("expected DivergentBath");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DivergentBath);
    }
    try {
        b.modes();
        FAIL("expected NotRealizable");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotRealizable);
    }
}

TEST_CASE("occupation limits and thermal moments") {
    const auto t = Temperature::from_rad_per_s(1.0);
    CHECK(occupation(std::log(2.0), t) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(occupation(1e4, t) == 0.0);
    for (double th : {0.01, 1.0, 10.0}) CHECK(std::abs(1.0 + 2.0 * occupation(th, t) - coth_half(th)) < 1e-12 * coth_half(th));

    const auto ts = thermal_state(1.0, t, 40);
    const Matrix& rho = ts.state.matrix();
    CHECK(std::abs((rho * ops::number(40)).trace().real() - 1.0 / (std::exp(1.0) - 1.0)) < 1e-10);
    CHECK(std::abs((rho * ops::annihilation(40)).trace()) < 1e-12);
    CHECK(std::abs((rho * ops::creation(40)).trace()) < 1e-12);
    CHECK(std::abs((rho * ops::annihilation(40) * ops::annihilation(40)).trace()) < 1e-12);
    const auto cold = thermal_state(1.0, Temperature::from_rad_per_s(1e-3), 2);
    CHECK(cold.state.matrix()(0, 0).real() == 1.0);
}

TEST_CASE("required truncation examples") {
    const auto t = Temperature::from_rad_per_s(1.0);
    CHECK(required_truncation(10.0, t, 1e-10) == 4);
    CHECK(required_truncation(1.0, t, 1e-10) == 25);
    CHECK(required_truncation(1e6, t, 1e-10) == 2);
    CHECK_THROWS_AS(required_truncation(1.0, t, 0.0), Error);
}

TEST_CASE("bath integral: additivity, low-temperature Ohmic limit, monotone in T") {
    const auto t = Temperature::from_rad_per_s(0.8);
    const double one = bath_integral(BathSpec(DiscreteBath{{{1.3, 0.4, 5}}}), t);
    CHECK(one == doctest::Approx(0.16 / std::tanh(0.5 * 1.3 / 0.8)).epsilon(1e-15));
    CHECK(bath_integral(BathSpec(DiscreteBath{{{1.3, 0.4, 5}, {1.3, 0.4, 5}}}), t) == 2.0 * one);

    const BathSpec ohm(ContinuumBath{SpectralDensityModel(OhmicDensity{0.3, 1e9}), std::numeric_limits<double>::infinity()});
    CHECK(bath_integral(ohm, Temperature::from_kelvin(1e-6)) == doctest::Approx(0.3 * 1e18).epsilon(1e-6));

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 20; ++i) {
        DiscreteBath b;
        for (int k = 0; k < 3; ++k) b.modes.push_back({u(rng), u(rng), 4});
        const double temp = u(rng);
        CHECK(bath_integral(BathSpec(b), Temperature::from_rad_per_s(2.0 * temp)) >=
              bath_integral(BathSpec(b), Temperature::from_rad_per_s(temp)));
    }
}
