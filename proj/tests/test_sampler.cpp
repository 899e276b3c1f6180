#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "noiseshape/errors.hpp"
#include "noiseshape/sampler.hpp"
#include "noiseshape/schedule.hpp"

using namespace noiseshape;

TEST_CASE("heun converges at second order on dz/dt = z") {
    VelocityFn f = [](const std::vector<double>& z, double, std::vector<double>& out) {
        out = z;
    };
    std::vector<double> z0 = {1.0, -0.5};
    const double kE = 2.7182818284590452354;
    auto err = [&](int steps) {
        std::vector<double> z1 = flow_map(f, z0, 0.0, 1.0, steps);
        return std::max(std::fabs(z1[0] - kE * z0[0]), std::fabs(z1[1] - kE * z0[1]));
    };
    double e100 = err(100), e200 = err(200);
    CHECK(e100 < 1e-3);
    double ratio = e100 / e200;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("heun is exact when the velocity is linear in t") {
    // The trapezoid rule is exact for integrands linear in t, so z' = 2t
    // integrates to t^2 up to roundoff regardless of step count.
    VelocityFn f = [](const std::vector<double>& z, double t, std::vector<double>& out) {
        out.assign(z.size(), 2.0 * t);
    };
    std::vector<double> z1 = flow_map(f, {0.0}, 0.0, 3.0, 7);
    CHECK(z1[0] == doctest::Approx(9.0).epsilon(1e-13));
}

TEST_CASE("heun trajectory includes both endpoints and pins the final time") {
    VelocityFn f = [](const std::vector<double>& z, double, std::vector<double>& out) {
        out.assign(z.size(), 1.0);
    };
    Trajectory tr = heun_integrate(f, {0.0}, 0.0, 1.0, 3);
    REQUIRE(tr.states.size() == 4);
    REQUIRE(tr.times.size() == 4);
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == 1.0);  // exact despite 3 * (1/3) != 1 in floating point
    CHECK(tr.states.front()[0] == 0.0);
    CHECK(tr.states.back()[0] == doctest::Approx(1.0).epsilon(1e-14));
    // Interior times are uniformly spaced.
    CHECK(tr.times[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(tr.times[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("heun integrates backward in time") {
    VelocityFn f = [](const std::vector<double>& z, double, std::vector<double>& out) {
        out = z;
    };
    // Integrating dz/dt = z from t=1 back to t=0 divides by e.
    std::vector<double> z1 = flow_map(f, {1.0}, 1.0, 0.0, 400);
    CHECK(z1[0] == doctest::Approx(1.0 / 2.7182818284590452354).epsilon(1e-5));
}

TEST_CASE("heun rejects bad arguments") {
    VelocityFn f = [](const std::vector<double>& z, double, std::vector<double>& out) {
        out = z;
    };
    CHECK_THROWS_AS(heun_integrate(f, {}, 0.0, 1.0, 10), Error);
    CHECK_THROWS_AS(heun_integrate(f, {1.0}, 0.0, 1.0, 0), Error);
    CHECK_THROWS_AS(heun_integrate(f, {1.0}, 0.5, 0.5, 10), Error);
}

TEST_CASE("heun reports the step index when the state blows up") {
    VelocityFn f = [](const std::vector<double>& z, double t, std::vector<double>& out) {
        out.assign(z.size(), t < 0.5 ? 1.0 : std::numeric_limits<double>::quiet_NaN());
    };
    try {
        heun_integrate(f, {0.0}, 0.0, 1.0, 10);
        FAIL("expected numeric error");
    } catch (const Error& e) {
        CHECK(e.status() == Status::Numeric);
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("ddpm reverse step matches frozen hand-computed values") {
    DiffusionSchedule s = make_linear_schedule(5, 0.1, 0.3);
    std::vector<double> xt = {0.7, -0.2}, eps = {0.3, 0.5}, prev;
    SUBCASE("deterministic (no zeta)") {
        ddpm_reverse_step(s, xt, 3, eps, nullptr, prev);
        REQUIRE(prev.size() == 2);
        CHECK(prev[0] == doctest::Approx(0.67493006833226567721).epsilon(1e-15));
        CHECK(prev[1] == doctest::Approx(-0.4030963374044134972).epsilon(1e-15));
    }
    SUBCASE("stochastic adds sigma * zeta") {
        std::vector<double> zeta = {1.0, -1.0};
        ddpm_reverse_step(s, xt, 3, eps, &zeta, prev);
        CHECK(prev[0] == doctest::Approx(1.1221436638322236165).epsilon(1e-15));
        CHECK(prev[1] == doctest::Approx(-0.85030993290437143648).epsilon(1e-15));
    }
    SUBCASE("final step ignores zeta entirely") {
        std::vector<double> zeta = {10.0, 10.0};
        std::vector<double> a, b;
        ddpm_reverse_step(s, xt, 1, eps, &zeta, a);
        ddpm_reverse_step(s, xt, 1, eps, nullptr, b);
        CHECK(a[0] == b[0]);
        CHECK(a[1] == b[1]);
        CHECK(a[0] == doctest::Approx(0.63786478737262184413).epsilon(1e-15));
    }
}

TEST_CASE("ddpm reverse step validates shapes and index") {
    DiffusionSchedule s = make_linear_schedule(5, 0.1, 0.3);
    std::vector<double> xt = {0.7, -0.2}, eps = {0.3}, prev;
    CHECK_THROWS_AS(ddpm_reverse_step(s, xt, 3, eps, nullptr, prev), Error);
    std::vector<double> eps2 = {0.3, 0.5};
    CHECK_THROWS_AS(ddpm_reverse_step(s, xt, 0, eps2, nullptr, prev), Error);
    CHECK_THROWS_AS(ddpm_reverse_step(s, xt, 6, eps2, nullptr, prev), Error);
    std::vector<double> zeta1 = {1.0};
    CHECK_THROWS_AS(ddpm_reverse_step(s, xt, 3, eps2, &zeta1, prev), Error);
}

TEST_CASE("trajectory csv carries step, time and one column per dimension") {
    VelocityFn f = [](const std::vector<double>& z, double, std::vector<double>& out) {
        out.assign(z.size(), 1.0);
    };
    Trajectory tr = heun_integrate(f, {0.0, 5.0}, 0.0, 1.0, 2);
    std::istringstream is(trajectory_to_csv(tr));
    std::string line;
    std::getline(is, line);
    CHECK(line == "step,t,dim0,dim1");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}
