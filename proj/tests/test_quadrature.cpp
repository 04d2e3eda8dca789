#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "waveinform/quadrature.hpp"
#include "waveinform/wave_sim.hpp"

#include <cmath>
#include <numbers>

using namespace waveinform;

namespace {

// exp(-r^2 / (2 s^2)) about `centre`
RadialProfile gaussian_profile(const Vec3& centre, double s) {
    RadialProfile p;
    p.centre = centre;
    p.value = [s](double r) { return std::exp(-r * r / (2 * s * s)); };
    p.derivative = [s](double r) { return -r / (s * s) * std::exp(-r * r / (2 * s * s)); };
    p.antiderivative = [s](double q) { return -2 * s * s * std::exp(-q / (2 * s * s)); };
    p.support = 8 * s;
    return p;
}

// Brute-force spherical mean of f over the sphere of radius rad about x.
double sphere_mean(const ScalarFunction& f, const Vec3& x, double rad, int order = 48) {
    const SphericalRule rule(order);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes().size(); ++i)
        acc += rule.weights()[i] * f(x + rad * rule.nodes()[i]);
    return acc;
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n : {1, 2, 5, 16, 64}) {
        const auto gl = gauss_legendre(n);
        REQUIRE(gl.nodes.size() == static_cast<std::size_t>(n));
        double wsum = 0.0;
        for (double w : gl.weights) wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        const int deg = 2 * n - 1;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += gl.weights[i] * std::pow(gl.nodes[i], deg - 1);
        // int_{-1}^{1} x^(deg-1) dx, deg - 1 even
        CHECK(acc == doctest::Approx(2.0 / deg).epsilon(1e-13));
    }
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 20) ==
          doctest::Approx(2.0).epsilon(1e-14));
    CHECK(integrate([](double x) { return std::abs(x); }, -1.0, 1.0, 4, 2) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("spherical rule moments") {
    const SphericalRule rule(12, 24, Vec3(1, 2, -0.5));
    double w = 0.0, xx = 0.0, yy = 0.0, xy = 0.0, x4 = 0.0;
    Vec3 first = Vec3::Zero();
    for (std::size_t i = 0; i < rule.nodes().size(); ++i) {
        const Vec3& g = rule.nodes()[i];
        const double wi = rule.weights()[i];
        CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-14));
        w += wi;
        first += wi * g;
        xx += wi * g.x() * g.x();
        yy += wi * g.y() * g.y();
        xy += wi * g.x() * g.y();
        x4 += wi * std::pow(g.x(), 4);
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(first.norm() < 1e-14);
    CHECK(xx == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(yy == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(std::abs(xy) < 1e-14);
    CHECK(x4 == doctest::Approx(0.2).epsilon(1e-13));
    double rings = 0.0;
    for (double r : rule.ring_weights()) rings += r;
    CHECK(rings == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Kirchhoff formula on constant and linear data") {
    const SphericalRule rule(8);
    const double c = 0.7;
    const Vec3 x(0.2, -0.1, 0.3);
    const auto zero = [](const Vec3&) { return 0.0; };
    const auto no_grad = [](const Vec3&) { return Vec3::Zero(); };
    // constant position: u = a for all t
    CHECK(kirchhoff_eval([](const Vec3&) { return 2.5; }, no_grad, zero, x, 1.3, c, rule) ==
          doctest::Approx(2.5).epsilon(1e-14));
    // constant speed: u = b t
    CHECK(kirchhoff_eval([](const Vec3&) { return 0.0; }, no_grad,
                         [](const Vec3&) { return 1.5; }, x, 0.8, c, rule) ==
          doctest::Approx(1.2).epsilon(1e-14));
    // linear data is harmonic, so u(x, t) = u0(x) + t v0(x)
    const Vec3 a(0.3, -1.0, 2.0), b(1.0, 0.5, 0.0);
    const auto u0 = [&](const Vec3& y) { return a.dot(y) + 1.0; };
    const auto g0 = [&](const Vec3&) { return a; };
    const auto v0 = [&](const Vec3& y) { return b.dot(y); };
    const double t = 0.9;
    CHECK(kirchhoff_eval(u0, g0, v0, x, t, c, rule) ==
          doctest::Approx(u0(x) + t * v0(x)).epsilon(1e-13));
}

TEST_CASE("radial spherical means match brute-force sphere averages") {
    const double c = 0.5, s = 0.1;
    const RadialProfile g = gaussian_profile(Vec3(0.5, 0.5, 0.5), s);
    oracle::Rng rng(4);
    for (int i = 0; i < 20; ++i) {
        const Vec3 x = g.centre + rng.point(-0.4, 0.4);
        const double t = rng.uniform(0.05, 1.2);
        const double speed = t * sphere_mean(g, x, c * t);
        CHECK(oracle::rel(wave_speed_term(g, x, t, c), speed, 1e-6) < 1e-7);
        CHECK(oracle::rel(wave_speed_term(g, x, -t, c), -speed, 1e-6) < 1e-7);

        const ScalarFunction directional = [&](const Vec3& y) {
            return g(y) + g.gradient(y).dot(y - x);
        };
        const double position = sphere_mean(directional, x, c * t);
        CHECK(oracle::rel(wave_position_term(g, x, t, c), position, 1e-6) < 1e-7);
    }
    // spherical mean of the antiderivative identity at the centre
    CHECK(wave_position_term(g, g.centre, 0.0, c) == doctest::Approx(1.0));
}

TEST_CASE("radial profile gradient matches finite differences") {
    const RadialProfile g = gaussian_profile(Vec3(0.1, 0.2, 0.3), 0.2);
    const Vec3 x(0.25, 0.05, 0.4);
    const double e = 1e-6;
    for (int a = 0; a < 3; ++a) {
        Vec3 d = Vec3::Zero();
        d[a] = e;
        CHECK(g.gradient(x)[a] == doctest::Approx((g(x + d) - g(x - d)) / (2 * e)).epsilon(1e-7));
    }
}

TEST_CASE("Lp norms on a grid") {
    const GridSpec g = GridSpec::cube(0.0, 1.0, 0.1);
    const auto ones = ScalarField3D::sample(g, [](const Vec3&) { return 1.0; });
    const double vol = static_cast<double>(g.size()) * std::pow(g.dx, 3);
    CHECK(lp_norm(ones, 2.0) == doctest::Approx(std::sqrt(vol)).epsilon(1e-14));
    CHECK(lp_norm(ones, 1.0) == doctest::Approx(vol).epsilon(1e-14));
    CHECK(lp_norm(ones, kInfinityNorm) == 1.0);
    const auto lin = ScalarField3D::sample(g, [](const Vec3& x) { return -3.0 * x.x(); });
    CHECK(lp_norm(lin, kInfinityNorm) == doctest::Approx(3.0));
    auto twice = ones;
    for (double& v : twice.values) v *= 1.1;
    CHECK(lp_relative_error(twice, ones, 2.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(lp_relative_error(ones, ones, 1.0) == 0.0);
    const auto zeros = ScalarField3D::sample(g, [](const Vec3&) { return 0.0; });
    CHECK_THROWS((void)lp_relative_error(ones, zeros, 2.0));
}

TEST_CASE("d'Alembertian residual") {
    const double c = 0.5;
    const Vec3 k(3.0, -2.0, 1.0);
    const auto plane = [&](const SpaceTimePoint& z) { return std::sin(k.dot(z.x) - c * k.norm() * z.t); };
    const auto wrong = [&](const SpaceTimePoint& z) { return std::sin(k.dot(z.x) - k.norm() * z.t); };
    oracle::Rng rng(2);
    for (int i = 0; i < 10; ++i) {
        const SpaceTimePoint z{rng.point(0, 1), rng.uniform(0, 1)};
        CHECK(verify_dalembert(plane, z, c, 1e-3) < 1e-5);
        CHECK(verify_dalembert(wrong, z, c, 1e-3) > 0.5);
    }
    CHECK(verify_dalembert([](const SpaceTimePoint&) { return 0.0; }, {Vec3::Zero(), 0.3}, c) == 0.0);
}

TEST_CASE("away_from_kinks") {
    HyperParams p;
    p.c = 0.5;
    p.u = ComponentParams{Vec3::Zero(), 0.2, 0.1, 1.0};
    CHECK_FALSE(away_from_kinks({Vec3(0.3, 0, 0), 0.2}, p, 0.01));  // r = cT + R
    CHECK_FALSE(away_from_kinks({Vec3(0.005, 0, 0), 0.2}, p, 0.01));
    CHECK(away_from_kinks({Vec3(0.25, 0, 0), 0.2}, p, 0.01));
}

TEST_CASE("Lp stability of the reference initial conditions") {
    const auto u0 = radial_profile(InitialCondition::raised_cosine(Vec3(0.65, 0.3, 0.5), 0.25, 5.0));
    const auto v0 = radial_profile(InitialCondition::ring_cosine(Vec3(0.3, 0.6, 0.7), 0.05, 0.15, 50.0));
    for (double p : {1.0, 2.0, kInfinityNorm}) {
        const auto rep = lp_stability_check(u0, v0, 0.5, 0.6, p, 0.02);
        CHECK(rep.speed_ok);
        CHECK(rep.position_ok);
        CHECK(rep.speed_lhs > 0.0);
        CHECK(rep.position_lhs > 0.0);
    }
    // for p = 1 the speed bound is an equality for non-negative data
    const auto rep1 = lp_stability_check(u0, v0, 0.5, 0.6, 1.0, 0.01);
    CHECK(rep1.speed_lhs == doctest::Approx(rep1.speed_rhs).epsilon(0.02));
}
