#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "waveinform/covariance.hpp"
#include "waveinform/kernels.hpp"
#include "waveinform/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

using namespace waveinform;

namespace {

const double inf = std::numeric_limits<double>::infinity();

HyperParams both_components(double Ru, double Rv) {
    HyperParams p;
    p.c = 0.5;
    p.u = ComponentParams{Vec3(0.5, 0.45, 0.55), Ru, 0.2, 3.0};
    p.v = ComponentParams{Vec3(0.4, 0.5, 0.5), Rv, 0.05, 2.0};
    return p;
}

SpaceTimePoint random_point(oracle::Rng& rng, double tmin = 0.05) {
    return {rng.point(0.0, 1.0), rng.uniform(tmin, 1.5)};
}

}  // namespace

TEST_CASE("matern52 values") {
    CHECK(matern52(0.0, 1.0, 3.0) == doctest::Approx(3.0));
    CHECK(matern52(1.0, 1.0, 1.0) == doctest::Approx(7.0 / 3.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(matern52(0.7, 0.7, 1.0) == doctest::Approx(0.858).epsilon(1e-3));
    oracle::Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        const double h = rng.uniform(-3, 3);
        CHECK(matern52(-h, 0.4, 2.0) == matern52(h, 0.4, 2.0));
    }
}

TEST_CASE("matern52 derivatives agree with central differences") {
    const double rho = 0.3, s2 = 1.7, e = 1e-5;
    for (double h : {-0.9, -0.2, 0.05, 0.4, 1.3}) {
        const double d1 = (matern52(h + e, rho, s2) - matern52(h - e, rho, s2)) / (2 * e);
        const double d2 =
            (matern52_d1(h + e, rho, s2) - matern52_d1(h - e, rho, s2)) / (2 * e);
        CHECK(matern52_d1(h, rho, s2) == doctest::Approx(d1).epsilon(1e-7));
        CHECK(matern52_d2(h, rho, s2) == doctest::Approx(d2).epsilon(1e-7));
    }
    CHECK(matern52_d2(0.0, rho, s2) == doctest::Approx(-s2 / (3 * rho * rho)));
}

TEST_CASE("smooth_cutoff shape") {
    CHECK(smooth_cutoff(0.0, 0.8) == 1.0);
    CHECK(smooth_cutoff(1.5, 0.8) == 0.0);
    CHECK(smooth_cutoff(1.0, 0.8) == 0.0);
    CHECK(smooth_cutoff(0.9, 0.8) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(smooth_cutoff(0.65, 0.3) == doctest::Approx(0.5).epsilon(1e-14));
    double prev = 1.0;
    for (int i = 0; i <= 400; ++i) {
        const double v = smooth_cutoff(i / 300.0, 0.6);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("speed kernel vanishes at t = 0 and outside the light cone") {
    const HyperParams p = both_components(0.3, 0.15);
    const SpaceTimePoint a{Vec3(0.6, 0.5, 0.5), 0.0}, b{Vec3(0.45, 0.5, 0.6), 0.4};
    CHECK(kv_wave_radial(a, b, p) == 0.0);
    CHECK(kv_wave_radial(b, a, p) == 0.0);
    // r = 0.4, c|t| = 0.1: (r - c|t|)^2 = 0.09 > R_v^2
    const SpaceTimePoint far{p.v->x0 + Vec3(0.4, 0, 0), 0.2};
    CHECK(kv_wave_radial(far, far, p) == 0.0);
    CHECK(kv_wave_radial(far, b, p) == 0.0);
}

TEST_CASE("position kernel reduces to the truncated base kernel at t = 0") {
    const HyperParams p = both_components(0.3, 0.15);
    oracle::Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const Vec3 x = p.u->x0 + 0.3 * (rng.point(-1, 1));
        const Vec3 y = p.u->x0 + 0.3 * (rng.point(-1, 1));
        const double r = (x - p.u->x0).norm(), r2 = (y - p.u->x0).norm();
        const double expect = matern52(r * r - r2 * r2, p.u->rho, p.u->sigma2) *
                              smooth_cutoff(r / p.u->R, p.alpha_cut) *
                              smooth_cutoff(r2 / p.u->R, p.alpha_cut);
        CHECK(ku_wave_radial({x, 0.0}, {y, 0.0}, p) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(wave_kernel({x, 0.0}, {y, 0.0}, p) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("Huygens support of the diagonal") {
    const HyperParams p = both_components(0.3, 0.15);
    oracle::Rng rng(11);
    int zeros_u = 0, zeros_v = 0;
    for (int i = 0; i < 2000; ++i) {
        const SpaceTimePoint z = random_point(rng, 0.0);
        const double T = p.c * std::abs(z.t);
        const double ru = (z.x - p.u->x0).norm(), rv = (z.x - p.v->x0).norm();
        if (ru > T + p.u->R || ru < T - p.u->R) {
            CHECK(ku_wave_radial(z, z, p) == 0.0);
            ++zeros_u;
        }
        if ((rv - T) * (rv - T) > p.v->R * p.v->R) {
            CHECK(kv_wave_radial(z, z, p) == 0.0);
            ++zeros_v;
        }
    }
    CHECK(zeros_u > 100);
    CHECK(zeros_v > 100);
    const SpaceTimePoint outside{p.u->x0 + Vec3(0.0, 0.0, 0.44), 0.1};
    CHECK(wave_kernel(outside, outside, p) == 0.0);
}

TEST_CASE("wave kernel symmetry and time reversal") {
    const HyperParams p = both_components(0.3, 0.15);
    oracle::Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const SpaceTimePoint a = random_point(rng, 0.0), b = random_point(rng, 0.0);
        const double k = wave_kernel(a, b, p);
        CHECK(wave_kernel(b, a, p) == doctest::Approx(k).epsilon(1e-13));
        const SpaceTimePoint ar{a.x, -a.t}, br{b.x, -b.t};
        CHECK(wave_kernel(ar, br, p) == doctest::Approx(k).epsilon(1e-13));
    }
}

TEST_CASE("feature path equals direct evaluation") {
    const WaveKernel k(both_components(0.3, 0.15));
    oracle::Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        const SpaceTimePoint a = random_point(rng, 0.0), b = random_point(rng, 0.0);
        CHECK(k(a, b) == wave_kernel(a, b, k.params()));
    }
}

TEST_CASE("wave kernel covariance matrices are positive semi-definite") {
    oracle::Rng rng(21);
    for (double R : {0.15, 0.3, inf}) {
        const WaveKernel k(both_components(R, R / 2));
        std::vector<SpaceTimePoint> Z;
        for (int i = 0; i < 50; ++i) Z.push_back(random_point(rng, 0.0));
        const Eigen::MatrixXd K = assemble_covariance(k, std::span<const SpaceTimePoint>(Z));
        const double scale = K.diagonal().maxCoeff();
        REQUIRE(scale > 0.0);
        const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff();
        CHECK(lo >= -1e-8 * scale);
        for (int i = 0; i < K.rows(); ++i)
            for (int j = 0; j < K.cols(); ++j) {
                CHECK(K(i, j) == K(j, i));
                CHECK(std::abs(K(i, j)) <= std::sqrt(K(i, i) * K(j, j)) + 1e-12);
            }
    }
}

TEST_CASE("closed forms agree with the spherical quadrature oracle") {
    HyperParams p = both_components(inf, inf);
    p.v->x0 = p.u->x0;
    p.v->rho = 0.2;
    const auto bu = matern_position_base(p.u->x0, p.u->rho, p.u->sigma2);
    const auto bv = matern_speed_base(p.v->x0, p.v->rho, p.v->sigma2);
    const SphericalRule rule(64);
    oracle::Rng rng(17);
    for (int i = 0; i < 25; ++i) {
        const SpaceTimePoint a = random_point(rng), b = random_point(rng);
        CHECK(oracle::rel(kv_wave_radial(a, b, p), kv_wave_quadrature(bv, a, b, p.c, rule)) < 1e-6);
        CHECK(oracle::rel(ku_wave_radial(a, b, p), ku_wave_quadrature(bu, a, b, p.c, rule)) < 1e-5);
    }
}

TEST_CASE("stationary density of F_t * F_t'") {
    CHECK(stationary_ftft_density(1.0, 1.0, 1.0, 1.0) ==
          doctest::Approx(1.0 / (8.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK(stationary_ftft_density(1.0, 1.0, 1.0, 1.0) == doctest::Approx(0.0397887).epsilon(1e-6));
    CHECK(stationary_ftft_density(3.0, 1.0, 1.0, 1.0) == 0.0);
    CHECK(stationary_ftft_density(0.5, 0.0, 1.0, 1.0) == 0.0);
    CHECK(stationary_ftft_density(0.1, 1.0, 0.5, 1.0) == 0.0);  // below c||t|-|t'||
    CHECK(stationary_ftft_density(1.0, -1.0, 1.0, 1.0) < 0.0);
    CHECK_THROWS_AS((void)stationary_ftft_density(0.0, 1.0, 1.0, 1.0), SingularEvaluationError);
}

TEST_CASE("Gaussian closed form against quadrature of the Gaussian base kernel") {
    const double C = 1.3, L = 0.25, c = 0.5;
    const BaseKernel gauss = [&](const Vec3& a, const Vec3& b) {
        return C * std::exp(-(a - b).squaredNorm() / (2 * L * L));
    };
    const SphericalRule rule(24);
    auto quad = [&](const Vec3& h, double t, double t2) {
        return kv_wave_quadrature(gauss, {h, t}, {Vec3::Zero(), t2}, c, rule);
    };

    // one reference point fixes the constant
    const Vec3 h_ref(0.1, -0.05, 0.2);
    const double calibrated = quad(h_ref, 0.6, 0.4) / stationary_gaussian_wave(h_ref, 0.6, 0.4, c, 1.0, L);
    CHECK(calibrated == doctest::Approx(gaussian_wave_prefactor(C)).epsilon(1e-8));

    oracle::Rng rng(13);
    for (int i = 0; i < 10; ++i) {
        const Vec3 h = rng.point(-0.4, 0.4);
        const double t = rng.uniform(0.1, 1.0) * (i % 3 == 0 ? -1 : 1), t2 = rng.uniform(0.1, 1.0);
        CHECK(oracle::rel(stationary_gaussian_wave(h, t, t2, c, calibrated, L), quad(h, t, t2)) < 1e-4);
    }
    CHECK(stationary_gaussian_wave(h_ref, 0.0, 0.4, c, calibrated, L) == 0.0);
    const double at0 = stationary_gaussian_wave(Vec3::Zero(), 0.6, 0.4, c, calibrated, L);
    CHECK(std::isfinite(at0));
    CHECK(at0 == doctest::Approx(stationary_gaussian_wave(Vec3(1e-4, 0, 0), 0.6, 0.4, c, calibrated, L))
                     .epsilon(1e-6));
}
