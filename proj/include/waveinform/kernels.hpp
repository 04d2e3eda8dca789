#pragma once

#include "waveinform/types.hpp"

#include <array>
#include <optional>

namespace waveinform {

[[nodiscard]] double matern52(double h, double rho, double sigma2);
// First and second derivative in h, used by the quadrature oracles.
[[nodiscard]] double matern52_d1(double h, double rho, double sigma2);
[[nodiscard]] double matern52_d2(double h, double rho, double sigma2);

// C-infinity step: 1 below alpha, 0 from 1 on.
[[nodiscard]] double smooth_cutoff(double s, double alpha);

// One radial source block (position or speed).
struct ComponentParams {
    Vec3 x0 = Vec3::Zero();
    double R = 0.0;       // source radius, m; +inf disables truncation
    double rho = 1.0;     // Matérn length scale on squared radii, m^2
    double sigma2 = 1.0;
};

struct HyperParams {
    double c = 1.0;
    std::optional<ComponentParams> u;
    std::optional<ComponentParams> v;
    double lambda = 0.0;
    double alpha_cut = 0.8;

    void validate() const;
};

// Matérn of the difference of squared radii; the position kernel multiplies
// in the cutoff factors, the speed kernel plays the role of the antiderivative.
struct RadialBaseKernel {
    enum class Kind { position, speed };
    Kind kind = Kind::position;
    double rho = 1.0;
    double sigma2 = 1.0;

    [[nodiscard]] double operator()(double s, double s2) const {
        return matern52(s - s2, rho, sigma2);
    }
};

[[nodiscard]] double kv_wave_radial(const SpaceTimePoint& z, const SpaceTimePoint& z2,
                                    const HyperParams& p);
[[nodiscard]] double ku_wave_radial(const SpaceTimePoint& z, const SpaceTimePoint& z2,
                                    const HyperParams& p);
[[nodiscard]] double wave_kernel(const SpaceTimePoint& z, const SpaceTimePoint& z2,
                                 const HyperParams& p);

// Per-point quantities of the wave kernel; pair evaluation then costs
// only the Matérn calls.
struct WaveFeatures {
    // u block: squared shifted radii, weights (r+eps c|t|) phi(.), 1/(2r)
    std::array<double, 2> su{}, wu{};
    double inv2r_u = 0.0;
    bool u_live = false;
    // v block: clamped squared radii, sgn(t)/(4 c r)
    std::array<double, 2> sv{};
    double scale_v = 0.0;
    bool v_live = false;
};

class WaveKernel {
public:
    using Features = WaveFeatures;

    WaveKernel() = default;
    explicit WaveKernel(HyperParams params);

    [[nodiscard]] const HyperParams& params() const { return params_; }

    [[nodiscard]] Features features(const SpaceTimePoint& z) const;
    [[nodiscard]] double evaluate(const Features& a, const Features& b) const;
    [[nodiscard]] double operator()(const SpaceTimePoint& z, const SpaceTimePoint& z2) const {
        return evaluate(features(z), features(z2));
    }

private:
    HyperParams params_;
};

class SingularEvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Density of F_t * F_t' at |h| = hnorm.
[[nodiscard]] double stationary_ftft_density(double hnorm, double t, double t2, double c);

// Closed form of (F_t (x) F_t') * k for the Gaussian base k(h) = C exp(-|h|^2 / 2L^2).
// `prefactor` is the constant multiplying L^3/c^2; see gaussian_wave_prefactor.
[[nodiscard]] double stationary_gaussian_wave(const Vec3& h, double t, double t2, double c,
                                              double prefactor, double L);
// Analytic value of that constant, C sqrt(pi/2).
[[nodiscard]] double gaussian_wave_prefactor(double C);

}  // namespace waveinform
