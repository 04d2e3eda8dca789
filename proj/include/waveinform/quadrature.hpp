#pragma once

#include "waveinform/field.hpp"
#include "waveinform/kernels.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace waveinform {

struct GaussLegendre {
    std::vector<double> nodes, weights;  // on [-1, 1]
};
[[nodiscard]] GaussLegendre gauss_legendre(int n);

// Integrates f over [a, b] with an n-point Gauss-Legendre rule on each of `panels` panels.
[[nodiscard]] double integrate(const std::function<double(double)>& f, double a, double b,
                               int n = 20, int panels = 1);

// Product rule on the unit sphere: Gauss-Legendre in cos(theta) about `axis`,
// uniform in phi. Weights are normalized to sum to 1.
class SphericalRule {
public:
    SphericalRule(int n_theta, int n_phi, const Vec3& axis = Vec3::UnitZ());
    explicit SphericalRule(int order = 32) : SphericalRule(order, 2 * order) {}

    [[nodiscard]] int n_theta() const { return static_cast<int>(mu_.size()); }
    [[nodiscard]] int n_phi() const { return n_phi_; }
    [[nodiscard]] const std::vector<Vec3>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    // cos(theta) nodes and the total weight of each ring.
    [[nodiscard]] const std::vector<double>& mu() const { return mu_; }
    [[nodiscard]] const std::vector<double>& ring_weights() const { return ring_w_; }

private:
    int n_phi_;
    std::vector<Vec3> nodes_;
    std::vector<double> weights_;
    std::vector<double> mu_, ring_w_;
};

struct KernelDerivatives {
    double value = 0.0;
    Vec3 grad1 = Vec3::Zero();
    Vec3 grad2 = Vec3::Zero();
    Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();  // d^2 k / dx_i dx'_j
};

using BaseKernel = std::function<double(const Vec3&, const Vec3&)>;
using BaseKernelDerivatives = std::function<KernelDerivatives(const Vec3&, const Vec3&)>;

// Central differences of a base kernel, for kernels without analytic derivatives.
[[nodiscard]] BaseKernelDerivatives central_difference_derivatives(BaseKernel k, double step);

// Base kernel k(x, x') = g(|x - x0|^2 - |x' - x0|^2) with g and its derivatives.
struct SquaredRadialBase {
    Vec3 x0 = Vec3::Zero();
    std::function<double(double)> g, dg, d2g;

    [[nodiscard]] double operator()(const Vec3& x, const Vec3& x2) const;
    [[nodiscard]] KernelDerivatives derivatives(const Vec3& x, const Vec3& x2) const;
};

// Position base: Matérn of the squared-radius difference.
[[nodiscard]] SquaredRadialBase matern_position_base(const Vec3& x0, double rho, double sigma2);
// Speed base: mixed second derivative of the same Matérn, i.e. -m''.
[[nodiscard]] SquaredRadialBase matern_speed_base(const Vec3& x0, double rho, double sigma2);

[[nodiscard]] double kv_wave_quadrature(const BaseKernel& k, const SpaceTimePoint& z,
                                        const SpaceTimePoint& z2, double c,
                                        const SphericalRule& rule);
[[nodiscard]] double ku_wave_quadrature(const BaseKernelDerivatives& k, const SpaceTimePoint& z,
                                        const SpaceTimePoint& z2, double c,
                                        const SphericalRule& rule);

// Same sums for squared-radial bases. The integrand depends on gamma only through
// its cosine with x - x0, so each sphere reduces to the rule's cos(theta) rings.
[[nodiscard]] double kv_wave_quadrature(const SquaredRadialBase& k, const SpaceTimePoint& z,
                                        const SpaceTimePoint& z2, double c,
                                        const SphericalRule& rule);
[[nodiscard]] double ku_wave_quadrature(const SquaredRadialBase& k, const SpaceTimePoint& z,
                                        const SpaceTimePoint& z2, double c,
                                        const SphericalRule& rule);

// (F_t * g)(x) for g(y) = f(|y|^2), given an antiderivative F of f.
[[nodiscard]] double spherical_mean_radial(const std::function<double(double)>& antiderivF,
                                           const Vec3& x, double t, double c);

// Radial function of |x - centre|, with its derivative and the antiderivative of
// s -> value(sqrt(s)).
struct RadialProfile {
    Vec3 centre = Vec3::Zero();
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::function<double(double)> antiderivative;
    double support = 0.0;  // value vanishes beyond this radius

    [[nodiscard]] double operator()(const Vec3& x) const { return value((x - centre).norm()); }
    [[nodiscard]] Vec3 gradient(const Vec3& x) const;
};

// (F_t * g)(x) and its time derivative for a radial profile.
[[nodiscard]] double wave_speed_term(const RadialProfile& v0, const Vec3& x, double t, double c);
[[nodiscard]] double wave_position_term(const RadialProfile& u0, const Vec3& x, double t,
                                        double c);

using ScalarFunction = std::function<double(const Vec3&)>;
using VectorFunction = std::function<Vec3(const Vec3&)>;

[[nodiscard]] double kirchhoff_eval(const ScalarFunction& u0, const VectorFunction& grad_u0,
                                    const ScalarFunction& v0, const Vec3& x, double t, double c,
                                    const SphericalRule& rule);

constexpr double kInfinityNorm = -1.0;  // pass as p for the sup norm

[[nodiscard]] double lp_norm(const ScalarField3D& f, double p);
[[nodiscard]] double lp_relative_error(const ScalarField3D& approx, const ScalarField3D& truth,
                                       double p);

using SpaceTimeFunction = std::function<double(const SpaceTimePoint&)>;
[[nodiscard]] double verify_dalembert(const SpaceTimeFunction& f, const SpaceTimePoint& z,
                                      double c, double step = 1e-3);

// True when z is at least `margin` away from every sphere |x - x0| = |c|t| +- R|.
[[nodiscard]] bool away_from_kinks(const SpaceTimePoint& z, const HyperParams& p,
                                   double margin);

struct LpStabilityReport {
    double p = 2.0;
    double t = 0.0;
    double speed_lhs = 0.0, speed_rhs = 0.0;        // ||F_t * v0||, |t| ||v0||
    double position_lhs = 0.0, position_rhs = 0.0;  // ||dF_t * u0||, ||u0|| + 3c|t| ||grad u0||
    bool speed_ok = false, position_ok = false;
    [[nodiscard]] bool ok() const { return speed_ok && position_ok; }
};

[[nodiscard]] LpStabilityReport lp_stability_check(const RadialProfile& u0,
                                                   const RadialProfile& v0, double c, double t,
                                                   double p, double dx,
                                                   double tolerance = 0.02);

}  // namespace waveinform
