#include "waveinform/quadrature.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace waveinform {

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-16) break;
        }
        gl.nodes[i] = x;
        gl.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return gl;
}

double integrate(const std::function<double(double)>& f, double a, double b, int n, int panels) {
    const GaussLegendre gl = gauss_legendre(n);
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int i = 0; i < n; ++i) sum += gl.weights[i] * f(mid + 0.5 * h * gl.nodes[i]);
    }
    return 0.5 * h * sum;
}

SphericalRule::SphericalRule(int n_theta, int n_phi, const Vec3& axis) : n_phi_(n_phi) {
    if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("spherical rule order must be positive");
    const Vec3 e = axis.normalized();
    const Vec3 helper = std::abs(e.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 e1 = helper.cross(e).normalized();
    const Vec3 e2 = e.cross(e1);
    const GaussLegendre gl = gauss_legendre(n_theta);
    mu_ = gl.nodes;
    ring_w_.resize(n_theta);
    nodes_.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    weights_.reserve(nodes_.capacity());
    for (int i = 0; i < n_theta; ++i) {
        ring_w_[i] = 0.5 * gl.weights[i];
        const double mu = gl.nodes[i];
        const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / n_phi;
            nodes_.push_back(mu * e + s * (std::cos(phi) * e1 + std::sin(phi) * e2));
            weights_.push_back(ring_w_[i] / n_phi);
        }
    }
}

BaseKernelDerivatives central_difference_derivatives(BaseKernel k, double step) {
    return [k = std::move(k), h = step](const Vec3& x, const Vec3& x2) {
        KernelDerivatives d;
        d.value = k(x, x2);
        for (int i = 0; i < 3; ++i) {
            const Vec3 ei = h * Vec3::Unit(i);
            d.grad1[i] = (k(x + ei, x2) - k(x - ei, x2)) / (2 * h);
            d.grad2[i] = (k(x, x2 + ei) - k(x, x2 - ei)) / (2 * h);
            for (int j = 0; j < 3; ++j) {
                const Vec3 ej = h * Vec3::Unit(j);
                d.cross(i, j) = (k(x + ei, x2 + ej) - k(x + ei, x2 - ej) - k(x - ei, x2 + ej) +
                                 k(x - ei, x2 - ej)) /
                                (4 * h * h);
            }
        }
        return d;
    };
}

double SquaredRadialBase::operator()(const Vec3& x, const Vec3& x2) const {
    return g((x - x0).squaredNorm() - (x2 - x0).squaredNorm());
}

KernelDerivatives SquaredRadialBase::derivatives(const Vec3& x, const Vec3& x2) const {
    const Vec3 a = x - x0, b = x2 - x0;
    const double h = a.squaredNorm() - b.squaredNorm();
    KernelDerivatives d;
    d.value = g(h);
    const double g1 = dg(h);
    d.grad1 = 2.0 * g1 * a;
    d.grad2 = -2.0 * g1 * b;
    d.cross = -4.0 * d2g(h) * a * b.transpose();
    return d;
}

SquaredRadialBase matern_position_base(const Vec3& x0, double rho, double sigma2) {
    return {x0, [=](double h) { return matern52(h, rho, sigma2); },
            [=](double h) { return matern52_d1(h, rho, sigma2); },
            [=](double h) { return matern52_d2(h, rho, sigma2); }};
}

SquaredRadialBase matern_speed_base(const Vec3& x0, double rho, double sigma2) {
    auto unavailable = [](double) -> double {
        throw std::logic_error("speed base derivatives are not provided");
    };
    return {x0, [=](double h) { return -matern52_d2(h, rho, sigma2); }, unavailable, unavailable};
}

double kv_wave_quadrature(const BaseKernel& k, const SpaceTimePoint& z, const SpaceTimePoint& z2,
                          double c, const SphericalRule& rule) {
    const double T = c * std::abs(z.t), T2 = c * std::abs(z2.t);
    const auto& g = rule.nodes();
    const auto& w = rule.weights();
    double sum = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
        const Vec3 y = z.x - T * g[a];
        double inner = 0.0;
        for (std::size_t b = 0; b < g.size(); ++b) inner += w[b] * k(y, z2.x - T2 * g[b]);
        sum += w[a] * inner;
    }
    return z.t * z2.t * sum;
}

double ku_wave_quadrature(const BaseKernelDerivatives& k, const SpaceTimePoint& z,
                          const SpaceTimePoint& z2, double c, const SphericalRule& rule) {
    const double T = c * std::abs(z.t), T2 = c * std::abs(z2.t);
    const auto& g = rule.nodes();
    const auto& w = rule.weights();
    double sum = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
        const Vec3 y = z.x - T * g[a];
        double inner = 0.0;
        for (std::size_t b = 0; b < g.size(); ++b) {
            const KernelDerivatives d = k(y, z2.x - T2 * g[b]);
            inner += w[b] * (d.value - T * d.grad1.dot(g[a]) -
                             T2 * d.grad2.dot(g[b]) + T * T2 * g[a].dot(d.cross * g[b]));
        }
        sum += w[a] * inner;
    }
    return sum;
}

namespace {

// Squared radius |x - x0 - T gamma|^2 and (x - x0 - T gamma).gamma on each ring.
struct RingGeometry {
    std::vector<double> s, proj;
};

RingGeometry rings(double r, double T, const SphericalRule& rule) {
    RingGeometry out;
    for (double mu : rule.mu()) {
        out.s.push_back(std::max(0.0, r * r + T * T - 2.0 * r * T * mu));
        out.proj.push_back(r * mu - T);
    }
    return out;
}

}  // namespace

double kv_wave_quadrature(const SquaredRadialBase& k, const SpaceTimePoint& z,
                          const SpaceTimePoint& z2, double c, const SphericalRule& rule) {
    const auto A = rings((z.x - k.x0).norm(), c * std::abs(z.t), rule);
    const auto B = rings((z2.x - k.x0).norm(), c * std::abs(z2.t), rule);
    const auto& w = rule.ring_weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) inner += w[j] * k.g(A.s[i] - B.s[j]);
        sum += w[i] * inner;
    }
    return z.t * z2.t * sum;
}

double ku_wave_quadrature(const SquaredRadialBase& k, const SpaceTimePoint& z,
                          const SpaceTimePoint& z2, double c, const SphericalRule& rule) {
    const auto A = rings((z.x - k.x0).norm(), c * std::abs(z.t), rule);
    const auto B = rings((z2.x - k.x0).norm(), c * std::abs(z2.t), rule);
    const auto& w = rule.ring_weights();
    // the position kernel is even in both times
    const double a1 = c * std::abs(z.t), a2 = c * std::abs(z2.t), a12 = a1 * a2;
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double h = A.s[i] - B.s[j];
            // gradients of g(|y-x0|^2 - |y'-x0|^2) projected on gamma, gamma'
            const double g1 = k.dg(h);
            inner += w[j] * (k.g(h) - a1 * 2.0 * g1 * A.proj[i] + a2 * 2.0 * g1 * B.proj[j] -
                             a12 * 4.0 * k.d2g(h) * A.proj[i] * B.proj[j]);
        }
        sum += w[i] * inner;
    }
    return sum;
}

double spherical_mean_radial(const std::function<double(double)>& antiderivF, const Vec3& x,
                             double t, double c) {
    if (std::abs(t) < kTimeTolerance) return 0.0;
    const double r = std::max(x.norm(), kRadiusClamp);
    const double T = c * std::abs(t);
    return sgn(t) / (4.0 * c * r) * (antiderivF((r + T) * (r + T)) - antiderivF((r - T) * (r - T)));
}

Vec3 RadialProfile::gradient(const Vec3& x) const {
    const Vec3 d = x - centre;
    const double r = d.norm();
    if (r == 0.0) return Vec3::Zero();
    return derivative(r) / r * d;
}

double wave_speed_term(const RadialProfile& v0, const Vec3& x, double t, double c) {
    return spherical_mean_radial(v0.antiderivative, x - v0.centre, t, c);
}

double wave_position_term(const RadialProfile& u0, const Vec3& x, double t, double c) {
    const double r = std::max((x - u0.centre).norm(), kRadiusClamp);
    const double T = std::abs(t) < kTimeTolerance ? 0.0 : c * std::abs(t);
    return ((r + T) * u0.value(r + T) + (r - T) * u0.value(std::abs(r - T))) / (2.0 * r);
}

double kirchhoff_eval(const ScalarFunction& u0, const VectorFunction& grad_u0,
                      const ScalarFunction& v0, const Vec3& x, double t, double c,
                      const SphericalRule& rule) {
    const double T = c * std::abs(t);
    const auto& g = rule.nodes();
    const auto& w = rule.weights();
    double sum = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a) {
        const Vec3 y = x - T * g[a];
        sum += w[a] * (t * v0(y) + u0(y) - T * g[a].dot(grad_u0(y)));
    }
    return sum;
}

namespace {

// Neumaier-compensated sum in fixed order.
struct CompensatedSum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    [[nodiscard]] double value() const { return sum + comp; }
};

double norm_of(const std::vector<double>& v, double cell, double p) {
    if (p == kInfinityNorm) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    CompensatedSum s;
    for (double x : v) s.add(std::pow(std::abs(x), p));
    return std::pow(s.value() * cell, 1.0 / p);
}

}  // namespace

double lp_norm(const ScalarField3D& f, double p) {
    return norm_of(f.values, std::pow(f.grid.dx, 3), p);
}

double lp_relative_error(const ScalarField3D& approx, const ScalarField3D& truth, double p) {
    if (!(approx.grid == truth.grid)) throw std::invalid_argument("fields live on different grids");
    std::vector<double> diff(truth.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = truth.values[i] - approx.values[i];
    const double cell = std::pow(truth.grid.dx, 3);
    const double denom = norm_of(truth.values, cell, p);
    if (denom == 0.0) throw std::domain_error("relative error against a zero field");
    return norm_of(diff, cell, p) / denom;
}

double verify_dalembert(const SpaceTimeFunction& f, const SpaceTimePoint& z, double c,
                        double step) {
    const double h = step;
    const double f0 = f(z);
    auto shifted = [&](int axis, double d) {
        SpaceTimePoint q = z;
        if (axis == 3)
            q.t += d;
        else
            q.x[axis] += d;
        return f(q);
    };
    std::array<double, 4> second{};
    for (int a = 0; a < 4; ++a) second[a] = (shifted(a, h) - 2.0 * f0 + shifted(a, -h)) / (h * h);
    const double ftt = second[3] / (c * c);
    const double lap = second[0] + second[1] + second[2];
    double scale = std::abs(ftt);
    for (int a = 0; a < 3; ++a) scale = std::max(scale, std::abs(second[a]));
    if (scale == 0.0) return 0.0;
    return std::abs(ftt - lap) / scale;
}

bool away_from_kinks(const SpaceTimePoint& z, const HyperParams& p, double margin) {
    for (const auto* comp : {&p.u, &p.v}) {
        if (!*comp) continue;
        const double r = (z.x - (*comp)->x0).norm();
        const double T = p.c * std::abs(z.t), R = (*comp)->R;
        if (r < margin) return false;
        if (std::abs(r - (T + R)) < margin || std::abs(r - std::abs(T - R)) < margin) return false;
    }
    return true;
}

LpStabilityReport lp_stability_check(const RadialProfile& u0, const RadialProfile& v0, double c,
                                     double t, double p, double dx, double tolerance) {
    LpStabilityReport rep;
    rep.p = p;
    rep.t = t;
    const double reach = c * std::abs(t) + 2.0 * dx;

    const double hv = v0.support + reach;
    const GridSpec gv = GridSpec::cube(-hv, hv, dx);
    auto shift = [](GridSpec g, const Vec3& centre) {
        g.origin += centre;
        return g;
    };
    const GridSpec grid_v = shift(gv, v0.centre);
    const auto sol_v =
        ScalarField3D::sample(grid_v, [&](const Vec3& x) { return wave_speed_term(v0, x, t, c); });
    const auto init_v = ScalarField3D::sample(grid_v, [&](const Vec3& x) { return v0(x); });
    rep.speed_lhs = lp_norm(sol_v, p);
    rep.speed_rhs = std::abs(t) * lp_norm(init_v, p);
    rep.speed_ok = rep.speed_lhs <= rep.speed_rhs * (1.0 + tolerance);

    const double hu = u0.support + reach;
    const GridSpec grid_u = shift(GridSpec::cube(-hu, hu, dx), u0.centre);
    const auto sol_u = ScalarField3D::sample(
        grid_u, [&](const Vec3& x) { return wave_position_term(u0, x, t, c); });
    const auto init_u = ScalarField3D::sample(grid_u, [&](const Vec3& x) { return u0(x); });
    const auto grad_u = ScalarField3D::sample(grid_u, [&](const Vec3& x) {
        const Vec3 g = u0.gradient(x);
        if (p == kInfinityNorm) return g.cwiseAbs().maxCoeff();
        return std::pow(g.cwiseAbs().array().pow(p).sum(), 1.0 / p);
    });
    rep.position_lhs = lp_norm(sol_u, p);
    rep.position_rhs = lp_norm(init_u, p) + 3.0 * c * std::abs(t) * lp_norm(grad_u, p);
    rep.position_ok = rep.position_lhs <= rep.position_rhs * (1.0 + tolerance);
    return rep;
}

}  // namespace waveinform
