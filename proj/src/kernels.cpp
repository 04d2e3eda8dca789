#include "waveinform/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace waveinform {

KernelEvaluationError::KernelEvaluationError(std::size_t i, std::size_t j, double value)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "non-finite kernel value " << value << " at pair (" << i << ", " << j << ")";
          return os.str();
      }()),
      row(i),
      col(j) {}

SingularCovarianceError::SingularCovarianceError(const std::string& what,
                                                 std::vector<double> jitters)
    : std::runtime_error(what), attempted_jitters(std::move(jitters)) {}

double matern52(double h, double rho, double sigma2) {
    const double a = std::abs(h) / rho;
    return sigma2 * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double matern52_d1(double h, double rho, double sigma2) {
    const double a = std::abs(h) / rho;
    return -sigma2 / (3.0 * rho * rho) * h * (1.0 + a) * std::exp(-a);
}

double matern52_d2(double h, double rho, double sigma2) {
    const double a = std::abs(h) / rho;
    return -sigma2 / (3.0 * rho * rho) * (1.0 + a - a * a) * std::exp(-a);
}

double smooth_cutoff(double s, double alpha) {
    if (s < alpha) return 1.0;
    if (s >= 1.0) return 0.0;
    const double u = (s - alpha) / (1.0 - alpha);
    auto psi = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double a = psi(1.0 - u);
    return a / (psi(u) + a);
}

void HyperParams::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("wave speed must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    if (!(alpha_cut > 0.0 && alpha_cut < 1.0))
        throw std::invalid_argument("alpha_cut must lie in (0,1)");
    if (!u && !v) throw std::invalid_argument("at least one kernel component is required");
    for (const auto* comp : {&u, &v}) {
        if (!*comp) continue;
        const auto& q = **comp;
        if (!(q.R > 0.0)) throw std::invalid_argument("source radius must be positive");
        if (!(q.rho > 0.0) || !(q.sigma2 > 0.0))
            throw std::invalid_argument("Matérn parameters must be positive");
        if (!q.x0.allFinite()) throw std::invalid_argument("source centre must be finite");
    }
}

namespace {

double clamped_radius(const Vec3& x, const Vec3& x0) {
    return std::max((x - x0).norm(), kRadiusClamp);
}

double light_offset(double t, double c) {
    return std::abs(t) < kTimeTolerance ? 0.0 : c * std::abs(t);
}

void fill_u(WaveFeatures& f, const SpaceTimePoint& z, const ComponentParams& q, double c,
            double alpha) {
    const double r = clamped_radius(z.x, q.x0);
    const double ct = light_offset(z.t, c);
    const bool truncated = std::isfinite(q.R);
    f.u_live = false;
    for (int k = 0; k < 2; ++k) {
        const double a = k == 0 ? r + ct : r - ct;
        f.su[k] = a * a;
        const double cut = truncated ? smooth_cutoff(std::abs(a) / q.R, alpha) : 1.0;
        f.wu[k] = a * cut;
        if (f.wu[k] != 0.0) f.u_live = true;
    }
    f.inv2r_u = 0.5 / r;
}

void fill_v(WaveFeatures& f, const SpaceTimePoint& z, const ComponentParams& q, double c) {
    f.v_live = false;
    if (std::abs(z.t) < kTimeTolerance) return;
    const double r = clamped_radius(z.x, q.x0);
    const double ct = c * std::abs(z.t);
    const double cap = q.R * q.R;
    f.sv[0] = std::min((r + ct) * (r + ct), cap);
    f.sv[1] = std::min((r - ct) * (r - ct), cap);
    f.scale_v = sgn(z.t) / (4.0 * c * r);
    f.v_live = f.sv[0] != f.sv[1];
}

double u_pair(const WaveFeatures& a, const WaveFeatures& b, const ComponentParams& q) {
    if (!a.u_live || !b.u_live) return 0.0;
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
        if (a.wu[i] == 0.0) continue;
        for (int j = 0; j < 2; ++j) {
            if (b.wu[j] == 0.0) continue;
            sum += a.wu[i] * b.wu[j] * matern52(a.su[i] - b.su[j], q.rho, q.sigma2);
        }
    }
    return a.inv2r_u * b.inv2r_u * sum;
}

double v_pair(const WaveFeatures& a, const WaveFeatures& b, const ComponentParams& q) {
    if (!a.v_live || !b.v_live) return 0.0;
    // Grouped so that equal clamped radii cancel exactly.
    auto inner = [&](double s) {
        return matern52(s - b.sv[0], q.rho, q.sigma2) - matern52(s - b.sv[1], q.rho, q.sigma2);
    };
    return a.scale_v * b.scale_v * (inner(a.sv[0]) - inner(a.sv[1]));
}

}  // namespace

double kv_wave_radial(const SpaceTimePoint& z, const SpaceTimePoint& z2, const HyperParams& p) {
    if (!p.v) return 0.0;
    WaveFeatures a, b;
    fill_v(a, z, *p.v, p.c);
    fill_v(b, z2, *p.v, p.c);
    return v_pair(a, b, *p.v);
}

double ku_wave_radial(const SpaceTimePoint& z, const SpaceTimePoint& z2, const HyperParams& p) {
    if (!p.u) return 0.0;
    WaveFeatures a, b;
    fill_u(a, z, *p.u, p.c, p.alpha_cut);
    fill_u(b, z2, *p.u, p.c, p.alpha_cut);
    return u_pair(a, b, *p.u);
}

double wave_kernel(const SpaceTimePoint& z, const SpaceTimePoint& z2, const HyperParams& p) {
    return ku_wave_radial(z, z2, p) + kv_wave_radial(z, z2, p);
}

WaveKernel::WaveKernel(HyperParams params) : params_(std::move(params)) { params_.validate(); }

WaveFeatures WaveKernel::features(const SpaceTimePoint& z) const {
    WaveFeatures f;
    if (params_.u) fill_u(f, z, *params_.u, params_.c, params_.alpha_cut);
    if (params_.v) fill_v(f, z, *params_.v, params_.c);
    return f;
}

double WaveKernel::evaluate(const WaveFeatures& a, const WaveFeatures& b) const {
    double k = 0.0;
    if (params_.u) k += u_pair(a, b, *params_.u);
    if (params_.v) k += v_pair(a, b, *params_.v);
    return k;
}

double stationary_ftft_density(double hnorm, double t, double t2, double c) {
    const double s = sgn(t) * sgn(t2);
    if (s == 0.0) return 0.0;
    const double lo = c * std::abs(std::abs(t) - std::abs(t2));
    const double hi = c * (std::abs(t) + std::abs(t2));
    if (hnorm < lo || hnorm > hi) return 0.0;
    if (hnorm == 0.0)
        throw SingularEvaluationError("F_t * F_t density is infinite at the origin");
    return s / (8.0 * std::numbers::pi * c * c * hnorm);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// (Phi((R+h)/L) - Phi((R-h)/L)) / 2h, with its h -> 0 limit.
double band_quotient(double R, double h, double L) {
    if (h < 1e-5 * L) return normal_pdf(R / L) / L;
    return (normal_cdf((R + h) / L) - normal_cdf((R - h) / L)) / (2.0 * h);
}

}  // namespace

double stationary_gaussian_wave(const Vec3& h, double t, double t2, double c, double prefactor,
                                double L) {
    const double s = sgn(t) * sgn(t2);
    if (s == 0.0) return 0.0;
    const double R1 = c * std::abs(std::abs(t) - std::abs(t2));
    const double R2 = c * (std::abs(t) + std::abs(t2));
    const double H = h.norm();
    return s * prefactor * L * L * L / (c * c) *
           (band_quotient(R1, H, L) - band_quotient(R2, H, L));
}

double gaussian_wave_prefactor(double C) { return C * std::sqrt(std::numbers::pi / 2.0); }

}  // namespace waveinform
