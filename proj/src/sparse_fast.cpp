#include "waveinform/sparse_fast.hpp"
#include "waveinform/quadrature.hpp"

#include <numbers>

namespace waveinform {

bool light_cone_contains(const HyperParams& params, const SpaceTimePoint& z) {
    const double T = std::abs(z.t) < kTimeTolerance ? 0.0 : params.c * std::abs(z.t);
    for (const auto* comp : {&params.u, &params.v}) {
        if (!*comp) continue;
        const double r = (z.x - (*comp)->x0).norm();
        if (T - (*comp)->R <= r && r <= T + (*comp)->R) return true;
    }
    return false;
}

double rank_one_nll(const RankOneData& d) {
    if (!(d.lambda > 0.0)) throw std::invalid_argument("rank-one likelihood needs lambda > 0");
    if (d.F.size() != d.W.size()) throw std::invalid_argument("F and W differ in length");
    double ff = 0.0, ww = 0.0, fw = 0.0;
    for (std::size_t i = 0; i < d.F.size(); ++i) {
        ff += d.F[i] * d.F[i];
        ww += d.W[i] * d.W[i];
        fw += d.F[i] * d.W[i];
    }
    const double n = static_cast<double>(d.F.size());
    const double lam = d.lambda;
    // |W|^2/lam (1 - <F,W>^2 / (|W|^2 (lam + |F|^2))), written without dividing by |W|^2
    const double data = (ww - fw * fw / (lam + ff)) / lam;
    return data + (n - 1.0) * std::log(lam) + std::log(lam + ff);
}

double limit_profile(const RankOneData& d) {
    double ff = 0.0, ww = 0.0, fw = 0.0;
    for (std::size_t i = 0; i < d.F.size(); ++i) {
        ff += d.F[i] * d.F[i];
        ww += d.W[i] * d.W[i];
        fw += d.F[i] * d.W[i];
    }
    if (!(ww > 0.0)) throw std::invalid_argument("limit profile needs nonzero observations");
    if (ff == 0.0) return ww;
    return ww * (1.0 - fw * fw / (ff * ww));
}

double trace_inner(std::span<const double> a, std::span<const double> b, std::size_t q) {
    if (a.size() != b.size() || q == 0 || a.size() % q != 0)
        throw std::invalid_argument("traces must be q equal-length series");
    const std::size_t N = a.size() / q;
    if (N < 2) throw std::invalid_argument("need at least two samples per trace");
    double sum = 0.0;
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            const double w = (k == 0 || k == N - 1) ? 0.5 : 1.0;
            sum += w * a[i * N + k] * b[i * N + k];
        }
    return sum / static_cast<double>(N - 1);
}

double r_infinity(std::span<const double> Iu, std::span<const double> Ix0, std::size_t q) {
    const double xx = trace_inner(Ix0, Ix0, q);
    if (xx == 0.0) throw std::domain_error("correlation undefined for a zero Green trace");
    const double uu = trace_inner(Iu, Iu, q);
    if (uu == 0.0) return 0.0;
    return trace_inner(Iu, Ix0, q) / std::sqrt(uu * xx);
}

RegularizedGreen::RegularizedGreen(double c, double R, double alpha)
    : c_(c), R_(R), alpha_(alpha) {
    if (!(c > 0.0) || !(R > 0.0)) throw std::invalid_argument("Green needs c > 0 and R > 0");
    // unit mass: 4 pi norm R^3 int_0^1 u^2 phi(u) du = 1
    const double i2 = alpha * alpha * alpha / 3.0 +
                      integrate([&](double u) { return u * u * smooth_cutoff(u, alpha); }, alpha,
                                1.0, 24, 2);
    norm_ = 1.0 / (4.0 * std::numbers::pi * R * R * R * i2);
    total_ = partial(1.0);
}

double RegularizedGreen::partial(double x) const {
    if (x <= alpha_) return 0.5 * x * x;
    const double hi = std::min(x, 1.0);
    return 0.5 * alpha_ * alpha_ +
           integrate([&](double u) { return u * smooth_cutoff(u, alpha_); }, alpha_, hi, 24, 1);
}

double RegularizedGreen::mollifier(double r) const { return norm_ * smooth_cutoff(r / R_, alpha_); }

double RegularizedGreen::antiderivative(double s) const {
    // int_0^s norm phi(sqrt(u)/R) du = 2 norm R^2 int_0^{sqrt(s)/R} u phi(u) du
    const double x = std::sqrt(std::max(s, 0.0)) / R_;
    return 2.0 * norm_ * R_ * R_ * (x >= 1.0 ? total_ : partial(x));
}

double RegularizedGreen::operator()(const Vec3& y, double t) const {
    const double r = y.norm();
    const double T = c_ * std::abs(t);
    if (r < T - R_ || r > T + R_) return 0.0;
    return spherical_mean_radial([this](double s) { return antiderivative(s); }, y, t, c_);
}

}  // namespace waveinform
