#pragma once

#include "waveinform/covariance.hpp"
#include "waveinform/kernels.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace waveinform {

// Active (nonzero-diagonal) indices first, in increasing order, then the rest.
struct ActiveSet {
    std::vector<std::size_t> permutation;
    std::size_t p = 0;

    [[nodiscard]] std::size_t n() const { return permutation.size(); }
    [[nodiscard]] std::size_t q() const { return n() - p; }
    [[nodiscard]] std::span<const std::size_t> active() const { return {permutation.data(), p}; }
    [[nodiscard]] std::span<const std::size_t> inactive() const {
        return {permutation.data() + p, q()};
    }
};

// One kernel call per point: a column is null iff its diagonal entry is.
template <SpaceTimeKernel K>
ActiveSet detect_active(const K& kernel, std::span<const SpaceTimePoint> Z,
                        double tolerance = 0.0) {
    ActiveSet s;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < Z.size(); ++i) {
        const auto f = make_feature(kernel, Z[i]);
        if (eval_feature(kernel, f, f) > tolerance)
            s.permutation.push_back(i);
        else
            out.push_back(i);
    }
    s.p = s.permutation.size();
    s.permutation.insert(s.permutation.end(), out.begin(), out.end());
    return s;
}

[[nodiscard]] bool light_cone_contains(const HyperParams& params, const SpaceTimePoint& z);

template <class T>
std::vector<T> gather(std::span<const T> v, std::span<const std::size_t> idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

// y_in' (K~ + lambda I)^-1 y_in + |y_out|^2 / lambda + log det(K~ + lambda I) + q log lambda
template <SpaceTimeKernel K>
double fast_nll(const K& kernel, std::span<const SpaceTimePoint> Z, std::span<const double> y,
                double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("likelihood needs lambda > 0");
    if (Z.size() != y.size()) throw std::invalid_argument("points and values differ in length");
    const ActiveSet s = detect_active(kernel, Z);

    double out_sq = 0.0;
    for (auto i : s.inactive()) out_sq += y[i] * y[i];
    double nll = out_sq / lambda + static_cast<double>(s.q()) * std::log(lambda);
    if (s.p == 0) return nll;

    const auto Zin = gather(Z, s.active());
    Eigen::VectorXd yin(static_cast<Eigen::Index>(s.p));
    for (std::size_t k = 0; k < s.p; ++k) yin[static_cast<Eigen::Index>(k)] = y[s.permutation[k]];

    Eigen::MatrixXd A = assemble_covariance(kernel, std::span<const SpaceTimePoint>(Zin));
    A.diagonal().array() += lambda;
    const auto chol = factorize_with_jitter(A);
    const Eigen::VectorXd v = chol.llt.matrixL().solve(yin);
    nll += v.squaredNorm();
    nll += 2.0 * chol.llt.matrixLLT().diagonal().array().log().sum();
    return nll;
}

struct RankOneData {
    std::vector<double> F;  // regularized Green evaluations, sensor-major
    std::vector<double> W;  // approximated observations
    double lambda = 1.0;
};

[[nodiscard]] double rank_one_nll(const RankOneData& d);
[[nodiscard]] double limit_profile(const RankOneData& d);

// Time inner product of q sensor traces (sensor-major, equally spaced on [0,T]),
// trapezoid rule, normalized by T.
[[nodiscard]] double trace_inner(std::span<const double> a, std::span<const double> b,
                                 std::size_t q);
[[nodiscard]] double r_infinity(std::span<const double> Iu, std::span<const double> Ix0,
                                std::size_t q);

// F_t convolved with a smooth_cutoff-shaped radial mollifier of radius R and unit mass;
// supported on the shell c|t| - R <= |y| <= c|t| + R.
class RegularizedGreen {
public:
    RegularizedGreen(double c, double R, double alpha = 0.8);
    [[nodiscard]] double operator()(const Vec3& y, double t) const;
    // Antiderivative in s = |y|^2 of the mollifier profile.
    [[nodiscard]] double antiderivative(double s) const;
    [[nodiscard]] double mollifier(double r) const;

private:
    double c_, R_, alpha_, norm_, total_;
    double partial(double x) const;  // int_0^x u phi(u) du
};

}  // namespace waveinform
