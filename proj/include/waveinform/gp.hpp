#pragma once

#include "waveinform/covariance.hpp"
#include "waveinform/field.hpp"
#include "waveinform/sparse_fast.hpp"

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

namespace waveinform {

// Zero-mean Kriging posterior restricted to the active training points.
template <SpaceTimeKernel K>
struct PosteriorModel {
    K kernel;
    double lambda = 0.0;
    double jitter = 0.0;
    ActiveSet active;
    std::vector<SpaceTimePoint> training_points;  // active subset, permutation order
    std::vector<feature_t<K>> training_features;
    Eigen::MatrixXd chol_factor;  // lower, L L' = K~ + (lambda + jitter) I
    Eigen::VectorXd alpha;

    [[nodiscard]] std::span<const std::size_t> active_indices() const { return active.active(); }
};

template <SpaceTimeKernel K>
PosteriorModel<K> fit_posterior(K kernel, std::span<const SpaceTimePoint> Z,
                                std::span<const double> y, double lambda) {
    if (Z.size() != y.size()) throw std::invalid_argument("points and values differ in length");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    PosteriorModel<K> m;
    m.kernel = std::move(kernel);
    m.lambda = lambda;
    m.active = detect_active(m.kernel, Z);
    m.training_points = gather(Z, m.active.active());
    m.training_features = make_features(m.kernel, std::span<const SpaceTimePoint>(m.training_points));
    const auto p = static_cast<Eigen::Index>(m.active.p);
    if (p == 0) return m;

    Eigen::VectorXd yin(p);
    for (Eigen::Index k = 0; k < p; ++k) yin[k] = y[m.active.permutation[k]];
    Eigen::MatrixXd A =
        assemble_covariance(m.kernel, std::span<const SpaceTimePoint>(m.training_points));
    A.diagonal().array() += lambda;
    const auto chol = factorize_with_jitter(A);
    m.jitter = chol.jitter;
    m.chol_factor = chol.llt.matrixL();
    m.alpha = chol.llt.solve(yin);
    return m;
}

namespace detail {

template <SpaceTimeKernel K>
Eigen::VectorXd cross_column(const PosteriorModel<K>& m, const feature_t<K>& fz) {
    Eigen::VectorXd kz(static_cast<Eigen::Index>(m.training_features.size()));
    for (std::size_t i = 0; i < m.training_features.size(); ++i)
        kz[static_cast<Eigen::Index>(i)] = eval_feature(m.kernel, m.training_features[i], fz);
    return kz;
}

}  // namespace detail

template <SpaceTimeKernel K>
double predict_mean(const PosteriorModel<K>& m, const SpaceTimePoint& z) {
    if (m.active.p == 0) return 0.0;
    const auto fz = make_feature(m.kernel, z);
    if (eval_feature(m.kernel, fz, fz) == 0.0) return 0.0;
    return detail::cross_column(m, fz).dot(m.alpha);
}

// Returns (mean, variance); exact shortcuts for null diagonal and null cross column.
template <SpaceTimeKernel K>
std::pair<double, double> fast_predict(const PosteriorModel<K>& m, const SpaceTimePoint& z) {
    const auto fz = make_feature(m.kernel, z);
    const double kzz = eval_feature(m.kernel, fz, fz);
    if (kzz == 0.0) return {0.0, 0.0};
    if (m.active.p == 0) return {0.0, kzz};
    const Eigen::VectorXd kz = detail::cross_column(m, fz);
    if (kz.isZero(0.0)) return {0.0, kzz};
    const Eigen::VectorXd v = m.chol_factor.template triangularView<Eigen::Lower>().solve(kz);
    return {kz.dot(m.alpha), std::max(0.0, kzz - v.squaredNorm())};
}

template <SpaceTimeKernel K>
double predict_var(const PosteriorModel<K>& m, const SpaceTimePoint& z) {
    return fast_predict(m, z).second;
}

template <SpaceTimeKernel K>
double neg_log_marginal_likelihood(const K& kernel, std::span<const SpaceTimePoint> Z,
                                   std::span<const double> y, double lambda) {
    return fast_nll(kernel, Z, y, lambda);
}

// Posterior mean on every grid node at time t. Nodes whose prior variance vanishes
// are skipped without touching the training set.
template <SpaceTimeKernel K>
ScalarField3D predict_mean_grid(const PosteriorModel<K>& m, const GridSpec& g, double t) {
    ScalarField3D out(g);
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i)
                out.at(i, j, k) = predict_mean(m, SpaceTimePoint{g.point(i, j, k), t});
    return out;
}

namespace reference {

template <SpaceTimeKernel K>
ScalarField3D predict_mean_grid(const PosteriorModel<K>& m, const GridSpec& g, double t) {
    ScalarField3D out(g);
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i)
                out.at(i, j, k) = predict_mean(m, SpaceTimePoint{g.point(i, j, k), t});
    return out;
}

}  // namespace reference

}  // namespace waveinform
