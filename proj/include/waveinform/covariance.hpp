#pragma once

#include "waveinform/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

namespace waveinform {

template <class K>
concept SpaceTimeKernel = requires(const K& k, const SpaceTimePoint& z) {
    { k(z, z) } -> std::convertible_to<double>;
};

// Kernels that can precompute per-point quantities and evaluate pairs from them.
template <class K>
concept FeatureKernel = SpaceTimeKernel<K> && requires(const K& k, const SpaceTimePoint& z) {
    typename K::Features;
    { k.features(z) } -> std::same_as<typename K::Features>;
    { k.evaluate(k.features(z), k.features(z)) } -> std::convertible_to<double>;
};

template <class K>
struct feature_of {
    using type = SpaceTimePoint;
};
template <FeatureKernel K>
struct feature_of<K> {
    using type = typename K::Features;
};
template <class K>
using feature_t = typename feature_of<K>::type;

template <SpaceTimeKernel K>
feature_t<K> make_feature(const K& kernel, const SpaceTimePoint& z) {
    if constexpr (FeatureKernel<K>)
        return kernel.features(z);
    else
        return z;
}

template <SpaceTimeKernel K>
double eval_feature(const K& kernel, const feature_t<K>& a, const feature_t<K>& b) {
    if constexpr (FeatureKernel<K>)
        return kernel.evaluate(a, b);
    else
        return kernel(a, b);
}

template <SpaceTimeKernel K>
std::vector<feature_t<K>> make_features(const K& kernel, std::span<const SpaceTimePoint> Z) {
    std::vector<feature_t<K>> f;
    f.reserve(Z.size());
    for (const auto& z : Z) f.push_back(make_feature(kernel, z));
    return f;
}

namespace detail {

inline void check_finite(const Eigen::MatrixXd& K) {
    for (Eigen::Index j = 0; j < K.cols(); ++j)
        for (Eigen::Index i = 0; i <= j; ++i)
            if (!std::isfinite(K(i, j)))
                throw KernelEvaluationError(static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(j), K(i, j));
}

}  // namespace detail

// Upper triangle evaluated once and mirrored; columns are distributed over threads.
template <SpaceTimeKernel K>
Eigen::MatrixXd assemble_covariance(const K& kernel, std::span<const SpaceTimePoint> Z) {
    const auto feats = make_features(kernel, Z);
    const auto n = static_cast<Eigen::Index>(Z.size());
    Eigen::MatrixXd M(n, n);
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i)
            M(i, j) = eval_feature(kernel, feats[i], feats[j]);
    detail::check_finite(M);
    M.triangularView<Eigen::StrictlyLower>() = M.transpose();
    return M;
}

// Cross-covariance k(Z_a, Z_b), |Z_a| x |Z_b|.
template <SpaceTimeKernel K>
Eigen::MatrixXd cross_covariance(const K& kernel, std::span<const SpaceTimePoint> A,
                                 std::span<const SpaceTimePoint> B) {
    Eigen::MatrixXd M(A.size(), B.size());
    for (std::size_t j = 0; j < B.size(); ++j)
        for (std::size_t i = 0; i < A.size(); ++i) M(i, j) = kernel(A[i], B[j]);
    return M;
}

namespace reference {

template <SpaceTimeKernel K>
Eigen::MatrixXd assemble_covariance(const K& kernel, std::span<const SpaceTimePoint> Z) {
    const auto feats = make_features(kernel, Z);
    const auto n = static_cast<Eigen::Index>(Z.size());
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i)
            M(i, j) = eval_feature(kernel, feats[i], feats[j]);
    detail::check_finite(M);
    M.triangularView<Eigen::StrictlyLower>() = M.transpose();
    return M;
}

}  // namespace reference

struct JitteredCholesky {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

// Factorizes A; on failure retries with jitter 1e-10..1e-4 times the mean diagonal.
[[nodiscard]] JitteredCholesky factorize_with_jitter(const Eigen::MatrixXd& A);

}  // namespace waveinform
