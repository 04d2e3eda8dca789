#pragma once
// Independent reference computations used only by the tests.

#include "waveinform/kernels.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using waveinform::SpaceTimePoint;
using waveinform::Vec3;
using Kernel = std::function<double(const SpaceTimePoint&, const SpaceTimePoint&)>;

inline Eigen::MatrixXd full_matrix(const Kernel& k, const std::vector<SpaceTimePoint>& Z) {
    const auto n = static_cast<Eigen::Index>(Z.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) K(i, j) = k(Z[i], Z[j]);
    return K;
}

// Straight dense Kriging with an LU solve on the full n x n system.
struct DenseGP {
    Eigen::MatrixXd A;  // K + lambda I
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    Eigen::VectorXd y, weights;
    std::vector<SpaceTimePoint> Z;
    Kernel k;

    DenseGP(Kernel kernel, std::vector<SpaceTimePoint> pts, const std::vector<double>& values,
            double lambda)
        : Z(std::move(pts)), k(std::move(kernel)) {
        A = full_matrix(k, Z);
        A.diagonal().array() += lambda;
        lu.compute(A);
        y = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        weights = lu.solve(y);
    }
    Eigen::VectorXd column(const SpaceTimePoint& z) const {
        Eigen::VectorXd v(static_cast<Eigen::Index>(Z.size()));
        for (std::size_t i = 0; i < Z.size(); ++i) v[static_cast<Eigen::Index>(i)] = k(Z[i], z);
        return v;
    }
    double mean(const SpaceTimePoint& z) const { return column(z).dot(weights); }
    double var(const SpaceTimePoint& z) const {
        const Eigen::VectorXd c = column(z);
        return k(z, z) - c.dot(lu.solve(c));
    }
    double nll() const {
        double logdet = 0.0;
        const Eigen::MatrixXd U = lu.matrixLU().triangularView<Eigen::Upper>();
        for (Eigen::Index i = 0; i < U.rows(); ++i) logdet += std::log(std::abs(U(i, i)));
        return y.dot(weights) + logdet;
    }
};

// Indices whose covariance column is entirely zero.
inline std::vector<bool> null_columns(const Eigen::MatrixXd& K) {
    std::vector<bool> out(static_cast<std::size_t>(K.cols()));
    for (Eigen::Index j = 0; j < K.cols(); ++j) out[static_cast<std::size_t>(j)] = K.col(j).isZero(0.0);
    return out;
}

inline double rel(double a, double b, double floor = 0.0) {
    const double s = std::max({std::abs(a), std::abs(b), floor});
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
    Vec3 point(double a, double b) { return {uniform(a, b), uniform(a, b), uniform(a, b)}; }
};

}  // namespace oracle
