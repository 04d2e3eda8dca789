#pragma once

#include "waveinform/kernels.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace waveinform {

struct HyperBox {
    Eigen::VectorXd lower, upper;
    // Coordinates searched on a log scale before the logit map (e.g. lambda).
    std::vector<bool> log_scale;

    [[nodiscard]] Eigen::Index dim() const { return lower.size(); }
    [[nodiscard]] bool is_log(Eigen::Index i) const;
    void validate() const;
};

// n points in the box, one per stratum on every axis; best maximin of `restarts` draws.
[[nodiscard]] std::vector<Eigen::VectorXd> lhs_design(int n, const HyperBox& box, int restarts,
                                                      std::uint64_t seed);
[[nodiscard]] double min_pairwise_distance(const std::vector<Eigen::VectorXd>& pts);

// Bijection between the box and R^d used by the optimizer.
[[nodiscard]] Eigen::VectorXd to_unbounded(const Eigen::VectorXd& x, const HyperBox& box);
[[nodiscard]] Eigen::VectorXd to_box(const Eigen::VectorXd& y, const HyperBox& box);

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct MinimizeResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int evals = 0;
};

// Nelder-Mead in logit coordinates; stops when the simplex diameter (in those
// coordinates) falls below tol or after max_evals objective calls.
[[nodiscard]] MinimizeResult minimize_box(const Objective& f, const HyperBox& box,
                                          const Eigen::VectorXd& x_start, double tol = 1e-6,
                                          int max_evals = 2000);

// Encoding of HyperParams for the optimizer:
// [x0_u(3), R_u, rho_u, sigma2_u] [x0_v(3), R_v, rho_v, sigma2_v] c, lambda
struct ParamLayout {
    bool u = true, v = false;
    double alpha_cut = 0.8;

    [[nodiscard]] int size() const { return 6 * (u ? 1 : 0) + 6 * (v ? 1 : 0) + 2; }
    [[nodiscard]] Eigen::VectorXd encode(const HyperParams& p) const;
    [[nodiscard]] HyperParams decode(const Eigen::VectorXd& x) const;
    [[nodiscard]] std::vector<std::string> names() const;
};

struct StartRecord {
    int start_id = 0;
    Eigen::VectorXd theta_start, theta_end;
    double nll_end = 0.0;
    int evals = 0;
    bool failed = false;
    std::string error;
};

struct FitResult {
    HyperParams best;
    double best_nll = 0.0;
    std::vector<StartRecord> trace;
};

struct FitOptions {
    double tol = 1e-4;
    int max_evals = 1500;
    int lhs_restarts = 20;
};

// Minimizes `objective` from n_mult LHS starts and keeps the best end point.
[[nodiscard]] FitResult multistart_minimize(const Objective& objective, const ParamLayout& layout,
                                            const HyperBox& box, int n_mult, std::uint64_t seed,
                                            const FitOptions& opts = {});

// Negative log marginal likelihood of the wave kernel for a dataset, as a
// function of the encoded parameters.
[[nodiscard]] Objective wave_nll_objective(const SensorDataset& data, const ParamLayout& layout);

[[nodiscard]] FitResult multistart_fit(const SensorDataset& data, const ParamLayout& layout,
                                       const HyperBox& box, int n_mult, std::uint64_t seed,
                                       const FitOptions& opts = {});

// Search box used for the reference test cases (u-only, v-only, or both).
[[nodiscard]] HyperBox default_box(const ParamLayout& layout);

}  // namespace waveinform
