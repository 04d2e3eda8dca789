#pragma once
// Numerical acceptance suite shared by the acceptance test and `waveinform verify`.

#include "waveinform/design.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace waveinform {

struct CheckResult {
    int id = 0;  // acceptance criterion number, 0 for auxiliary invariants
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
    double seconds = 0.0;
};

struct CheckOptions {
    std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    bool invariants = true;      // PSD / Cauchy-Schwarz of assembled covariances
    bool tamper_sign = false;    // mutation test: negate the kernel in the PSD check
    int quadrature_order = 64;   // spherical rule used by the closed-form oracle
    double recon_grid = 0.02;    // reconstruction grid step for the end-to-end check
    int fit_starts = 20;
    FitOptions fit_options{1e-4, 1500, 20};
    std::uint64_t seed = 2024;   // random instances of the synthetic checks
    std::filesystem::path workdir;  // scratch space for the determinism check (temp dir if empty)
};

[[nodiscard]] std::vector<CheckResult> run_checks(const CheckOptions& opts);
[[nodiscard]] std::string checks_json(const std::vector<CheckResult>& results);
[[nodiscard]] std::string check_line(const CheckResult& r);

// Overrides CheckOptions fields present in a JSON document: criteria, invariants,
// tamper_sign, quadrature_order, recon_grid, fit_starts, fit_tol, fit_max_evals,
// fit_lhs_restarts, seed, workdir.
[[nodiscard]] CheckOptions parse_check_options(const std::string& json);

namespace cmd {
// Runs the suite, writes verify.json into `out` and returns whether every check passed.
bool verify(const CheckOptions& opts, const std::filesystem::path& out);
}  // namespace cmd

}  // namespace waveinform
