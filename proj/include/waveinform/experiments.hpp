#pragma once

#include "waveinform/design.hpp"
#include "waveinform/field.hpp"
#include "waveinform/wave_sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace waveinform {

struct SensorLayout {
    int count = 30;
    double lo = 0.2, hi = 0.8;  // LHS cube
    double rate = 50.0;         // samples per second
    std::uint64_t seed = 11;
    int restarts = 50;
    std::vector<Vec3> positions;  // overrides the LHS layout when non-empty
};

struct PointSourceConfig {
    int sensors = 5;
    double R = 0.02;
    int scan_nodes = 40;  // per axis
    double rate = 100.0;
    double T = 1.5;
    Vec3 source = Vec3(0.52, 0.47, 0.55);
    double lambda = 1e-6;
    double lo = 0.2, hi = 0.8;
    std::uint64_t seed = 14;
};

struct ExperimentConfig {
    int test_case = 1;  // 1-3 for the reference cases, 0 for custom
    SimConfig sim;
    InitialCondition u0, v0;
    SensorLayout sensors;
    double noise_sigma = 0.09;
    std::uint64_t noise_seed = 12;

    ParamLayout layout;
    std::optional<HyperBox> box;  // default_box(layout) when empty
    int fit_sensors = 10;
    int n_mult = 20;
    std::uint64_t fit_seed = 13;
    FitOptions fit_options;
    HyperParams truth;

    int recon_sensors = 30;
    double dx_grid = 0.02;
    double dt_v = 1e-7;
    bool recon_from_fit = false;  // otherwise the true parameters
    std::vector<double> error_norms{1.0, 2.0, kInfinityNorm};

    PointSourceConfig pointsource;

    [[nodiscard]] HyperBox search_box() const { return box ? *box : default_box(layout); }
    void validate() const;
};

[[nodiscard]] ExperimentConfig preset(int test_case);
// Starts from preset(test_case) and overrides whatever the JSON document sets.
[[nodiscard]] ExperimentConfig parse_config(const std::string& json);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);
[[nodiscard]] std::string config_json(const ExperimentConfig& cfg);
// Derives layout, noise, fit and point-source seeds from one value.
void apply_master_seed(ExperimentConfig& cfg, std::uint64_t seed);

[[nodiscard]] std::string hyperparams_json(const HyperParams& p);
[[nodiscard]] HyperParams parse_hyperparams(const std::string& json);

[[nodiscard]] std::vector<Vec3> sensor_positions(const SensorLayout& layout);
[[nodiscard]] SensorDataset first_sensors(const SensorDataset& d, std::size_t n);
// Simulates the configured test case and samples the (noisy) sensor dataset.
[[nodiscard]] SensorDataset generate_dataset(const ExperimentConfig& cfg,
                                             FieldHistory* history = nullptr);

struct Reconstruction {
    ScalarField3D u0, v0;
    std::size_t active = 0;  // training points with nonzero prior variance
};
// u0 = m(x, 0); v0 = (m(x, dt_v) - m(x, 0)) / dt_v on grid g.
[[nodiscard]] Reconstruction reconstruct(const SensorDataset& data, const HyperParams& theta,
                                         const GridSpec& g, double dt_v, bool parallel = true);

struct ErrorRow {
    std::string field;
    double p = 2.0;
    double error = 0.0;
};
// Relative Lp errors of the non-zero truth fields.
[[nodiscard]] std::vector<ErrorRow> reconstruction_errors(const ScalarField3D& u_rec,
                                                          const ScalarField3D& v_rec,
                                                          const InitialCondition& u0,
                                                          const InitialCondition& v0,
                                                          const std::vector<double>& norms);

// Sensor traces of the regularized Green function centred at `source`.
[[nodiscard]] SensorDataset point_source_traces(const std::vector<Vec3>& sensors,
                                                const Vec3& source, double c, double R,
                                                double rate, double T, double alpha = 0.8);

struct PointSourceScan {
    ScalarField3D nll;  // rank-one likelihood per candidate source
    Vec3 argmin = Vec3::Zero();
    double min_value = 0.0;
};
[[nodiscard]] double point_source_nll(const SensorDataset& W, const Vec3& x0, double c, double R,
                                      double lambda, double alpha = 0.8);
[[nodiscard]] PointSourceScan point_source_scan(const SensorDataset& W, const GridSpec& grid,
                                                double c, double R, double lambda,
                                                double alpha = 0.8);

// CLI commands. Each reads/writes inside `out` and records its files in manifest.json.
namespace cmd {
void simulate(const ExperimentConfig& cfg, const std::filesystem::path& out);
void sample(const ExperimentConfig& cfg, const std::filesystem::path& out);
void fit(const ExperimentConfig& cfg, const std::filesystem::path& out);
void reconstruct(const ExperimentConfig& cfg, const std::filesystem::path& out);
void errors(const ExperimentConfig& cfg, const std::filesystem::path& out);
void pointsource_scan(const ExperimentConfig& cfg, const std::filesystem::path& out);
}  // namespace cmd

void save_history(const FieldHistory& h, const std::filesystem::path& stem);
[[nodiscard]] FieldHistory load_history(const std::filesystem::path& stem);

void write_fit_trace(const FitResult& fit, const ParamLayout& layout,
                     const std::filesystem::path& path);

}  // namespace waveinform
