#pragma once

#include "waveinform/field.hpp"
#include "waveinform/quadrature.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace waveinform {

struct SimConfig {
    double L = 1.0;
    double dx = 0.043;
    double dt = 0.005;
    double c = 0.5;
    double T = 1.5;
    int abc_order = 2;

    // dx is snapped so that a whole number of cells spans the box.
    [[nodiscard]] int cells() const;
    [[nodiscard]] double grid_step() const { return L / cells(); }
    [[nodiscard]] double courant() const { return c * dt / grid_step(); }
    void validate() const;
};

struct InitialCondition {
    enum class Kind { zero, raised_cosine, ring_cosine, custom };
    Kind kind = Kind::zero;
    Vec3 x0 = Vec3::Zero();
    double R = 0.0;             // raised cosine radius
    double R1 = 0.0, R2 = 0.0;  // ring radii
    double A = 0.0;
    std::function<double(const Vec3&)> custom;

    static InitialCondition zero() { return {}; }
    static InitialCondition raised_cosine(const Vec3& x0, double R, double A);
    static InitialCondition ring_cosine(const Vec3& x0, double R1, double R2, double A);
    void validate() const;
};

[[nodiscard]] double ic_eval(const InitialCondition& ic, const Vec3& x);
// Radial description of a raised or ring cosine (zero for Kind::zero).
[[nodiscard]] RadialProfile radial_profile(const InitialCondition& ic);
[[nodiscard]] ScalarField3D render(const InitialCondition& ic, const GridSpec& g);

// Three time levels of the leapfrog scheme on an (n x n x n)-node grid.
struct FdtdState {
    int n = 0;
    double dx = 0.0, dt = 0.0, c = 0.0;
    std::vector<double> prev, cur, next;

    [[nodiscard]] std::size_t idx(int i, int j, int k) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k);
    }
};

// One leapfrog step into `next` (interior sweep parallel over z-slabs), boundary
// update, then rotation so that `cur` holds the new level.
void fdtd_step(FdtdState& s, int abc_order);
namespace reference {
void fdtd_step(FdtdState& s, int abc_order);
}

struct FieldHistory {
    GridSpec grid;
    double rate = 0.0;  // snapshots per second
    std::vector<double> times;
    std::vector<std::vector<double>> snapshots;

    [[nodiscard]] ScalarField3D snapshot(std::size_t k) const;
};

// Snapshots at multiples of 1/sample_rate in [0, T).
[[nodiscard]] FieldHistory run_simulation(const SimConfig& cfg, const InitialCondition& u0,
                                          const InitialCondition& v0, double sample_rate = 50.0,
                                          bool parallel = true);

[[nodiscard]] double trilinear(const GridSpec& g, const std::vector<double>& values,
                               const Vec3& x);

[[nodiscard]] SensorDataset sample_sensors(const FieldHistory& h, const std::vector<Vec3>& positions,
                                           double sample_rate);
[[nodiscard]] SensorDataset add_noise(SensorDataset d, double sigma, std::uint64_t seed);

}  // namespace waveinform
