#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace waveinform {

using Vec3 = Eigen::Vector3d;

struct SpaceTimePoint {
    Vec3 x = Vec3::Zero();
    double t = 0.0;
};

// Values are sensor-major: entry i*N + k is sensor i at times[k].
struct SensorDataset {
    std::vector<Vec3> positions;
    std::vector<double> times;
    std::vector<double> values;

    [[nodiscard]] std::size_t sensors() const { return positions.size(); }
    [[nodiscard]] std::size_t samples() const { return times.size(); }
    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double value(std::size_t sensor, std::size_t k) const {
        return values[sensor * times.size() + k];
    }

    [[nodiscard]] std::vector<SpaceTimePoint> points() const;
    void validate() const;
};

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// |t| below this is treated as exactly zero by every wave kernel.
inline constexpr double kTimeTolerance = 1e-12;
// Radii below this are evaluated at this value.
inline constexpr double kRadiusClamp = 1e-4;

class KernelEvaluationError : public std::runtime_error {
public:
    KernelEvaluationError(std::size_t i, std::size_t j, double value);
    std::size_t row, col;
};

class SingularCovarianceError : public std::runtime_error {
public:
    SingularCovarianceError(const std::string& what, std::vector<double> jitters);
    std::vector<double> attempted_jitters;
};

}  // namespace waveinform
