#pragma once

#include "waveinform/types.hpp"

#include <array>
#include <filesystem>
#include <vector>

namespace waveinform {

struct GridSpec {
    Vec3 origin = Vec3::Zero();
    double dx = 1.0;
    std::array<int, 3> dims{2, 2, 2};

    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    [[nodiscard]] std::size_t index(int i, int j, int k) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(dims[0]) * (j + static_cast<std::size_t>(dims[1]) * k);
    }
    [[nodiscard]] Vec3 point(int i, int j, int k) const {
        return origin + dx * Vec3(i, j, k);
    }
    [[nodiscard]] bool operator==(const GridSpec& o) const {
        return origin == o.origin && dx == o.dx && dims == o.dims;
    }
    // Nodes covering [lo, hi]^3 at spacing dx.
    static GridSpec cube(double lo, double hi, double dx);
};

// x-fastest flat storage.
struct ScalarField3D {
    GridSpec grid;
    std::vector<double> values;

    ScalarField3D() = default;
    explicit ScalarField3D(const GridSpec& g) : grid(g), values(g.size(), 0.0) {
        if (g.dims[0] < 2 || g.dims[1] < 2 || g.dims[2] < 2)
            throw std::invalid_argument("field needs at least two nodes per axis");
    }

    double& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }
    [[nodiscard]] double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }

    template <class F>
    static ScalarField3D sample(const GridSpec& g, F&& f) {
        ScalarField3D out(g);
        for (int k = 0; k < g.dims[2]; ++k)
            for (int j = 0; j < g.dims[1]; ++j)
                for (int i = 0; i < g.dims[0]; ++i) out.at(i, j, k) = f(g.point(i, j, k));
        return out;
    }
};

// Writes <stem>.bin (little-endian float64) and <stem>.json (origin, dx, dims).
void save_field(const ScalarField3D& f, const std::filesystem::path& stem);
[[nodiscard]] ScalarField3D load_field(const std::filesystem::path& stem);
void save_field_csv(const ScalarField3D& f, const std::filesystem::path& path);

}  // namespace waveinform
