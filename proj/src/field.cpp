#include "waveinform/field.hpp"
#include "waveinform/io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>

namespace waveinform {

static_assert(std::endian::native == std::endian::little, "binary field format is little-endian");

GridSpec GridSpec::cube(double lo, double hi, double dx) {
    GridSpec g;
    g.origin = Vec3::Constant(lo);
    g.dx = dx;
    const int n = static_cast<int>(std::floor((hi - lo) / dx + 1e-9)) + 1;
    g.dims = {n, n, n};
    return g;
}

void save_field(const ScalarField3D& f, const std::filesystem::path& stem) {
    auto bin = stem, header = stem;
    bin += ".bin";
    header += ".json";
    std::string bytes(f.values.size() * sizeof(double), '\0');
    std::memcpy(bytes.data(), f.values.data(), bytes.size());
    io::write_atomic(bin, bytes);
    nlohmann::ordered_json j;
    j["origin"] = {f.grid.origin.x(), f.grid.origin.y(), f.grid.origin.z()};
    j["dx"] = f.grid.dx;
    j["dims"] = f.grid.dims;
    j["order"] = "x-fastest";
    j["dtype"] = "float64-le";
    j["data"] = bin.filename().string();
    io::write_atomic(header, j.dump(2) + "\n");
}

ScalarField3D load_field(const std::filesystem::path& stem) {
    auto bin = stem, header = stem;
    bin += ".bin";
    header += ".json";
    const auto j = nlohmann::json::parse(io::read_file(header));
    GridSpec g;
    g.origin = Vec3(j["origin"][0], j["origin"][1], j["origin"][2]);
    g.dx = j["dx"];
    g.dims = j["dims"].get<std::array<int, 3>>();
    ScalarField3D f(g);
    const std::string bytes = io::read_file(bin);
    if (bytes.size() != f.values.size() * sizeof(double))
        throw std::runtime_error(bin.string() + ": size does not match header dims");
    std::memcpy(f.values.data(), bytes.data(), bytes.size());
    return f;
}

void save_field_csv(const ScalarField3D& f, const std::filesystem::path& path) {
    std::string out = "x,y,z,value\n";
    const auto& g = f.grid;
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i) {
                const Vec3 p = g.point(i, j, k);
                out += io::format_double(p.x()) + ',' + io::format_double(p.y()) + ',' +
                       io::format_double(p.z()) + ',' + io::format_double(f.at(i, j, k)) + '\n';
            }
    io::write_atomic(path, out);
}

}  // namespace waveinform
