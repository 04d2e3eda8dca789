#include "waveinform/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace waveinform {

std::vector<SpaceTimePoint> SensorDataset::points() const {
    std::vector<SpaceTimePoint> z;
    z.reserve(positions.size() * times.size());
    for (const auto& x : positions)
        for (double t : times) z.push_back({x, t});
    return z;
}

void SensorDataset::validate() const {
    if (values.size() != positions.size() * times.size())
        throw std::invalid_argument("dataset size is not sensors x samples");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("times must increase strictly");
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            if (positions[i] == positions[j])
                throw std::invalid_argument("sensor positions must be distinct");
}

namespace io {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

void update_manifest(const std::filesystem::path& dir,
                     const std::vector<std::filesystem::path>& files, const std::string& command,
                     const std::string& metadata_json) {
    const auto path = dir / "manifest.json";
    nlohmann::ordered_json m;
    if (std::filesystem::exists(path)) m = nlohmann::ordered_json::parse(read_file(path));
    auto& entries = m["files"];
    for (const auto& f : files) {
        const std::string content = read_file(f);
        const auto rel = std::filesystem::relative(f, dir).generic_string();
        entries[rel] = {{"sha256", sha256_hex(content)}, {"bytes", content.size()},
                        {"command", command}};
    }
    m["commands"][command] = nlohmann::ordered_json::parse(metadata_json);
    write_atomic(path, m.dump(2) + "\n");
}

void write_sensor_csv(const SensorDataset& d, const std::filesystem::path& path) {
    d.validate();
    std::string out = "sensor_id,x,y,z,t,value\n";
    for (std::size_t i = 0; i < d.sensors(); ++i)
        for (std::size_t k = 0; k < d.samples(); ++k) {
            const auto& x = d.positions[i];
            out += std::to_string(i);
            for (double v : {x.x(), x.y(), x.z(), d.times[k], d.value(i, k)}) {
                out += ',';
                out += format_double(v);
            }
            out += '\n';
        }
    write_atomic(path, out);
}

SensorDataset read_sensor_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    if (line.rfind("sensor_id,x,y,z,t,value", 0) != 0)
        throw std::runtime_error(path.string() + ": unexpected sensor CSV header");

    std::map<long, std::pair<Vec3, std::vector<std::pair<double, double>>>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<double, 5> v{};
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        const long id = std::stol(cell);
        for (auto& x : v) {
            if (!std::getline(ls, cell, ',')) throw std::runtime_error("short sensor CSV row");
            x = std::stod(cell);
        }
        auto& entry = rows[id];
        entry.first = Vec3(v[0], v[1], v[2]);
        entry.second.emplace_back(v[3], v[4]);
    }
    SensorDataset d;
    for (auto& [id, entry] : rows) {
        d.positions.push_back(entry.first);
        if (d.times.empty())
            for (auto& [t, _] : entry.second) d.times.push_back(t);
        if (entry.second.size() != d.times.size())
            throw std::runtime_error("sensors have different sample counts");
        for (std::size_t k = 0; k < entry.second.size(); ++k) {
            if (entry.second[k].first != d.times[k])
                throw std::runtime_error("sensors are sampled at different times");
            d.values.push_back(entry.second[k].second);
        }
    }
    d.validate();
    return d;
}

}  // namespace io
}  // namespace waveinform
