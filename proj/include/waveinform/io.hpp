#pragma once

#include "waveinform/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace waveinform::io {

// Shortest faithful decimal is not required; 17 significant digits always round-trip.
[[nodiscard]] std::string format_double(double v);

// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

[[nodiscard]] std::string sha256_hex(std::string_view data);

// manifest.json in `dir`: file name -> {sha256, bytes}, plus free-form metadata.
void update_manifest(const std::filesystem::path& dir,
                     const std::vector<std::filesystem::path>& files,
                     const std::string& command, const std::string& metadata_json = "{}");

// sensor_id,x,y,z,t,value with sensor ids starting at 0.
void write_sensor_csv(const SensorDataset& d, const std::filesystem::path& path);
[[nodiscard]] SensorDataset read_sensor_csv(const std::filesystem::path& path);

}  // namespace waveinform::io
