#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace srl {

// One logged episode; the unit every plot and comparison is built from.
struct MetricsRow {
    std::string run_id;
    std::uint64_t seed = 0;
    int episode = 0;
    double return_total = 0.0;
    int collisions = 0;
    int steps = 0;
    double epsilon = 0.0;
};

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

}  // namespace srl
