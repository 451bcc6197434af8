#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "wsnqd/geometry.hpp"

namespace wsnqd {

// Shortest round-trip-safe rendering of a double.
std::string fmt(double v);
std::string fmt(const std::optional<double>& v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

// region_id, sensor_set, reference_x, reference_y, area_estimate (ids 1-based).
void write_partition_csv(const std::string& path, const DetectionPartition& partition);

}  // namespace wsnqd
