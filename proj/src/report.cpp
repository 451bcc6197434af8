#include "wsnqd/report.hpp"

#include <charconv>
#include <cmath>

#include "wsnqd/error.hpp"

namespace wsnqd {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

namespace {

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
  if (!out_) throw ConfigError("cannot write '" + path + "'");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
  for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << quote(cells[k]);
  out_ << '\n';
}

void write_partition_csv(const std::string& path, const DetectionPartition& partition) {
  CsvWriter csv(path, {"region_id", "sensor_set", "reference_x", "reference_y", "area_estimate"});
  for (const auto& r : partition.regions)
    csv.row({std::to_string(r.id + 1), format_set(r.sensors), fmt(r.reference.x),
             fmt(r.reference.y), fmt(r.area_estimate)});
}

}  // namespace wsnqd
