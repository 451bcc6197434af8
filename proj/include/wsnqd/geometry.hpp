#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wsnqd {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct BoundingBox {
  double xmin, ymin, xmax, ymax;
};

// Simple polygon; vertices in either orientation, not repeated at the end.
class Polygon {
 public:
  Polygon() = default;
  explicit Polygon(std::vector<Point> vertices);

  // Inside or on the boundary (boundary tolerance 1e-12 relative to the box).
  bool contains(Point p) const;
  BoundingBox bounds() const;
  double area() const;
  const std::vector<Point>& vertices() const { return vertices_; }

 private:
  std::vector<Point> vertices_;
};

enum class SensingKind { Boolean, PowerLaw };

struct SensingModel {
  SensingKind kind = SensingKind::Boolean;
  double cutoff = 1.0;  // Boolean only
  double eta = 2.0;     // PowerLaw only

  static SensingModel boolean(double cutoff);
  static SensingModel power_law(double eta);
};

std::string to_string(SensingKind kind);

// Boolean: indicator of d <= cutoff. PowerLaw: min(1, d^-eta).
double rho(const SensingModel& model, double d);

struct Deployment {
  std::vector<Point> sensors;
  Polygon roi;
  double h_e = 1.0;
  double sigma = 1.0;
  SensingModel model;

  std::size_t size() const { return sensors.size(); }
  void validate() const;  // throws ConfigError
};

struct RangeParams {
  double mu1 = 1.0;
  double omega0_lower = 0.5;
  double r_d = 1.0;
  double r_i = 1.0;
};

RangeParams compute_ranges(const Deployment& dep, double mu1, double omega0_lower);

// Inverse of the influence-range definition: the omega0_lower that yields r_i.
double omega0_for_influence_range(const Deployment& dep, double mu1, double r_i);

// Sorted 0-based sensor indices.
using SensorSet = std::vector<std::size_t>;

bool is_subset(const SensorSet& a, const SensorSet& b);
std::size_t difference_size(const SensorSet& a, const SensorSet& b);  // |a \ b|
std::size_t symmetric_difference_size(const SensorSet& a, const SensorSet& b);
std::string format_set(const SensorSet& set, char sep = ',');  // 1-based ids

struct Region {
  std::size_t id = 0;
  SensorSet sensors;
  std::vector<Point> samples;
  Point reference;
  double area_estimate = 0.0;
};

struct DetectionPartition {
  std::vector<Region> regions;
  std::size_t n_sensors = 0;
  double grid_resolution = 0.0;

  std::size_t size() const { return regions.size(); }
  const Region& region(std::size_t id) const { return regions.at(id); }
  std::optional<std::size_t> find(const SensorSet& set) const;
};

SensorSet detection_cover_set(const Deployment& dep, const RangeParams& ranges, Point x);

// Throws DomainError when x lies outside the ROI.
SensorSet influence_cover_set(const Deployment& dep, const RangeParams& ranges, Point x);

// Cell-centred grid over the ROI bounding box; regions ordered by sensor set.
DetectionPartition build_partition(const Deployment& dep, const RangeParams& ranges,
                                   double grid_resolution);

// Region sample maximising the distance to its nearest member sensor.
Point farthest_member_point(const Deployment& dep, const Region& region);

namespace presets {

struct Preset {
  Deployment deployment;
  double mu1;
  double omega0_lower;
};

// Seven nodes: a centre node plus a unit hexagon ring, inside the hexagon they span.
std::vector<Point> hex7_positions();
Polygon hex7_roi();
Preset hex7(SensingKind kind);

}  // namespace presets

}  // namespace wsnqd
