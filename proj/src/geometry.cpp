#include "wsnqd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "wsnqd/error.hpp"

namespace wsnqd {

CoverageError::CoverageError(double x, double y)
    : ConfigError([&] {
        std::ostringstream os;
        os.precision(17);
        os << "coverage violation: point (" << x << ", " << y
           << ") is not within the detection range of any sensor";
        return os.str();
      }()),
      x_(x),
      y_(y) {}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

double segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, {a.x + t * dx, a.y + t * dy});
}

}  // namespace

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw ConfigError("polygon needs at least 3 vertices");
  if (area() <= 0.0) throw ConfigError("polygon has zero area");
}

BoundingBox Polygon::bounds() const {
  BoundingBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& v : vertices_) {
    b.xmin = std::min(b.xmin, v.x);
    b.ymin = std::min(b.ymin, v.y);
    b.xmax = std::max(b.xmax, v.x);
    b.ymax = std::max(b.ymax, v.y);
  }
  return b;
}

double Polygon::area() const {
  double twice = 0.0;
  for (std::size_t i = 0, n = vertices_.size(); i < n; ++i) {
    const auto& a = vertices_[i];
    const auto& b = vertices_[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2.0;
}

bool Polygon::contains(Point p) const {
  if (vertices_.empty()) return false;
  const auto b = bounds();
  const double eps = 1e-12 * std::max({1.0, b.xmax - b.xmin, b.ymax - b.ymin});
  bool inside = false;
  for (std::size_t i = 0, n = vertices_.size(), j = n - 1; i < n; j = i++) {
    const auto& a = vertices_[i];
    const auto& c = vertices_[j];
    if (segment_distance(p, a, c) <= eps) return true;
    if ((a.y > p.y) != (c.y > p.y) &&
        p.x < (c.x - a.x) * (p.y - a.y) / (c.y - a.y) + a.x)
      inside = !inside;
  }
  return inside;
}

SensingModel SensingModel::boolean(double cutoff) {
  if (!(cutoff > 0.0)) throw ConfigError("Boolean cutoff must be positive");
  return {SensingKind::Boolean, cutoff, 2.0};
}

SensingModel SensingModel::power_law(double eta) {
  if (!(eta > 0.0)) throw ConfigError("path-loss exponent eta must be positive");
  return {SensingKind::PowerLaw, 1.0, eta};
}

std::string to_string(SensingKind kind) {
  return kind == SensingKind::Boolean ? "boolean" : "power_law";
}

double rho(const SensingModel& model, double d) {
  if (!(d >= 0.0)) throw DomainError("rho: distance must be non-negative");
  if (model.kind == SensingKind::Boolean) return d <= model.cutoff ? 1.0 : 0.0;
  if (d <= 1.0) return 1.0;
  return std::pow(d, -model.eta);
}

void Deployment::validate() const {
  if (sensors.empty()) throw ConfigError("deployment has no sensors");
  if (!(h_e > 0.0)) throw ConfigError("h_e must be positive");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (roi.vertices().size() < 3) throw ConfigError("deployment has no ROI polygon");
  for (std::size_t s = 0; s < sensors.size(); ++s) {
    if (!roi.contains(sensors[s])) {
      std::ostringstream os;
      os << "sensor " << s + 1 << " at (" << sensors[s].x << ", " << sensors[s].y
         << ") lies outside the ROI";
      throw ConfigError(os.str());
    }
  }
}

RangeParams compute_ranges(const Deployment& dep, double mu1, double omega0_lower) {
  if (!(mu1 > 0.0)) throw ConfigError("mu1 must be positive");
  if (mu1 > dep.h_e) throw ConfigError("mu1 exceeds h_e: no detection range exists");
  if (!(omega0_lower > 0.0 && omega0_lower < 1.0))
    throw ConfigError("omega0_lower must lie in (0, 1)");

  RangeParams r;
  r.mu1 = mu1;
  r.omega0_lower = omega0_lower;
  if (dep.model.kind == SensingKind::Boolean) {
    r.r_d = dep.model.cutoff;
    r.r_i = r.r_d;
    return r;
  }
  // Clamped curve: h_e * min(1, d^-eta) >= mu1 holds on [0, (h_e/mu1)^(1/eta)],
  // and that endpoint is never below 1 because mu1 <= h_e.
  const double eta = dep.model.eta;
  r.r_d = std::pow(dep.h_e / mu1, 1.0 / eta);
  const double rho_rd = rho(dep.model, r.r_d);
  // 2 rho(d) <= (1 - w) rho(r_d) needs rho(d) < 1, so the unclamped branch applies.
  r.r_i = std::pow(2.0 / ((1.0 - omega0_lower) * rho_rd), 1.0 / eta);
  return r;
}

double omega0_for_influence_range(const Deployment& dep, double mu1, double r_i) {
  if (dep.model.kind == SensingKind::Boolean)
    throw ConfigError("influence_range only applies to the power-law model");
  const auto base = compute_ranges(dep, mu1, 0.5);
  if (!(r_i > base.r_d)) throw ConfigError("influence_range must exceed the detection range");
  const double w = 1.0 - 2.0 * rho(dep.model, r_i) / rho(dep.model, base.r_d);
  if (!(w > 0.0 && w < 1.0))
    throw ConfigError("influence_range implies omega0_lower outside (0, 1)");
  return w;
}

bool is_subset(const SensorSet& a, const SensorSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::size_t difference_size(const SensorSet& a, const SensorSet& b) {
  std::size_t n = 0;
  for (auto s : a)
    if (!std::binary_search(b.begin(), b.end(), s)) ++n;
  return n;
}

std::size_t symmetric_difference_size(const SensorSet& a, const SensorSet& b) {
  return difference_size(a, b) + difference_size(b, a);
}

std::string format_set(const SensorSet& set, char sep) {
  std::string out;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (k) out += sep;
    out += std::to_string(set[k] + 1);
  }
  return out;
}

std::optional<std::size_t> DetectionPartition::find(const SensorSet& set) const {
  for (const auto& r : regions)
    if (r.sensors == set) return r.id;
  return std::nullopt;
}

namespace {

SensorSet cover_within(const Deployment& dep, Point x, double radius) {
  SensorSet out;
  for (std::size_t s = 0; s < dep.sensors.size(); ++s)
    if (distance(dep.sensors[s], x) <= radius) out.push_back(s);
  return out;
}

}  // namespace

SensorSet detection_cover_set(const Deployment& dep, const RangeParams& ranges, Point x) {
  return cover_within(dep, x, ranges.r_d);
}

SensorSet influence_cover_set(const Deployment& dep, const RangeParams& ranges, Point x) {
  if (!dep.roi.contains(x)) throw DomainError("influence_cover_set: point outside the ROI");
  return cover_within(dep, x, ranges.r_i);
}

DetectionPartition build_partition(const Deployment& dep, const RangeParams& ranges,
                                   double grid_resolution) {
  if (!(grid_resolution > 0.0)) throw ConfigError("grid_resolution must be positive");
  const auto box = dep.roi.bounds();
  const auto nx = static_cast<std::size_t>(std::ceil((box.xmax - box.xmin) / grid_resolution));
  const auto ny = static_cast<std::size_t>(std::ceil((box.ymax - box.ymin) / grid_resolution));
  if (nx * ny > 50'000'000) throw ConfigError("grid_resolution too fine for the ROI");

  std::map<SensorSet, std::vector<Point>> groups;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    const double y = box.ymin + (static_cast<double>(iy) + 0.5) * grid_resolution;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const Point p{box.xmin + (static_cast<double>(ix) + 0.5) * grid_resolution, y};
      if (!dep.roi.contains(p)) continue;
      auto set = detection_cover_set(dep, ranges, p);
      if (set.empty()) throw CoverageError(p.x, p.y);
      groups[std::move(set)].push_back(p);
    }
  }
  if (groups.empty()) throw ConfigError("grid_resolution too coarse: no sample falls in the ROI");

  DetectionPartition part;
  part.n_sensors = dep.size();
  part.grid_resolution = grid_resolution;
  for (auto& [set, points] : groups) {
    Region r;
    r.id = part.regions.size();
    r.sensors = set;
    double best = -1.0;
    for (const auto& p : points) {
      double clearance = std::numeric_limits<double>::infinity();
      for (const auto& s : dep.sensors)
        clearance = std::min(clearance, std::abs(distance(s, p) - ranges.r_d));
      if (clearance > best) {
        best = clearance;
        r.reference = p;
      }
    }
    r.area_estimate = static_cast<double>(points.size()) * grid_resolution * grid_resolution;
    r.samples = std::move(points);
    part.regions.push_back(std::move(r));
  }
  return part;
}

Point farthest_member_point(const Deployment& dep, const Region& region) {
  Point best_point = region.reference;
  double best = -1.0;
  for (const auto& p : region.samples) {
    double nearest = std::numeric_limits<double>::infinity();
    for (auto s : region.sensors) nearest = std::min(nearest, distance(dep.sensors[s], p));
    if (nearest > best) {
      best = nearest;
      best_point = p;
    }
  }
  return best_point;
}

namespace presets {

std::vector<Point> hex7_positions() {
  const double h = std::sqrt(3.0) / 2.0;
  return {{-0.5, h}, {0.5, h}, {-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, {-0.5, -h}, {0.5, -h}};
}

Polygon hex7_roi() {
  const double h = std::sqrt(3.0) / 2.0;
  return Polygon({{1.0, 0.0}, {0.5, h}, {-0.5, h}, {-1.0, 0.0}, {-0.5, -h}, {0.5, -h}});
}

Preset hex7(SensingKind kind) {
  Preset p;
  p.deployment.sensors = hex7_positions();
  p.deployment.roi = hex7_roi();
  p.deployment.h_e = 1.0;
  p.deployment.sigma = 1.0;
  p.mu1 = 1.0;
  if (kind == SensingKind::Boolean) {
    p.deployment.model = SensingModel::boolean(1.0);
    p.omega0_lower = 0.5;
  } else {
    p.deployment.model = SensingModel::power_law(2.0);
    p.omega0_lower = 1.0 / 9.0;  // r_i = 1.5
  }
  return p;
}

}  // namespace presets

}  // namespace wsnqd
