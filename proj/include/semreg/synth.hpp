#ifndef SEMREG_SYNTH_HPP_
#define SEMREG_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <iterator>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "semreg/common.hpp"
#include "semreg/transform.hpp"

namespace semreg {

/// Category ids of the synthetic alphabet.
namespace synth_label {
inline constexpr LabelId kGround = 0;
inline constexpr LabelId kBuilding = 1;
inline constexpr LabelId kVegetation = 2;
inline constexpr LabelId kCar = 3;
inline constexpr LabelId kTruck = 4;
inline constexpr LabelId kPole = 5;
inline constexpr LabelId kTrunk = 6;
inline constexpr LabelId kTrafficSign = 7;
}  // namespace synth_label

inline LabelAlphabet synth_alphabet() {
  return LabelAlphabet({"ground", "building", "vegetation", "car", "truck", "pole", "trunk", "traffic-sign"});
}

/// Parameters of a synthetic street scene and the two scans taken of it.
struct SceneSpec {
  std::uint64_t seed = 0;
  double extent = 50.0;  // scan footprint side, meters

  int poles = 8;
  int cars = 6;
  int trucks = 2;
  int trees = 8;
  int signs = 4;
  int bushes = 6;
  int buildings = 4;
  int repeated = 0;  // identical car+pole units placed along a row

  double density = 20.0;  // points per square meter of surface
  double noise = 0.02;    // gaussian sigma per coordinate, meters
  double overlap_offset = 10.0;
  double dropout = 0.0;   // per-scan fraction of points removed
  double sensor_height = 1.7;
  bool random_yaw = true;
  bool backface_culling = true;  // drop surface samples facing away from the sensor
  double instance_label_noise = 0.0;  // per-scan chance an object is labeled as another object category

  void validate() const {
    if (!(extent > 0.0)) throw InvalidArgument("scene: extent must be > 0");
    if (poles < 0 || cars < 0 || trucks < 0 || trees < 0 || signs < 0 || bushes < 0 || buildings < 0 ||
        repeated < 0)
      throw InvalidArgument("scene: object counts must be >= 0");
    if (!(density > 0.0)) throw InvalidArgument("scene: density must be > 0");
    if (!(noise >= 0.0)) throw InvalidArgument("scene: noise must be >= 0");
    if (!(overlap_offset >= 0.0)) throw InvalidArgument("scene: overlap offset must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("scene: dropout must lie in [0, 1)");
    if (!(instance_label_noise >= 0.0 && instance_label_noise <= 1.0))
      throw InvalidArgument("scene: instance label noise must lie in [0, 1]");
  }
};

/// Surface primitive of the synthetic world.
struct Primitive {
  enum class Kind { kRect, kCylinder, kSphere, kHemisphere };
  Kind kind = Kind::kRect;
  LabelId label = 0;
  // kRect: origin + u * axis_a + v * axis_b, u, v in [0, 1]
  // kCylinder: base center origin, vertical, radius, height
  // kSphere / kHemisphere: center origin, radius (hemisphere keeps z >= center)
  Point3 origin = Point3::Zero();
  Eigen::Vector3d axis_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis_b = Eigen::Vector3d::Zero();
  double radius = 0.0;
  double height = 0.0;
  // kRect: a point on the solid side; the outward normal points away from it
  Point3 inside = Point3::Zero();
  int instance = -1;  // object id; -1 for ground and buildings

  /// Outward unit normal at surface point p.
  Eigen::Vector3d normal(const Point3& p) const {
    switch (kind) {
      case Kind::kRect: {
        Eigen::Vector3d n = axis_a.cross(axis_b).normalized();
        return n.dot(p - inside) >= 0.0 ? n : Eigen::Vector3d(-n);
      }
      case Kind::kCylinder: {
        Eigen::Vector3d n(p.x() - origin.x(), p.y() - origin.y(), 0.0);
        return n.norm() > 0.0 ? Eigen::Vector3d(n.normalized()) : Eigen::Vector3d::UnitZ();
      }
      case Kind::kSphere:
      case Kind::kHemisphere: {
        const Eigen::Vector3d n = p - origin;
        return n.norm() > 0.0 ? Eigen::Vector3d(n.normalized()) : Eigen::Vector3d::UnitZ();
      }
    }
    return Eigen::Vector3d::UnitZ();
  }

  double area() const {
    switch (kind) {
      case Kind::kRect: return axis_a.cross(axis_b).norm();
      case Kind::kCylinder: return 2.0 * std::numbers::pi * radius * height;
      case Kind::kSphere: return 4.0 * std::numbers::pi * radius * radius;
      case Kind::kHemisphere: return 2.0 * std::numbers::pi * radius * radius;
    }
    return 0.0;
  }

  /// Euclidean distance from p to the surface.
  double distance(const Point3& p) const {
    switch (kind) {
      case Kind::kRect: {
        const Eigen::Vector3d d = p - origin;
        Eigen::Matrix<double, 3, 2> m;
        m << axis_a, axis_b;
        Eigen::Vector2d uv = (m.transpose() * m).ldlt().solve(m.transpose() * d);
        uv = uv.cwiseMax(0.0).cwiseMin(1.0);
        // clamping the unconstrained solution is exact for rectangles
        return (origin + m * uv - p).norm();
      }
      case Kind::kCylinder: {
        const Eigen::Vector2d radial(p.x() - origin.x(), p.y() - origin.y());
        const double rr = radial.norm() - radius;
        const double z = p.z() - origin.z();
        const double dz = z < 0.0 ? -z : (z > height ? z - height : 0.0);
        return std::hypot(rr, dz);
      }
      case Kind::kSphere: return std::abs((p - origin).norm() - radius);
      case Kind::kHemisphere: {
        if (p.z() >= origin.z()) return std::abs((p - origin).norm() - radius);
        const Eigen::Vector2d radial(p.x() - origin.x(), p.y() - origin.y());
        return std::hypot(radial.norm() - radius, p.z() - origin.z());
      }
    }
    return std::numeric_limits<double>::infinity();
  }
};

struct ScenePair {
  LabeledPointCloud src, dst;
  RigidTransform gt;        // maps dst scan coordinates onto src scan coordinates
  RigidTransform src_pose;  // src scan -> world
  RigidTransform dst_pose;  // dst scan -> world
  std::vector<Primitive> world;
  SceneSpec spec;
};

namespace detail {

struct Footprint {
  double x, y, r;
};

inline Primitive rect(LabelId label, const Point3& o, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                      const Point3& inside) {
  Primitive p;
  p.inside = inside;
  p.kind = Primitive::Kind::kRect;
  p.label = label;
  p.origin = o;
  p.axis_a = a;
  p.axis_b = b;
  return p;
}

inline Primitive cylinder(LabelId label, double x, double y, double z0, double r, double h) {
  Primitive p;
  p.kind = Primitive::Kind::kCylinder;
  p.label = label;
  p.origin = Point3(x, y, z0);
  p.radius = r;
  p.height = h;
  return p;
}

inline Primitive sphere(LabelId label, const Point3& c, double r, bool hemisphere) {
  Primitive p;
  p.kind = hemisphere ? Primitive::Kind::kHemisphere : Primitive::Kind::kSphere;
  p.label = label;
  p.origin = c;
  p.radius = r;
  return p;
}

// Four sides and the roof of a yawed box standing on the ground.
inline void add_box(std::vector<Primitive>& w, LabelId label, double cx, double cy, double yaw, double length,
                    double width, double height) {
  const Eigen::Vector3d ex(std::cos(yaw) * length, std::sin(yaw) * length, 0.0);
  const Eigen::Vector3d ey(-std::sin(yaw) * width, std::cos(yaw) * width, 0.0);
  const Eigen::Vector3d ez(0.0, 0.0, height);
  const Point3 corner = Point3(cx, cy, 0.0) - 0.5 * ex - 0.5 * ey;
  const Point3 mid(cx, cy, 0.5 * height);
  w.push_back(rect(label, corner, ex, ez, mid));
  w.push_back(rect(label, corner + ey, ex, ez, mid));
  w.push_back(rect(label, corner, ey, ez, mid));
  w.push_back(rect(label, corner + ex, ey, ez, mid));
  w.push_back(rect(label, corner + ez, ex, ey, mid));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Rejection-samples a free footprint of the given radius inside the street band.
inline bool place(std::mt19937_64& rng, std::vector<Footprint>& used, double x_lo, double x_hi, double y_half,
                  double r, double& x, double& y) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    x = uniform(rng, x_lo + r, x_hi - r);
    y = uniform(rng, -y_half + r, y_half - r);
    bool free = true;
    for (const auto& f : used)
      if (std::hypot(f.x - x, f.y - y) < f.r + r + 0.5) {
        free = false;
        break;
      }
    if (free) {
      used.push_back({x, y, r});
      return true;
    }
  }
  return false;
}

inline std::vector<Primitive> build_world(const SceneSpec& spec, std::mt19937_64& rng) {
  using namespace synth_label;
  std::vector<Primitive> w;
  const double half = spec.extent / 2.0;
  const double x_lo = -half - spec.overlap_offset / 2.0;
  const double x_hi = half + spec.overlap_offset / 2.0;
  const double building_depth = std::min(8.0, spec.extent / 6.0);
  const double street_half = half - building_depth - 1.0;

  w.push_back(rect(kGround, Point3(x_lo, -half, 0.0), Eigen::Vector3d(x_hi - x_lo, 0.0, 0.0),
                   Eigen::Vector3d(0.0, 2.0 * half, 0.0), Point3(0.0, 0.0, -1.0)));

  for (int b = 0; b < spec.buildings; ++b) {
    const double len = uniform(rng, 8.0, 20.0);
    const double cx = uniform(rng, x_lo + len / 2.0, std::max(x_lo + len / 2.0, x_hi - len / 2.0));
    const double side = (b % 2 == 0) ? 1.0 : -1.0;
    const double cy = side * (half - building_depth / 2.0);
    add_box(w, kBuilding, cx, cy, 0.0, len, building_depth, uniform(rng, 5.0, 9.0));
  }

  std::vector<Footprint> used;
  double x = 0.0, y = 0.0;
  const std::size_t first_object = w.size();

  if (spec.repeated > 0) {
    // identical units: same car dimensions and heading, same pole, fixed spacing
    const double spacing = 8.0;
    const double row_y = uniform(rng, -street_half / 2.0, street_half / 2.0);
    const double start = -spacing * (spec.repeated - 1) / 2.0;
    for (int i = 0; i < spec.repeated; ++i) {
      const double cx = start + spacing * i;
      add_box(w, kCar, cx, row_y, 0.0, 4.5, 1.8, 1.5);
      w.push_back(cylinder(kPole, cx + 2.5, row_y + 2.0, 0.0, 0.12, 5.0));
      used.push_back({cx, row_y, 2.6});
      used.push_back({cx + 2.5, row_y + 2.0, 0.5});
    }
  }

  for (int i = 0; i < spec.poles; ++i)
    if (place(rng, used, x_lo, x_hi, street_half, 0.5, x, y))
      w.push_back(cylinder(kPole, x, y, 0.0, uniform(rng, 0.08, 0.15), uniform(rng, 4.0, 7.0)));

  for (int i = 0; i < spec.signs; ++i) {
    if (!place(rng, used, x_lo, x_hi, street_half, 0.7, x, y)) continue;
    const double h = uniform(rng, 2.0, 2.6);
    w.push_back(cylinder(kPole, x, y, 0.0, 0.05, h));
    const double yaw = uniform(rng, 0.0, std::numbers::pi);
    const Eigen::Vector3d a(std::cos(yaw) * 0.9, std::sin(yaw) * 0.9, 0.0);
    // a thin panel: both faces, offset a few millimeters apart
    const Eigen::Vector3d n = Eigen::Vector3d(-a.y(), a.x(), 0.0).normalized() * 0.005;
    const Point3 o = Point3(x, y, h) - 0.5 * a + Eigen::Vector3d(0.0, 0.0, 0.05);
    const Eigen::Vector3d up(0.0, 0.0, 0.9);
    w.push_back(rect(kTrafficSign, o + n, a, up, o));
    w.push_back(rect(kTrafficSign, o - n, a, up, o));
  }

  for (int i = 0; i < spec.trees; ++i) {
    const double crown = uniform(rng, 1.2, 2.2);
    if (!place(rng, used, x_lo, x_hi, street_half, crown, x, y)) continue;
    const double trunk_h = uniform(rng, 1.8, 3.0);
    w.push_back(cylinder(kTrunk, x, y, 0.0, uniform(rng, 0.15, 0.3), trunk_h));
    w.push_back(sphere(kVegetation, Point3(x, y, trunk_h + crown * 0.8), crown, false));
  }

  for (int i = 0; i < spec.bushes; ++i) {
    const double r = uniform(rng, 0.5, 1.2);
    if (place(rng, used, x_lo, x_hi, street_half, r, x, y))
      w.push_back(sphere(kVegetation, Point3(x, y, 0.0), r, true));
  }

  for (int i = 0; i < spec.cars; ++i) {
    if (!place(rng, used, x_lo, x_hi, street_half, 2.6, x, y)) continue;
    add_box(w, kCar, x, y, uniform(rng, 0.0, std::numbers::pi), uniform(rng, 3.8, 4.8), uniform(rng, 1.6, 1.9),
            uniform(rng, 1.4, 1.6));
  }

  for (int i = 0; i < spec.trucks; ++i) {
    if (!place(rng, used, x_lo, x_hi, street_half, 5.0, x, y)) continue;
    add_box(w, kTruck, x, y, uniform(rng, 0.0, std::numbers::pi), uniform(rng, 7.0, 9.5), uniform(rng, 2.3, 2.5),
            uniform(rng, 3.0, 3.8));
  }

  // consecutive faces of one box or panel share a label and an inside point
  int instance = -1;
  for (std::size_t i = first_object; i < w.size(); ++i) {
    const bool same = i > first_object && w[i].kind == Primitive::Kind::kRect &&
                      w[i - 1].kind == Primitive::Kind::kRect && w[i].label == w[i - 1].label &&
                      w[i].inside == w[i - 1].inside;
    if (!same) ++instance;
    w[i].instance = instance;
  }
  return w;
}

inline Point3 sample_surface(const Primitive& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  switch (p.kind) {
    case Primitive::Kind::kRect: return p.origin + u01(rng) * p.axis_a + u01(rng) * p.axis_b;
    case Primitive::Kind::kCylinder: {
      const double a = 2.0 * std::numbers::pi * u01(rng);
      return p.origin + Eigen::Vector3d(p.radius * std::cos(a), p.radius * std::sin(a), p.height * u01(rng));
    }
    case Primitive::Kind::kSphere:
    case Primitive::Kind::kHemisphere: {
      // uniform on the sphere via z ~ U[-1, 1]; the hemisphere uses z ~ U[0, 1]
      const double z = p.kind == Primitive::Kind::kSphere ? 2.0 * u01(rng) - 1.0 : u01(rng);
      const double a = 2.0 * std::numbers::pi * u01(rng);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      return p.origin + p.radius * Eigen::Vector3d(s * std::cos(a), s * std::sin(a), z);
    }
  }
  return p.origin;
}

inline LabeledPointCloud render_scan(const std::vector<Primitive>& world, const SceneSpec& spec,
                                     const RigidTransform& pose, std::uint64_t stream) {
  std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ULL + stream);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const RigidTransform to_scan = pose.inverse();
  const double half = spec.extent / 2.0;
  LabeledPointCloud cloud;
  cloud.alphabet = synth_alphabet();

  // per-scan segmentation mistakes at object granularity
  std::vector<LabelId> instance_label;
  for (const auto& prim : world) {
    if (prim.instance < 0) continue;
    if (instance_label.size() <= static_cast<std::size_t>(prim.instance))
      instance_label.resize(static_cast<std::size_t>(prim.instance) + 1, prim.label);
    instance_label[static_cast<std::size_t>(prim.instance)] = prim.label;
  }
  if (spec.instance_label_noise > 0.0) {
    constexpr LabelId kObjectLabels[] = {synth_label::kVegetation, synth_label::kCar,   synth_label::kTruck,
                                         synth_label::kPole,       synth_label::kTrunk, synth_label::kTrafficSign};
    for (auto& l : instance_label) {
      if (u01(rng) >= spec.instance_label_noise) continue;
      LabelId other = l;
      while (other == l) other = kObjectLabels[std::uniform_int_distribution<int>(0, 5)(rng)];
      l = other;
    }
  }

  for (const auto& prim : world) {
    const LabelId label = prim.instance < 0 ? prim.label : instance_label[static_cast<std::size_t>(prim.instance)];
    const double expected = spec.density * prim.area();
    auto n = static_cast<std::size_t>(std::floor(expected));
    if (u01(rng) < expected - std::floor(expected)) ++n;
    for (std::size_t i = 0; i < n; ++i) {
      const Point3 pw = sample_surface(prim, rng);
      const bool keep = u01(rng) >= spec.dropout;
      const Eigen::Vector3d jitter(gauss(rng), gauss(rng), gauss(rng));
      if (!keep) continue;
      if (spec.backface_culling && prim.normal(pw).dot(pose.translation - pw) <= 0.0) continue;
      if (std::abs(pw.x() - pose.translation.x()) > half || std::abs(pw.y() - pose.translation.y()) > half)
        continue;
      cloud.points.push_back(to_scan(pw) + spec.noise * jitter);
      cloud.labels.push_back(label);
    }
  }
  return cloud;
}

}  // namespace detail

/// Two independent surface samplings of one random street scene, taken from
/// poses `overlap_offset` apart along x with random yaw. Deterministic in spec.
inline ScenePair generate_scene_pair(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  ScenePair pair;
  pair.spec = spec;
  pair.world = detail::build_world(spec, rng);

  const double yaw_a = spec.random_yaw ? detail::uniform(rng, -std::numbers::pi, std::numbers::pi) : 0.0;
  const double yaw_b = spec.random_yaw ? detail::uniform(rng, -std::numbers::pi, std::numbers::pi) : 0.0;
  pair.src_pose = make_transform(Eigen::Vector3d::UnitZ(), yaw_a,
                                 Eigen::Vector3d(-spec.overlap_offset / 2.0, 0.0, spec.sensor_height));
  pair.dst_pose = make_transform(Eigen::Vector3d::UnitZ(), yaw_b,
                                 Eigen::Vector3d(spec.overlap_offset / 2.0, 0.0, spec.sensor_height));
  pair.gt = pair.src_pose.inverse() * pair.dst_pose;

  pair.src = detail::render_scan(pair.world, spec, pair.src_pose, 1);
  pair.dst = detail::render_scan(pair.world, spec, pair.dst_pose, 2);
  if (pair.src.empty() || pair.dst.empty()) throw InvalidArgument("scene: spec produced a scan without points");
  return pair;
}

/// Uniform sample of `count` distinct point indices, ascending.
inline KeypointSet keypoint_sample(const LabeledPointCloud& cloud, std::size_t count, std::uint64_t seed) {
  if (count > cloud.size()) throw InvalidArgument("keypoint_sample: count exceeds cloud size");
  std::vector<std::size_t> all(cloud.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  KeypointSet out;
  out.reserve(count);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(out), count, rng);
  return out;
}

/// Distance from a world point to the nearest primitive carrying `label`.
inline double distance_to_label_surface(const std::vector<Primitive>& world, const Point3& p, LabelId label) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& prim : world)
    if (prim.label == label) best = std::min(best, prim.distance(p));
  return best;
}

}  // namespace semreg

#endif  // SEMREG_SYNTH_HPP_
