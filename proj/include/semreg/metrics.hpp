#ifndef SEMREG_METRICS_HPP_
#define SEMREG_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "semreg/common.hpp"
#include "semreg/matching.hpp"
#include "semreg/pipeline.hpp"
#include "semreg/spatial_index.hpp"
#include "semreg/transform.hpp"

namespace semreg {

struct EvalThresholds {
  double tau_e = 0.5;   // inlier residual, meters
  double re_max = 5.0;  // degrees
  double te_max = 0.6;  // meters

  static EvalThresholds outdoor() { return {0.5, 5.0, 0.6}; }
  static EvalThresholds indoor() { return {0.1, 15.0, 0.3}; }

  void validate() const {
    if (!(tau_e > 0.0) || !(re_max > 0.0) || !(te_max > 0.0))
      throw InvalidArgument("evaluation thresholds must be positive");
  }
};

/// Inlier indicator: |p - (R q + t)| <= tau_e.
inline bool classify_inlier(const Point3& p, const Point3& q, const RigidTransform& gt, double tau_e) {
  return (p - gt(q)).norm() <= tau_e;
}

struct CorrespondenceMetrics {
  std::size_t inlier_count = 0;  // IN
  double inlier_ratio = 0.0;     // IR
};

inline CorrespondenceMetrics correspondence_metrics(const CorrespondenceSet& corr, std::span<const Point3> src_kp,
                                                    std::span<const Point3> dst_kp, const RigidTransform& gt,
                                                    double tau_e) {
  CorrespondenceMetrics m;
  for (const auto& c : corr)
    if (classify_inlier(src_kp[c.src_index], dst_kp[c.dst_index], gt, tau_e)) ++m.inlier_count;
  m.inlier_ratio = corr.empty() ? 0.0 : static_cast<double>(m.inlier_count) / static_cast<double>(corr.size());
  return m;
}

inline CorrespondenceMetrics correspondence_metrics(const CorrespondenceSet& corr, const LabeledPointCloud& src,
                                                    const KeypointSet& src_kp, const LabeledPointCloud& dst,
                                                    const KeypointSet& dst_kp, const RigidTransform& gt,
                                                    double tau_e) {
  const auto a = gather(src, src_kp);
  const auto b = gather(dst, dst_kp);
  return correspondence_metrics(corr, a, b, gt, tau_e);
}

struct RegistrationErrors {
  double rotation_deg = 0.0;   // RE
  double translation = 0.0;    // TE, meters
};

inline RegistrationErrors registration_errors(const RigidTransform& est, const RigidTransform& gt) {
  // angle of the relative rotation; atan2 keeps precision near zero where acos of the trace does not
  const Eigen::Matrix3d r = gt.rotation.transpose() * est.rotation;
  const Eigen::Vector3d s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double angle = std::atan2(0.5 * s.norm(), (r.trace() - 1.0) / 2.0);
  return {angle * 180.0 / std::numbers::pi, (est.translation - gt.translation).norm()};
}

inline bool is_registered(const RegistrationErrors& e, const EvalThresholds& th) {
  return e.rotation_deg <= th.re_max && e.translation <= th.te_max;
}

/// Fraction of pairs with RE <= re_max and TE <= te_max.
inline double registration_recall(std::span<const RegistrationErrors> results, const EvalThresholds& th) {
  if (results.empty()) throw InvalidArgument("registration_recall: no results");
  std::size_t ok = 0;
  for (const auto& r : results) ok += is_registered(r, th) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(results.size());
}

struct PairMetrics {
  std::string pair_id;
  std::string matcher;
  std::size_t inlier_count = 0;
  double inlier_ratio = 0.0;
  double rotation_error = 0.0;     // degrees
  double translation_error = 0.0;  // meters
  bool registered = false;
  double time_ms = 0.0;
};

struct BenchmarkReport {
  std::vector<PairMetrics> pairs;
  double mean_re = 0.0;  // over registered pairs
  double mean_te = 0.0;  // over registered pairs
  double mean_in = 0.0;
  double mean_ir = 0.0;
  double recall = 0.0;   // over all pairs
};

inline BenchmarkReport summarize(std::vector<PairMetrics> pairs) {
  BenchmarkReport r;
  std::sort(pairs.begin(), pairs.end(), [](const PairMetrics& a, const PairMetrics& b) {
    return a.pair_id != b.pair_id ? a.pair_id < b.pair_id : a.matcher < b.matcher;
  });
  std::size_t registered = 0;
  for (const auto& p : pairs) {
    r.mean_in += static_cast<double>(p.inlier_count);
    r.mean_ir += p.inlier_ratio;
    if (p.registered) {
      ++registered;
      r.mean_re += p.rotation_error;
      r.mean_te += p.translation_error;
    }
  }
  if (!pairs.empty()) {
    r.mean_in /= static_cast<double>(pairs.size());
    r.mean_ir /= static_cast<double>(pairs.size());
    r.recall = static_cast<double>(registered) / static_cast<double>(pairs.size());
  }
  if (registered > 0) {
    r.mean_re /= static_cast<double>(registered);
    r.mean_te /= static_cast<double>(registered);
  }
  r.pairs = std::move(pairs);
  return r;
}

/// Boundary-blur label degradation. A point is on a boundary when a point
/// with a different label lies within blur_radius; each boundary point is,
/// with probability `prob`, relabeled to a uniformly drawn label among the
/// other labels present in that neighborhood. Neighborhoods use the input
/// labels. Deterministic for a fixed seed.
inline LabeledPointCloud blur_labels(const LabeledPointCloud& cloud, double blur_radius, double prob,
                                     std::uint64_t seed) {
  if (!(blur_radius >= 0.0)) throw InvalidArgument("blur_labels: blur radius must be >= 0");
  if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidArgument("blur_labels: probability must lie in [0, 1]");
  LabeledPointCloud out = cloud;
  if (blur_radius == 0.0 || prob == 0.0 || cloud.empty()) return out;

  const SpatialIndex index(cloud.points);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::size_t> nb;
  std::vector<LabelId> others;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    index.radius_neighbors(cloud.points[i], blur_radius, nb);
    others.clear();
    for (auto j : nb)
      if (cloud.labels[j] != cloud.labels[i]) others.push_back(cloud.labels[j]);
    if (others.empty()) continue;
    std::sort(others.begin(), others.end());
    others.erase(std::unique(others.begin(), others.end()), others.end());
    if (coin(rng) >= prob) continue;
    out.labels[i] = others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng)];
  }
  return out;
}

/// One scan pair with ground truth, as consumed by the sweeps.
struct EvalPair {
  const LabeledPointCloud* src = nullptr;
  const LabeledPointCloud* dst = nullptr;
  KeypointSet src_keypoints, dst_keypoints;
  RigidTransform gt;
};

struct SweepRow {
  double value = 0.0;
  std::vector<CorrespondenceMetrics> per_pair;
  double mean_in = 0.0;
  double mean_ir = 0.0;
};

namespace detail {

inline void finish_row(SweepRow& row) {
  for (const auto& m : row.per_pair) {
    row.mean_in += static_cast<double>(m.inlier_count);
    row.mean_ir += m.inlier_ratio;
  }
  if (!row.per_pair.empty()) {
    row.mean_in /= static_cast<double>(row.per_pair.size());
    row.mean_ir /= static_cast<double>(row.per_pair.size());
  }
}

}  // namespace detail

/// Runs the pipeline once per (value, pair) with `apply(cfg, value)` setting the
/// swept parameter, and tabulates IN / IR. Descriptors and signatures are
/// recomputed only when the swept parameter affects them.
template <class Apply>
std::vector<SweepRow> sweep_parameter(std::span<const EvalPair> pairs, std::span<const double> values,
                                      const MatchConfig& base, double tau_e, Apply&& apply,
                                      bool affects_preparation) {
  if (values.empty()) throw InvalidArgument("sweep: no parameter values");
  std::vector<SweepRow> rows(values.size());
  for (std::size_t v = 0; v < values.size(); ++v) rows[v].value = values[v];
  for (const auto& pair : pairs) {
    std::optional<PreparedPair> prepared;
    for (std::size_t v = 0; v < values.size(); ++v) {
      MatchConfig cfg = base;
      apply(cfg, values[v]);
      if (!prepared || affects_preparation)
        prepared = prepare_pair(*pair.src, *pair.dst, pair.src_keypoints, pair.dst_keypoints, cfg);
      const auto corr = match_prepared(*prepared, cfg);
      rows[v].per_pair.push_back(correspondence_metrics(corr, *pair.src, pair.src_keypoints, *pair.dst,
                                                        pair.dst_keypoints, pair.gt, tau_e));
    }
  }
  for (auto& r : rows) detail::finish_row(r);
  return rows;
}

/// IN / IR of the pipeline per r_local value.
inline std::vector<SweepRow> sweep_r_local(std::span<const EvalPair> pairs, std::span<const double> r_values,
                                           const MatchConfig& base, double tau_e) {
  for (double r : r_values)
    if (!(r > 0.0)) throw InvalidArgument("sweep_r_local: radii must be > 0");
  return sweep_parameter(pairs, r_values, base, tau_e, [](MatchConfig& c, double r) { c.r_local = r; }, false);
}

}  // namespace semreg

#endif  // SEMREG_METRICS_HPP_
