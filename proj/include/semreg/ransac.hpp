#ifndef SEMREG_RANSAC_HPP_
#define SEMREG_RANSAC_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "semreg/common.hpp"
#include "semreg/matching.hpp"
#include "semreg/transform.hpp"

namespace semreg {

struct RansacConfig {
  std::size_t max_iterations = 10000;
  double inlier_threshold = 0.5;  // tau_e, meters
  std::size_t sample_size = 3;
  std::uint64_t seed = 0;
  double confidence = 0.999;
  std::size_t refine_rounds = 10;

  void validate() const {
    if (max_iterations < 1) throw InvalidArgument("ransac: max_iterations must be >= 1");
    if (!(inlier_threshold > 0.0)) throw InvalidArgument("ransac: inlier threshold must be > 0");
    if (sample_size < 3) throw InvalidArgument("ransac: sample_size must be >= 3");
    if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("ransac: confidence must lie in (0, 1)");
  }
};

struct RegistrationResult {
  RigidTransform transform;
  std::vector<std::size_t> inlier_indices;  // into the correspondence list
  std::size_t iterations_used = 0;
  bool converged = false;
};

struct RefineResult {
  RigidTransform transform;
  std::vector<std::size_t> inlier_indices;
  std::vector<double> cost_history;  // truncated quadratic cost after each round
  std::size_t rounds_used = 0;
  bool degraded = false;
};

namespace detail {

inline std::vector<std::size_t> gate(const RigidTransform& t, std::span<const Point3> src,
                                     std::span<const Point3> dst, double threshold) {
  std::vector<std::size_t> out;
  const double t2 = threshold * threshold;
  for (std::size_t i = 0; i < src.size(); ++i)
    if ((src[i] - t(dst[i])).squaredNorm() <= t2) out.push_back(i);
  return out;
}

// sum over all pairs of min(r^2, tau^2)
inline double truncated_cost(const RigidTransform& t, std::span<const Point3> src, std::span<const Point3> dst,
                             double threshold) {
  const double t2 = threshold * threshold;
  double c = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) c += std::min((src[i] - t(dst[i])).squaredNorm(), t2);
  return c;
}

inline RigidTransform fit(std::span<const Point3> src, std::span<const Point3> dst,
                          const std::vector<std::size_t>& subset) {
  std::vector<Point3> a, b;
  a.reserve(subset.size());
  b.reserve(subset.size());
  for (auto i : subset) {
    a.push_back(dst[i]);
    b.push_back(src[i]);
  }
  return kabsch(a, b);
}

inline bool near_collinear(const Point3& a, const Point3& b, const Point3& c) {
  const Eigen::Vector3d u = b - a, v = c - a;
  return u.cross(v).norm() <= 1e-6 * u.norm() * v.norm();
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace detail

/// Alternates a Kabsch fit on the inlier set with re-gating at `threshold`
/// until the set is fixed or `rounds` rounds have run. The truncated quadratic
/// cost is non-increasing across rounds. Transforms map dst onto src.
inline RefineResult refine_transform(std::span<const Point3> src, std::span<const Point3> dst,
                                     std::vector<std::size_t> inliers, double threshold, std::size_t rounds,
                                     const RigidTransform& initial = RigidTransform::identity()) {
  if (src.size() != dst.size()) throw InvalidArgument("refine_transform: src and dst differ in length");
  RefineResult r;
  r.transform = initial;
  r.inlier_indices = inliers;
  if (inliers.size() < 3) {
    r.degraded = true;
    return r;
  }
  for (std::size_t round = 0; round < rounds; ++round) {
    RigidTransform t;
    try {
      t = detail::fit(src, dst, r.inlier_indices);
    } catch (const DegenerateInput&) {
      r.degraded = true;
      break;
    }
    r.transform = t;
    ++r.rounds_used;
    auto next = detail::gate(t, src, dst, threshold);
    r.cost_history.push_back(detail::truncated_cost(t, src, dst, threshold));
    const bool fixed = next == r.inlier_indices;
    if (next.size() < 3) {
      r.degraded = true;
      break;
    }
    r.inlier_indices = std::move(next);
    if (fixed) break;
  }
  return r;
}

/// Robust rigid estimation from point pairs src[i] <-> dst[i]; the returned
/// transform maps dst onto src. Deterministic for a fixed seed.
inline RegistrationResult ransac_register(std::span<const Point3> src, std::span<const Point3> dst,
                                          const RansacConfig& cfg) {
  cfg.validate();
  if (src.size() != dst.size()) throw InvalidArgument("ransac: src and dst differ in length");
  const std::size_t n = src.size();
  if (n < cfg.sample_size) throw InsufficientData("ransac: fewer correspondences than the sample size");

  std::mt19937_64 rng(cfg.seed);
  RegistrationResult best;
  std::size_t best_count = 0;
  std::vector<std::size_t> sample(cfg.sample_size);
  double needed = static_cast<double>(cfg.max_iterations);

  std::size_t it = 0;
  while (it < cfg.max_iterations && static_cast<double>(it) < needed) {
    ++it;
    if (n == cfg.sample_size) {
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    } else {
      bool ok = false;
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        for (std::size_t s = 0; s < cfg.sample_size; ++s) {
          std::size_t idx;
          do {
            idx = detail::uniform_index(rng, n);
          } while (std::find(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(s), idx) !=
                   sample.begin() + static_cast<std::ptrdiff_t>(s));
          sample[s] = idx;
        }
        ok = !(detail::near_collinear(src[sample[0]], src[sample[1]], src[sample[2]]) ||
               detail::near_collinear(dst[sample[0]], dst[sample[1]], dst[sample[2]]));
      }
      if (!ok) continue;
    }
    RigidTransform hyp;
    try {
      hyp = detail::fit(src, dst, sample);
    } catch (const DegenerateInput&) {
      continue;
    }
    auto inliers = detail::gate(hyp, src, dst, cfg.inlier_threshold);
    if (inliers.size() > best_count) {
      best_count = inliers.size();
      best.transform = hyp;
      best.inlier_indices = std::move(inliers);
      const double w = static_cast<double>(best_count) / static_cast<double>(n);
      const double p_good = std::pow(w, static_cast<double>(cfg.sample_size));
      if (p_good >= 1.0)
        needed = 0.0;
      else if (p_good > 0.0)
        needed = std::log(1.0 - cfg.confidence) / std::log1p(-p_good);
    }
  }
  best.iterations_used = it;
  best.converged = best_count >= cfg.sample_size;
  if (!best.converged) return best;

  const RefineResult refined =
      refine_transform(src, dst, best.inlier_indices, cfg.inlier_threshold, cfg.refine_rounds, best.transform);
  auto final_inliers = detail::gate(refined.transform, src, dst, cfg.inlier_threshold);
  if (final_inliers.size() >= best_count) {
    best.transform = refined.transform;
    best.inlier_indices = std::move(final_inliers);
  }
  return best;
}

/// Convenience overload over keypoint correspondences.
inline RegistrationResult ransac_register(const LabeledPointCloud& src, const KeypointSet& src_kp,
                                          const LabeledPointCloud& dst, const KeypointSet& dst_kp,
                                          const CorrespondenceSet& corr, const RansacConfig& cfg) {
  std::vector<Point3> a, b;
  a.reserve(corr.size());
  b.reserve(corr.size());
  for (const auto& c : corr) {
    a.push_back(src.points.at(src_kp.at(c.src_index)));
    b.push_back(dst.points.at(dst_kp.at(c.dst_index)));
  }
  return ransac_register(a, b, cfg);
}

}  // namespace semreg

#endif  // SEMREG_RANSAC_HPP_
