#ifndef SEMREG_FPFH_HPP_
#define SEMREG_FPFH_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "semreg/common.hpp"
#include "semreg/spatial_index.hpp"

namespace semreg {

/// One L2-normalized descriptor per keypoint. Degenerate rows are zero.
struct DescriptorSet {
  Eigen::MatrixXd features;       // rows = keypoints
  std::vector<bool> degenerate;   // per row

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  Eigen::Index dimension() const { return features.cols(); }
};

struct FpfhParams {
  double normal_radius = 0.5;
  double feature_radius = 1.0;
  Point3 viewpoint = Point3::Zero();  // normals are flipped to face it
  std::size_t min_neighbors = 5;
};

namespace detail {

constexpr int kFpfhBins = 11;
constexpr int kFpfhDim = 3 * kFpfhBins;
using Spfh = std::array<double, kFpfhDim>;

// Darboux-frame angular triple for an oriented point pair; false when the
// pair is coincident or the frame is undefined.
inline bool pair_features(const Point3& p1, const Eigen::Vector3d& n1, const Point3& p2,
                          const Eigen::Vector3d& n2, double& theta, double& alpha, double& phi) {
  Eigen::Vector3d d = p2 - p1;
  const double dist = d.norm();
  if (dist == 0.0) return false;
  d /= dist;
  Eigen::Vector3d ns = n1, nt = n2;
  const double a1 = n1.dot(d), a2 = n2.dot(d);
  if (std::acos(std::clamp(std::abs(a1), 0.0, 1.0)) > std::acos(std::clamp(std::abs(a2), 0.0, 1.0))) {
    ns = n2;
    nt = n1;
    d = -d;
    phi = -a2;
  } else {
    phi = a1;
  }
  Eigen::Vector3d v = d.cross(ns);
  const double vn = v.norm();
  if (vn == 0.0) return false;
  v /= vn;
  const Eigen::Vector3d w = ns.cross(v);
  alpha = v.dot(nt);
  theta = std::atan2(w.dot(nt), ns.dot(nt));
  return true;
}

inline int bin_of(double value, double lo, double hi) {
  const int b = static_cast<int>(std::floor(kFpfhBins * (value - lo) / (hi - lo)));
  return std::clamp(b, 0, kFpfhBins - 1);
}

class FpfhEstimator {
 public:
  FpfhEstimator(const std::vector<Point3>& points, const SpatialIndex& index, const FpfhParams& params)
      : points_(points), index_(index), params_(params), normal_state_(points.size(), 0),
        normals_(points.size(), Eigen::Vector3d::Zero()), spfh_slot_(points.size(), -1) {}

  // Returns false for a degenerate keypoint.
  template <class Row>
  bool describe(std::size_t k, Row&& out) {
    out.setZero();
    std::vector<std::size_t> nb;
    index_.radius_neighbors(points_[k], params_.feature_radius, nb);
    std::size_t others = 0;
    for (auto j : nb) others += (j != k);
    if (others < params_.min_neighbors || !normal(k)) return false;

    std::array<double, kFpfhDim> acc{};
    std::array<double, 3> sums{};
    for (auto j : nb) {
      if (j == k) continue;
      const double dist = (points_[j] - points_[k]).norm();
      if (dist == 0.0) continue;
      const Spfh& s = spfh(j);
      const double weight = 1.0 / dist;
      for (int b = 0; b < kFpfhDim; ++b) {
        acc[b] += s[b] * weight;
        sums[b / kFpfhBins] += s[b] * weight;
      }
    }
    const Spfh& own = spfh(k);
    for (int b = 0; b < kFpfhDim; ++b) {
      const double sum = sums[b / kFpfhBins];
      out[b] = own[b] + (sum > 0.0 ? acc[b] * 100.0 / sum : 0.0);
    }
    const double norm = out.norm();
    if (!(norm > 0.0)) {
      out.setZero();
      return false;
    }
    out /= norm;
    return true;
  }

 private:
  bool normal(std::size_t i) {
    if (normal_state_[i] == 0) {
      std::vector<std::size_t> nb;
      index_.radius_neighbors(points_[i], params_.normal_radius, nb);
      normal_state_[i] = 2;
      if (nb.size() >= 3) {
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (auto j : nb) mean += points_[j];
        mean /= static_cast<double>(nb.size());
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (auto j : nb) {
          const Eigen::Vector3d d = points_[j] - mean;
          cov += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
        if (eig.info() == Eigen::Success && eig.eigenvalues()[1] > 0.0) {
          Eigen::Vector3d n = eig.eigenvectors().col(0).normalized();
          if (n.dot(params_.viewpoint - points_[i]) < 0.0) n = -n;
          normals_[i] = n;
          normal_state_[i] = 1;
        }
      }
    }
    return normal_state_[i] == 1;
  }

  const Spfh& spfh(std::size_t i) {
    if (spfh_slot_[i] >= 0) return spfh_[static_cast<std::size_t>(spfh_slot_[i])];
    Spfh h{};
    if (normal(i)) {
      std::vector<std::size_t> nb;
      index_.radius_neighbors(points_[i], params_.feature_radius, nb);
      std::vector<std::array<int, 3>> bins;
      for (auto j : nb) {
        if (j == i || !normal(j)) continue;
        double theta, alpha, phi;
        if (!pair_features(points_[i], normals_[i], points_[j], normals_[j], theta, alpha, phi)) continue;
        bins.push_back({bin_of(theta, -std::numbers::pi, std::numbers::pi), bin_of(alpha, -1.0, 1.0),
                        bin_of(phi, -1.0, 1.0)});
      }
      if (!bins.empty()) {
        const double inc = 100.0 / static_cast<double>(bins.size());
        for (const auto& b : bins) {
          h[b[0]] += inc;
          h[kFpfhBins + b[1]] += inc;
          h[2 * kFpfhBins + b[2]] += inc;
        }
      }
    }
    spfh_slot_[i] = static_cast<long>(spfh_.size());
    spfh_.push_back(h);
    return spfh_.back();
  }

  const std::vector<Point3>& points_;
  const SpatialIndex& index_;
  FpfhParams params_;
  std::vector<char> normal_state_;  // 0 unknown, 1 valid, 2 invalid
  std::vector<Eigen::Vector3d> normals_;
  std::vector<long> spfh_slot_;
  std::deque<Spfh> spfh_;
};

}  // namespace detail

/// 33-bin fast point feature histograms at the keypoints. Normals come from
/// local PCA within normal_radius; keypoints with fewer than min_neighbors
/// neighbors inside feature_radius are flagged degenerate.
inline DescriptorSet compute_fpfh(const LabeledPointCloud& cloud, const SpatialIndex& index,
                                  const KeypointSet& keypoints, const FpfhParams& params) {
  if (!(params.normal_radius > 0.0) || !(params.feature_radius > 0.0))
    throw InvalidArgument("compute_fpfh: radii must be > 0");
  if (cloud.empty()) throw InvalidArgument("compute_fpfh: empty cloud");
  DescriptorSet out;
  out.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(keypoints.size()), detail::kFpfhDim);
  out.degenerate.assign(keypoints.size(), false);
  detail::FpfhEstimator est(index.points(), index, params);
  for (std::size_t r = 0; r < keypoints.size(); ++r)
    out.degenerate[r] = !est.describe(keypoints[r], out.features.row(static_cast<Eigen::Index>(r)));
  return out;
}

inline DescriptorSet compute_fpfh(const LabeledPointCloud& cloud, const KeypointSet& keypoints, double normal_radius,
                                  double feature_radius) {
  const SpatialIndex index(cloud.points);
  FpfhParams params;
  params.normal_radius = normal_radius;
  params.feature_radius = feature_radius;
  return compute_fpfh(cloud, index, keypoints, params);
}

}  // namespace semreg

#endif  // SEMREG_FPFH_HPP_
