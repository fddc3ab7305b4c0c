#ifndef SEMREG_SEMANTIC_HPP_
#define SEMREG_SEMANTIC_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "semreg/common.hpp"
#include "semreg/spatial_index.hpp"

namespace semreg {

// ---------------------------------------------------------------------------
// Local semantic signature
// ---------------------------------------------------------------------------

/// Set of label ids, stored as a bitset over the alphabet.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::size_t alphabet_size) : size_(alphabet_size), words_((alphabet_size + 63) / 64, 0) {}

  LabelSet(std::size_t alphabet_size, std::initializer_list<LabelId> members) : LabelSet(alphabet_size) {
    for (auto m : members) insert(m);
  }

  std::size_t alphabet_size() const { return size_; }

  void insert(LabelId id) {
    if (id >= size_) throw InvalidArgument("label set: id outside alphabet");
    words_[id / 64] |= std::uint64_t{1} << (id % 64);
  }

  bool contains(LabelId id) const {
    return id < size_ && ((words_[id / 64] >> (id % 64)) & 1u) != 0;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool empty() const { return count() == 0; }

  bool intersects(const LabelSet& other) const {
    const std::size_t n = std::min(words_.size(), other.words_.size());
    for (std::size_t i = 0; i < n; ++i)
      if (words_[i] & other.words_[i]) return true;
    return false;
  }

  bool is_subset_of(const LabelSet& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      const std::uint64_t o = i < other.words_.size() ? other.words_[i] : 0;
      if (words_[i] & ~o) return false;
    }
    return true;
  }

  std::vector<LabelId> members() const {
    std::vector<LabelId> out;
    for (LabelId i = 0; i < size_; ++i)
      if (contains(i)) out.push_back(i);
    return out;
  }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

using LocalSignature = LabelSet;

/// Labels of every cloud point within r_local (inclusive) of the keypoint.
inline LocalSignature compute_local_ss(const LabeledPointCloud& cloud, const SpatialIndex& index,
                                       const Point3& keypoint, double r_local) {
  if (!(r_local > 0.0)) throw InvalidArgument("compute_local_ss: r_local must be > 0");
  LocalSignature sig(cloud.alphabet.size());
  for (auto i : index.radius_neighbors(keypoint, r_local)) sig.insert(cloud.labels[i]);
  return sig;
}

inline std::vector<LocalSignature> compute_local_ss(const LabeledPointCloud& cloud, const SpatialIndex& index,
                                                    const KeypointSet& keypoints, double r_local) {
  if (!(r_local > 0.0)) throw InvalidArgument("compute_local_ss: r_local must be > 0");
  std::vector<LocalSignature> out;
  out.reserve(keypoints.size());
  std::vector<std::size_t> nb;
  for (auto k : keypoints) {
    LocalSignature sig(cloud.alphabet.size());
    index.radius_neighbors(cloud.points.at(k), r_local, nb);
    for (auto i : nb) sig.insert(cloud.labels[i]);
    out.push_back(std::move(sig));
  }
  return out;
}

/// LS-Consistency: the two signatures share at least one label.
inline bool ls_consistent(const LocalSignature& a, const LocalSignature& b) { return a.intersects(b); }

// ---------------------------------------------------------------------------
// Landmarks
// ---------------------------------------------------------------------------

struct LandmarkSet {
  std::vector<Point3> centers;
  std::vector<LabelId> labels;
  std::vector<std::size_t> cluster_sizes;

  std::size_t size() const { return centers.size(); }
  bool empty() const { return centers.empty(); }

  void push_back(const Point3& c, LabelId l, std::size_t n) {
    centers.push_back(c);
    labels.push_back(l);
    cluster_sizes.push_back(n);
  }
};

struct ClusterParams {
  std::map<LabelId, double> radius;  // per category
  double default_radius = 0.5;
  std::size_t min_cluster_size = 10;

  double radius_for(LabelId id) const {
    auto it = radius.find(id);
    return it == radius.end() ? default_radius : it->second;
  }
};

namespace detail {

// Mean over points sorted lexicographically, so the result does not depend on
// input order.
inline Point3 order_free_centroid(std::vector<Point3> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point3& a, const Point3& b) {
    return std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z());
  });
  Point3 c = Point3::Zero();
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

inline void sort_landmarks(LandmarkSet& set) {
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = set.centers[a];
    const auto& cb = set.centers[b];
    return std::tie(set.labels[a], ca.x(), ca.y(), ca.z()) < std::tie(set.labels[b], cb.x(), cb.y(), cb.z());
  });
  LandmarkSet out;
  for (auto i : order) out.push_back(set.centers[i], set.labels[i], set.cluster_sizes[i]);
  set = std::move(out);
}

}  // namespace detail

/// Euclidean clustering per category. Each connected component of the
/// category's radius graph with at least min_cluster_size points becomes a
/// landmark at its centroid. Output is sorted by (label, x, y, z).
inline LandmarkSet cluster_landmarks(const LabeledPointCloud& cloud, const ClusterParams& params,
                                     std::span<const LabelId> categories) {
  if (categories.empty()) throw InvalidArgument("cluster_landmarks: no categories selected");
  LandmarkSet out;
  std::vector<std::size_t> nb;
  for (LabelId cat : categories) {
    const double radius = params.radius_for(cat);
    if (!(radius > 0.0)) throw InvalidArgument("cluster_landmarks: radius must be > 0");
    std::vector<Point3> sub;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      if (cloud.labels[i] == cat) sub.push_back(cloud.points[i]);
    if (sub.empty()) continue;

    const SpatialIndex index(sub);
    std::vector<char> visited(sub.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < sub.size(); ++seed) {
      if (visited[seed]) continue;
      std::vector<Point3> members;
      visited[seed] = 1;
      stack.assign(1, seed);
      while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        members.push_back(sub[cur]);
        index.radius_neighbors(sub[cur], radius, nb);
        for (auto n : nb) {
          if (!visited[n]) {
            visited[n] = 1;
            stack.push_back(n);
          }
        }
      }
      if (members.size() >= params.min_cluster_size && !members.empty()) {
        const std::size_t n = members.size();
        out.push_back(detail::order_free_centroid(std::move(members)), cat, n);
      }
    }
  }
  detail::sort_landmarks(out);
  return out;
}

/// Indoor landmarks: one landmark per occupied (voxel, label) cell, at the
/// centroid of the cell's points, over every category.
inline LandmarkSet voxel_landmarks(const LabeledPointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw InvalidArgument("voxel_landmarks: voxel size must be > 0");
  std::map<std::tuple<long long, long long, long long, LabelId>, std::vector<Point3>> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    auto key = std::make_tuple(static_cast<long long>(std::floor(p.x() / voxel)),
                               static_cast<long long>(std::floor(p.y() / voxel)),
                               static_cast<long long>(std::floor(p.z() / voxel)), cloud.labels[i]);
    cells[key].push_back(p);
  }
  LandmarkSet out;
  for (auto& [key, pts] : cells) {
    const std::size_t n = pts.size();
    out.push_back(detail::order_free_centroid(std::move(pts)), std::get<3>(key), n);
  }
  detail::sort_landmarks(out);
  return out;
}

// ---------------------------------------------------------------------------
// Binary multi-ring semantic signature
// ---------------------------------------------------------------------------

struct BmrConfig {
  int rings = 33;      // N
  double width = 1.5;  // L, meters

  void validate() const {
    if (rings < 1) throw InvalidArgument("bmr: ring count N must be >= 1");
    if (!(width > 0.0) || !std::isfinite(width)) throw InvalidArgument("bmr: ring width L must be > 0");
  }
};

/// 1-based ring k with (k-1)L <= distance < kL, or nullopt beyond the last ring.
/// The bounds are evaluated as k*L products so the result agrees with the
/// interval definition at exact boundaries.
inline std::optional<int> ring_index(double distance, const BmrConfig& cfg) {
  if (distance < 0.0 || !std::isfinite(distance)) return std::nullopt;
  double q = std::floor(distance / cfg.width);
  if (q >= static_cast<double>(cfg.rings) + 1.0) return std::nullopt;
  auto k = static_cast<long long>(q);
  while (k > 0 && static_cast<double>(k) * cfg.width > distance) --k;
  while (static_cast<double>(k + 1) * cfg.width <= distance) ++k;
  if (k >= cfg.rings) return std::nullopt;
  return static_cast<int>(k + 1);
}

/// |S| x N bit matrix; bit (t, k) is set when a landmark of label t lies in
/// ring k. Rings are 1-based in the API, matching ring_index.
class BmrSignature {
 public:
  BmrSignature() = default;
  BmrSignature(std::size_t labels, int rings)
      : labels_(labels), rings_(rings), words_((labels * static_cast<std::size_t>(rings) + 63) / 64, 0) {}

  std::size_t labels() const { return labels_; }
  int rings() const { return rings_; }

  bool get(LabelId t, int k) const {
    check(t, k);
    const std::size_t b = bit(t, k);
    return ((words_[b / 64] >> (b % 64)) & 1u) != 0;
  }

  void set(LabelId t, int k) {
    check(t, k);
    const std::size_t b = bit(t, k);
    words_[b / 64] |= std::uint64_t{1} << (b % 64);
  }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const BmrSignature&, const BmrSignature&) = default;

 private:
  void check(LabelId t, int k) const {
    if (t >= labels_ || k < 1 || k > rings_) throw InvalidArgument("bmr signature: (label, ring) out of range");
  }
  std::size_t bit(LabelId t, int k) const { return t * static_cast<std::size_t>(rings_) + (k - 1); }

  std::size_t labels_ = 0;
  int rings_ = 0;
  std::vector<std::uint64_t> words_;
};

inline BmrSignature compute_bmr_ss(const Point3& keypoint, const LandmarkSet& landmarks, const BmrConfig& cfg,
                                   std::size_t alphabet_size) {
  cfg.validate();
  BmrSignature sig(alphabet_size, cfg.rings);
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    if (auto k = ring_index((landmarks.centers[i] - keypoint).norm(), cfg)) sig.set(landmarks.labels[i], *k);
  }
  return sig;
}

inline std::vector<BmrSignature> compute_bmr_ss(const LabeledPointCloud& cloud, const KeypointSet& keypoints,
                                                const LandmarkSet& landmarks, const BmrConfig& cfg) {
  std::vector<BmrSignature> out;
  out.reserve(keypoints.size());
  for (auto k : keypoints) out.push_back(compute_bmr_ss(cloud.points.at(k), landmarks, cfg, cloud.alphabet.size()));
  return out;
}

/// Scene semantic similarity: number of (label, ring) cells set in both.
inline std::size_t scene_similarity(const BmrSignature& a, const BmrSignature& b) {
  if (a.labels() != b.labels() || a.rings() != b.rings())
    throw InvalidArgument("scene_similarity: signature dimensions differ");
  std::size_t c = 0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) c += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
  return c;
}

/// Ring-wise semantic consistency for label t in ring k (1-based).
inline bool rws_consistent(const BmrSignature& a, const BmrSignature& b, LabelId t, int k) {
  if (a.labels() != b.labels() || a.rings() != b.rings())
    throw InvalidArgument("rws_consistent: signature dimensions differ");
  return a.get(t, k) && b.get(t, k);
}

// ---------------------------------------------------------------------------
// Saliency and landmark-category selection
// ---------------------------------------------------------------------------

/// |S| x N matrix in [0, 1]. Column k-1 holds ring k.
using SaliencyMatrix = Eigen::MatrixXd;

/// W(t, k) = 1 - |union over label-t landmarks of cloud points in ring k| / |cloud|.
inline SaliencyMatrix compute_saliency(const LabeledPointCloud& cloud, const LandmarkSet& landmarks,
                                       const BmrConfig& cfg) {
  if (cloud.empty()) throw InvalidArgument("compute_saliency: empty cloud");
  cfg.validate();
  const std::size_t labels = cloud.alphabet.size();
  const auto rings = static_cast<std::size_t>(cfg.rings);
  Eigen::MatrixXd covered = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels), cfg.rings);
  std::vector<std::uint8_t> hit(labels * rings);
  for (const auto& p : cloud.points) {
    std::fill(hit.begin(), hit.end(), 0);
    for (std::size_t l = 0; l < landmarks.size(); ++l) {
      if (auto k = ring_index((p - landmarks.centers[l]).norm(), cfg))
        hit[landmarks.labels[l] * rings + static_cast<std::size_t>(*k - 1)] = 1;
    }
    for (std::size_t t = 0; t < labels; ++t)
      for (std::size_t k = 0; k < rings; ++k)
        if (hit[t * rings + k]) covered(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) += 1.0;
  }
  return Eigen::MatrixXd::Ones(covered.rows(), covered.cols()) - covered / static_cast<double>(cloud.size());
}

/// Categories whose mean saliency over rings reaches the threshold, excluding
/// dynamic categories. Ascending label order.
inline std::vector<LabelId> select_landmark_categories(const LabeledPointCloud& cloud, const LandmarkSet& landmarks,
                                                       const BmrConfig& cfg, double saliency_threshold = 0.5) {
  if (!(saliency_threshold >= 0.0 && saliency_threshold <= 1.0))
    throw InvalidArgument("select_landmark_categories: threshold must lie in [0, 1]");
  const SaliencyMatrix w = compute_saliency(cloud, landmarks, cfg);
  std::vector<LabelId> out;
  for (Eigen::Index t = 0; t < w.rows(); ++t) {
    const auto id = static_cast<LabelId>(t);
    if (cloud.alphabet.is_dynamic(id)) continue;
    if (w.row(t).mean() >= saliency_threshold) out.push_back(id);
  }
  return out;
}

}  // namespace semreg

#endif  // SEMREG_SEMANTIC_HPP_
