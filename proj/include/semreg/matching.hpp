#ifndef SEMREG_MATCHING_HPP_
#define SEMREG_MATCHING_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "semreg/common.hpp"
#include "semreg/fpfh.hpp"
#include "semreg/semantic.hpp"

namespace semreg {

// ---------------------------------------------------------------------------
// Score matrix
// ---------------------------------------------------------------------------

/// |P| x |Q| match scores in [0, 1].
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  explicit ScoreMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.size() > 0 && (values_.minCoeff() < 0.0 || values_.maxCoeff() > 1.0))
      throw InvalidArgument("score matrix entries must lie in [0, 1]");
  }

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  const Eigen::MatrixXd& values() const { return values_; }

  ScoreMatrix submatrix(const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) const {
    ScoreMatrix out;
    out.values_ = values_(rows, cols);
    return out;
  }

 private:
  Eigen::MatrixXd values_;
};

/// (1 + cos(src_i, dst_j)) / 2, clamped to [0, 1]; rows or columns of
/// degenerate descriptors score 0.
inline ScoreMatrix score_matrix(const DescriptorSet& src, const DescriptorSet& dst) {
  if (src.dimension() != dst.dimension()) throw InvalidArgument("score_matrix: descriptor dimensions differ");
  const auto normalized = [](const DescriptorSet& d) {
    Eigen::MatrixXd m = d.features;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double n = m.row(r).norm();
      const bool degenerate = static_cast<std::size_t>(r) < d.degenerate.size() && d.degenerate[r];
      if (degenerate || !(n > 0.0))
        m.row(r).setZero();
      else
        m.row(r) /= n;
    }
    return m;
  };
  const Eigen::MatrixXd a = normalized(src);
  const Eigen::MatrixXd b = normalized(dst);
  Eigen::MatrixXd g = ((a * b.transpose()).array() + 1.0) * 0.5;
  g = g.cwiseMax(0.0).cwiseMin(1.0);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    if (a.row(r).squaredNorm() == 0.0) g.row(r).setZero();
  for (Eigen::Index c = 0; c < b.rows(); ++c)
    if (b.row(c).squaredNorm() == 0.0) g.col(c).setZero();
  return ScoreMatrix(std::move(g));
}

// ---------------------------------------------------------------------------
// Correspondences
// ---------------------------------------------------------------------------

inline constexpr LabelId kNoGroup = std::numeric_limits<LabelId>::max();

struct Correspondence {
  std::size_t src_index = 0;  // into the source KeypointSet
  std::size_t dst_index = 0;  // into the target KeypointSet
  double score = 0.0;
  LabelId group_label = kNoGroup;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

/// Correspondences with unique (src, dst) pairs, kept sorted by (src, dst).
class CorrespondenceSet {
 public:
  CorrespondenceSet() = default;

  /// Duplicate pairs collapse to their highest-scoring instance; on equal
  /// scores the lowest group label wins.
  explicit CorrespondenceSet(std::vector<Correspondence> items) : items_(std::move(items)) { normalize(); }

  void merge(const CorrespondenceSet& other) {
    items_.insert(items_.end(), other.items_.begin(), other.items_.end());
    normalize();
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const Correspondence& operator[](std::size_t i) const { return items_[i]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const std::vector<Correspondence>& items() const { return items_; }

  bool contains(std::size_t src, std::size_t dst) const {
    auto it = std::lower_bound(items_.begin(), items_.end(), std::make_pair(src, dst),
                               [](const Correspondence& c, const std::pair<std::size_t, std::size_t>& k) {
                                 return std::make_pair(c.src_index, c.dst_index) < k;
                               });
    return it != items_.end() && it->src_index == src && it->dst_index == dst;
  }

  friend bool operator==(const CorrespondenceSet&, const CorrespondenceSet&) = default;

 private:
  void normalize() {
    std::sort(items_.begin(), items_.end(), [](const Correspondence& a, const Correspondence& b) {
      if (a.src_index != b.src_index) return a.src_index < b.src_index;
      if (a.dst_index != b.dst_index) return a.dst_index < b.dst_index;
      if (a.score != b.score) return a.score > b.score;
      return a.group_label < b.group_label;
    });
    items_.erase(std::unique(items_.begin(), items_.end(),
                             [](const Correspondence& a, const Correspondence& b) {
                               return a.src_index == b.src_index && a.dst_index == b.dst_index;
                             }),
                 items_.end());
  }

  std::vector<Correspondence> items_;
};

// ---------------------------------------------------------------------------
// Selection functions
// ---------------------------------------------------------------------------

namespace detail {

// Lowest-index argmax of a row; -1 when every entry is <= 0.
inline Eigen::Index row_argmax(const Eigen::MatrixXd& m, Eigen::Index r) {
  Eigen::Index best = -1;
  double best_v = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (m(r, c) > best_v) {
      best_v = m(r, c);
      best = c;
    }
  }
  return best;
}

inline Eigen::Index col_argmax(const Eigen::MatrixXd& m, Eigen::Index c) {
  Eigen::Index best = -1;
  double best_v = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (m(r, c) > best_v) {
      best_v = m(r, c);
      best = r;
    }
  }
  return best;
}

}  // namespace detail

/// Row-wise argmax (lowest column on ties). Rows with no positive entry carry
/// no evidence and produce nothing.
inline CorrespondenceSet select_nn(const ScoreMatrix& scores) {
  std::vector<Correspondence> out;
  const auto& m = scores.values();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const Eigen::Index c = detail::row_argmax(m, r);
    if (c >= 0) out.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), m(r, c), kNoGroup});
  }
  return CorrespondenceSet(std::move(out));
}

/// Pairs that are each other's argmax.
inline CorrespondenceSet select_mnn(const ScoreMatrix& scores) {
  std::vector<Correspondence> out;
  const auto& m = scores.values();
  std::vector<Eigen::Index> col_best(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) col_best[static_cast<std::size_t>(c)] = detail::col_argmax(m, c);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const Eigen::Index c = detail::row_argmax(m, r);
    if (c >= 0 && col_best[static_cast<std::size_t>(c)] == r)
      out.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), m(r, c), kNoGroup});
  }
  return CorrespondenceSet(std::move(out));
}

enum class Matcher { kNearestNeighbor, kMutualNearestNeighbor };

inline CorrespondenceSet select(Matcher matcher, const ScoreMatrix& scores) {
  return matcher == Matcher::kNearestNeighbor ? select_nn(scores) : select_mnn(scores);
}

inline std::string to_string(Matcher m) { return m == Matcher::kNearestNeighbor ? "nn" : "mnn"; }

inline Matcher matcher_from_string(const std::string& s) {
  if (s == "nn") return Matcher::kNearestNeighbor;
  if (s == "mnn") return Matcher::kMutualNearestNeighbor;
  throw InvalidArgument("unknown matcher '" + s + "' (expected nn or mnn)");
}

// ---------------------------------------------------------------------------
// Group matching
// ---------------------------------------------------------------------------

struct MatchingGroup {
  LabelId anchor_label = 0;
  std::vector<std::size_t> src_indices;
  std::vector<std::size_t> dst_indices;
};

/// One group per label that occurs in at least one source and one target
/// signature, in ascending label order.
inline std::vector<MatchingGroup> build_matching_groups(const std::vector<LocalSignature>& src,
                                                        const std::vector<LocalSignature>& dst,
                                                        std::size_t alphabet_size) {
  std::vector<MatchingGroup> groups;
  for (LabelId t = 0; t < alphabet_size; ++t) {
    MatchingGroup g;
    g.anchor_label = t;
    for (std::size_t i = 0; i < src.size(); ++i)
      if (src[i].contains(t)) g.src_indices.push_back(i);
    for (std::size_t j = 0; j < dst.size(); ++j)
      if (dst[j].contains(t)) g.dst_indices.push_back(j);
    if (!g.src_indices.empty() && !g.dst_indices.empty()) groups.push_back(std::move(g));
  }
  return groups;
}

/// Strict same-category grouping on the keypoints' own labels.
inline std::vector<MatchingGroup> build_category_groups(const std::vector<LabelId>& src_labels,
                                                        const std::vector<LabelId>& dst_labels,
                                                        std::size_t alphabet_size) {
  std::vector<LocalSignature> s, d;
  for (auto l : src_labels) s.push_back(LabelSet(alphabet_size, {l}));
  for (auto l : dst_labels) d.push_back(LabelSet(alphabet_size, {l}));
  return build_matching_groups(s, d, alphabet_size);
}

namespace detail {

inline std::vector<Eigen::Index> as_eigen_indices(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

inline CorrespondenceSet lift(const CorrespondenceSet& local, const MatchingGroup& g) {
  std::vector<Correspondence> out;
  out.reserve(local.size());
  for (const auto& c : local)
    out.push_back({g.src_indices[c.src_index], g.dst_indices[c.dst_index], c.score, g.anchor_label});
  return CorrespondenceSet(std::move(out));
}

}  // namespace detail

/// Applies the selector to each group's score submatrix and unions the
/// results, keeping the best-scoring copy of repeated pairs.
template <class Selector>
CorrespondenceSet group_match(const std::vector<MatchingGroup>& groups, const ScoreMatrix& scores,
                              Selector&& selector) {
  CorrespondenceSet out;
  for (const auto& g : groups) {
    const ScoreMatrix sub =
        scores.submatrix(detail::as_eigen_indices(g.src_indices), detail::as_eigen_indices(g.dst_indices));
    out.merge(detail::lift(selector(sub), g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene-consistency mask
// ---------------------------------------------------------------------------

using SimilarityMatrix = Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic>;
using ConsistencyMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

inline SimilarityMatrix similarity_matrix(const std::vector<BmrSignature>& src, const std::vector<BmrSignature>& dst) {
  SimilarityMatrix s(static_cast<Eigen::Index>(src.size()), static_cast<Eigen::Index>(dst.size()));
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = 0; j < dst.size(); ++j)
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<std::uint32_t>(scene_similarity(src[i], dst[j]));
  return s;
}

/// Per row, ones at the K largest entries (lowest column wins ties).
inline ConsistencyMask topk_mask(const SimilarityMatrix& sim, std::size_t k) {
  if (k < 1) throw InvalidArgument("topk_mask: K must be >= 1");
  ConsistencyMask mask = ConsistencyMask::Zero(sim.rows(), sim.cols());
  const auto cols = static_cast<std::size_t>(sim.cols());
  const std::size_t keep = std::min(k, cols);
  std::vector<Eigen::Index> order(cols);
  for (Eigen::Index r = 0; r < sim.rows(); ++r) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        if (sim(r, a) != sim(r, b)) return sim(r, a) > sim(r, b);
                        return a < b;
                      });
    for (std::size_t i = 0; i < keep; ++i) mask(r, order[i]) = 1;
  }
  return mask;
}

inline ScoreMatrix apply_mask(const ScoreMatrix& scores, const ConsistencyMask& mask) {
  if (scores.rows() != mask.rows() || scores.cols() != mask.cols())
    throw InvalidArgument("apply_mask: dimensions differ");
  return ScoreMatrix(scores.values().cwiseProduct(mask.cast<double>()));
}

/// Selector on G masked by the top-K scene-similarity mask, with S given.
template <class Selector>
CorrespondenceSet mask_match(const ScoreMatrix& scores, const SimilarityMatrix& sim, std::size_t k,
                             Selector&& selector) {
  if (scores.rows() != sim.rows() || scores.cols() != sim.cols())
    throw InvalidArgument("mask_match: score and similarity dimensions differ");
  return selector(apply_mask(scores, topk_mask(sim, k)));
}

template <class Selector>
CorrespondenceSet mask_match(const ScoreMatrix& scores, const std::vector<BmrSignature>& src_bmr,
                             const std::vector<BmrSignature>& dst_bmr, std::size_t k, Selector&& selector) {
  if (static_cast<Eigen::Index>(src_bmr.size()) != scores.rows() ||
      static_cast<Eigen::Index>(dst_bmr.size()) != scores.cols())
    throw InvalidArgument("mask_match: signature counts do not match the score matrix");
  return mask_match(scores, similarity_matrix(src_bmr, dst_bmr), k, std::forward<Selector>(selector));
}

/// Mask matching inside every group, on slices of the global S.
template <class Selector>
CorrespondenceSet group_mask_match(const std::vector<MatchingGroup>& groups, const ScoreMatrix& scores,
                                   const SimilarityMatrix& sim, std::size_t k, Selector&& selector) {
  CorrespondenceSet out;
  for (const auto& g : groups) {
    const auto rows = detail::as_eigen_indices(g.src_indices);
    const auto cols = detail::as_eigen_indices(g.dst_indices);
    const ScoreMatrix sub = scores.submatrix(rows, cols);
    const SimilarityMatrix sim_sub = sim(rows, cols);
    out.merge(detail::lift(mask_match(sub, sim_sub, k, selector), g));
  }
  return out;
}

}  // namespace semreg

#endif  // SEMREG_MATCHING_HPP_
