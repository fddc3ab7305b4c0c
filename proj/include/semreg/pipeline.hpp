#ifndef SEMREG_PIPELINE_HPP_
#define SEMREG_PIPELINE_HPP_

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "semreg/common.hpp"
#include "semreg/fpfh.hpp"
#include "semreg/matching.hpp"
#include "semreg/semantic.hpp"
#include "semreg/spatial_index.hpp"

namespace semreg {

/// How keypoints are partitioned before matching.
enum class Grouping {
  kNone,            // one group holding everything
  kSameCategory,    // keypoints' own labels must agree
  kLocalSignature,  // matching groups over Local-SS (LS-Consistency)
};

/// Tunables of the correspondence stage. Defaults are the outdoor settings.
struct MatchConfig {
  double r_local = 0.8;
  BmrConfig bmr{33, 1.5};
  std::size_t k = 2;
  Matcher matcher = Matcher::kNearestNeighbor;
  Grouping grouping = Grouping::kLocalSignature;
  bool mask_matching = true;

  bool indoor = false;
  double indoor_voxel = 0.25;

  /// Landmark categories by name; names missing from the alphabet are
  /// skipped. Empty selects categories by saliency on the source cloud.
  std::vector<std::string> landmark_categories{"pole", "traffic-sign", "trunk", "car", "truck"};
  std::map<std::string, double> cluster_radius{
      {"pole", 0.5}, {"traffic-sign", 0.5}, {"trunk", 0.5}, {"car", 1.0}, {"truck", 1.0}};
  double default_cluster_radius = 0.5;
  std::size_t min_cluster_size = 10;
  double saliency_threshold = 0.5;

  double normal_radius = 0.5;
  double feature_radius = 1.0;

  static MatchConfig indoor_defaults() {
    MatchConfig c;
    c.indoor = true;
    c.r_local = 0.05;
    c.bmr = {10, 0.2};
    c.k = 3;
    c.normal_radius = 0.05;
    c.feature_radius = 0.15;
    return c;
  }

  void validate() const {
    if (!(r_local > 0.0)) throw InvalidArgument("r_local must be > 0");
    bmr.validate();
    if (k < 1) throw InvalidArgument("K must be >= 1");
    if (!(indoor_voxel > 0.0)) throw InvalidArgument("indoor voxel size must be > 0");
    if (!(default_cluster_radius > 0.0)) throw InvalidArgument("cluster radius must be > 0");
    for (const auto& [name, r] : cluster_radius)
      if (!(r > 0.0)) throw InvalidArgument("cluster radius for '" + name + "' must be > 0");
    if (!(saliency_threshold >= 0.0 && saliency_threshold <= 1.0))
      throw InvalidArgument("saliency_threshold must lie in [0, 1]");
    if (!(normal_radius > 0.0) || !(feature_radius > 0.0)) throw InvalidArgument("descriptor radii must be > 0");
  }
};

inline ClusterParams cluster_params_for(const MatchConfig& cfg, const LabelAlphabet& alphabet) {
  ClusterParams p;
  p.default_radius = cfg.default_cluster_radius;
  p.min_cluster_size = cfg.min_cluster_size;
  for (const auto& [name, r] : cfg.cluster_radius) {
    const LabelId id = alphabet.find(name);
    if (id < alphabet.size()) p.radius[id] = r;
  }
  return p;
}

/// Landmark categories for a cloud: the configured names, or the saliency
/// selection over every static category when none are configured.
inline std::vector<LabelId> resolve_landmark_categories(const LabeledPointCloud& cloud, const MatchConfig& cfg) {
  std::vector<LabelId> out;
  if (!cfg.landmark_categories.empty()) {
    for (const auto& name : cfg.landmark_categories) {
      const LabelId id = cloud.alphabet.find(name);
      if (id < cloud.alphabet.size()) out.push_back(id);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  std::vector<LabelId> candidates;
  for (LabelId t = 0; t < cloud.alphabet.size(); ++t)
    if (!cloud.alphabet.is_dynamic(t) && cloud.alphabet.name(t) != "unlabeled") candidates.push_back(t);
  if (candidates.empty() || cloud.empty()) return out;
  const LandmarkSet all = cluster_landmarks(cloud, cluster_params_for(cfg, cloud.alphabet), candidates);
  return select_landmark_categories(cloud, all, cfg.bmr, cfg.saliency_threshold);
}

inline LandmarkSet build_landmarks(const LabeledPointCloud& cloud, const MatchConfig& cfg,
                                   const std::vector<LabelId>& categories) {
  if (cfg.indoor) return voxel_landmarks(cloud, cfg.indoor_voxel);
  if (categories.empty()) return {};
  return cluster_landmarks(cloud, cluster_params_for(cfg, cloud.alphabet), categories);
}

/// Everything about a scan pair that does not depend on r_local, K, the
/// grouping rule or the matcher.
struct PreparedPair {
  const LabeledPointCloud* src = nullptr;
  const LabeledPointCloud* dst = nullptr;
  KeypointSet src_keypoints, dst_keypoints;
  SpatialIndex src_index, dst_index;
  LandmarkSet src_landmarks, dst_landmarks;
  std::vector<BmrSignature> src_bmr, dst_bmr;
  ScoreMatrix scores;
  SimilarityMatrix similarity;
};

/// The clouds must outlive the returned object.
inline PreparedPair prepare_pair(const LabeledPointCloud& src, const LabeledPointCloud& dst,
                                 const KeypointSet& src_kp, const KeypointSet& dst_kp, const MatchConfig& cfg,
                                 const Point3& src_viewpoint = Point3::Zero(),
                                 const Point3& dst_viewpoint = Point3::Zero()) {
  cfg.validate();
  if (src.alphabet != dst.alphabet) throw InvalidArgument("pipeline: clouds use different label alphabets");
  PreparedPair p;
  p.src = &src;
  p.dst = &dst;
  p.src_keypoints = src_kp;
  p.dst_keypoints = dst_kp;
  p.src_index = SpatialIndex(src.points);
  p.dst_index = SpatialIndex(dst.points);

  const std::vector<LabelId> categories = resolve_landmark_categories(src, cfg);
  p.src_landmarks = build_landmarks(src, cfg, categories);
  p.dst_landmarks = build_landmarks(dst, cfg, categories);
  p.src_bmr = compute_bmr_ss(src, src_kp, p.src_landmarks, cfg.bmr);
  p.dst_bmr = compute_bmr_ss(dst, dst_kp, p.dst_landmarks, cfg.bmr);
  p.similarity = similarity_matrix(p.src_bmr, p.dst_bmr);

  if (src_kp.empty() || dst_kp.empty()) {
    p.scores = ScoreMatrix(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(src_kp.size()),
                                                 static_cast<Eigen::Index>(dst_kp.size())));
    return p;
  }
  FpfhParams fp;
  fp.normal_radius = cfg.normal_radius;
  fp.feature_radius = cfg.feature_radius;
  fp.viewpoint = src_viewpoint;
  const DescriptorSet ds = compute_fpfh(src, p.src_index, src_kp, fp);
  fp.viewpoint = dst_viewpoint;
  const DescriptorSet dd = compute_fpfh(dst, p.dst_index, dst_kp, fp);
  p.scores = score_matrix(ds, dd);
  return p;
}

inline std::vector<MatchingGroup> build_groups(const PreparedPair& p, const MatchConfig& cfg) {
  const std::size_t labels = p.src->alphabet.size();
  switch (cfg.grouping) {
    case Grouping::kNone: {
      MatchingGroup g;
      g.anchor_label = kNoGroup;
      g.src_indices.resize(p.src_keypoints.size());
      g.dst_indices.resize(p.dst_keypoints.size());
      std::iota(g.src_indices.begin(), g.src_indices.end(), std::size_t{0});
      std::iota(g.dst_indices.begin(), g.dst_indices.end(), std::size_t{0});
      if (g.src_indices.empty() || g.dst_indices.empty()) return {};
      return {g};
    }
    case Grouping::kSameCategory: {
      std::vector<LabelId> sl, dl;
      for (auto i : p.src_keypoints) sl.push_back(p.src->labels[i]);
      for (auto j : p.dst_keypoints) dl.push_back(p.dst->labels[j]);
      return build_category_groups(sl, dl, labels);
    }
    case Grouping::kLocalSignature:
      break;
  }
  return build_matching_groups(compute_local_ss(*p.src, p.src_index, p.src_keypoints, cfg.r_local),
                               compute_local_ss(*p.dst, p.dst_index, p.dst_keypoints, cfg.r_local), labels);
}

/// Correspondences for a prepared pair under the grouping, masking and
/// matcher settings of cfg.
inline CorrespondenceSet match_prepared(const PreparedPair& p, const MatchConfig& cfg) {
  cfg.validate();
  const auto groups = build_groups(p, cfg);
  const auto selector = [&](const ScoreMatrix& m) { return select(cfg.matcher, m); };
  CorrespondenceSet out = cfg.mask_matching ? group_mask_match(groups, p.scores, p.similarity, cfg.k, selector)
                                            : group_match(groups, p.scores, selector);
  if (cfg.grouping == Grouping::kNone) {
    // single pseudo-group: provenance is "no group"
    std::vector<Correspondence> items(out.begin(), out.end());
    for (auto& c : items) c.group_label = kNoGroup;
    out = CorrespondenceSet(std::move(items));
  }
  return out;
}

/// Local-SS, landmarks and BMR-SS for both clouds, descriptor scores, matching
/// groups, mask matching inside each group and the deduplicated union.
inline CorrespondenceSet ml_semreg_pipeline(const LabeledPointCloud& src, const LabeledPointCloud& dst,
                                            const KeypointSet& src_kp, const KeypointSet& dst_kp,
                                            const MatchConfig& cfg) {
  return match_prepared(prepare_pair(src, dst, src_kp, dst_kp, cfg), cfg);
}

/// The ablation baseline: matcher on the full score matrix.
inline MatchConfig baseline_config(MatchConfig cfg) {
  cfg.grouping = Grouping::kNone;
  cfg.mask_matching = false;
  return cfg;
}

}  // namespace semreg

#endif  // SEMREG_PIPELINE_HPP_
