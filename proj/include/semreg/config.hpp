#ifndef SEMREG_CONFIG_HPP_
#define SEMREG_CONFIG_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semreg/io.hpp"
#include "semreg/metrics.hpp"
#include "semreg/pipeline.hpp"
#include "semreg/ransac.hpp"

namespace semreg {

/// A config file that does not parse or fails validation. `line()` is 1-based,
/// 0 when the problem is not tied to one line.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& what, std::size_t line)
      : InvalidArgument(line ? "config line " + std::to_string(line) + ": " + what : "config: " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Every tunable of the pipeline, RANSAC and evaluation.
struct PipelineConfig {
  MatchConfig match;
  RansacConfig ransac;
  EvalThresholds eval;

  static PipelineConfig outdoor() {
    PipelineConfig c;
    c.eval = EvalThresholds::outdoor();
    c.ransac.inlier_threshold = c.eval.tau_e;
    return c;
  }

  static PipelineConfig indoor() {
    PipelineConfig c;
    c.match = MatchConfig::indoor_defaults();
    c.eval = EvalThresholds::indoor();
    c.ransac.inlier_threshold = c.eval.tau_e;
    return c;
  }

  void validate() const {
    match.validate();
    ransac.validate();
    eval.validate();
  }
};

namespace detail {

inline std::string grouping_name(Grouping g) {
  switch (g) {
    case Grouping::kNone: return "none";
    case Grouping::kSameCategory: return "category";
    case Grouping::kLocalSignature: return "local_ss";
  }
  return "local_ss";
}

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline double config_double(const std::string& v, std::size_t line) {
  const auto x = parse_number<double>(v);
  if (!x || !std::isfinite(*x)) throw ConfigError("expected a number, got '" + v + "'", line);
  return *x;
}

template <class T>
T config_unsigned(const std::string& v, std::size_t line) {
  const auto x = parse_number<T>(v);
  if (!x) throw ConfigError("expected a non-negative integer, got '" + v + "'", line);
  return *x;
}

inline bool config_bool(const std::string& v, std::size_t line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false, got '" + v + "'", line);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = std::min(v.find(',', start), v.size());
    auto item = trim(std::string_view(v).substr(start, comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

inline void apply_config_key(PipelineConfig& c, const std::string& key, const std::string& v, std::size_t line) {
  auto& m = c.match;
  static const std::string radius_prefix = "landmark.radius.";
  if (key == "r_local") m.r_local = config_double(v, line);
  else if (key == "bmr.N") {
    // signed parse so that negative values reach validation with a clear message
    const auto n = parse_number<long long>(v);
    if (!n || *n > 1 << 20 || *n < -(1 << 20)) throw ConfigError("expected an integer, got '" + v + "'", line);
    m.bmr.rings = static_cast<int>(*n);
  }
  else if (key == "bmr.L") m.bmr.width = config_double(v, line);
  else if (key == "K") m.k = config_unsigned<std::size_t>(v, line);
  else if (key == "matcher") {
    try {
      m.matcher = matcher_from_string(v);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what(), line);
    }
  }
  else if (key == "grouping") {
    if (v == "none") m.grouping = Grouping::kNone;
    else if (v == "category") m.grouping = Grouping::kSameCategory;
    else if (v == "local_ss") m.grouping = Grouping::kLocalSignature;
    else throw ConfigError("grouping must be none, category or local_ss", line);
  }
  else if (key == "mask_matching") m.mask_matching = config_bool(v, line);
  else if (key == "landmark.categories") m.landmark_categories = split_list(v);
  else if (key == "landmark.min_cluster_size") m.min_cluster_size = config_unsigned<std::size_t>(v, line);
  else if (key == "landmark.default_radius") m.default_cluster_radius = config_double(v, line);
  else if (key.starts_with(radius_prefix) && key.size() > radius_prefix.size())
    m.cluster_radius[key.substr(radius_prefix.size())] = config_double(v, line);
  else if (key == "landmark.saliency_threshold") m.saliency_threshold = config_double(v, line);
  else if (key == "indoor.voxel") m.indoor_voxel = config_double(v, line);
  else if (key == "fpfh.normal_radius") m.normal_radius = config_double(v, line);
  else if (key == "fpfh.feature_radius") m.feature_radius = config_double(v, line);
  else if (key == "ransac.max_iterations") c.ransac.max_iterations = config_unsigned<std::size_t>(v, line);
  else if (key == "ransac.threshold") c.ransac.inlier_threshold = config_double(v, line);
  else if (key == "ransac.sample_size") c.ransac.sample_size = config_unsigned<std::size_t>(v, line);
  else if (key == "ransac.seed") c.ransac.seed = config_unsigned<std::uint64_t>(v, line);
  else if (key == "ransac.confidence") c.ransac.confidence = config_double(v, line);
  else if (key == "ransac.refine_rounds") c.ransac.refine_rounds = config_unsigned<std::size_t>(v, line);
  else if (key == "eval.tau_e") c.eval.tau_e = config_double(v, line);
  else if (key == "eval.re_max") c.eval.re_max = config_double(v, line);
  else if (key == "eval.te_max") c.eval.te_max = config_double(v, line);
  else throw ConfigError("unknown key '" + key + "'", line);
}

}  // namespace detail

/// key=value lines; `#` starts a comment. `mode` (outdoor or indoor) picks
/// the defaults the other keys override, wherever it appears. Keys may not
/// repeat. The result is validated.
inline PipelineConfig parse_config(std::string_view text) {
  struct Entry {
    std::string key, value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  detail::LineReader lines(text);
  std::string_view raw;
  while (lines.next(raw)) {
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value", lines.line_no());
    Entry e{detail::trim(std::string_view(line).substr(0, eq)), detail::trim(std::string_view(line).substr(eq + 1)),
            lines.line_no()};
    if (e.key.empty()) throw ConfigError("empty key", e.line);
    for (const auto& prev : entries)
      if (prev.key == e.key) throw ConfigError("duplicate key '" + e.key + "'", e.line);
    entries.push_back(std::move(e));
  }

  PipelineConfig c = PipelineConfig::outdoor();
  for (const auto& e : entries) {
    if (e.key != "mode") continue;
    if (e.value == "indoor") c = PipelineConfig::indoor();
    else if (e.value != "outdoor") throw ConfigError("mode must be outdoor or indoor", e.line);
  }
  for (const auto& e : entries)
    if (e.key != "mode") detail::apply_config_key(c, e.key, e.value, e.line);
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what(), 0);
  }
  return c;
}

/// Canonical text: every key, fixed order, doubles with 17 significant digits.
inline std::string serialize_config(const PipelineConfig& c) {
  const auto& m = c.match;
  auto d = [](double v) { return detail::fmt_double(v, 17); };
  std::string out;
  auto put = [&out](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  put("mode", m.indoor ? "indoor" : "outdoor");
  put("r_local", d(m.r_local));
  put("bmr.N", std::to_string(m.bmr.rings));
  put("bmr.L", d(m.bmr.width));
  put("K", std::to_string(m.k));
  put("matcher", to_string(m.matcher));
  put("grouping", detail::grouping_name(m.grouping));
  put("mask_matching", m.mask_matching ? "true" : "false");
  std::string cats;
  for (std::size_t i = 0; i < m.landmark_categories.size(); ++i) cats += (i ? "," : "") + m.landmark_categories[i];
  put("landmark.categories", cats);
  put("landmark.min_cluster_size", std::to_string(m.min_cluster_size));
  put("landmark.default_radius", d(m.default_cluster_radius));
  for (const auto& [name, r] : m.cluster_radius) put("landmark.radius." + name, d(r));
  put("landmark.saliency_threshold", d(m.saliency_threshold));
  put("indoor.voxel", d(m.indoor_voxel));
  put("fpfh.normal_radius", d(m.normal_radius));
  put("fpfh.feature_radius", d(m.feature_radius));
  put("ransac.max_iterations", std::to_string(c.ransac.max_iterations));
  put("ransac.threshold", d(c.ransac.inlier_threshold));
  put("ransac.sample_size", std::to_string(c.ransac.sample_size));
  put("ransac.seed", std::to_string(c.ransac.seed));
  put("ransac.confidence", d(c.ransac.confidence));
  put("ransac.refine_rounds", std::to_string(c.ransac.refine_rounds));
  put("eval.tau_e", d(c.eval.tau_e));
  put("eval.re_max", d(c.eval.re_max));
  put("eval.te_max", d(c.eval.te_max));
  return out;
}

inline PipelineConfig read_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what(), 0);
  }
  return parse_config(text);
}

}  // namespace semreg

#endif  // SEMREG_CONFIG_HPP_
