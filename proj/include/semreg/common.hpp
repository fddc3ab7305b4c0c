#ifndef SEMREG_COMMON_HPP_
#define SEMREG_COMMON_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace semreg {

using Point3 = Eigen::Vector3d;
using LabelId = std::uint32_t;

/// Raised when an argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by rigid alignment when the point configuration is rank deficient.
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an estimator is given fewer samples than it needs.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by the file readers. `offset()` is a byte offset or a 1-based line
/// number depending on `unit()`.
class ParseError : public std::runtime_error {
 public:
  enum class Unit { kByte, kLine };

  ParseError(const std::string& what, std::size_t offset, Unit unit = Unit::kByte)
      : std::runtime_error(what + (unit == Unit::kByte ? " (at byte " : " (at line ") +
                           std::to_string(offset) + ")"),
        offset_(offset),
        unit_(unit) {}

  std::size_t offset() const { return offset_; }
  Unit unit() const { return unit_; }

 private:
  std::size_t offset_;
  Unit unit_;
};

inline bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

/// Finite set of semantic category names. The position of a name is its id.
class LabelAlphabet {
 public:
  LabelAlphabet() = default;

  explicit LabelAlphabet(std::vector<std::string> names, std::vector<bool> dynamic = {})
      : names_(std::move(names)), dynamic_(std::move(dynamic)) {
    if (names_.empty()) throw InvalidArgument("label alphabet must not be empty");
    if (dynamic_.empty()) dynamic_.assign(names_.size(), false);
    if (dynamic_.size() != names_.size())
      throw InvalidArgument("label alphabet: dynamic flags do not match name count");
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
      if (n.empty()) throw InvalidArgument("label alphabet: empty category name");
      if (!seen.insert(n).second) throw InvalidArgument("label alphabet: duplicate name '" + n + "'");
    }
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(LabelId id) const { return names_.at(id); }
  bool is_dynamic(LabelId id) const { return dynamic_.at(id); }
  const std::vector<std::string>& names() const { return names_; }

  /// Returns size() when the name is unknown.
  LabelId find(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<LabelId>(i);
    return static_cast<LabelId>(names_.size());
  }

  LabelId id_of(const std::string& name) const {
    const LabelId id = find(name);
    if (id == names_.size()) throw InvalidArgument("unknown category '" + name + "'");
    return id;
  }

  friend bool operator==(const LabelAlphabet&, const LabelAlphabet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<bool> dynamic_;
};

/// Points with one semantic label each.
struct LabeledPointCloud {
  std::vector<Point3> points;
  std::vector<LabelId> labels;
  LabelAlphabet alphabet;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Throws InvalidArgument when the parallel arrays or label ids are inconsistent.
  void validate() const {
    if (points.size() != labels.size())
      throw InvalidArgument("point cloud: points and labels differ in length");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= alphabet.size())
        throw InvalidArgument("point cloud: label id " + std::to_string(labels[i]) +
                              " at point " + std::to_string(i) + " outside alphabet");
      if (!is_finite(points[i]))
        throw InvalidArgument("point cloud: non-finite point " + std::to_string(i));
    }
  }

  friend bool operator==(const LabeledPointCloud& a, const LabeledPointCloud& b) {
    return a.points == b.points && a.labels == b.labels && a.alphabet == b.alphabet;
  }
};

/// Indices of keypoints within a cloud.
using KeypointSet = std::vector<std::size_t>;

inline std::vector<Point3> gather(const LabeledPointCloud& cloud, const KeypointSet& keypoints) {
  std::vector<Point3> out;
  out.reserve(keypoints.size());
  for (auto i : keypoints) out.push_back(cloud.points.at(i));
  return out;
}

}  // namespace semreg

#endif  // SEMREG_COMMON_HPP_
