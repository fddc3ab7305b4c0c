#ifndef SEMREG_TRANSFORM_HPP_
#define SEMREG_TRANSFORM_HPP_

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "semreg/common.hpp"

namespace semreg {

/// Rotation plus translation, x -> R x + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Point3 operator()(const Point3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  /// (this * other)(x) == this(other(x))
  RigidTransform operator*(const RigidTransform& other) const {
    RigidTransform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }

  /// Orthonormality and det(R) = +1 within tol.
  bool is_valid(double tol = 1e-9) const {
    return rotation.allFinite() && translation.allFinite() &&
           (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }

  friend bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

/// Rotation of `angle` radians about `axis`.
inline RigidTransform make_transform(const Eigen::Vector3d& axis, double angle,
                                     const Eigen::Vector3d& translation = Eigen::Vector3d::Zero()) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  t.translation = translation;
  return t;
}

inline std::vector<Point3> apply_transform(const RigidTransform& t, std::span<const Point3> points) {
  std::vector<Point3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(t(p));
  return out;
}

inline LabeledPointCloud apply_transform(const RigidTransform& t, const LabeledPointCloud& cloud) {
  LabeledPointCloud out;
  out.points = apply_transform(t, std::span<const Point3>(cloud.points));
  out.labels = cloud.labels;
  out.alphabet = cloud.alphabet;
  return out;
}

/// Least-squares rigid alignment: argmin over T of sum |T(src_i) - dst_i|^2,
/// reflection excluded.
///
/// Throws DegenerateInput for fewer than 3 pairs or when the cross-covariance
/// has rank < 2 (second singular value below 1e-12 of the largest). Three
/// non-collinear points give a rank-2 covariance and a unique solution, so only
/// the middle singular value is tested.
inline RigidTransform kabsch(std::span<const Point3> src, std::span<const Point3> dst) {
  if (src.size() != dst.size()) throw InvalidArgument("kabsch: src and dst differ in length");
  if (src.size() < 3) throw DegenerateInput("kabsch: at least 3 point pairs are required");

  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] < 1e-12 * sv[0])
    throw DegenerateInput("kabsch: degenerate (collinear or coincident) configuration");

  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RigidTransform t;
  t.rotation = v * d * u.transpose();
  t.translation = cd - t.rotation * cs;
  return t;
}

inline double sum_squared_residual(const RigidTransform& t, std::span<const Point3> src,
                                   std::span<const Point3> dst) {
  double s = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) s += (t(src[i]) - dst[i]).squaredNorm();
  return s;
}

}  // namespace semreg

#endif  // SEMREG_TRANSFORM_HPP_
