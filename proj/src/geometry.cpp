#include "vair/geometry.hpp"

#include <algorithm>

namespace vair {

Quat Quat::from_matrix(const Mat3& r) {
  // Shepperd's method: pick the largest diagonal combination for stability.
  Quat q;
  double tr = r(0, 0) + r(1, 1) + r(2, 2);
  if (tr > 0) {
    double s = std::sqrt(tr + 1.0) * 2;
    q.w = 0.25 * s;
    q.x = (r(2, 1) - r(1, 2)) / s;
    q.y = (r(0, 2) - r(2, 0)) / s;
    q.z = (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2;
    q.w = (r(2, 1) - r(1, 2)) / s;
    q.x = 0.25 * s;
    q.y = (r(0, 1) + r(1, 0)) / s;
    q.z = (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2;
    q.w = (r(0, 2) - r(2, 0)) / s;
    q.x = (r(0, 1) + r(1, 0)) / s;
    q.y = 0.25 * s;
    q.z = (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2;
    q.w = (r(1, 0) - r(0, 1)) / s;
    q.x = (r(0, 2) + r(2, 0)) / s;
    q.y = (r(1, 2) + r(2, 1)) / s;
    q.z = 0.25 * s;
  }
  return q.normalized();
}

Mat3 Quat::to_matrix() const {
  Mat3 r;
  double xx = x * x, yy = y * y, zz = z * z;
  double xy = x * y, xz = x * z, yz = y * z;
  double wx = w * x, wy = w * y, wz = w * z;
  r.m = {1 - 2 * (yy + zz), 2 * (xy - wz),     2 * (xz + wy),
         2 * (xy + wz),     1 - 2 * (xx + zz), 2 * (yz - wx),
         2 * (xz - wy),     2 * (yz + wx),     1 - 2 * (xx + yy)};
  return r;
}

Quat slerp(Quat a, Quat b, double t) {
  double d = a.dot(b);
  if (d < 0) {  // take the short arc
    b = {-b.w, -b.x, -b.y, -b.z};
    d = -d;
  }
  if (d > 1.0 - 1e-12) {
    // nearly identical: linear blend avoids division by sin(0)
    Quat q{a.w + t * (b.w - a.w), a.x + t * (b.x - a.x),
           a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
    return q.normalized();
  }
  double theta = std::acos(std::clamp(d, -1.0, 1.0));
  double s = std::sin(theta);
  double wa = std::sin((1 - t) * theta) / s;
  double wb = std::sin(t * theta) / s;
  Quat q{wa * a.w + wb * b.w, wa * a.x + wb * b.x, wa * a.y + wb * b.y,
         wa * a.z + wb * b.z};
  return q.normalized();
}

bool PoseSE3::is_valid(double tol) const {
  Mat3 rrt = rotation * rotation.transposed();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double want = i == j ? 1.0 : 0.0;
      if (std::abs(rrt(i, j) - want) > tol) return false;
    }
  if (std::abs(rotation.det() - 1.0) > tol) return false;
  return translation.finite();
}

std::array<double, 16> PoseSE3::to_mat4() const {
  return {rotation(0, 0), rotation(0, 1), rotation(0, 2), translation.x,
          rotation(1, 0), rotation(1, 1), rotation(1, 2), translation.y,
          rotation(2, 0), rotation(2, 1), rotation(2, 2), translation.z,
          0, 0, 0, 1};
}

PoseSE3 PoseSE3::from_mat4(const std::array<double, 16>& m) {
  PoseSE3 p;
  p.rotation.m = {m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]};
  p.translation = {m[3], m[7], m[11]};
  return p;
}

Box3 PointCloud::bbox() const {
  if (points.empty()) return {{0, 0, 0}, {0, 0, 0}};
  Box3 b{points[0], points[0]};
  for (const auto& p : points) {
    b.min.x = std::min(b.min.x, p.x);
    b.min.y = std::min(b.min.y, p.y);
    b.min.z = std::min(b.min.z, p.z);
    b.max.x = std::max(b.max.x, p.x);
    b.max.y = std::max(b.max.y, p.y);
    b.max.z = std::max(b.max.z, p.z);
  }
  return b;
}

Ray pixel_to_ray(const CameraIntrinsics& intr, const PoseSE3& pose, int u, int v) {
  if (u < 0 || u >= intr.width || v < 0 || v >= intr.height)
    throw std::out_of_range("pixel_to_ray: pixel outside image");
  Vec3 dir_cam{(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
  Vec3 dir_world = (pose.rotation * dir_cam).normalized();
  return {pose.translation, dir_world};
}

PointCloud transform_cloud(const PointCloud& cloud, const PoseSE3& pose) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(pose.apply(p));
  out.colors = cloud.colors;
  return out;
}

}  // namespace vair
