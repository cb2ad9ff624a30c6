#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace vair {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double xx, double yy, double zz) : x(xx), y(yy), z(zz) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  double norm_l1() const { return std::abs(x) + std::abs(y) + std::abs(z); }
  Vec3 normalized() const {
    double n = norm();
    if (n <= 0.0) throw std::invalid_argument("Vec3::normalized: zero vector");
    return {x / n, y / n, z / n};
  }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    Mat3 a;
    a.m = {r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z};
    return a;
  }
  static Mat3 rotation_x(double a) {
    double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r.m = {1, 0, 0, 0, c, -s, 0, s, c};
    return r;
  }
  static Mat3 rotation_y(double a) {
    double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r.m = {c, 0, s, 0, 1, 0, -s, 0, c};
    return r;
  }
  static Mat3 rotation_z(double a) {
    double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
    return r;
  }

  double operator()(int r, int c) const { return m[r * 3 + c]; }
  double& operator()(int r, int c) { return m[r * 3 + c]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }
  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

// Unit quaternion, used for rotation interpolation.
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  static Quat from_matrix(const Mat3& r);
  Mat3 to_matrix() const;
  Quat normalized() const {
    double n = std::sqrt(w * w + x * x + y * y + z * z);
    return {w / n, x / n, y / n, z / n};
  }
  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
};

Quat slerp(Quat a, Quat b, double t);

// Rigid transform: p -> R p + t.
struct PoseSE3 {
  Mat3 rotation;
  Vec3 translation;

  static PoseSE3 identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  PoseSE3 compose(const PoseSE3& o) const {
    // (this ∘ o)(p) = this(o(p))
    return {rotation * o.rotation, rotation * o.translation + translation};
  }
  PoseSE3 inverse() const {
    Mat3 rt = rotation.transposed();
    return {rt, -(rt * translation)};
  }
  // Orthonormality with det +1, within tol.
  bool is_valid(double tol = 1e-9) const;

  // 4x4 row-major homogeneous matrix round-trip.
  std::array<double, 16> to_mat4() const;
  static PoseSE3 from_mat4(const std::array<double, 16>& m);
};

struct Box3 {
  Vec3 min;
  Vec3 max;

  Vec3 size() const { return max - min; }
  Vec3 center() const { return (min + max) * 0.5; }
  bool valid() const { return min.x < max.x && min.y < max.y && min.z < max.z; }
  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y &&
           p.z >= min.z && p.z <= max.z;
  }
  Box3 padded(double frac) const {
    Vec3 h = size() * (0.5 * frac);
    return {min - h, max + h};
  }
};

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const {
    if (!(fx > 0) || !(fy > 0))
      throw std::invalid_argument("intrinsics: focal lengths must be positive");
    if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
      throw std::invalid_argument("intrinsics: principal point outside image");
  }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb8&) const = default;
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Rgb8> colors;  // empty or same size as points

  bool has_colors() const { return !colors.empty(); }
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Box3 bbox() const;
};

// Camera-center ray through the center of pixel (u, v), world frame.
Ray pixel_to_ray(const CameraIntrinsics& intr, const PoseSE3& pose, int u, int v);

// Applies pose to every point, order preserved. Colors pass through.
PointCloud transform_cloud(const PointCloud& cloud, const PoseSE3& pose);

}  // namespace vair
