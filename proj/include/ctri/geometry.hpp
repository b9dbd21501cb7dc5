#pragma once

#include <array>
#include <cmath>

namespace ctri {

struct Vec2 {
  double x{0.0}, y{0.0};

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

struct Vec3 {
  double x{0.0}, y{0.0}, z{0.0};

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }

  static Mat3 identity() {
    Mat3 o;
    o.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return o;
  }

  Vec3 row(int r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }
  Vec3 apply(const Vec3& v) const {
    return {row(0).dot(v), row(1).dot(v), row(2).dot(v)};
  }
  Vec3 apply_transposed(const Vec3& v) const {
    return {m[0] * v.x + m[3] * v.y + m[6] * v.z,
            m[1] * v.x + m[4] * v.y + m[7] * v.z,
            m[2] * v.x + m[5] * v.y + m[8] * v.z};
  }
  Mat3 mul(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }
  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) -
           m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

using WorldPoint = Vec3;
using ImagePoint = Vec2;

// Row-major 3x4 projection matrix.
struct Mat34 {
  std::array<double, 12> m{};

  double operator()(int r, int c) const { return m[4 * r + c]; }
  double& operator()(int r, int c) { return m[4 * r + c]; }

  // Leading 3-vector of row r (the part acting on X).
  Vec3 dir(int r) const { return {m[4 * r], m[4 * r + 1], m[4 * r + 2]}; }
  // Last entry of row r.
  double off(int r) const { return m[4 * r + 3]; }
};

// Calibrated pinhole camera. Immutable after construction; the composed
// projection matrix is cached because projection is the inner-loop hot path.
struct Camera {
  double f{1.0};
  Vec2 principal{};
  Mat3 R{Mat3::identity()};
  Vec3 C{};
  Mat34 P{};

  // Signed depth of X along the optical axis: third P row applied to [X;1].
  double depth(const Vec3& X) const { return P.dir(2).dot(X) + P.off(2); }
};

// Composes P = K R [I | -C] and validates R (orthonormality residual
// <= 1e-9, det +1) and f > 0. Throws ConfigError otherwise.
Camera make_camera(double f, const Vec2& principal, const Mat3& R,
                   const Vec3& C);

// Central projection. Throws NumericalError when |depth| <= 1e-12.
ImagePoint project(const Camera& cam, const WorldPoint& X);

// True iff X is strictly in front of the camera.
bool cheirality(const Camera& cam, const WorldPoint& X);

}  // namespace ctri
