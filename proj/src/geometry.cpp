#include "ctri/geometry.hpp"

#include <cmath>
#include <string>

#include "ctri/errors.hpp"

namespace ctri {

namespace {

double orthonormality_residual(const Mat3& R) {
  // max |(R^T R - I)_{ij}|
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += R(k, i) * R(k, j);
      double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(s - target));
    }
  return worst;
}

}  // namespace

Camera make_camera(double f, const Vec2& principal, const Mat3& R,
                   const Vec3& C) {
  if (!(f > 0.0) || !std::isfinite(f))
    throw ConfigError("make_camera: focal length must be positive, got " +
                      std::to_string(f));
  double res = orthonormality_residual(R);
  if (res > 1e-9)
    throw ConfigError("make_camera: R is not orthonormal (residual " +
                      std::to_string(res) + ")");
  if (std::abs(R.det() - 1.0) > 1e-9)
    throw ConfigError("make_camera: det(R) must be +1, got " +
                      std::to_string(R.det()));

  Camera cam;
  cam.f = f;
  cam.principal = principal;
  cam.R = R;
  cam.C = C;

  // K R with K = [[f,0,cx],[0,f,cy],[0,0,1]].
  Mat3 KR;
  for (int j = 0; j < 3; ++j) {
    KR(0, j) = f * R(0, j) + principal.x * R(2, j);
    KR(1, j) = f * R(1, j) + principal.y * R(2, j);
    KR(2, j) = R(2, j);
  }
  Vec3 t = KR.apply(C) * -1.0;
  for (int r = 0; r < 3; ++r) {
    cam.P(r, 0) = KR(r, 0);
    cam.P(r, 1) = KR(r, 1);
    cam.P(r, 2) = KR(r, 2);
    cam.P(r, 3) = (r == 0 ? t.x : r == 1 ? t.y : t.z);
  }
  return cam;
}

ImagePoint project(const Camera& cam, const WorldPoint& X) {
  double w = cam.depth(X);
  if (std::abs(w) <= 1e-12)
    throw NumericalError("project: point at infinity (depth " +
                         std::to_string(w) + ")");
  double u = cam.P.dir(0).dot(X) + cam.P.off(0);
  double v = cam.P.dir(1).dot(X) + cam.P.off(1);
  return {u / w, v / w};
}

bool cheirality(const Camera& cam, const WorldPoint& X) {
  return cam.depth(X) > 0.0;
}

}  // namespace ctri
