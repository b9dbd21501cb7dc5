#include "ctri/consistency.hpp"

#include <cmath>
#include <string>

#include "ctri/errors.hpp"

namespace ctri {

void validate(const NoiseModel& noise) {
  if (noise.q != 1 && noise.q != 2 && noise.q != kInfNorm)
    throw ConfigError("noise model: q must be 1, 2 or inf");
  if (!(noise.delta >= 0.0) || !std::isfinite(noise.delta))
    throw ConfigError("noise model: delta must be finite and >= 0");
}

void validate(const Instance& inst) {
  validate(inst.noise);
  if (inst.observations.size() < 2)
    throw ConfigError("instance: need at least 2 observations, got " +
                      std::to_string(inst.observations.size()));
}

double image_norm(const Vec2& v, int q) {
  double ax = std::abs(v.x), ay = std::abs(v.y);
  switch (q) {
    case 1:
      return ax + ay;
    case 2:
      return std::sqrt(ax * ax + ay * ay);
    default:
      return std::max(ax, ay);
  }
}

bool in_image_region(const ImagePoint& x, const ImagePoint& xbar,
                     const NoiseModel& noise) {
  return image_norm(x - xbar, noise.q) <= noise.delta + 1e-12;
}

bool in_consistent_region(const WorldPoint& X, const Instance& inst) {
  for (const Observation& obs : inst.observations) {
    // Depths inside the projection guard band count as behind the camera;
    // the norm test would be meaningless there.
    if (obs.cam.depth(X) <= 1e-12) return false;
    if (!in_image_region(obs.x, project(obs.cam, X), inst.noise)) return false;
  }
  return true;
}

}  // namespace ctri
