#pragma once

#include <vector>

#include "ctri/geometry.hpp"

namespace ctri {

// Norm index for the bounded-noise ball: 1 (diamond), 2 (disc) or
// kInfNorm (square).
inline constexpr int kInfNorm = 0;

struct NoiseModel {
  int q{kInfNorm};
  double delta{0.0};
};

struct Observation {
  ImagePoint x;
  Camera cam;
};

// A triangulation problem: M >= 2 observations plus the noise model the
// observations are assumed to respect.
struct Instance {
  std::vector<Observation> observations;
  NoiseModel noise;
};

// Validates field ranges (q, delta, M >= 2). Throws ConfigError.
void validate(const NoiseModel& noise);
void validate(const Instance& inst);

// p-norm of a 2-vector for p in {1, 2, inf}.
double image_norm(const Vec2& v, int q);

// True iff ||x - xbar||_q <= delta + 1e-12.
bool in_image_region(const ImagePoint& x, const ImagePoint& xbar,
                     const NoiseModel& noise);

// True iff X has positive depth in every camera and each reprojection lies
// in the image-space region of its observation. Points behind any camera
// are inconsistent regardless of the norm test.
bool in_consistent_region(const WorldPoint& X, const Instance& inst);

}  // namespace ctri
