#pragma once

#include <string>
#include <vector>

#include "ctri/geometry.hpp"

namespace ctri {

// Planar camera with a pixelised 1-D image line. Forward direction is
// (cos angle, sin angle); the image coordinate of a world point X is
// x = f * lateral / depth in camera coordinates. Pixel k covers
// [lo + k*pitch, lo + (k+1)*pitch) with lo = -pixel_count*pitch/2.
struct Camera2D {
  Vec2 centre{};
  double angle{0.0};
  double f{1.0};
  int pixel_count{5};
  double pixel_pitch{0.4};
};

struct Observation2D {
  Camera2D cam;
  double x{0.0};
};

using Polygon2D = std::vector<Vec2>;  // convex, CCW

// Signed depth (distance along the forward direction).
double depth2d(const Camera2D& cam, const Vec2& X);

// Image coordinate; throws NumericalError when |depth| <= 1e-12.
double project2d(const Camera2D& cam, const Vec2& X);

// Pixel index of X, or -1 when X is behind the camera or outside the
// sensor.
int pixel_index(const Camera2D& cam, const Vec2& X);

// True iff depth > 1e-12 and |project2d(X) - obs.x| <= delta + 1e-12 for
// every observation.
bool in_consistent_region_2d(const Vec2& X,
                             const std::vector<Observation2D>& obs,
                             double delta);

double polygon_area(const Polygon2D& poly);
Vec2 polygon_centroid(const Polygon2D& poly);

// Exact integral of ||X - P||^2 over the polygon (signed fan
// triangulation; exact for any P).
double polygon_second_moment(const Polygon2D& poly, const Vec2& P);

struct Cell {
  Polygon2D poly;
  std::vector<int> signature;  // pixel index per camera, -1 = not visible
  bool touches_boundary{false};  // has a vertex on the input ROI boundary
};

struct CellArrangement {
  std::vector<Cell> cells;
};

// Splits the convex ROI by every pixel-boundary ray of every camera and
// assigns each resulting cell the pixel signature of its centroid. Rays
// are half-lines from the camera centre; a ray whose supporting line
// crosses a cell only behind the camera does not split it. Throws
// NumericalError when a camera centre lies inside a cell (the ray would
// start mid-cell).
CellArrangement toy2d_partition(const std::vector<Camera2D>& cameras,
                                const Polygon2D& roi);

// Mean squared reconstruction error over the fully visible cells of the
// arrangement: per cell, reconstruct from the cell's pixel-centre
// observations (delta = half pitch) with the named algorithm, integrate
// ||Xhat - X||^2 exactly, and divide by the covered area. Algorithms:
// centroid, linear, linf-brute, l2-brute, consistent-min-l2. With
// drop_boundary_cells, cells touching the ROI boundary are excluded
// (the study's finite-cell filter).
double toy2d_expected_error(const std::string& algorithm,
                            const std::vector<Camera2D>& cameras,
                            const Polygon2D& roi,
                            bool drop_boundary_cells = false);

// Dense 2001x2001 grid search over the ROI bounding box followed by a
// pattern-search polish within one grid cell. norm is "l2" (sum of squared
// residuals) or "linf" (max |residual|). Ties break toward the
// lexicographically smallest grid point.
Vec2 toy2d_bruteforce_optimum(const std::vector<Observation2D>& obs,
                              const std::string& norm, const Polygon2D& roi);

// Grid search over consistent points only, minimizing ||X||. The grid is
// refined x4 once if no consistent grid point exists; the polish keeps the
// iterate consistent. Throws InfeasibleError when the refined grid still
// finds no consistent point.
Vec2 toy2d_consistent_min_l2(const std::vector<Observation2D>& obs,
                             double delta, const Polygon2D& roi);

struct Toy2dConfig {
  std::vector<int> m_schedule{2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24};
  int pixel_count{5};
  double pixel_pitch{0.4};
  double focal_length{1.0};
  // Cameras sit at x in [-span, span], y = 0, all looking along +y.
  double camera_span{1.0};
  // Clip box for the arrangement; cells touching it count as unbounded.
  double clip_halfwidth{10.0};
  double clip_depth{20.0};
  // Evaluation window: errors are integrated over this fixed box for every
  // M so the curves compare the same scene region across the schedule. The
  // box must be visible to the extreme cameras; the end cameras at +-span
  // appear at every M, so the cells covering it stay bounded throughout.
  double eval_halfwidth{0.45};
  double eval_depth_min{1.55};
  double eval_depth_max{2.35};
};

struct Toy2dRow {
  int m{0};
  int cell_count{0};
  double e_linear{0.0};
  double e_linf_brute{0.0};
  double e_l2_brute{0.0};
  double e_consistent_min_l2{0.0};
  double inconsistent_fraction_l2{0.0};
};

// Cameras of the study for one M (evenly spaced parallel array).
std::vector<Camera2D> toy2d_study_cameras(const Toy2dConfig& cfg, int m);

// Runs the 2-D study for every M in the schedule. The per-cell l2 and linf
// optima are computed by windowed/geometric equivalents of the brute-force
// searches (cross-checked in the tests). Errors integrate over the
// intersection of each cell with the evaluation window; cell_count is the
// number of overlapping cells and inconsistent_fraction_l2 the fraction of
// window area whose global l2 optimum leaves the observed cell.
std::vector<Toy2dRow> toy2d_study(const Toy2dConfig& cfg);

// Cell arrangement as a standalone SVG document.
std::string toy2d_svg(const CellArrangement& arr, const Polygon2D& roi);

}  // namespace ctri
