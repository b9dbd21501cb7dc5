#include "ctri/toy2d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "ctri/errors.hpp"
#include "ctri/numerics.hpp"

namespace ctri {

namespace {

constexpr double kDepthEps = 1e-12;

Vec2 forward_dir(const Camera2D& cam) {
  return {std::cos(cam.angle), std::sin(cam.angle)};
}

Vec2 lateral_dir(const Camera2D& cam) {
  return {-std::sin(cam.angle), std::cos(cam.angle)};
}

double sensor_lo(const Camera2D& cam) {
  return -0.5 * cam.pixel_count * cam.pixel_pitch;
}

void validate_camera2d(const Camera2D& cam) {
  if (!std::isfinite(cam.centre.x) || !std::isfinite(cam.centre.y) ||
      !std::isfinite(cam.angle))
    throw ConfigError("camera pose must be finite");
  if (!(cam.f > 0.0) || !std::isfinite(cam.f))
    throw ConfigError("focal length must be positive");
  if (cam.pixel_count < 1) throw ConfigError("need at least one pixel");
  if (!(cam.pixel_pitch > 0.0) || !std::isfinite(cam.pixel_pitch))
    throw ConfigError("pixel pitch must be positive");
}

void validate_polygon(const Polygon2D& poly) {
  if (poly.size() < 3) throw ConfigError("polygon needs at least 3 vertices");
  for (const Vec2& v : poly)
    if (!std::isfinite(v.x) || !std::isfinite(v.y))
      throw ConfigError("polygon vertices must be finite");
  const std::size_t n = poly.size();
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2& c = poly[(i + 2) % n];
    const double turn =
        (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    if (turn < -1e-9) throw ConfigError("polygon must be convex and CCW");
    area2 += a.x * b.y - a.y * b.x;
  }
  if (area2 <= 1e-15) throw ConfigError("polygon must have positive area");
}

// Keeps {X : n.X <= c}. Intersection points are computed with the same
// expression on both sides of a split so shared chords match bit for bit.
Polygon2D clip_halfplane(const Polygon2D& poly, const Vec2& n, double c) {
  const double eps = 1e-12 * (1.0 + std::abs(c));
  Polygon2D out;
  const std::size_t m = poly.size();
  if (m == 0) return out;
  std::vector<double> s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = n.dot(poly[i]) - c;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (i + 1) % m;
    const bool in_i = s[i] <= eps;
    const bool in_j = s[j] <= eps;
    if (in_i) out.push_back(poly[i]);
    if (in_i != in_j) {
      const double w = s[i] / (s[i] - s[j]);
      out.push_back(poly[i] + (poly[j] - poly[i]) * w);
    }
  }
  Polygon2D dedup;
  for (const Vec2& v : out) {
    if (!dedup.empty()) {
      const Vec2 d = v - dedup.back();
      if (d.dot(d) < 1e-24) continue;
    }
    dedup.push_back(v);
  }
  while (dedup.size() > 1) {
    const Vec2 d = dedup.front() - dedup.back();
    if (d.dot(d) < 1e-24)
      dedup.pop_back();
    else
      break;
  }
  return dedup;
}

bool polygon_empty(const Polygon2D& poly) {
  return poly.size() < 3 || polygon_area(poly) < 1e-18;
}

struct Halfplane {
  Vec2 n;
  double c;
};

// |project2d(X) - x| <= gamma and positive depth, as two halfplanes
// through the camera centre. Behind the camera both inequalities fail
// for any gamma > 0, so no explicit depth constraint is needed.
void residual_halfplanes(const Observation2D& obs, double gamma,
                         std::vector<Halfplane>& out) {
  const Vec2 fd = forward_dir(obs.cam);
  const Vec2 gd = lateral_dir(obs.cam);
  const Vec2 n1 = gd * obs.cam.f - fd * (obs.x + gamma);
  const Vec2 n2 = fd * (obs.x - gamma) - gd * obs.cam.f;
  out.push_back({n1, n1.dot(obs.cam.centre)});
  out.push_back({n2, n2.dot(obs.cam.centre)});
}

Polygon2D feasible_polygon(const std::vector<Observation2D>& obs,
                           double gamma, const Polygon2D& universe) {
  std::vector<Halfplane> planes;
  planes.reserve(2 * obs.size());
  for (const Observation2D& o : obs) residual_halfplanes(o, gamma, planes);
  Polygon2D poly = universe;
  for (const Halfplane& h : planes) {
    poly = clip_halfplane(poly, h.n, h.c);
    if (polygon_empty(poly)) return {};
  }
  return poly;
}

double residual_cost_l2(const std::vector<Observation2D>& obs,
                        const Vec2& X) {
  double cost = 0.0;
  for (const Observation2D& o : obs) {
    if (depth2d(o.cam, X) <= kDepthEps)
      return std::numeric_limits<double>::infinity();
    const double r = project2d(o.cam, X) - o.x;
    cost += r * r;
  }
  return cost;
}

double residual_cost_linf(const std::vector<Observation2D>& obs,
                          const Vec2& X) {
  double cost = 0.0;
  for (const Observation2D& o : obs) {
    if (depth2d(o.cam, X) <= kDepthEps)
      return std::numeric_limits<double>::infinity();
    cost = std::max(cost, std::abs(project2d(o.cam, X) - o.x));
  }
  return cost;
}

// Homogeneous midpoint of the back-projected rays: each observation gives
// a line a.X = a.C with a = x*fwd - f*lat, stacked into a 3-column system
// solved for the smallest eigenvector. Rows are scaled to unit normal so
// each contributes its point-to-ray distance rather than an
// observation-dependent multiple of it.
Vec2 linear2d(const std::vector<Observation2D>& obs) {
  double S[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
  for (const Observation2D& o : obs) {
    Vec2 a = forward_dir(o.cam) * o.x - lateral_dir(o.cam) * o.cam.f;
    const double len = a.norm();
    if (len <= 1e-300) throw NumericalError("degenerate ray direction");
    a = a * (1.0 / len);
    const double row[3] = {a.x, a.y, -a.dot(o.cam.centre)};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) S[3 * i + j] += row[i] * row[j];
  }
  Mat A(3, 3);
  for (int i = 0; i < 9; ++i) A.data[i] = S[i];
  std::vector<double> eigenvalues;
  Mat vecs(0, 0);
  symmetric_eigen(A, eigenvalues, vecs);
  const double lead = std::max(eigenvalues[2], 1e-30);
  if (eigenvalues[1] <= 1e-12 * lead)
    throw NumericalError("ray system has a degenerate direction");
  const double vx = vecs(0, 0), vy = vecs(1, 0), vw = vecs(2, 0);
  if (std::abs(vw) <= 1e-12)
    throw NumericalError("ray midpoint lies at infinity");
  return {vx / vw, vy / vw};
}

// Damped Gauss-Newton on the image residuals; stays in front of every
// camera and never increases the cost.
Vec2 gauss_newton2d(const std::vector<Observation2D>& obs, Vec2 X) {
  double cost = residual_cost_l2(obs, X);
  if (!std::isfinite(cost)) return X;
  for (int iter = 0; iter < 80; ++iter) {
    double a = 0.0, b = 0.0, d = 0.0, gx = 0.0, gy = 0.0;
    for (const Observation2D& o : obs) {
      const Vec2 fd = forward_dir(o.cam);
      const Vec2 gd = lateral_dir(o.cam);
      const Vec2 rel = X - o.cam.centre;
      const double h = fd.dot(rel);
      const double g = gd.dot(rel);
      const double r = o.cam.f * g / h - o.x;
      const Vec2 J = (gd * h - fd * g) * (o.cam.f / (h * h));
      a += J.x * J.x;
      b += J.x * J.y;
      d += J.y * J.y;
      gx += J.x * r;
      gy += J.y * r;
    }
    const double det = a * d - b * b;
    if (std::abs(det) < 1e-300) break;
    Vec2 step{(-gx * d + gy * b) / det, (gx * b - gy * a) / det};
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < 25; ++h) {
      const Vec2 trial = X + step * alpha;
      bool front = true;
      for (const Observation2D& o : obs)
        if (depth2d(o.cam, trial) <= 1e-9) {
          front = false;
          break;
        }
      if (front) {
        const double trial_cost = residual_cost_l2(obs, trial);
        if (trial_cost < cost) {
          X = trial;
          cost = trial_cost;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    if (step.norm() * alpha < 1e-12) break;
  }
  return X;
}

// Exact minimax point: bisection on the residual bound, testing emptiness
// of the halfplane intersection inside the universe polygon.
Vec2 exact_linf(const std::vector<Observation2D>& obs, const Vec2& start,
                const Polygon2D& universe) {
  double hi = residual_cost_linf(obs, start);
  if (!std::isfinite(hi)) throw NumericalError("minimax start behind camera");
  hi = std::max(hi, 1e-15);
  double lo = 0.0;
  Vec2 best = start;
  for (int iter = 0; iter < 80; ++iter) {
    if (hi - lo <= 1e-13 * (1.0 + hi)) break;
    const double mid = 0.5 * (lo + hi);
    const Polygon2D poly = feasible_polygon(obs, mid, universe);
    if (polygon_empty(poly)) {
      lo = mid;
    } else {
      hi = mid;
      best = polygon_centroid(poly);
    }
  }
  return best;
}

// Global least-squares point. Any point with cost <= C lies inside the
// residual polygon at gamma = sqrt(C), so a grid over that window plus
// Gauss-Newton polish brackets the global optimum.
Vec2 windowed_l2(const std::vector<Observation2D>& obs, const Vec2& start,
                 const Polygon2D& universe) {
  Vec2 best = gauss_newton2d(obs, start);
  double best_cost = residual_cost_l2(obs, best);
  if (residual_cost_l2(obs, start) < best_cost) {
    best = start;
    best_cost = residual_cost_l2(obs, start);
  }
  const double gamma = std::sqrt(best_cost) * 1.0000001 + 1e-15;
  const Polygon2D window = feasible_polygon(obs, gamma, universe);
  if (!polygon_empty(window)) {
    double x0 = window[0].x, x1 = window[0].x;
    double y0 = window[0].y, y1 = window[0].y;
    for (const Vec2& v : window) {
      x0 = std::min(x0, v.x);
      x1 = std::max(x1, v.x);
      y0 = std::min(y0, v.y);
      y1 = std::max(y1, v.y);
    }
    constexpr int kGrid = 61;
    std::vector<Vec2> seeds;
    for (int i = 0; i < kGrid; ++i) {
      const double x = x0 + (x1 - x0) * i / (kGrid - 1);
      for (int j = 0; j < kGrid; ++j) {
        const double y = y0 + (y1 - y0) * j / (kGrid - 1);
        const Vec2 p{x, y};
        const double c = residual_cost_l2(obs, p);
        if (c < best_cost + 1e-12) seeds.push_back(p);
      }
    }
    std::sort(seeds.begin(), seeds.end(), [&](const Vec2& p, const Vec2& q) {
      return residual_cost_l2(obs, p) < residual_cost_l2(obs, q);
    });
    if (seeds.size() > 3) seeds.resize(3);
    for (const Vec2& s : seeds) {
      const Vec2 cand = gauss_newton2d(obs, s);
      const double c = residual_cost_l2(obs, cand);
      if (c < best_cost) {
        best = cand;
        best_cost = c;
      }
    }
  }
  return best;
}

// Closest point of a convex polygon to the origin.
Vec2 project_origin(const Polygon2D& poly) {
  const std::size_t n = poly.size();
  bool inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const double side = (b.x - a.x) * (-a.y) - (b.y - a.y) * (-a.x);
    if (side < 0.0) {
      inside = false;
      break;
    }
  }
  if (inside) return {0.0, 0.0};
  Vec2 best = poly[0];
  double best_d = best.dot(best);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double len2 = e.dot(e);
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(-a.dot(e) / len2, 0.0, 1.0);
    const Vec2 p = a + e * t;
    const double d = p.dot(p);
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return best;
}

struct SplitResult {
  Polygon2D neg;
  Polygon2D pos;
  bool split{false};
};

// Splits a cell by the pixel-boundary ray from C along d. The supporting
// line only counts where it runs in front of the camera; a chord entirely
// behind leaves the cell alone, and a chord that crosses depth zero
// strictly inside the cell is rejected.
SplitResult split_by_ray(const Polygon2D& poly, const Vec2& C,
                         const Vec2& d, const Vec2& fwd) {
  SplitResult res;
  const std::size_t n = poly.size();
  double smin = std::numeric_limits<double>::infinity();
  double smax = -smin;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 rel = poly[i] - C;
    s[i] = d.x * rel.y - d.y * rel.x;
    smin = std::min(smin, s[i]);
    smax = std::max(smax, s[i]);
  }
  const double eps = 1e-9;
  if (smin >= -eps || smax <= eps) return res;
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -tmin;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if ((s[i] > 0.0) == (s[j] > 0.0)) continue;
    const double w = s[i] / (s[i] - s[j]);
    const Vec2 p = poly[i] + (poly[j] - poly[i]) * w;
    const double t = fwd.dot(p - C);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (tmax <= eps) return res;
  if (tmin < -eps)
    throw NumericalError("pixel ray starts inside a cell");
  const Vec2 ncut{-d.y, d.x};
  const double c = ncut.dot(C);
  Polygon2D neg = clip_halfplane(poly, ncut, c);
  Polygon2D pos = clip_halfplane(poly, ncut * -1.0, -c);
  if (polygon_empty(neg) || polygon_empty(pos)) return res;
  res.neg = std::move(neg);
  res.pos = std::move(pos);
  res.split = true;
  return res;
}

bool on_polygon_boundary(const Vec2& p, const Polygon2D& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Vec2 e = b - a;
    const double len2 = e.dot(e);
    if (len2 <= 0.0) continue;
    const double t = std::clamp((p - a).dot(e) / len2, 0.0, 1.0);
    const Vec2 q = a + e * t;
    if ((p - q).norm() <= 1e-9) return true;
  }
  return false;
}

std::vector<Observation2D> cell_observations(
    const std::vector<Camera2D>& cameras, const std::vector<int>& signature) {
  std::vector<Observation2D> obs;
  obs.reserve(cameras.size());
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const Camera2D& cam = cameras[i];
    const double centre =
        sensor_lo(cam) + (signature[i] + 0.5) * cam.pixel_pitch;
    obs.push_back({cam, centre});
  }
  return obs;
}

Vec2 reconstruct_cell(const std::string& algorithm,
                      const std::vector<Observation2D>& obs, double delta,
                      const Cell& cell, const Polygon2D& universe) {
  const Vec2 centroid = polygon_centroid(cell.poly);
  if (algorithm == "centroid") return centroid;
  if (algorithm == "linear") return linear2d(obs);
  if (algorithm == "linf-brute") return exact_linf(obs, centroid, universe);
  if (algorithm == "l2-brute") return windowed_l2(obs, centroid, universe);
  if (algorithm == "consistent-min-l2") {
    (void)delta;
    return project_origin(cell.poly);
  }
  throw ConfigError("unknown 2-D algorithm: " + algorithm);
}

Polygon2D bounding_box_polygon(const Polygon2D& poly) {
  double x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
  for (const Vec2& v : poly) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

}  // namespace

double depth2d(const Camera2D& cam, const Vec2& X) {
  return forward_dir(cam).dot(X - cam.centre);
}

double project2d(const Camera2D& cam, const Vec2& X) {
  const Vec2 rel = X - cam.centre;
  const double h = forward_dir(cam).dot(rel);
  if (std::abs(h) <= kDepthEps)
    throw NumericalError("point projects from the camera plane");
  return cam.f * lateral_dir(cam).dot(rel) / h;
}

int pixel_index(const Camera2D& cam, const Vec2& X) {
  if (depth2d(cam, X) <= kDepthEps) return -1;
  const double u = project2d(cam, X);
  const double k = std::floor((u - sensor_lo(cam)) / cam.pixel_pitch);
  if (k < 0.0 || k >= static_cast<double>(cam.pixel_count)) return -1;
  return static_cast<int>(k);
}

bool in_consistent_region_2d(const Vec2& X,
                             const std::vector<Observation2D>& obs,
                             double delta) {
  for (const Observation2D& o : obs) {
    if (depth2d(o.cam, X) <= kDepthEps) return false;
    if (std::abs(project2d(o.cam, X) - o.x) > delta + 1e-12) return false;
  }
  return true;
}

double polygon_area(const Polygon2D& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    area2 += a.x * b.y - a.y * b.x;
  }
  return 0.5 * area2;
}

// Works in coordinates relative to the vertex mean: the cross products of
// a thin sliver otherwise cancel catastrophically and the quotient is
// garbage, placing the centroid far outside the polygon.
Vec2 polygon_centroid(const Polygon2D& poly) {
  const std::size_t n = poly.size();
  if (n == 0) throw ConfigError("empty polygon has no centroid");
  Vec2 mean{0.0, 0.0};
  for (const Vec2& v : poly) mean = mean + v;
  mean = mean * (1.0 / static_cast<double>(n));
  double area2 = 0.0;
  double cx = 0.0, cy = 0.0;
  double scale2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i] - mean;
    const Vec2 b = poly[(i + 1) % n] - mean;
    const double w = a.x * b.y - a.y * b.x;
    area2 += w;
    cx += (a.x + b.x) * w;
    cy += (a.y + b.y) * w;
    scale2 = std::max(scale2, std::max(a.dot(a), b.dot(b)));
  }
  if (std::abs(area2) <= 1e-14 * scale2) return mean;
  return {mean.x + cx / (3.0 * area2), mean.y + cy / (3.0 * area2)};
}

double polygon_second_moment(const Polygon2D& poly, const Vec2& P) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 u = poly[i] - P;
    const Vec2 v = poly[(i + 1) % n] - P;
    const double cross = u.x * v.y - u.y * v.x;
    total += cross * (u.dot(u) + u.dot(v) + v.dot(v)) / 12.0;
  }
  return total;
}

CellArrangement toy2d_partition(const std::vector<Camera2D>& cameras,
                                const Polygon2D& roi) {
  if (cameras.empty()) throw ConfigError("need at least one camera");
  for (const Camera2D& cam : cameras) validate_camera2d(cam);
  validate_polygon(roi);

  std::vector<Polygon2D> cells{roi};
  for (const Camera2D& cam : cameras) {
    const Vec2 fwd = forward_dir(cam);
    const Vec2 lat = lateral_dir(cam);
    const double lo = sensor_lo(cam);
    for (int j = 0; j <= cam.pixel_count; ++j) {
      const double u = lo + j * cam.pixel_pitch;
      const Vec2 d = fwd + lat * (u / cam.f);
      std::vector<Polygon2D> next;
      next.reserve(cells.size() + 8);
      for (const Polygon2D& cell : cells) {
        SplitResult res = split_by_ray(cell, cam.centre, d, fwd);
        if (!res.split) {
          next.push_back(cell);
        } else {
          next.push_back(std::move(res.neg));
          next.push_back(std::move(res.pos));
        }
      }
      cells = std::move(next);
    }
  }

  CellArrangement arr;
  arr.cells.reserve(cells.size());
  for (Polygon2D& poly : cells) {
    Cell cell;
    const Vec2 centroid = polygon_centroid(poly);
    cell.signature.reserve(cameras.size());
    for (const Camera2D& cam : cameras)
      cell.signature.push_back(pixel_index(cam, centroid));
    for (const Vec2& v : poly)
      if (on_polygon_boundary(v, roi)) {
        cell.touches_boundary = true;
        break;
      }
    cell.poly = std::move(poly);
    arr.cells.push_back(std::move(cell));
  }
  return arr;
}

double toy2d_expected_error(const std::string& algorithm,
                            const std::vector<Camera2D>& cameras,
                            const Polygon2D& roi,
                            bool drop_boundary_cells) {
  const CellArrangement arr = toy2d_partition(cameras, roi);
  const Polygon2D universe = bounding_box_polygon(roi);
  double total = 0.0;
  double area = 0.0;
  bool any = false;
  for (const Cell& cell : arr.cells) {
    bool visible = true;
    for (int k : cell.signature)
      if (k < 0) {
        visible = false;
        break;
      }
    if (!visible) continue;
    if (drop_boundary_cells && cell.touches_boundary) continue;
    any = true;
    const std::vector<Observation2D> obs =
        cell_observations(cameras, cell.signature);
    const double delta = 0.5 * cameras.front().pixel_pitch;
    const Vec2 Xhat = reconstruct_cell(algorithm, obs, delta, cell, universe);
    total += polygon_second_moment(cell.poly, Xhat);
    area += polygon_area(cell.poly);
  }
  if (!any) throw ConfigError("no fully visible cells in the ROI");
  return total / area;
}

Vec2 toy2d_bruteforce_optimum(const std::vector<Observation2D>& obs,
                              const std::string& norm, const Polygon2D& roi) {
  if (obs.empty()) throw ConfigError("need at least one observation");
  for (const Observation2D& o : obs) validate_camera2d(o.cam);
  validate_polygon(roi);
  const bool use_l2 = norm == "l2";
  if (!use_l2 && norm != "linf")
    throw ConfigError("norm must be l2 or linf");
  const auto cost = [&](const Vec2& X) {
    return use_l2 ? residual_cost_l2(obs, X) : residual_cost_linf(obs, X);
  };

  const Polygon2D box = bounding_box_polygon(roi);
  const double x0 = box[0].x, x1 = box[1].x, y0 = box[0].y, y1 = box[2].y;
  constexpr int kGrid = 2001;
  const double hx = (x1 - x0) / (kGrid - 1);
  const double hy = (y1 - y0) / (kGrid - 1);
  Vec2 best{x0, y0};
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double x = x0 + i * hx;
    for (int j = 0; j < kGrid; ++j) {
      const Vec2 p{x, y0 + j * hy};
      const double c = cost(p);
      if (c < best_cost) {
        best_cost = c;
        best = p;
      }
    }
  }
  if (!std::isfinite(best_cost))
    throw NumericalError("no grid point lies in front of every camera");

  const double lo_x = std::max(x0, best.x - hx);
  const double hi_x = std::min(x1, best.x + hx);
  const double lo_y = std::max(y0, best.y - hy);
  const double hi_y = std::min(y1, best.y + hy);
  double step = 0.5 * std::max(hx, hy);
  if (step <= 0.0) step = 1e-9;
  while (step > 1e-10) {
    bool moved = false;
    const Vec2 moves[4] = {{step, 0.0}, {-step, 0.0}, {0.0, step},
                           {0.0, -step}};
    for (const Vec2& mv : moves) {
      Vec2 trial = best + mv;
      trial.x = std::clamp(trial.x, lo_x, hi_x);
      trial.y = std::clamp(trial.y, lo_y, hi_y);
      const double c = cost(trial);
      if (c < best_cost) {
        best_cost = c;
        best = trial;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

Vec2 toy2d_consistent_min_l2(const std::vector<Observation2D>& obs,
                             double delta, const Polygon2D& roi) {
  if (obs.empty()) throw ConfigError("need at least one observation");
  for (const Observation2D& o : obs) validate_camera2d(o.cam);
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw ConfigError("delta must be nonnegative");
  validate_polygon(roi);

  const Polygon2D box = bounding_box_polygon(roi);
  const double x0 = box[0].x, x1 = box[1].x, y0 = box[0].y, y1 = box[2].y;
  Vec2 best{0.0, 0.0};
  double best_norm = std::numeric_limits<double>::infinity();
  double hx = 0.0, hy = 0.0;
  for (int refine = 0; refine < 2 && !std::isfinite(best_norm); ++refine) {
    const int grid = refine == 0 ? 2001 : 8001;
    hx = (x1 - x0) / (grid - 1);
    hy = (y1 - y0) / (grid - 1);
    for (int i = 0; i < grid; ++i) {
      const double x = x0 + i * hx;
      for (int j = 0; j < grid; ++j) {
        const Vec2 p{x, y0 + j * hy};
        if (!in_consistent_region_2d(p, obs, delta)) continue;
        const double n = p.norm();
        if (n < best_norm) {
          best_norm = n;
          best = p;
        }
      }
    }
  }
  if (!std::isfinite(best_norm))
    throw InfeasibleError("no consistent grid point in the ROI");

  double step = 0.5 * std::max(hx, hy);
  if (step <= 0.0) step = 1e-9;
  while (step > 1e-10) {
    bool moved = false;
    const Vec2 moves[4] = {{step, 0.0}, {-step, 0.0}, {0.0, step},
                           {0.0, -step}};
    for (const Vec2& mv : moves) {
      const Vec2 trial = best + mv;
      if (!in_consistent_region_2d(trial, obs, delta)) continue;
      const double n = trial.norm();
      if (n < best_norm) {
        best_norm = n;
        best = trial;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

std::vector<Camera2D> toy2d_study_cameras(const Toy2dConfig& cfg, int m) {
  if (m < 2) throw ConfigError("study needs at least two cameras");
  if (!(cfg.camera_span > 0.0) || !(cfg.focal_length > 0.0) ||
      !(cfg.pixel_pitch > 0.0) || cfg.pixel_count < 1)
    throw ConfigError("invalid study geometry");
  std::vector<Camera2D> cams;
  cams.reserve(m);
  for (int k = 0; k < m; ++k) {
    Camera2D cam;
    cam.centre = {-cfg.camera_span +
                      2.0 * cfg.camera_span * k / (m - 1),
                  0.0};
    cam.angle = 0.5 * 3.14159265358979323846;
    cam.f = cfg.focal_length;
    cam.pixel_count = cfg.pixel_count;
    cam.pixel_pitch = cfg.pixel_pitch;
    cams.push_back(cam);
  }
  return cams;
}

std::vector<Toy2dRow> toy2d_study(const Toy2dConfig& cfg) {
  if (cfg.m_schedule.empty()) throw ConfigError("empty camera schedule");
  for (std::size_t i = 1; i < cfg.m_schedule.size(); ++i)
    if (cfg.m_schedule[i] <= cfg.m_schedule[i - 1])
      throw ConfigError("camera schedule must increase");
  const double W = cfg.clip_halfwidth;
  const Polygon2D clip{{-W, 0.01}, {W, 0.01}, {W, 0.01 + cfg.clip_depth},
                       {-W, 0.01 + cfg.clip_depth}};
  const Polygon2D universe = bounding_box_polygon(clip);

  const double ew = cfg.eval_halfwidth;
  const double ey0 = cfg.eval_depth_min;
  const double ey1 = cfg.eval_depth_max;
  if (!(ew > 0.0) || !(ey0 < ey1))
    throw ConfigError("invalid evaluation window");
  if (ew > W || ey0 < 0.01 || ey1 > 0.01 + cfg.clip_depth)
    throw ConfigError("evaluation window must lie inside the clip box");
  const double tan_half =
      0.5 * cfg.pixel_count * cfg.pixel_pitch / cfg.focal_length;
  if (ey0 * tan_half < ew + cfg.camera_span - 1e-12)
    throw ConfigError("evaluation window not visible to the end cameras");

  std::vector<Toy2dRow> rows;
  rows.reserve(cfg.m_schedule.size());
  for (int m : cfg.m_schedule) {
    const std::vector<Camera2D> cams = toy2d_study_cameras(cfg, m);
    const CellArrangement arr = toy2d_partition(cams, clip);
    const double delta = 0.5 * cfg.pixel_pitch;

    Toy2dRow row;
    row.m = m;
    double area = 0.0;
    double sum_linear = 0.0, sum_linf = 0.0, sum_l2 = 0.0, sum_cml2 = 0.0;
    double inconsistent_area = 0.0;
    for (const Cell& cell : arr.cells) {
      Polygon2D w = clip_halfplane(cell.poly, {1.0, 0.0}, ew);
      w = clip_halfplane(w, {-1.0, 0.0}, ew);
      w = clip_halfplane(w, {0.0, 1.0}, ey1);
      w = clip_halfplane(w, {0.0, -1.0}, -ey0);
      if (polygon_empty(w)) continue;
      bool visible = true;
      for (int k : cell.signature)
        if (k < 0) {
          visible = false;
          break;
        }
      if (!visible)
        throw NumericalError("evaluation window sees a blind cell at M=" +
                             std::to_string(m));
      ++row.cell_count;
      const double a = polygon_area(w);
      area += a;
      const std::vector<Observation2D> obs =
          cell_observations(cams, cell.signature);
      const Vec2 centroid = polygon_centroid(cell.poly);

      const Vec2 x_linear = linear2d(obs);
      const Vec2 x_linf = exact_linf(obs, centroid, universe);
      const Vec2 x_l2 = windowed_l2(obs, centroid, universe);
      const Vec2 x_cml2 = project_origin(cell.poly);

      sum_linear += polygon_second_moment(w, x_linear);
      sum_linf += polygon_second_moment(w, x_linf);
      sum_l2 += polygon_second_moment(w, x_l2);
      sum_cml2 += polygon_second_moment(w, x_cml2);
      if (!in_consistent_region_2d(x_l2, obs, delta)) inconsistent_area += a;
    }
    if (row.cell_count == 0)
      throw NumericalError("no cells overlap the evaluation window at M=" +
                           std::to_string(m));
    row.e_linear = sum_linear / area;
    row.e_linf_brute = sum_linf / area;
    row.e_l2_brute = sum_l2 / area;
    row.e_consistent_min_l2 = sum_cml2 / area;
    row.inconsistent_fraction_l2 = inconsistent_area / area;
    rows.push_back(row);
  }
  return rows;
}

std::string toy2d_svg(const CellArrangement& arr, const Polygon2D& roi) {
  validate_polygon(roi);
  double x0 = roi[0].x, x1 = roi[0].x, y0 = roi[0].y, y1 = roi[0].y;
  for (const Vec2& v : roi) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  const double w = x1 - x0;
  const double h = y1 - y0;
  const double stroke = 0.002 * std::max(w, h);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 << " "
      << -y1 << " " << w << " " << h << "\">\n";
  const auto emit = [&](const Polygon2D& poly, const char* fill,
                        const char* stroke_color) {
    out << "  <polygon points=\"";
    for (std::size_t i = 0; i < poly.size(); ++i) {
      if (i) out << ' ';
      out << poly[i].x << ',' << -poly[i].y;
    }
    out << "\" fill=\"" << fill << "\" stroke=\"" << stroke_color
        << "\" stroke-width=\"" << stroke << "\"/>\n";
  };
  for (const Cell& cell : arr.cells) {
    bool visible = true;
    for (int k : cell.signature)
      if (k < 0) {
        visible = false;
        break;
      }
    const bool kept = visible && !cell.touches_boundary;
    emit(cell.poly, kept ? "#cfe3f5" : "none", "#555555");
  }
  emit(roi, "none", "#000000");
  out << "</svg>\n";
  return out.str();
}

}  // namespace ctri
