#include "ctri/triangulators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "ctri/errors.hpp"

namespace ctri {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

std::vector<double> shift_rhs(const Mat& A, const std::vector<double>& b,
                              const Vec3& x0) {
  std::vector<double> out(b.size());
  for (std::size_t r = 0; r < A.rows; ++r)
    out[r] = b[r] - (A(r, 0) * x0.x + A(r, 1) * x0.y + A(r, 2) * x0.z);
  return out;
}

}  // namespace

double l2_cost(const Instance& inst, const WorldPoint& X) {
  double total = 0.0;
  for (const Observation& obs : inst.observations) {
    double w = obs.cam.depth(X);
    if (w <= 1e-12) return kInf;
    Vec2 r = project(obs.cam, X) - obs.x;
    total += r.dot(r);
  }
  return total;
}

double max_residual(const Instance& inst, const WorldPoint& X, int p_prime) {
  double worst = 0.0;
  for (const Observation& obs : inst.observations) {
    double w = obs.cam.depth(X);
    if (w <= 1e-12) return kInf;
    worst = std::max(worst, image_norm(project(obs.cam, X) - obs.x, p_prime));
  }
  return worst;
}

TriangulationResult triangulate_linear(const Instance& inst) {
  validate(inst);
  const auto& obs = inst.observations;
  const std::size_t M = obs.size();

  // One shared conditioning transform x -> s*(x - t) over all image points
  // (zero centroid, RMS radius sqrt(2)); cameras get the matching row
  // transform so the homogeneous solution is unchanged.
  Vec2 t{0.0, 0.0};
  for (const Observation& o : obs) t = t + o.x;
  t = t * (1.0 / static_cast<double>(M));
  double rms = 0.0;
  for (const Observation& o : obs) {
    Vec2 d = o.x - t;
    rms += d.dot(d);
  }
  rms = std::sqrt(rms / static_cast<double>(M));
  double s = rms > 1e-15 ? std::sqrt(2.0) / rms : 1.0;

  // World-side conditioning: solve in coordinates where the camera centres
  // have zero centroid and unit RMS radius. This makes the unit-norm
  // constraint on the homogeneous solution, and hence the argmin, commute
  // with similarity transforms of the scene.
  Vec3 w{0.0, 0.0, 0.0};
  for (const Observation& o : obs) w = w + o.cam.C;
  w = w * (1.0 / static_cast<double>(M));
  double wrms = 0.0;
  for (const Observation& o : obs) {
    Vec3 d = o.cam.C - w;
    wrms += d.dot(d);
  }
  wrms = std::sqrt(wrms / static_cast<double>(M));
  const double sigma = wrms > 1e-12 ? wrms : 1.0;

  Mat A(2 * M, 4);
  for (std::size_t i = 0; i < M; ++i) {
    const Mat34& P = obs[i].cam.P;
    double xs = s * (obs[i].x.x - t.x);
    double ys = s * (obs[i].x.y - t.y);
    for (int j = 0; j < 4; ++j) {
      // Last column of the recentred camera: the left 3x3 block is K R and
      // the centre moves to (C - w) / sigma.
      double pj = j < 3 ? P(2, j)
                        : (P(2, 3) + P(2, 0) * w.x + P(2, 1) * w.y +
                           P(2, 2) * w.z) /
                              sigma;
      double p1 = j < 3 ? P(0, j)
                        : (P(0, 3) + P(0, 0) * w.x + P(0, 1) * w.y +
                           P(0, 2) * w.z) /
                              sigma;
      double p2 = j < 3 ? P(1, j)
                        : (P(1, 3) + P(1, 0) * w.x + P(1, 1) * w.y +
                           P(1, 2) * w.z) /
                              sigma;
      double q1 = s * (p1 - t.x * pj);
      double q2 = s * (p2 - t.y * pj);
      A(2 * i, j) = xs * pj - q1;
      A(2 * i + 1, j) = ys * pj - q2;
    }
  }

  std::vector<double> v = nullspace_min(A);
  if (std::abs(v[3]) <= 1e-12)
    throw NumericalError(
        "triangulate_linear: solution at infinity (homogeneous scale " +
        std::to_string(v[3]) + ")");

  TriangulationResult res;
  res.X = {sigma * v[0] / v[3] + w.x, sigma * v[1] / v[3] + w.y,
           sigma * v[2] / v[3] + w.z};
  res.algorithm = "linear";
  res.consistent = in_consistent_region(res.X, inst);
  return res;
}

TriangulationResult triangulate_l2_refine(const Instance& inst,
                                          const WorldPoint& init) {
  validate(inst);
  for (const Observation& obs : inst.observations)
    if (!cheirality(obs.cam, init))
      throw ConfigError(
          "triangulate_l2_refine: init must have positive depth in every "
          "camera");

  const auto& obs = inst.observations;
  const std::size_t M = obs.size();

  WorldPoint X = init;
  double cost = l2_cost(inst, X);
  int iter = 0;
  bool converged = true;

  Mat J(2 * M, 3);
  std::vector<double> r(2 * M);
  for (iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < M; ++i) {
      const Mat34& P = obs[i].cam.P;
      Vec3 p1 = P.dir(0), p2 = P.dir(1), p3 = P.dir(2);
      double u = p1.dot(X) + P.off(0);
      double v = p2.dot(X) + P.off(1);
      double w = p3.dot(X) + P.off(2);
      r[2 * i] = u / w - obs[i].x.x;
      r[2 * i + 1] = v / w - obs[i].x.y;
      Vec3 ju = (p1 * w - p3 * u) * (1.0 / (w * w));
      Vec3 jv = (p2 * w - p3 * v) * (1.0 / (w * w));
      J(2 * i, 0) = ju.x;
      J(2 * i, 1) = ju.y;
      J(2 * i, 2) = ju.z;
      J(2 * i + 1, 0) = jv.x;
      J(2 * i + 1, 1) = jv.y;
      J(2 * i + 1, 2) = jv.z;
    }

    std::vector<double> step;
    try {
      step = least_squares(J, r);
    } catch (const NumericalError&) {
      converged = false;
      break;
    }
    Vec3 s{step[0], step[1], step[2]};
    if (s.norm() < 1e-12) break;

    bool accepted = false;
    double scale = 1.0;
    for (int h = 0; h <= 25; ++h) {
      WorldPoint Xn = X + s * scale;
      bool front = true;
      for (const Observation& o : obs)
        if (!cheirality(o.cam, Xn)) {
          front = false;
          break;
        }
      if (front) {
        double cn = l2_cost(inst, Xn);
        if (cn < cost) {
          X = Xn;
          cost = cn;
          accepted = true;
          break;
        }
      }
      scale *= 0.5;
    }
    if (!accepted) {
      converged = false;
      break;
    }
  }

  TriangulationResult res;
  res.X = X;
  res.algorithm = "l2-refined";
  res.iterations = iter;
  res.objective = cost;
  res.has_objective = true;
  res.consistent = in_consistent_region(X, inst);
  res.converged = converged;
  return res;
}

ConstraintSystem build_consistency_lp(const Instance& inst) {
  validate(inst);
  if (inst.noise.q != kInfNorm)
    throw ConfigError("build_consistency_lp: only square (q=inf) noise "
                      "yields half-space constraints");

  const auto& obs = inst.observations;
  const std::size_t M = obs.size();
  const double d = inst.noise.delta;

  ConstraintSystem sys;
  sys.A = Mat(4 * M, 3);
  sys.b.assign(4 * M, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    const Mat34& P = obs[i].cam.P;
    Vec3 p1 = P.dir(0), p2 = P.dir(1), p3 = P.dir(2);
    double o1 = P.off(0), o2 = P.off(1), o3 = P.off(2);
    double xlo = obs[i].x.x - d, xhi = obs[i].x.x + d;
    double ylo = obs[i].x.y - d, yhi = obs[i].x.y + d;

    Vec3 rows[4] = {p3 * xlo - p1, p3 * ylo - p2, p1 - p3 * xhi,
                    p2 - p3 * yhi};
    double rhs[4] = {o1 - xlo * o3, o2 - ylo * o3, xhi * o3 - o1,
                     yhi * o3 - o2};
    for (int k = 0; k < 4; ++k) {
      sys.A(4 * i + k, 0) = rows[k].x;
      sys.A(4 * i + k, 1) = rows[k].y;
      sys.A(4 * i + k, 2) = rows[k].z;
      sys.b[4 * i + k] = rhs[k];
    }
  }
  return sys;
}

TriangulationResult triangulate_consistent_lp(const Instance& inst,
                                              const Vec3& c) {
  ConstraintSystem sys = build_consistency_lp(inst);

  // Warm start: translate coordinates by a cheap initial estimate so the
  // right-hand side is mostly nonnegative and phase one has little to do.
  Vec3 x0{0.0, 0.0, 0.0};
  try {
    x0 = triangulate_linear(inst).X;
  } catch (const Error&) {
    x0 = {0.0, 0.0, 0.0};
  }

  LpResult lp = solve_lp({c.x, c.y, c.z}, sys.A, shift_rhs(sys.A, sys.b, x0));
  if (lp.status == LpStatus::Infeasible)
    throw InfeasibleError(
        "triangulate_consistent_lp: consistent region is empty");
  if (lp.status == LpStatus::Unbounded)
    throw NumericalError(
        "triangulate_consistent_lp: objective unbounded over the consistent "
        "region");

  TriangulationResult res;
  res.X = x0 + to_vec3(lp.x);
  res.algorithm = "consistent-lp";
  res.objective = c.dot(res.X);
  res.has_objective = true;
  res.consistent = in_consistent_region(res.X, inst);
  return res;
}

namespace {

// Copy of a recentered system with unit-norm rows and an O(1) right-hand
// side, so the simplex tolerances sit far below the data no matter how
// tight the noise bound is. The feasible set maps back as X = s * Xs.
struct ScaledSystem {
  Mat A;
  std::vector<double> b;
  double s{1.0};
};

ScaledSystem scale_system(const Mat& A, const std::vector<double>& b) {
  ScaledSystem out;
  out.A = Mat(A.rows, 3);
  out.b.resize(A.rows);
  for (std::size_t r = 0; r < A.rows; ++r) {
    const double nrm = std::sqrt(A(r, 0) * A(r, 0) + A(r, 1) * A(r, 1) +
                                 A(r, 2) * A(r, 2));
    if (nrm <= 1e-300)
      throw NumericalError("scale_system: zero constraint row");
    out.A(r, 0) = A(r, 0) / nrm;
    out.A(r, 1) = A(r, 1) / nrm;
    out.A(r, 2) = A(r, 2) / nrm;
    out.b[r] = b[r] / nrm;
  }
  double span = 0.0;
  for (double v : out.b) span = std::max(span, std::abs(v));
  out.s = span > 1e-12 ? span : 1.0;
  for (double& v : out.b) v /= out.s;
  return out;
}

// Indices of rows that are not implied by the others, assuming the origin
// is (near-)feasible for (A, b). Sequential standard test: row l is
// redundant iff max a_l.X over the remaining rows stays below b_l.
std::vector<std::size_t> nonredundant_rows(const Mat& A,
                                           const std::vector<double>& b) {
  const std::size_t m = A.rows;
  std::vector<char> kept(m, 1);
  std::vector<double> c(3), bs;
  for (std::size_t l = 0; l < m; ++l) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (kept[i] && i != l) ++k;
    if (k == 0) continue;
    Mat As(k, 3);
    bs.resize(k);
    std::size_t r = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!kept[i] || i == l) continue;
      As(r, 0) = A(i, 0);
      As(r, 1) = A(i, 1);
      As(r, 2) = A(i, 2);
      bs[r] = b[i];
      ++r;
    }
    for (int j = 0; j < 3; ++j) c[j] = -A(l, j);
    LpResult res = solve_lp(c, As, bs);
    if (res.status == LpStatus::Optimal && -res.objective <= b[l] + 1e-9)
      kept[l] = 0;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m; ++i)
    if (kept[i]) out.push_back(i);
  return out;
}

// Feasible point of A.X <= b, or nullopt. The optional hint recenters the
// solve so phase one is cheap when the hint is close to feasible.
std::optional<Vec3> feasible_point(const Mat& A, const std::vector<double>& b,
                                   const Vec3& hint) {
  const ScaledSystem sc = scale_system(A, shift_rhs(A, b, hint));
  LpResult lp = solve_lp({0.0, 0.0, 0.0}, sc.A, sc.b);
  if (lp.status != LpStatus::Optimal) return std::nullopt;
  const Vec3 xs = to_vec3(lp.x);
  return hint + Vec3{sc.s * xs.x, sc.s * xs.y, sc.s * xs.z};
}

}  // namespace

ConstraintSystem remove_redundant_constraints(const ConstraintSystem& sys) {
  if (sys.A.cols != 3 || sys.b.size() != sys.A.rows || sys.A.rows == 0)
    throw ConfigError("remove_redundant_constraints: malformed system");

  std::optional<Vec3> xf = feasible_point(sys.A, sys.b, {0.0, 0.0, 0.0});
  if (!xf)
    throw InfeasibleError("remove_redundant_constraints: infeasible system");

  const ScaledSystem sc =
      scale_system(sys.A, shift_rhs(sys.A, sys.b, *xf));
  std::vector<std::size_t> keep = nonredundant_rows(sc.A, sc.b);

  ConstraintSystem out;
  out.A = Mat(keep.size(), 3);
  out.b.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.A(r, 0) = sys.A(keep[r], 0);
    out.A(r, 1) = sys.A(keep[r], 1);
    out.A(r, 2) = sys.A(keep[r], 2);
    out.b[r] = sys.b[keep[r]];
  }
  return out;
}

TriangulationResult triangulate_avg_distance_lp(const Instance& inst) {
  ConstraintSystem sys = build_consistency_lp(inst);

  Vec3 hint{0.0, 0.0, 0.0};
  try {
    hint = triangulate_linear(inst).X;
  } catch (const Error&) {
    hint = {0.0, 0.0, 0.0};
  }
  TriangulationResult res = triangulate_avg_distance_lp(sys, hint);
  res.consistent = in_consistent_region(res.X, inst);
  return res;
}

TriangulationResult triangulate_avg_distance_lp(const ConstraintSystem& sys,
                                                const Vec3& hint) {
  if (sys.A.cols != 3 || sys.b.size() != sys.A.rows || sys.A.rows == 0)
    throw ConfigError("triangulate_avg_distance_lp: malformed system");

  std::optional<Vec3> xf = feasible_point(sys.A, sys.b, hint);
  if (!xf)
    throw InfeasibleError(
        "triangulate_avg_distance_lp: consistent region is empty");

  // Work in coordinates centered on the feasible point xf and scaled to
  // the region's own size, so the simplex tolerances stay far below the
  // data no matter how tight the bandwidth is.
  const ScaledSystem sc = scale_system(sys.A, shift_rhs(sys.A, sys.b, *xf));
  std::vector<std::size_t> keep = nonredundant_rows(sc.A, sc.b);
  const std::size_t mbar = keep.size();

  // Variables (Xs, tau): tau_l is the plane-l distance minus the distance
  // at xf, so the all-zero point is feasible and phase one is skipped.
  std::vector<double> t0(mbar);
  for (std::size_t l = 0; l < mbar; ++l) t0[l] = sc.b[keep[l]];

  const std::size_t n = 3 + mbar;
  Mat A2(3 * mbar, n);
  std::vector<double> b2(3 * mbar), c2(n, 0.0);
  for (std::size_t l = 0; l < mbar; ++l) {
    const double a0 = sc.A(keep[l], 0), a1 = sc.A(keep[l], 1),
                 a2 = sc.A(keep[l], 2);
    A2(l, 0) = a0;
    A2(l, 1) = a1;
    A2(l, 2) = a2;
    b2[l] = t0[l];

    const std::size_t r2 = mbar + 2 * l, r3 = mbar + 2 * l + 1;
    A2(r2, 0) = a0;
    A2(r2, 1) = a1;
    A2(r2, 2) = a2;
    A2(r2, 3 + l) = -1.0;
    b2[r2] = 2.0 * t0[l];
    A2(r3, 0) = -a0;
    A2(r3, 1) = -a1;
    A2(r3, 2) = -a2;
    A2(r3, 3 + l) = -1.0;
    b2[r3] = 0.0;
    c2[3 + l] = 1.0;
  }

  LpResult lp = solve_lp(c2, A2, b2);
  if (lp.status != LpStatus::Optimal)
    throw NumericalError(
        "triangulate_avg_distance_lp: auxiliary LP failed on a feasible "
        "region");

  // Accept the refined point only while it verifiably stays inside the
  // region; the certified feasible point is the fallback.
  Vec3 xs{lp.x[0], lp.x[1], lp.x[2]};
  double worst = 0.0;
  for (std::size_t r = 0; r < sc.A.rows; ++r)
    worst = std::max(worst, sc.A(r, 0) * xs.x + sc.A(r, 1) * xs.y +
                                sc.A(r, 2) * xs.z - sc.b[r]);
  double objective = lp.objective;
  for (std::size_t l = 0; l < mbar; ++l) objective += t0[l];
  if (worst > 1e-6) {
    xs = {0.0, 0.0, 0.0};
    objective = 0.0;
    for (std::size_t l = 0; l < mbar; ++l) objective += t0[l];
  }

  TriangulationResult res;
  res.X = *xf + Vec3{sc.s * xs.x, sc.s * xs.y, sc.s * xs.z};
  res.algorithm = "avg-distance-lp";
  res.objective = sc.s * objective;
  res.has_objective = true;
  res.consistent = true;
  return res;
}

namespace {

// Camera data for the l2 cone feasibility test. g is the observed ray
// direction in normalized camera coordinates.
struct ConeCam {
  Mat3 R;
  Vec3 C;
  double f;
  Vec2 g;
};

double cone_residual(const ConeCam& cc, const WorldPoint& X) {
  Vec3 z = cc.R.apply(X - cc.C);
  if (z.z <= 1e-12) return kInf;
  double d1 = z.x - cc.g.x * z.z;
  double d2 = z.y - cc.g.y * z.z;
  return cc.f * std::sqrt(d1 * d1 + d2 * d2) / z.z;
}

// Euclidean projection onto {X : ||pi(X) - x||_2 <= gamma}, an oblique
// circular cone with apex at the camera centre. Solved in camera
// coordinates via the KKT system (I + lambda*M) z = p with M the cone's
// quadratic form, root-finding on lambda (bracketed Newton).
WorldPoint project_to_cone(const ConeCam& cc, double gamma,
                           const WorldPoint& Xw) {
  Vec3 p = cc.R.apply(Xw - cc.C);
  double g1 = cc.g.x, g2 = cc.g.y;
  double alpha = gamma / cc.f;

  auto back = [&](const Vec3& z) { return cc.C + cc.R.apply_transposed(z); };

  if (alpha <= 1e-15) {
    // Degenerate aperture: the set is the observed ray.
    Vec3 ray{g1, g2, 1.0};
    double s = std::max(0.0, p.dot(ray) / ray.dot(ray));
    return back(ray * s);
  }

  double d1 = p.x - g1 * p.z, d2 = p.y - g2 * p.z;
  if (p.z >= 0.0 && std::sqrt(d1 * d1 + d2 * d2) <= alpha * p.z) return Xw;

  // M = D^T D - alpha^2 e3 e3^T for D z = (z1 - g1 z3, z2 - g2 z3).
  double m22 = g1 * g1 + g2 * g2 - alpha * alpha;
  Mat Msym(3, 3);
  Msym(0, 0) = 1.0;
  Msym(1, 1) = 1.0;
  Msym(0, 2) = -g1;
  Msym(2, 0) = -g1;
  Msym(1, 2) = -g2;
  Msym(2, 1) = -g2;
  Msym(2, 2) = m22;

  std::vector<double> mu;
  Mat Vv;
  symmetric_eigen(Msym, mu, Vv);
  double mu_min = mu[0];
  if (mu_min >= -1e-300) {
    Vec3 ray{g1, g2, 1.0};
    double s = std::max(0.0, p.dot(ray) / ray.dot(ray));
    return back(ray * s);
  }
  double lam_bar = -1.0 / mu_min;

  auto solve_shifted = [&](double lam, const Vec3& rhs) -> Vec3 {
    // Cramer's rule on S = I + lam*M (symmetric 3x3).
    double s00 = 1.0 + lam, s11 = 1.0 + lam, s22 = 1.0 + lam * m22;
    double s01 = 0.0, s02 = -lam * g1, s12 = -lam * g2;
    double c00 = s11 * s22 - s12 * s12;
    double c01 = s02 * s12 - s01 * s22;
    double c02 = s01 * s12 - s02 * s11;
    double c11 = s00 * s22 - s02 * s02;
    double c12 = s01 * s02 - s00 * s12;
    double c22 = s00 * s11 - s01 * s01;
    double det = s00 * c00 + s01 * c01 + s02 * c02;
    double inv = 1.0 / det;
    return {(c00 * rhs.x + c01 * rhs.y + c02 * rhs.z) * inv,
            (c01 * rhs.x + c11 * rhs.y + c12 * rhs.z) * inv,
            (c02 * rhs.x + c12 * rhs.y + c22 * rhs.z) * inv};
  };
  auto apply_m = [&](const Vec3& z) -> Vec3 {
    return {z.x - g1 * z.z, z.y - g2 * z.z,
            -g1 * z.x - g2 * z.y + m22 * z.z};
  };
  auto phi = [&](double lam, Vec3& z_out) -> double {
    z_out = solve_shifted(lam, p);
    return z_out.dot(apply_m(z_out));
  };

  double lo = 0.0, hi = lam_bar * (1.0 - 1e-12);
  Vec3 z;
  double phi_hi = phi(hi, z);
  for (int grow = 0; grow < 30 && phi_hi > 0.0; ++grow) {
    hi = 0.5 * (hi + lam_bar);
    phi_hi = phi(hi, z);
  }
  if (phi_hi > 0.0) return back({0.0, 0.0, 0.0});

  double lam = 0.0;
  Vec3 zl;
  double val = phi(lam, zl);
  for (int it = 0; it < 80; ++it) {
    if (val > 0.0)
      lo = lam;
    else
      hi = lam;
    if (hi - lo <= 1e-14 * (1.0 + hi)) break;
    // Newton from the current point, clipped into the bracket.
    Vec3 y = apply_m(zl);
    double dphi = -2.0 * y.dot(solve_shifted(lam, y));
    double next = (dphi < 0.0) ? lam - val / dphi : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lam = next;
    val = phi(lam, zl);
  }
  if (val > 0.0) phi(hi, zl);
  if (zl.z < 0.0) zl = {0.0, 0.0, 0.0};
  return back(zl);
}

struct PocsOutcome {
  bool feasible{false};
  WorldPoint X{};
};

// Cyclic projections onto the per-camera cones at radius gamma. Declares
// success when every residual is within gamma + 1e-9; gives up when the
// sweep budget is spent or when the violation is decaying too slowly to
// reach the tolerance within the remaining budget.
PocsOutcome pocs_feasible(const std::vector<ConeCam>& cones, double gamma,
                          const WorldPoint& start, int max_sweeps) {
  PocsOutcome out;
  WorldPoint X = start;
  double viol_window = kInf;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (const ConeCam& cc : cones) X = project_to_cone(cc, gamma, X);
    double viol = 0.0;
    for (const ConeCam& cc : cones)
      viol = std::max(viol, cone_residual(cc, X) - gamma);
    if (viol <= 1e-9) {
      out.feasible = true;
      out.X = X;
      return out;
    }
    if (sweep % 5 == 4) {
      if (std::isfinite(viol_window) && viol_window > 0.0) {
        double rho = std::pow(viol / viol_window, 0.2);
        if (rho >= 0.9999) return out;
        double remaining = static_cast<double>(max_sweeps - sweep);
        if (std::log(viol / 1e-9) + remaining * std::log(rho) > 0.0)
          return out;
      }
      viol_window = viol;
    }
  }
  return out;
}

}  // namespace

TriangulationResult triangulate_minimax(const Instance& inst, int p_prime) {
  validate(inst);
  if (p_prime != 2 && p_prime != kInfNorm)
    throw ConfigError("triangulate_minimax: p_prime must be 2 or inf");

  const auto& obs = inst.observations;

  std::vector<ConeCam> cones;
  if (p_prime == 2) {
    cones.reserve(obs.size());
    for (const Observation& o : obs) {
      ConeCam cc;
      cc.R = o.cam.R;
      cc.C = o.cam.C;
      cc.f = o.cam.f;
      cc.g = {(o.x.x - o.cam.principal.x) / o.cam.f,
              (o.x.y - o.cam.principal.y) / o.cam.f};
      cones.push_back(cc);
    }
  }

  // Feasibility of "every residual <= gamma", returning a witness point.
  auto feasible_at = [&](double gamma, const WorldPoint& warm,
                         int sweeps) -> std::optional<WorldPoint> {
    if (p_prime == 2) {
      PocsOutcome o = pocs_feasible(cones, gamma, warm, sweeps);
      if (o.feasible) return o.X;
      return std::nullopt;
    }
    Instance tmp = inst;
    tmp.noise = {kInfNorm, gamma};
    ConstraintSystem sys = build_consistency_lp(tmp);
    LpResult lp =
        solve_lp({0.0, 0.0, 0.0}, sys.A, shift_rhs(sys.A, sys.b, warm));
    if (lp.status != LpStatus::Optimal) return std::nullopt;
    return warm + to_vec3(lp.x);
  };

  WorldPoint best{0.0, 0.0, 0.0};
  double hi = 0.0;
  bool bracketed = false;
  try {
    WorldPoint X0 = triangulate_linear(inst).X;
    double r0 = max_residual(inst, X0, p_prime);
    if (std::isfinite(r0)) {
      best = X0;
      hi = r0;
      bracketed = true;
    }
  } catch (const Error&) {
  }
  if (!bracketed) {
    // No usable start: bracket by doubling from a point in front of the
    // cameras.
    WorldPoint probe{0.0, 0.0, 0.0};
    for (const Observation& o : obs) {
      Vec3 fwd = o.cam.R.apply_transposed({0.0, 0.0, 1.0});
      probe = probe + o.cam.C + fwd;
    }
    probe = probe * (1.0 / static_cast<double>(obs.size()));
    for (double gamma = 1.0; gamma <= 1e6; gamma *= 2.0) {
      auto w = feasible_at(gamma, probe, 500);
      if (w) {
        best = *w;
        hi = gamma;
        bracketed = true;
        break;
      }
    }
    if (!bracketed)
      throw NumericalError(
          "triangulate_minimax: cannot bracket a feasible radius (degenerate "
          "geometry)");
  }

  double lo = 0.0;
  int iter = 0;
  while (hi - lo >= 1e-9 * (1.0 + hi)) {
    double mid = 0.5 * (lo + hi);
    auto w = feasible_at(mid, best, 500);
    if (w) {
      best = *w;
      hi = mid;
    } else {
      lo = mid;
    }
    ++iter;
  }

  TriangulationResult res;
  res.X = best;
  res.algorithm = (p_prime == 2) ? "minimax-l2" : "minimax-linf";
  res.iterations = iter;
  res.objective = max_residual(inst, best, p_prime);
  res.has_objective = true;
  res.consistent = in_consistent_region(best, inst);

  // The bisection stops within a tolerance band above the optimum; when the
  // band straddles the noise bandwidth the returned point can sit just
  // outside the consistent region even though the true point certifies
  // feasibility at delta. One extra feasibility pass at delta repairs that
  // whenever the p_prime ball at delta is contained in the noise-model ball.
  bool ball_contained =
      (p_prime == inst.noise.q) || (p_prime == 2 && inst.noise.q == kInfNorm);
  if (!res.consistent && ball_contained) {
    if (p_prime == 2) {
      WorldPoint X = best;
      for (int sweep = 0; sweep < 2000 && !res.consistent; ++sweep) {
        for (const ConeCam& cc : cones)
          X = project_to_cone(cc, inst.noise.delta, X);
        res.consistent = in_consistent_region(X, inst);
      }
      if (res.consistent) {
        res.X = X;
        res.objective = max_residual(inst, X, p_prime);
      }
    } else {
      auto w = feasible_at(inst.noise.delta, best, 0);
      if (w && in_consistent_region(*w, inst)) {
        res.X = *w;
        res.objective = max_residual(inst, *w, p_prime);
        res.consistent = true;
      }
    }
  }
  return res;
}

}  // namespace ctri
