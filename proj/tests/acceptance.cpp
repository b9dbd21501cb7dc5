// Acceptance runner: pass a criterion number (1-7) to check one claim of
// the study, or no argument to run them all. Prints one [PASS]/[FAIL] line
// per checked bound and exits nonzero when anything failed.
#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "ctri/analysis.hpp"
#include "ctri/consistency.hpp"
#include "ctri/errors.hpp"
#include "ctri/numerics.hpp"
#include "ctri/simulate.hpp"
#include "ctri/toy2d.hpp"
#include "ctri/triangulators.hpp"

using namespace ctri;

namespace {

int g_failures = 0;

void check(bool ok, const char* fmt, ...) {
  char buf[512];
  std::va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", buf);
  if (!ok) ++g_failures;
}

ExperimentConfig reference_config(Setup setup, int q) {
  ExperimentConfig cfg;
  cfg.setup = setup;
  cfg.camera_count_schedule = {8, 16, 32, 64, 128, 256};
  cfg.trials_per_m = 200;
  cfg.noise.q = q;
  cfg.noise.delta = 0.01;
  cfg.rng_seed = 20260819u;
  return cfg;
}

double fitted_slope(const DecayCurve& curve, int m_min) {
  return fit_loglog_slope(curve, m_min).slope;
}

void criterion_1() {
  const ExperimentConfig cfg = reference_config(Setup::RandomSphere, kInfNorm);
  const double s_clp =
      fitted_slope(run_decay_experiment(cfg, "consistent-lp"), 8);
  const double s_lin = fitted_slope(run_decay_experiment(cfg, "linear"), 8);

  check(s_clp >= -2.4 && s_clp <= -1.6,
        "consistent-lp slope %.4f in [-2.4, -1.6]", s_clp);
  check(s_lin >= -1.4 && s_lin <= -0.6,
        "linear slope %.4f in [-1.4, -0.6]", s_lin);
  check(std::abs(s_clp) - std::abs(s_lin) >= 0.5,
        "slope magnitude gap %.4f >= 0.5", std::abs(s_clp) - std::abs(s_lin));
}

void criterion_2() {
  const ExperimentConfig cfg = reference_config(Setup::RandomSphere, 2);
  const DecayCurve mm = run_decay_experiment(cfg, "minimax-l2");
  const DecayCurve gn = run_decay_experiment(cfg, "l2-refined");

  const double s_mm = fitted_slope(mm, 8);
  check(s_mm >= -2.4 && s_mm <= -1.6, "minimax-l2 slope %.4f in [-2.4, -1.6]",
        s_mm);

  // Trend test on the largest-M half of the schedule: the unconstrained
  // refinement flattens out while the consistent solve keeps its rate.
  const double s_mm_tail = fitted_slope(mm, 64);
  const double s_gn_tail = fitted_slope(gn, 64);
  check(std::abs(s_gn_tail) < std::abs(s_mm_tail),
        "tail slope magnitudes: l2-refined %.4f < minimax-l2 %.4f",
        std::abs(s_gn_tail), std::abs(s_mm_tail));
}

void criterion_3() {
  const ExperimentConfig cfg =
      reference_config(Setup::CircularArray, kInfNorm);
  const double s_clp =
      fitted_slope(run_decay_experiment(cfg, "consistent-lp"), 8);
  check(s_clp >= -2.4 && s_clp <= -1.6,
        "circular-array consistent-lp slope %.4f in [-2.4, -1.6]", s_clp);
}

void criterion_4() {
  const Toy2dConfig cfg;  // five pixels, M = 2..24
  const std::vector<Toy2dRow> rows = toy2d_study(cfg);

  const auto slope_of = [&](double Toy2dRow::*field) {
    DecayCurve curve;
    for (const Toy2dRow& r : rows)
      curve.points.push_back({r.m, r.*field, 0.0, 1, 0});
    return fitted_slope(curve, 8);
  };
  const double s_linf = slope_of(&Toy2dRow::e_linf_brute);
  const double s_lin = slope_of(&Toy2dRow::e_linear);
  const double s_cml2 = slope_of(&Toy2dRow::e_consistent_min_l2);
  check(s_linf >= -2.5 && s_linf <= -1.5,
        "linf brute-force slope %.4f in [-2.5, -1.5]", s_linf);
  check(s_lin >= -1.5 && s_lin <= -0.5, "linear slope %.4f in [-1.5, -0.5]",
        s_lin);
  check(s_cml2 >= -2.5 && s_cml2 <= -1.5,
        "consistent-min-l2 slope %.4f in [-2.5, -1.5]", s_cml2);

  bool monotone = true;
  double peak = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0)
      monotone = monotone && rows[i].inconsistent_fraction_l2 >=
                                 rows[i - 1].inconsistent_fraction_l2;
    peak = std::max(peak, rows[i].inconsistent_fraction_l2);
  }
  check(monotone, "inconsistent fraction non-decreasing in M");
  check(peak > 0.0, "inconsistent fraction reaches %.4f > 0 by M=%d", peak,
        rows.back().m);
}

void criterion_5() {
  struct Pairing {
    int q;
    const char* algorithm;
  };
  // Each consistent algorithm paired with the noise shape whose bound it
  // enforces (the LP solvers take box noise; minimax takes its own norm).
  const Pairing pairings[] = {{kInfNorm, "consistent-lp"},
                              {kInfNorm, "avg-distance-lp"},
                              {kInfNorm, "minimax-linf"},
                              {2, "minimax-l2"}};
  for (const Pairing& p : pairings) {
    ExperimentConfig cfg = reference_config(Setup::RandomSphere, p.q);
    Rng rng(20260819u);
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
      const int m = 2 + (i % 7);
      const TrialData trial = sample_trial(rng, cfg, m);
      const TriangulationResult res =
          run_algorithm(p.algorithm, trial.instance);
      if (!in_consistent_region(res.X, trial.instance)) ++failures;
    }
    check(failures == 0, "%s, q=%s: %d of 1000 estimates left the region",
          p.algorithm, p.q == kInfNorm ? "inf" : "2", failures);
  }
}

void criterion_6() {
  // LP feasibility agrees with the membership predicate.
  {
    ExperimentConfig cfg = reference_config(Setup::RandomSphere, kInfNorm);
    Rng rng(777u);
    int kept = 0, agree = 0;
    while (kept < 10000) {
      const TrialData trial = sample_trial(rng, cfg, 3);
      const ConstraintSystem sys = build_consistency_lp(trial.instance);
      for (int k = 0; k < 4 && kept < 10000; ++k) {
        const Vec3 X{trial.truth.x + 0.3 * (rng.uniform() - 0.5),
                     trial.truth.y + 0.3 * (rng.uniform() - 0.5),
                     trial.truth.z + 0.3 * (rng.uniform() - 0.5)};
        bool front = true;
        for (const Observation& o : trial.instance.observations)
          front = front && cheirality(o.cam, X);
        if (!front) continue;
        bool lp_ok = true;
        for (std::size_t r = 0; r < sys.A.rows; ++r) {
          const double lhs =
              sys.A(r, 0) * X.x + sys.A(r, 1) * X.y + sys.A(r, 2) * X.z;
          lp_ok = lp_ok && lhs <= sys.b[r] + 1e-9;
        }
        ++kept;
        if (lp_ok == in_consistent_region(X, trial.instance)) ++agree;
      }
    }
    check(agree == kept, "LP feasibility vs membership: %d of %d pairs agree",
          agree, kept);
  }

  // The planar brute-force searches never lose to their own lattice.
  {
    Camera2D a;
    a.angle = 0.5 * 3.14159265358979323846;
    Camera2D b = a;
    b.centre = {2.7, 0.3};
    b.angle = 2.45;
    Camera2D c = a;
    c.centre = {-2.5, 0.1};
    c.angle = 0.75;
    const Vec2 truth{0.1, 2.4};
    const double bias[3] = {0.07, -0.05, 0.03};
    std::vector<Observation2D> obs;
    int bi = 0;
    for (const Camera2D& cam : {a, b, c})
      obs.push_back({cam, project2d(cam, truth) + bias[bi++]});
    const Polygon2D roi{{-0.5, 2.0}, {0.5, 2.0}, {0.5, 3.0}, {-0.5, 3.0}};

    for (const char* norm : {"linf", "l2"}) {
      const bool use_l2 = std::strcmp(norm, "l2") == 0;
      const auto cost = [&](const Vec2& p) {
        double worst = 0.0, sum = 0.0;
        for (const Observation2D& o : obs) {
          const double r = std::abs(project2d(o.cam, p) - o.x);
          worst = std::max(worst, r);
          sum += r * r;
        }
        return use_l2 ? sum : worst;
      };
      const Vec2 out = toy2d_bruteforce_optimum(obs, norm, roi);
      double grid_min = 1e300;
      for (int i = 0; i < 2001; ++i)
        for (int j = 0; j < 2001; ++j)
          grid_min = std::min(
              grid_min, cost({-0.5 + i * (1.0 / 2000.0),
                              2.0 + j * (1.0 / 2000.0)}));
      check(cost(out) <= grid_min + 1e-12,
            "%s brute force %.12f <= lattice best %.12f", norm, cost(out),
            grid_min);
    }
  }

  // Simplex agrees with exhaustive vertex enumeration on small systems.
  {
    Rng rng(31337u);
    int compared = 0, matched = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + (trial % 2);
      const std::size_t extra = 3 + (trial % 4);
      Mat A(extra + 2 * n, n);
      std::vector<double> b(A.rows);
      for (std::size_t r = 0; r < extra; ++r) {
        for (std::size_t j = 0; j < n; ++j)
          A(r, j) = 2.0 * rng.uniform() - 1.0;
        b[r] = -0.2 + 1.2 * rng.uniform();
      }
      for (std::size_t j = 0; j < n; ++j) {  // box keeps the LP bounded
        A(extra + 2 * j, j) = 1.0;
        b[extra + 2 * j] = 2.0;
        A(extra + 2 * j + 1, j) = -1.0;
        b[extra + 2 * j + 1] = 2.0;
      }
      std::vector<double> cvec(n);
      for (double& v : cvec) v = 2.0 * rng.uniform() - 1.0;

      // enumerate all n-row intersections and keep the feasible ones
      double best = 1e300;
      std::vector<std::size_t> idx(n);
      const std::size_t rows = A.rows;
      const auto feasible_value = [&](const std::vector<std::size_t>& pick) {
        Mat S(n, n + 1);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) S(i, j) = A(pick[i], j);
          S(i, n) = b[pick[i]];
        }
        for (std::size_t col = 0; col < n; ++col) {
          std::size_t piv = col;
          for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(S(r, col)) > std::abs(S(piv, col))) piv = r;
          if (std::abs(S(piv, col)) < 1e-10) return;
          for (std::size_t j = 0; j <= n; ++j)
            std::swap(S(col, j), S(piv, j));
          for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = S(r, col) / S(col, col);
            for (std::size_t j = 0; j <= n; ++j) S(r, j) -= f * S(col, j);
          }
        }
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = S(i, n) / S(i, i);
        for (std::size_t r = 0; r < rows; ++r) {
          double lhs = 0.0;
          for (std::size_t j = 0; j < n; ++j) lhs += A(r, j) * x[j];
          if (lhs > b[r] + 1e-9) return;
        }
        double value = 0.0;
        for (std::size_t j = 0; j < n; ++j) value += cvec[j] * x[j];
        best = std::min(best, value);
      };
      const std::function<void(std::size_t, std::size_t)> choose =
          [&](std::size_t start, std::size_t depth) {
            if (depth == n) {
              feasible_value(idx);
              return;
            }
            for (std::size_t r = start; r + (n - depth - 1) < rows; ++r) {
              idx[depth] = r;
              choose(r + 1, depth + 1);
            }
          };
      choose(0, 0);

      const LpResult lp = solve_lp(cvec, A, b);
      ++compared;
      if (best == 1e300) {
        matched += lp.status == LpStatus::Infeasible ? 1 : 0;
      } else {
        matched += lp.status == LpStatus::Optimal &&
                           std::abs(lp.objective - best) <= 1e-8
                       ? 1
                       : 0;
      }
    }
    check(matched == compared,
          "simplex vs vertex enumeration: %d of %d LPs match", matched,
          compared);
  }
}

void criterion_7() {
  // Zero-noise recovery across every algorithm.
  {
    ExperimentConfig cfg = reference_config(Setup::RandomSphere, kInfNorm);
    cfg.noise.delta = 1e-8;  // pins the consistent region to the truth
    Rng rng(4242u);
    int failures = 0;
    for (int i = 0; i < 100; ++i) {
      TrialData trial = sample_trial(rng, cfg, 3 + (i % 5));
      for (Observation& o : trial.instance.observations)
        o.x = project(o.cam, trial.truth);
      for (const char* tag : kAlgorithmTags) {
        const TriangulationResult res =
            run_algorithm(tag, trial.instance);
        const Vec3 d = res.X - trial.truth;
        if (d.norm() >= 1e-6) ++failures;
      }
    }
    check(failures == 0, "zero-noise recovery: %d of 600 solves off by >1e-6",
          failures);
  }

  // Cached projection matrix agrees with the homogeneous route.
  {
    ExperimentConfig cfg = reference_config(Setup::RandomSphere, kInfNorm);
    Rng rng(11u);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Camera cam = sample_camera_seeing_roi(rng, cfg);
      const WorldPoint X = sample_roi_point(rng, cfg);
      const ImagePoint direct = project(cam, X);
      const double h0 = cam.P.dir(0).dot(X) + cam.P.off(0);
      const double h1 = cam.P.dir(1).dot(X) + cam.P.off(1);
      const double h2 = cam.P.dir(2).dot(X) + cam.P.off(2);
      worst = std::max({worst, std::abs(direct.x - h0 / h2),
                        std::abs(direct.y - h1 / h2)});
    }
    check(worst <= 1e-12, "projection route disagreement %.3e <= 1e-12",
          worst);
  }

  // Slope fitter is exact on synthetic power laws.
  {
    double worst = 0.0;
    for (const double s : {-2.0, -1.0, -0.5}) {
      DecayCurve curve;
      for (const int m : {8, 16, 32, 64, 128, 256})
        curve.points.push_back({m, 3.0 * std::pow(m, s), 0.0, 1, 0});
      worst = std::max(worst, std::abs(fit_loglog_slope(curve, 8).slope - s));
    }
    check(worst <= 1e-12, "power-law fit error %.3e <= 1e-12", worst);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const int which = argc > 1 ? std::atoi(argv[1]) : 0;
  if (argc > 1 && (which < 1 || which > 7)) {
    std::fprintf(stderr, "usage: acceptance [1-7]\n");
    return 64;
  }
  void (*criteria[])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                          criterion_5, criterion_6, criterion_7};
  for (int i = 0; i < 7; ++i) {
    if (which != 0 && which != i + 1) continue;
    std::printf("criterion %d:\n", i + 1);
    criteria[i]();
  }
  return g_failures == 0 ? 0 : 1;
}
