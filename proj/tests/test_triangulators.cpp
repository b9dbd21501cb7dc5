#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ctri/errors.hpp"
#include "ctri/simulate.hpp"
#include "ctri/triangulators.hpp"

using namespace ctri;

namespace {

Mat3 rot_x(double a) {
  Mat3 R = Mat3::identity();
  R(1, 1) = std::cos(a);
  R(1, 2) = -std::sin(a);
  R(2, 1) = std::sin(a);
  R(2, 2) = std::cos(a);
  return R;
}

Mat3 rot_y(double a) {
  Mat3 R = Mat3::identity();
  R(0, 0) = std::cos(a);
  R(0, 2) = std::sin(a);
  R(2, 0) = -std::sin(a);
  R(2, 2) = std::cos(a);
  return R;
}

Instance exact_instance(const std::vector<Camera>& cams, const WorldPoint& X,
                        const NoiseModel& noise) {
  Instance inst;
  for (const Camera& cam : cams) inst.observations.push_back({project(cam, X), cam});
  inst.noise = noise;
  return inst;
}

// Three cameras with mutually perpendicular optical axes, all seeing
// X=(0,0,2): from the origin (+z), from the left (+x), from above (-y).
std::vector<Camera> orthogonal_rig() {
  return {make_camera(1.0, {0, 0}, Mat3::identity(), {0, 0, 0}),
          make_camera(1.0, {0, 0}, rot_y(-M_PI / 2.0), {-5.0, 0.0, 2.0}),
          make_camera(1.0, {0, 0}, rot_x(-M_PI / 2.0), {0.0, 5.0, 2.0})};
}

ExperimentConfig trial_config(int q, double delta, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.noise = {q, delta};
  cfg.camera_count_schedule = {2, 4, 8};
  cfg.rng_seed = seed;
  return cfg;
}

// Coarse-to-fine pattern scan of fn around centre: full grid at each level,
// recentred on the best point, step divided by 10. Resolves the optimum to
// the final step size without the cost of a single dense fine grid.
template <typename F>
double refine_minimum(F&& fn, WorldPoint centre, double radius, double step,
                      int levels) {
  double best = fn(centre);
  for (int level = 0; level < levels; ++level) {
    const int span = static_cast<int>(std::lround(radius / step));
    WorldPoint best_pt = centre;
    for (int i = -span; i <= span; ++i)
      for (int j = -span; j <= span; ++j)
        for (int k = -span; k <= span; ++k) {
          const WorldPoint p{centre.x + step * i, centre.y + step * j,
                             centre.z + step * k};
          const double v = fn(p);
          if (v < best) {
            best = v;
            best_pt = p;
          }
        }
    centre = best_pt;
    radius = 2.0 * step;
    step /= 10.0;
  }
  return best;
}

double norm3(const Vec3& v) { return v.norm(); }

}  // namespace

TEST_CASE("linear triangulation is exact on clean two-camera data") {
  const WorldPoint X{0.0, 0.0, 5.0};
  const std::vector<Camera> cams = {
      make_camera(1.0, {0, 0}, Mat3::identity(), {-1.0, 0.0, 0.0}),
      make_camera(1.0, {0, 0}, Mat3::identity(), {1.0, 0.0, 0.0})};
  const Instance inst = exact_instance(cams, X, {kInfNorm, 0.01});
  const TriangulationResult res = triangulate_linear(inst);
  CHECK(norm3(res.X - X) < 1e-8);
  CHECK(res.algorithm == "linear");
}

TEST_CASE("linear triangulation is exact on a clean ten-camera ring") {
  for (int t = 0; t < 10; ++t) {
    const ExperimentConfig cfg = trial_config(kInfNorm, 0.0, 4011);
    Rng rng(trial_seed(cfg.rng_seed, 10, t));
    ExperimentConfig ring = cfg;
    ring.setup = Setup::CircularArray;
    const TrialData trial = sample_trial(rng, ring, 10);
    const TriangulationResult res = triangulate_linear(trial.instance);
    CHECK(norm3(res.X - trial.truth) < 1e-8);
  }
}

TEST_CASE("linear triangulation rejects coincident cameras") {
  const Camera cam = make_camera(1.0, {0, 0}, Mat3::identity(), {0, 0, 0});
  Instance inst;
  inst.observations.push_back({{0.1, 0.2}, cam});
  inst.observations.push_back({{0.1, 0.2}, cam});
  inst.noise = {kInfNorm, 0.01};
  CHECK_THROWS_AS(triangulate_linear(inst), NumericalError);
}

TEST_CASE("linear triangulation commutes with world rescaling") {
  for (int t = 0; t < 10; ++t) {
    const ExperimentConfig cfg = trial_config(kInfNorm, 0.01, 4012);
    Rng rng(trial_seed(cfg.rng_seed, 4, t));
    const TrialData trial = sample_trial(rng, cfg, 4);

    const double s = 7.0;
    Instance scaled;
    scaled.noise = trial.instance.noise;
    for (const Observation& o : trial.instance.observations) {
      const Camera cam =
          make_camera(o.cam.f, o.cam.principal, o.cam.R, o.cam.C * s);
      scaled.observations.push_back({o.x, cam});
    }

    const WorldPoint a = triangulate_linear(trial.instance).X;
    const WorldPoint b = triangulate_linear(scaled).X;
    CHECK(norm3(b - a * s) < 1e-8 * (1.0 + s * norm3(a)));
  }
}

TEST_CASE("refinement converges to the clean point from a nudged start") {
  const WorldPoint X{0.0, 0.0, 2.0};
  const Instance inst =
      exact_instance(orthogonal_rig(), X, {2, 0.01});
  const TriangulationResult res =
      triangulate_l2_refine(inst, {X.x + 1e-3, X.y, X.z});
  CHECK(norm3(res.X - X) < 1e-10);
  CHECK(res.converged);
}

TEST_CASE("refinement never increases the cost of its initializer") {
  for (int t = 0; t < 50; ++t) {
    const ExperimentConfig cfg = trial_config(2, 0.02, 4013);
    Rng rng(trial_seed(cfg.rng_seed, 4, t));
    const TrialData trial = sample_trial(rng, cfg, 4);
    const WorldPoint init = triangulate_linear(trial.instance).X;
    const TriangulationResult res =
        triangulate_l2_refine(trial.instance, init);
    CHECK(res.objective <= l2_cost(trial.instance, init) + 1e-12);
    CHECK(res.objective ==
          doctest::Approx(l2_cost(trial.instance, res.X)).epsilon(1e-9));
  }
}

TEST_CASE("refinement rejects an initializer behind a camera") {
  const Instance inst =
      exact_instance(orthogonal_rig(), {0.0, 0.0, 2.0}, {2, 0.01});
  CHECK_THROWS_AS(triangulate_l2_refine(inst, {0.0, 0.0, -1.0}),
                  ConfigError);
}

TEST_CASE("refined cost matches a pattern-search scan on two cameras") {
  for (int t = 0; t < 5; ++t) {
    const ExperimentConfig cfg = trial_config(2, 0.02, 4014);
    Rng rng(trial_seed(cfg.rng_seed, 2, t));
    const TrialData trial = sample_trial(rng, cfg, 2);
    const WorldPoint init = triangulate_linear(trial.instance).X;
    const TriangulationResult res =
        triangulate_l2_refine(trial.instance, init);
    const double scanned = refine_minimum(
        [&](const WorldPoint& p) { return l2_cost(trial.instance, p); },
        init, 0.1, 0.01, 3);
    CHECK(std::abs(res.objective - scanned) < 1e-6);
  }
}

TEST_CASE("constraint block of the identity camera, expanded by hand") {
  const Camera cam = make_camera(1.0, {0, 0}, Mat3::identity(), {0, 0, 0});
  Instance inst;
  inst.observations.push_back({{0.0, 0.0}, cam});
  inst.observations.push_back(
      {project(make_camera(1.0, {0, 0}, rot_y(-M_PI / 2.0), {-5, 0, 2}),
               {0.0, 0.0, 2.0}),
       make_camera(1.0, {0, 0}, rot_y(-M_PI / 2.0), {-5, 0, 2})});
  inst.noise = {kInfNorm, 0.5};

  const ConstraintSystem sys = build_consistency_lp(inst);
  REQUIRE(sys.A.rows == 8);
  REQUIRE(sys.b.size() == 8);
  const double want[4][4] = {{-1, 0, -0.5, 0},
                             {0, -1, -0.5, 0},
                             {1, 0, -0.5, 0},
                             {0, 1, -0.5, 0}};
  for (int r = 0; r < 4; ++r) {
    CHECK(sys.A(r, 0) == doctest::Approx(want[r][0]).epsilon(1e-12));
    CHECK(sys.A(r, 1) == doctest::Approx(want[r][1]).epsilon(1e-12));
    CHECK(sys.A(r, 2) == doctest::Approx(want[r][2]).epsilon(1e-12));
    CHECK(std::abs(sys.b[r] - want[r][3]) < 1e-12);
  }
  // On the optical axis every row of the first block has slack delta*z.
  for (double z : {1.0, 2.0, 4.0}) {
    for (int r = 0; r < 4; ++r) {
      const double lhs = sys.A(r, 2) * z;
      CHECK(sys.b[r] - lhs == doctest::Approx(0.5 * z).epsilon(1e-12));
    }
  }
}

TEST_CASE("constraint stack has four rows per observation in order") {
  const Instance inst =
      exact_instance(orthogonal_rig(), {0.0, 0.0, 2.0}, {kInfNorm, 0.1});
  const ConstraintSystem sys = build_consistency_lp(inst);
  REQUIRE(sys.A.rows == 12);
  REQUIRE(sys.b.size() == 12);

  // Dropping the last observation must reproduce the first 8 rows exactly.
  Instance two = inst;
  two.observations.pop_back();
  const ConstraintSystem head = build_consistency_lp(two);
  for (std::size_t r = 0; r < 8; ++r) {
    for (int c = 0; c < 3; ++c) CHECK(sys.A(r, c) == head.A(r, c));
    CHECK(sys.b[r] == head.b[r]);
  }
}

TEST_CASE("constraint builder rejects non-square noise") {
  const Instance inst =
      exact_instance(orthogonal_rig(), {0.0, 0.0, 2.0}, {2, 0.1});
  CHECK_THROWS_AS(build_consistency_lp(inst), ConfigError);
}

TEST_CASE("true point satisfies the stack with strict slack") {
  for (int t = 0; t < 50; ++t) {
    const ExperimentConfig cfg = trial_config(kInfNorm, 0.0, 4015);
    Rng rng(trial_seed(cfg.rng_seed, 4, t));
    TrialData trial = sample_trial(rng, cfg, 4);
    trial.instance.noise.delta = 0.05;
    const ConstraintSystem sys = build_consistency_lp(trial.instance);
    for (std::size_t r = 0; r < sys.A.rows; ++r) {
      const double lhs = sys.A(r, 0) * trial.truth.x +
                         sys.A(r, 1) * trial.truth.y +
                         sys.A(r, 2) * trial.truth.z;
      CHECK(lhs < sys.b[r]);
    }
  }
}

TEST_CASE("feasibility solve returns a consistent point near the truth") {
  const WorldPoint X{0.0, 0.0, 2.0};
  const Instance inst = exact_instance(orthogonal_rig(), X, {kInfNorm, 0.1});
  const TriangulationResult res = triangulate_consistent_lp(inst);
  CHECK(res.consistent);
  CHECK(in_consistent_region(res.X, inst));
  // Every camera is within depth 5, so the region fits in a 0.5-ball.
  CHECK(norm3(res.X - X) < 1.0);
}

TEST_CASE("a strong outlier empties the consistent region") {
  const double delta = 0.01;
  Instance inst =
      exact_instance(orthogonal_rig(), {0.0, 0.0, 2.0}, {kInfNorm, delta});
  inst.observations[0].x.x += 10.0 * delta;

  // The front camera now wants X1 near 0.2, the top camera pins X1 near 0;
  // a membership scan over the plausible box confirms emptiness.
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j)
      for (int k = 0; k <= 20; ++k) {
        const WorldPoint p{-0.5 + 0.05 * i, -0.5 + 0.05 * j,
                           1.5 + 0.05 * k};
        CHECK_FALSE(in_consistent_region(p, inst));
      }
  CHECK_THROWS_AS(triangulate_consistent_lp(inst), InfeasibleError);
}

TEST_CASE("linear objective reaches the bottom of the region") {
  const WorldPoint X{0.0, 0.0, 2.0};
  const Instance inst = exact_instance(orthogonal_rig(), X, {kInfNorm, 0.05});
  const TriangulationResult res = triangulate_consistent_lp(inst, {0, 0, 1});
  CHECK(res.consistent);

  double grid_min = 1e300;
  const double step = 0.005;
  for (int i = -60; i <= 60; ++i)
    for (int j = -60; j <= 60; ++j)
      for (int k = -60; k <= 60; ++k) {
        const WorldPoint p{X.x + step * i, X.y + step * j, X.z + step * k};
        if (in_consistent_region(p, inst)) grid_min = std::min(grid_min, p.z);
      }
  REQUIRE(grid_min < 1e300);
  CHECK(res.X.z <= grid_min + 1e-9);
  CHECK(grid_min - res.X.z <= 2.0 * step);
}

TEST_CASE("pruning drops one copy of a duplicated facet") {
  ConstraintSystem box;
  box.A = Mat(7, 3);
  box.b = {1, 1, 1, 1, 1, 1, 1};
  for (int j = 0; j < 3; ++j) {
    box.A(2 * j, j) = 1.0;
    box.A(2 * j + 1, j) = -1.0;
  }
  box.A(6, 0) = 1.0;  // duplicate of row 0
  const ConstraintSystem out = remove_redundant_constraints(box);
  CHECK(out.A.rows == 6);
  int x1_upper = 0;
  for (std::size_t r = 0; r < out.A.rows; ++r)
    if (out.A(r, 0) == 1.0 && out.A(r, 1) == 0.0 && out.A(r, 2) == 0.0)
      ++x1_upper;
  CHECK(x1_upper == 1);
}

TEST_CASE("pruning removes a dominated halfspace") {
  ConstraintSystem box;
  box.A = Mat(7, 3);
  box.b = {1, 1, 1, 1, 1, 1, 5};
  for (int j = 0; j < 3; ++j) {
    box.A(2 * j, j) = 1.0;
    box.A(2 * j + 1, j) = -1.0;
  }
  box.A(6, 0) = 1.0;  // x1 <= 5, implied by x1 <= 1
  const ConstraintSystem out = remove_redundant_constraints(box);
  CHECK(out.A.rows == 6);
  for (std::size_t r = 0; r < out.A.rows; ++r) CHECK(out.b[r] == 1.0);
}

TEST_CASE("pruning rejects an infeasible system") {
  ConstraintSystem sys;
  sys.A = Mat(2, 3);
  sys.A(0, 0) = 1.0;
  sys.A(1, 0) = -1.0;
  sys.b = {-1.0, -1.0};
  CHECK_THROWS_AS(remove_redundant_constraints(sys), InfeasibleError);
}

TEST_CASE("pruning preserves the feasible set") {
  Rng rng(4016);
  for (int rep = 0; rep < 5; ++rep) {
    ConstraintSystem sys;
    sys.A = Mat(12, 3);
    sys.b.resize(12);
    for (int r = 0; r < 12; ++r) {
      Vec3 a{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const double len = a.norm();
      a = a * (1.0 / (len > 1e-9 ? len : 1.0));
      sys.A(r, 0) = a.x;
      sys.A(r, 1) = a.y;
      sys.A(r, 2) = a.z;
      sys.b[r] = rng.uniform(0.2, 1.5);
    }
    const ConstraintSystem out = remove_redundant_constraints(sys);
    CHECK(out.A.rows <= sys.A.rows);
    for (int t = 0; t < 10000; ++t) {
      const Vec3 p{rng.uniform(-3, 3), rng.uniform(-3, 3),
                   rng.uniform(-3, 3)};
      bool in_full = true, in_pruned = true;
      for (std::size_t r = 0; r < sys.A.rows; ++r)
        if (sys.A(r, 0) * p.x + sys.A(r, 1) * p.y + sys.A(r, 2) * p.z >
            sys.b[r] + 1e-12)
          in_full = false;
      for (std::size_t r = 0; r < out.A.rows; ++r)
        if (out.A(r, 0) * p.x + out.A(r, 1) * p.y + out.A(r, 2) * p.z >
            out.b[r] + 1e-12)
          in_pruned = false;
      CHECK(in_full == in_pruned);
    }
  }
}

TEST_CASE("plane-distance solve settles at the centre of a symmetric box") {
  ConstraintSystem box;
  box.A = Mat(6, 3);
  box.b = {1, 1, 1, 1, 1, 1};
  for (int j = 0; j < 3; ++j) {
    box.A(2 * j, j) = 1.0;
    box.A(2 * j + 1, j) = -1.0;
  }
  const TriangulationResult res = triangulate_avg_distance_lp(box);
  CHECK(std::abs(res.X.x) < 1e-9);
  CHECK(std::abs(res.X.y) < 1e-9);
  CHECK(std::abs(res.X.z) < 1e-9);
  // Opposite faces contribute a constant sum, 2 per axis.
  CHECK(res.objective == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("plane-distance objective is constant over a stretched box") {
  ConstraintSystem box;
  box.A = Mat(6, 3);
  box.b = {3, 1, 1, 1, 1, 1};
  for (int j = 0; j < 3; ++j) {
    box.A(2 * j, j) = 1.0;
    box.A(2 * j + 1, j) = -1.0;
  }
  const TriangulationResult res = triangulate_avg_distance_lp(box);
  // Any interior point attains the optimum (4 + 2 + 2): assert the value
  // and membership rather than one arbitrary representative.
  CHECK(res.objective == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(res.X.x <= 3.0 + 1e-9);
  CHECK(res.X.x >= -1.0 - 1e-9);
  CHECK(std::abs(res.X.y) <= 1.0 + 1e-9);
  CHECK(std::abs(res.X.z) <= 1.0 + 1e-9);
  double manual = 0.0;
  for (std::size_t r = 0; r < box.A.rows; ++r)
    manual += box.b[r] - (box.A(r, 0) * res.X.x + box.A(r, 1) * res.X.y +
                          box.A(r, 2) * res.X.z);
  CHECK(manual == doctest::Approx(res.objective).epsilon(1e-9));
}

TEST_CASE("plane-distance optimum dominates the feasibility vertex") {
  for (int t = 0; t < 20; ++t) {
    const ExperimentConfig cfg = trial_config(kInfNorm, 0.02, 4017);
    Rng rng(trial_seed(cfg.rng_seed, 4, t));
    const TrialData trial = sample_trial(rng, cfg, 4);
    const TriangulationResult avg =
        triangulate_avg_distance_lp(trial.instance);
    const TriangulationResult vertex =
        triangulate_consistent_lp(trial.instance);
    const ConstraintSystem pruned = remove_redundant_constraints(
        build_consistency_lp(trial.instance));

    const auto avg_distance = [&](const WorldPoint& X) {
      double s = 0.0;
      for (std::size_t r = 0; r < pruned.A.rows; ++r) {
        const double nrm =
            std::sqrt(pruned.A(r, 0) * pruned.A(r, 0) +
                      pruned.A(r, 1) * pruned.A(r, 1) +
                      pruned.A(r, 2) * pruned.A(r, 2));
        s += std::abs(pruned.A(r, 0) * X.x + pruned.A(r, 1) * X.y +
                      pruned.A(r, 2) * X.z - pruned.b[r]) /
             nrm;
      }
      return s;
    };
    CHECK(avg.objective == doctest::Approx(avg_distance(avg.X)).epsilon(1e-7));
    CHECK(avg.objective <= avg_distance(vertex.X) + 1e-7);
    CHECK(avg.consistent);
  }
}

TEST_CASE("minimax radius vanishes on clean data") {
  const WorldPoint X{0.0, 0.0, 2.0};
  for (int p_prime : {2, kInfNorm}) {
    const Instance inst =
        exact_instance(orthogonal_rig(), X, {kInfNorm, 0.01});
    const TriangulationResult res = triangulate_minimax(inst, p_prime);
    CHECK(res.objective <= 1e-7);
    CHECK(norm3(res.X - X) < 1e-6);
  }
}

TEST_CASE("minimax radius matches a pattern-search scan on two cameras") {
  for (int t = 0; t < 5; ++t) {
    const ExperimentConfig cfg = trial_config(kInfNorm, 0.02, 4018);
    Rng rng(trial_seed(cfg.rng_seed, 2, t));
    const TrialData trial = sample_trial(rng, cfg, 2);
    const TriangulationResult res = triangulate_minimax(trial.instance,
                                                        kInfNorm);
    const double scanned = refine_minimum(
        [&](const WorldPoint& p) {
          return max_residual(trial.instance, p, kInfNorm);
        },
        triangulate_linear(trial.instance).X, 0.1, 0.01, 3);
    CHECK(res.objective <= scanned + 1e-9);
    CHECK(scanned - res.objective <= 1e-4);
  }
}

TEST_CASE("minimax estimate is consistent whenever the noise respects q") {
  for (int p_prime : {2, kInfNorm}) {
    const int q = p_prime;
    for (int t = 0; t < 200; ++t) {
      const ExperimentConfig cfg = trial_config(q, 0.01, 4019);
      Rng rng(trial_seed(cfg.rng_seed, 4, t));
      const TrialData trial = sample_trial(rng, cfg, 4);
      const TriangulationResult res =
          triangulate_minimax(trial.instance, p_prime);
      CHECK(res.objective <= cfg.noise.delta + 1e-9);
      CHECK(res.consistent);
      CHECK(in_consistent_region(res.X, trial.instance));
    }
  }
}

TEST_CASE("feasibility solvers return consistent points on bounded noise") {
  for (int t = 0; t < 200; ++t) {
    const ExperimentConfig cfg = trial_config(kInfNorm, 0.01, 4020);
    Rng rng(trial_seed(cfg.rng_seed, 4, t));
    const TrialData trial = sample_trial(rng, cfg, 4);
    CHECK(triangulate_consistent_lp(trial.instance).consistent);
    CHECK(triangulate_avg_distance_lp(trial.instance).consistent);
  }
}

TEST_CASE("minimax validates the image norm") {
  const Instance inst =
      exact_instance(orthogonal_rig(), {0.0, 0.0, 2.0}, {kInfNorm, 0.01});
  CHECK_THROWS_AS(triangulate_minimax(inst, 1), ConfigError);
}

TEST_CASE("every algorithm recovers clean instances to high accuracy") {
  for (int t = 0; t < 10; ++t) {
    const ExperimentConfig cfg = trial_config(kInfNorm, 0.0, 4021);
    Rng rng(trial_seed(cfg.rng_seed, 4, t));
    const TrialData trial = sample_trial(rng, cfg, 4);
    const WorldPoint& X = trial.truth;

    CHECK(norm3(triangulate_linear(trial.instance).X - X) < 1e-6);
    CHECK(norm3(triangulate_l2_refine(trial.instance,
                                      triangulate_linear(trial.instance).X)
                    .X -
                X) < 1e-6);
    CHECK(norm3(triangulate_consistent_lp(trial.instance).X - X) < 1e-6);
    CHECK(norm3(triangulate_avg_distance_lp(trial.instance).X - X) < 1e-6);
    CHECK(norm3(triangulate_minimax(trial.instance, 2).X - X) < 1e-6);
    CHECK(norm3(triangulate_minimax(trial.instance, kInfNorm).X - X) < 1e-6);
  }
}
