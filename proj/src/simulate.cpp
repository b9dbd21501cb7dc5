#include "ctri/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <string>

#include "ctri/errors.hpp"
#include "ctri/triangulators.hpp"

namespace ctri {

void validate(const ExperimentConfig& cfg) {
  validate(cfg.noise);
  if (!(cfg.roi_radius > 0.0))
    throw ConfigError("config: roi_radius must be positive");
  if (!(cfg.outer_radius > cfg.roi_radius))
    throw ConfigError("config: outer_radius must exceed roi_radius");
  if (cfg.camera_count_schedule.empty())
    throw ConfigError("config: camera_count_schedule is empty");
  int prev = 1;
  for (int m : cfg.camera_count_schedule) {
    if (m < 2) throw ConfigError("config: schedule entries must be >= 2");
    if (m <= prev && prev != 1)
      throw ConfigError("config: schedule must be strictly increasing");
    prev = m;
  }
  if (cfg.trials_per_m < 1)
    throw ConfigError("config: trials_per_M must be >= 1");
  if (!(cfg.focal_length > 0.0))
    throw ConfigError("config: focal_length must be positive");
  if (!(cfg.sensor_halfwidth > 0.0))
    throw ConfigError("config: sensor_halfwidth must be positive");
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, int m, int trial) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(m));
  h = mix64(h ^ static_cast<std::uint64_t>(trial));
  return h;
}

Mat3 sample_rotation(Rng& rng) {
  // Shoemake's mapping of three uniforms to a uniform unit quaternion.
  double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  double t2 = 2.0 * 3.14159265358979323846 * u2;
  double t3 = 2.0 * 3.14159265358979323846 * u3;
  double qx = a * std::sin(t2), qy = a * std::cos(t2);
  double qz = b * std::sin(t3), qw = b * std::cos(t3);

  Mat3 R;
  R(0, 0) = 1.0 - 2.0 * (qy * qy + qz * qz);
  R(0, 1) = 2.0 * (qx * qy - qz * qw);
  R(0, 2) = 2.0 * (qx * qz + qy * qw);
  R(1, 0) = 2.0 * (qx * qy + qz * qw);
  R(1, 1) = 1.0 - 2.0 * (qx * qx + qz * qz);
  R(1, 2) = 2.0 * (qy * qz - qx * qw);
  R(2, 0) = 2.0 * (qx * qz - qy * qw);
  R(2, 1) = 2.0 * (qy * qz + qx * qw);
  R(2, 2) = 1.0 - 2.0 * (qx * qx + qy * qy);
  return R;
}

Camera sample_camera_seeing_roi(Rng& rng, const ExperimentConfig& cfg,
                                int* attempts) {
  const double r = cfg.roi_radius, outer = cfg.outer_radius;
  Vec3 probes[9];
  int np = 0;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) probes[np++] = {sx * r, sy * r, sz * r};
  probes[np++] = {0.0, 0.0, 0.0};

  for (int attempt = 0; attempt < 1000000; ++attempt) {
    if (attempts) *attempts = attempt + 1;
    Vec3 C{rng.uniform(-outer, outer), rng.uniform(-outer, outer),
           rng.uniform(-outer, outer)};
    double n = C.norm();
    if (n > outer || n <= r) continue;
    Mat3 R = sample_rotation(rng);

    bool ok = true;
    for (const Vec3& p : probes) {
      Vec3 z = R.apply(p - C);
      if (z.z <= 1e-9) {
        ok = false;
        break;
      }
      double u = cfg.focal_length * z.x / z.z;
      double v = cfg.focal_length * z.y / z.z;
      if (std::abs(u) > cfg.sensor_halfwidth ||
          std::abs(v) > cfg.sensor_halfwidth) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    return make_camera(cfg.focal_length, {0.0, 0.0}, R, C);
  }
  throw ConfigError(
      "sample_camera_seeing_roi: rejection budget exhausted; the sensor "
      "bound cannot see the whole region of interest");
}

Camera circular_array_camera(Rng& rng, const ExperimentConfig& cfg) {
  double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  double ct = std::cos(theta), st = std::sin(theta);
  Vec3 C{cfg.outer_radius * ct, cfg.outer_radius * st, 0.0};
  // Rows: image u axis, image v axis (world -z), optical axis toward the
  // circle centre.
  Mat3 R;
  R(0, 0) = -st;
  R(0, 1) = ct;
  R(0, 2) = 0.0;
  R(1, 0) = 0.0;
  R(1, 1) = 0.0;
  R(1, 2) = -1.0;
  R(2, 0) = -ct;
  R(2, 1) = -st;
  R(2, 2) = 0.0;
  return make_camera(cfg.focal_length, {0.0, 0.0}, R, C);
}

Vec2 sample_noise(Rng& rng, const NoiseModel& noise) {
  const double d = noise.delta;
  if (d == 0.0) return {0.0, 0.0};
  for (;;) {
    Vec2 e{rng.uniform(-d, d), rng.uniform(-d, d)};
    if (image_norm(e, noise.q) <= d) return e;
  }
}

WorldPoint sample_roi_point(Rng& rng, const ExperimentConfig& cfg) {
  const double r = cfg.roi_radius;
  if (cfg.setup == Setup::CircularArray) {
    for (;;) {
      Vec3 p{rng.uniform(-r, r), rng.uniform(-r, r), 0.0};
      if (p.x * p.x + p.y * p.y <= r * r) return p;
    }
  }
  for (;;) {
    Vec3 p{rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r)};
    if (p.dot(p) <= r * r) return p;
  }
}

TrialData sample_trial(Rng& rng, const ExperimentConfig& cfg, int m) {
  TrialData td;
  td.instance.noise = cfg.noise;
  td.instance.observations.resize(m);
  for (int i = 0; i < m; ++i) {
    Camera cam = (cfg.setup == Setup::CircularArray)
                     ? circular_array_camera(rng, cfg)
                     : sample_camera_seeing_roi(rng, cfg);
    td.instance.observations[i].cam = cam;
  }
  td.truth = sample_roi_point(rng, cfg);
  for (int i = 0; i < m; ++i) {
    const Camera& cam = td.instance.observations[i].cam;
    td.instance.observations[i].x =
        project(cam, td.truth) + sample_noise(rng, cfg.noise);
  }
  return td;
}

namespace {

bool is_consistent_algorithm(const std::string& algo) {
  return algo == "consistent-lp" || algo == "avg-distance-lp" ||
         algo == "minimax-linf" || algo == "minimax-l2";
}

}  // namespace

TriangulationResult run_algorithm(const std::string& algorithm,
                                  const Instance& inst) {
  if (algorithm == "linear") return triangulate_linear(inst);
  if (algorithm == "l2-refined")
    return triangulate_l2_refine(inst, triangulate_linear(inst).X);
  if (algorithm == "consistent-lp") return triangulate_consistent_lp(inst);
  if (algorithm == "avg-distance-lp")
    return triangulate_avg_distance_lp(inst);
  if (algorithm == "minimax-linf") return triangulate_minimax(inst, kInfNorm);
  if (algorithm == "minimax-l2") return triangulate_minimax(inst, 2);
  throw ConfigError("unknown algorithm tag: " + algorithm);
}

DecayCurve run_decay_experiment(const ExperimentConfig& cfg,
                                const std::string& algorithm) {
  validate(cfg);
  bool known = false;
  for (const char* tag : kAlgorithmTags) known = known || algorithm == tag;
  if (!known) throw ConfigError("unknown algorithm tag: " + algorithm);

  if ((algorithm == "consistent-lp" || algorithm == "avg-distance-lp") &&
      cfg.noise.q != kInfNorm)
    throw ConfigError(algorithm + " requires q=inf noise");

  DecayCurve curve;
  for (int m : cfg.camera_count_schedule) {
    double sum = 0.0, sumsq = 0.0;
    int included = 0, excluded = 0;
    for (int trial = 0; trial < cfg.trials_per_m; ++trial) {
      Rng rng(trial_seed(cfg.rng_seed, m, trial));
      TrialData td = sample_trial(rng, cfg, m);
      WorldPoint est;
      try {
        est = run_algorithm(algorithm, td.instance).X;
      } catch (const InfeasibleError& e) {
        if (is_consistent_algorithm(algorithm))
          throw NumericalError(
              std::string("run_decay_experiment: empty consistent region in "
                          "a model-respecting trial (M=") +
              std::to_string(m) + ", trial=" + std::to_string(trial) +
              "): " + e.what());
        ++excluded;
        continue;
      } catch (const Error&) {
        ++excluded;
        continue;
      }
      Vec3 d = est - td.truth;
      double e2 = d.dot(d);
      sum += e2;
      sumsq += e2 * e2;
      ++included;
    }

    DecayPoint pt;
    pt.m = m;
    pt.trials = included;
    pt.excluded = excluded;
    if (included > 0) pt.mean_sq_err = sum / included;
    if (included > 1) {
      double var =
          (sumsq - included * pt.mean_sq_err * pt.mean_sq_err) /
          (included - 1);
      pt.std_error = std::sqrt(std::max(var, 0.0) / included);
    }
    curve.points.push_back(pt);
  }
  return curve;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": " + v);
  }
}

long long parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": " + v);
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value, got: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("config: empty value for " + key);

    if (key == "setup") {
      if (val == "RandomSphere")
        cfg.setup = Setup::RandomSphere;
      else if (val == "CircularArray")
        cfg.setup = Setup::CircularArray;
      else
        throw ConfigError("config: unknown setup: " + val);
    } else if (key == "roi_radius") {
      cfg.roi_radius = parse_double(val, key);
    } else if (key == "outer_radius") {
      cfg.outer_radius = parse_double(val, key);
    } else if (key == "camera_count_schedule") {
      cfg.camera_count_schedule.clear();
      std::istringstream vs(val);
      std::string item;
      while (std::getline(vs, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        cfg.camera_count_schedule.push_back(
            static_cast<int>(parse_int(item, key)));
      }
      if (cfg.camera_count_schedule.empty())
        throw ConfigError("config: empty camera_count_schedule");
    } else if (key == "trials_per_M") {
      cfg.trials_per_m = static_cast<int>(parse_int(val, key));
    } else if (key == "q") {
      if (val == "inf" || val == "Inf" || val == "INF")
        cfg.noise.q = kInfNorm;
      else if (val == "1")
        cfg.noise.q = 1;
      else if (val == "2")
        cfg.noise.q = 2;
      else
        throw ConfigError("config: q must be 1, 2 or inf, got: " + val);
    } else if (key == "delta") {
      cfg.noise.delta = parse_double(val, key);
    } else if (key == "focal_length") {
      cfg.focal_length = parse_double(val, key);
    } else if (key == "sensor_halfwidth") {
      cfg.sensor_halfwidth = parse_double(val, key);
    } else if (key == "rng_seed") {
      cfg.rng_seed = static_cast<std::uint64_t>(parse_int(val, key));
    } else {
      throw ConfigError("config: unknown key: " + key);
    }
  }
  validate(cfg);
  return cfg;
}

}  // namespace ctri
