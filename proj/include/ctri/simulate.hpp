#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ctri/consistency.hpp"
#include "ctri/triangulators.hpp"

namespace ctri {

enum class Setup { RandomSphere, CircularArray };

struct ExperimentConfig {
  Setup setup{Setup::RandomSphere};
  double roi_radius{1.0};
  double outer_radius{10.0};
  std::vector<int> camera_count_schedule{4, 8, 16, 32, 64, 128, 256};
  int trials_per_m{200};
  NoiseModel noise{kInfNorm, 0.01};
  double focal_length{1.0};
  double sensor_halfwidth{2.0};
  std::uint64_t rng_seed{0};
};

// Throws ConfigError on out-of-range fields (radii ordering, schedule not
// strictly increasing or below 2, nonpositive trial count, ...).
void validate(const ExperimentConfig& cfg);

struct DecayPoint {
  int m{0};
  double mean_sq_err{0.0};
  double std_error{0.0};
  int trials{0};    // trials included in the mean
  int excluded{0};  // trials dropped on per-trial algorithm errors
};

struct DecayCurve {
  std::vector<DecayPoint> points;
};

// Deterministic uniform source. The raw engine is the standard-specified
// mt19937_64; floats are derived by explicit bit manipulation so streams
// are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 eng_;
};

// SplitMix64 finalizer; used to derive independent per-trial substreams.
std::uint64_t mix64(std::uint64_t x);

// Seed of the substream for one (M, trial) pair of an experiment.
std::uint64_t trial_seed(std::uint64_t seed, int m, int trial);

// Haar-uniform rotation via a uniform unit quaternion.
Mat3 sample_rotation(Rng& rng);

// Rejection-samples a camera whose field of view (square of half-width
// sensor_halfwidth around the principal point) contains the whole region
// of interest. Visibility is probed at the ROI bounding-cube corners plus
// the centre, a documented approximation of the exact sphere test.
// Throws ConfigError after 1e6 rejected attempts. When attempts is given
// it receives the number of candidate draws the call consumed.
Camera sample_camera_seeing_roi(Rng& rng, const ExperimentConfig& cfg,
                                int* attempts = nullptr);

// Camera at a uniform angle on the circle of radius outer_radius in the
// z=0 plane, looking at the circle centre with +z as the up direction.
Camera circular_array_camera(Rng& rng, const ExperimentConfig& cfg);

// Noise uniform on the q-ball of radius delta (rejection sampling for
// q=1,2; per-coordinate uniform for q=inf).
Vec2 sample_noise(Rng& rng, const NoiseModel& noise);

// True world point for one trial: uniform in the ROI ball (RandomSphere)
// or the ROI disc at z=0 (CircularArray).
WorldPoint sample_roi_point(Rng& rng, const ExperimentConfig& cfg);

// Samples the cameras, true point and noisy observations of one trial with
// m cameras from the given substream.
struct TrialData {
  Instance instance;
  WorldPoint truth;
};
TrialData sample_trial(Rng& rng, const ExperimentConfig& cfg, int m);

inline constexpr const char* kAlgorithmTags[] = {
    "linear",          "l2-refined",   "consistent-lp",
    "avg-distance-lp", "minimax-linf", "minimax-l2"};

// Dispatches one of the tags above on a single instance. l2-refined is
// initialized from the linear estimate; consistent-lp minimizes the
// default zero objective (any point of the consistent region qualifies).
TriangulationResult run_algorithm(const std::string& algorithm,
                                  const Instance& inst);

// Monte-Carlo driver. Per (M, trial) the RNG substream is trial_seed(seed,
// M, trial) and accumulation follows trial order, so results do not depend
// on execution order. Per-trial errors from non-consistent algorithms are
// excluded from the mean and counted; an infeasible consistent region for
// a consistent algorithm indicates a bug (the noise respects the bound by
// construction) and aborts the run.
DecayCurve run_decay_experiment(const ExperimentConfig& cfg,
                                const std::string& algorithm);

// Parses the plain-text key-value config format (# comments, key = value,
// keys named after the config fields: setup, roi_radius, outer_radius,
// camera_count_schedule, trials_per_M, q, delta, focal_length,
// sensor_halfwidth, rng_seed). Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& text);

}  // namespace ctri
