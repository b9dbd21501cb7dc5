#pragma once

#include <string>
#include <vector>

#include "ctri/consistency.hpp"
#include "ctri/numerics.hpp"

namespace ctri {

// Stacked world-space constraints A·X <= b, four rows per observation in
// observation order.
struct ConstraintSystem {
  Mat A;  // rows x 3
  std::vector<double> b;
};

struct TriangulationResult {
  WorldPoint X{};
  std::string algorithm;
  int iterations{0};
  // Achieved objective where the algorithm defines one (l2 cost, summed
  // plane distance, minimax radius); NaN otherwise.
  double objective{0.0};
  bool has_objective{false};
  bool consistent{false};
  // False when an iterative method stopped on its fallback path and
  // returned the best iterate seen.
  bool converged{true};
};

// Normalized direct linear transform over the stacked 2M x 4 system.
TriangulationResult triangulate_linear(const Instance& inst);

// Gauss-Newton minimization of the summed squared reprojection error,
// started at init (which must have positive depth in every camera).
TriangulationResult triangulate_l2_refine(const Instance& inst,
                                          const WorldPoint& init);

// Stacks the four half-space constraints per camera that describe the
// world-space consistency region for square (q=inf) noise.
ConstraintSystem build_consistency_lp(const Instance& inst);

// Solves min c^T X over the consistent polytope; c = 0 asks for any
// feasible point. Throws InfeasibleError when the region is empty.
TriangulationResult triangulate_consistent_lp(const Instance& inst,
                                              const Vec3& c = Vec3{});

// Drops rows whose removal leaves the feasible set unchanged (standard
// one-LP-per-row redundancy test). Throws InfeasibleError on infeasible
// input.
ConstraintSystem remove_redundant_constraints(const ConstraintSystem& sys);

// Minimizes the average distance to the non-redundant bounding planes over
// the consistent polytope (LP with one auxiliary variable per plane).
TriangulationResult triangulate_avg_distance_lp(const Instance& inst);

// Same objective over an arbitrary feasible system A·X <= b. The returned
// consistent flag reports satisfaction of the system itself; hint recenters
// the initial feasibility solve.
TriangulationResult triangulate_avg_distance_lp(const ConstraintSystem& sys,
                                                const Vec3& hint = Vec3{});

// Minimax triangulation: bisection on the radius gamma of the feasibility
// problem "some X reprojects within gamma of every observation", measured
// in the image-space norm p_prime (2 or kInfNorm).
TriangulationResult triangulate_minimax(const Instance& inst, int p_prime);

// Summed squared l2 reprojection error; +inf when X sits at or behind any
// camera's principal plane.
double l2_cost(const Instance& inst, const WorldPoint& X);

// Largest per-camera reprojection residual in norm p_prime; +inf behind a
// camera.
double max_residual(const Instance& inst, const WorldPoint& X, int p_prime);

}  // namespace ctri
