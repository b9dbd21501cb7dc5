#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace ctri {

// Dense row-major matrix; just enough linear algebra for this library.
struct Mat {
  std::size_t rows{0}, cols{0};
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return data[r * cols + c];
  }
};

// Eigendecomposition of a symmetric n x n matrix by cyclic Jacobi sweeps.
// Returns eigenvalues ascending with matching unit eigenvectors (columns of
// V). Throws NumericalError if the sweeps fail to converge.
void symmetric_eigen(const Mat& S, std::vector<double>& eigenvalues,
                     Mat& eigenvectors);

// Unit right-singular vector of A for the smallest singular value, computed
// from the eigendecomposition of A^T A. Sign convention: the last entry of
// the result whose magnitude exceeds 1e-12 is positive. Throws
// NumericalError when the minimal eigenvalue of A^T A is not isolated
// (gap ratio below 1e-12 relative to the largest eigenvalue) -- callers
// that need the kernel dimension should inspect the eigenvalues themselves
// via symmetric_eigen.
std::vector<double> nullspace_min(const Mat& A);

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status{LpStatus::Infeasible};
  std::vector<double> x;
  double objective{0.0};
};

// Solves min c^T x subject to A x <= b over free x with a dense two-phase
// primal simplex (Bland's rule, so no cycling). Free variables are split
// into differences of nonnegative ones internally. Infeasible is reported
// when the phase-one optimum exceeds 1e-9.
LpResult solve_lp(const std::vector<double>& c, const Mat& A,
                  const std::vector<double>& b);

// Least-squares solution of J s = r via the normal equations. Throws
// NumericalError when J^T J is numerically singular.
std::vector<double> least_squares(const Mat& J, const std::vector<double>& r);

}  // namespace ctri
