#include "ctri/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ctri/errors.hpp"

namespace ctri {

namespace {

void check_finite(const Mat& A, const char* who) {
  for (double v : A.data)
    if (!std::isfinite(v))
      throw ConfigError(std::string(who) + ": non-finite matrix entry");
}

void check_finite(const std::vector<double>& v, const char* who) {
  for (double x : v)
    if (!std::isfinite(x))
      throw ConfigError(std::string(who) + ": non-finite vector entry");
}

}  // namespace

void symmetric_eigen(const Mat& S, std::vector<double>& eigenvalues,
                     Mat& eigenvectors) {
  const std::size_t n = S.rows;
  if (n == 0 || S.cols != n)
    throw ConfigError("symmetric_eigen: matrix must be square");
  check_finite(S, "symmetric_eigen");

  Mat A = S;
  Mat V(n, n);
  for (std::size_t i = 0; i < n; ++i) V(i, i) = 1.0;

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale += std::abs(A(i, i));
  scale = std::max(scale, 1.0);

  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(A(p, q));
    if (off < 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = A(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        A(p, p) -= t * apq;
        A(q, q) += t * apq;
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          double arp = A(r, p), arq = A(r, q);
          A(r, p) = c * arp - s * arq;
          A(p, r) = A(r, p);
          A(r, q) = s * arp + c * arq;
          A(q, r) = A(r, q);
        }
        for (std::size_t r = 0; r < n; ++r) {
          double vrp = V(r, p), vrq = V(r, q);
          V(r, p) = c * vrp - s * vrq;
          V(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(A(p, q));
    if (off >= 1e-10 * scale)
      throw NumericalError("symmetric_eigen: Jacobi sweeps did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return A(a, a) < A(b, b); });

  eigenvalues.resize(n);
  eigenvectors = Mat(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    eigenvalues[k] = A(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) eigenvectors(r, k) = V(r, order[k]);
  }
}

std::vector<double> nullspace_min(const Mat& A) {
  if (A.rows < 2)
    throw ConfigError("nullspace_min: need at least 2 rows, got " +
                      std::to_string(A.rows));
  if (A.cols < 2) throw ConfigError("nullspace_min: need at least 2 columns");
  check_finite(A, "nullspace_min");

  const std::size_t n = A.cols;
  Mat S(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < A.rows; ++r) s += A(r, i) * A(r, j);
      S(i, j) = s;
      S(j, i) = s;
    }

  std::vector<double> lam;
  Mat V;
  symmetric_eigen(S, lam, V);

  double lam_max = std::max(lam.back(), 0.0);
  if (lam[1] <= 1e-12 * std::max(lam_max, 1e-30))
    throw NumericalError(
        "nullspace_min: smallest singular value is not isolated (kernel "
        "dimension >= 2)");

  std::vector<double> v(n);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = V(i, 0);
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;

  for (std::size_t i = n; i-- > 0;) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0.0)
        for (double& x : v) x = -x;
      break;
    }
  }
  return v;
}

namespace {

// Dense tableau for the standard-form problem built out of
// min c^T x s.t. A x <= b with free x. Layout of the nonnegative
// variables: u (x = u - w) | w | slacks | artificials.
struct Tableau {
  std::size_t m, ncols;
  Mat T;                   // m x (ncols+1), last column is the RHS
  std::vector<double> obj; // ncols+1, last entry is -(objective value)
  std::vector<int> basis;  // basic variable per row

  void pivot(std::size_t row, std::size_t col) {
    double piv = T(row, col);
    double inv = 1.0 / piv;
    for (std::size_t j = 0; j <= ncols; ++j) T(row, j) *= inv;
    T(row, col) = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row) continue;
      double f = T(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) T(i, j) -= f * T(row, j);
      T(i, col) = 0.0;
    }
    double f = obj[col];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= ncols; ++j) obj[j] -= f * T(row, j);
      obj[col] = 0.0;
    }
    basis[row] = static_cast<int>(col);
  }

  // Pivots to optimality over the columns [0, eligible). Bland's rule on
  // both choices: entering variable is the smallest index with reduced cost
  // < -1e-9, leaving row has the minimum ratio with exact ties broken by
  // the smallest basic-variable index. The variable-index tie-break is what
  // prevents cycling on degenerate vertices (ratio 0 rows tie exactly).
  // Returns false on unboundedness.
  bool optimize(std::size_t eligible) {
    const double tol = 1e-9;
    const std::size_t cap = 2000 + 200 * (m + ncols);
    for (std::size_t iter = 0; iter < cap; ++iter) {
      std::size_t enter = eligible;
      for (std::size_t j = 0; j < eligible; ++j) {
        if (obj[j] < -tol) {
          enter = j;
          break;
        }
      }
      if (enter == eligible) return true;

      std::size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (T(i, enter) > tol) {
          double ratio = T(i, ncols) / T(i, enter);
          if (ratio < best ||
              (ratio == best && leave < m && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
    throw NumericalError("solve_lp: pivot iteration cap exceeded");
  }
};

}  // namespace

LpResult solve_lp(const std::vector<double>& c, const Mat& A,
                  const std::vector<double>& b) {
  const std::size_t m = A.rows, n = A.cols;
  if (m < 1 || n < 1) throw ConfigError("solve_lp: empty system");
  if (b.size() != m || c.size() != n)
    throw ConfigError("solve_lp: dimension mismatch between c, A, b");
  check_finite(A, "solve_lp");
  check_finite(b, "solve_lp");
  check_finite(c, "solve_lp");

  std::size_t n_art = 0;
  for (double bi : b)
    if (bi < 0.0) ++n_art;

  Tableau tab;
  tab.m = m;
  tab.ncols = 2 * n + m + n_art;
  tab.T = Mat(m, tab.ncols + 1);
  tab.basis.assign(m, -1);

  const std::size_t slack0 = 2 * n;
  const std::size_t art0 = 2 * n + m;
  std::size_t art = art0;
  for (std::size_t i = 0; i < m; ++i) {
    double sign = (b[i] < 0.0) ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      tab.T(i, j) = sign * A(i, j);
      tab.T(i, n + j) = -sign * A(i, j);
    }
    tab.T(i, slack0 + i) = sign;
    tab.T(i, tab.ncols) = sign * b[i];
    if (sign < 0.0) {
      tab.T(i, art) = 1.0;
      tab.basis[i] = static_cast<int>(art);
      ++art;
    } else {
      tab.basis[i] = static_cast<int>(slack0 + i);
    }
  }

  LpResult out;

  if (n_art > 0) {
    // Phase one: minimize the sum of artificial variables.
    tab.obj.assign(tab.ncols + 1, 0.0);
    for (std::size_t j = art0; j < tab.ncols; ++j) tab.obj[j] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] >= static_cast<int>(art0)) {
        for (std::size_t j = 0; j <= tab.ncols; ++j)
          tab.obj[j] -= tab.T(i, j);
      }
    }
    if (!tab.optimize(tab.ncols))
      throw NumericalError("solve_lp: phase one reported unbounded");
    double phase1 = -tab.obj[tab.ncols];
    if (phase1 > 1e-9) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    // Drive any zero-valued artificial out of the basis; a row where no
    // structural column can enter is redundant and harmless to leave as is
    // because its artificial is pinned at zero by the equality.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] < static_cast<int>(art0)) continue;
      for (std::size_t j = 0; j < art0; ++j) {
        if (std::abs(tab.T(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase two over structural columns only (artificials may not re-enter).
  tab.obj.assign(tab.ncols + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    tab.obj[j] = c[j];
    tab.obj[n + j] = -c[j];
  }
  for (std::size_t i = 0; i < m; ++i) {
    int bi = tab.basis[i];
    if (bi < 0 || bi >= static_cast<int>(art0)) continue;
    double cost = 0.0;
    if (bi < static_cast<int>(n))
      cost = c[bi];
    else if (bi < static_cast<int>(2 * n))
      cost = -c[bi - n];
    if (cost == 0.0) continue;
    for (std::size_t j = 0; j <= tab.ncols; ++j)
      tab.obj[j] -= cost * tab.T(i, j);
  }
  if (!tab.optimize(art0)) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    int bi = tab.basis[i];
    double val = tab.T(i, tab.ncols);
    if (bi >= 0 && bi < static_cast<int>(n))
      x[bi] += val;
    else if (bi >= static_cast<int>(n) && bi < static_cast<int>(2 * n))
      x[bi - n] -= val;
  }

  out.status = LpStatus::Optimal;
  out.x = x;
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * x[j];
  return out;
}

std::vector<double> least_squares(const Mat& J, const std::vector<double>& r) {
  const std::size_t m = J.rows, n = J.cols;
  if (m < n) throw ConfigError("least_squares: need rows >= cols");
  if (r.size() != m) throw ConfigError("least_squares: dimension mismatch");
  check_finite(J, "least_squares");
  check_finite(r, "least_squares");

  Mat S(n, n);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += J(k, i) * J(k, j);
      S(i, j) = s;
      S(j, i) = s;
    }
    for (std::size_t k = 0; k < m; ++k) rhs[i] -= J(k, i) * r[k];
  }

  std::vector<double> lam;
  Mat V;
  symmetric_eigen(S, lam, V);
  if (lam[0] <= 0.0 || lam.back() / lam[0] >= 1e12)
    throw NumericalError("least_squares: normal equations are singular");

  // s = V diag(1/lambda) V^T rhs
  std::vector<double> tmp(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += V(i, k) * rhs[i];
    tmp[k] = s / lam[k];
  }
  std::vector<double> sol(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += V(i, k) * tmp[k];
    sol[i] = s;
  }
  return sol;
}

}  // namespace ctri
