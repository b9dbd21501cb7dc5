#pragma once

#include <limits>

#include "ctri/simulate.hpp"

namespace ctri {

struct SlopeFit {
  double slope{0.0};
  double intercept{0.0};
  double residual_rms{0.0};
  int m_min{0};
  int m_max{0};
  int points_used{0};
  int points_dropped{0};  // nonpositive errors cannot enter the log fit
};

// Ordinary least squares on (log10 M, log10 mean_sq_err) restricted to
// m_min <= M <= m_max. Points with nonpositive error are dropped and
// counted; fewer than two usable points is a ConfigError.
SlopeFit fit_loglog_slope(const DecayCurve& curve, int m_min = 8,
                          int m_max = std::numeric_limits<int>::max());

// Volume-argument floor on the mean squared error of any estimator that
// maps measurements to points: K * (vol / regions(M, N))^(2/3) with
// regions(M, N) the number of sign regions cut by L = M*(N+1)^2
// hyperplanes in 3-D, i.e. C(L,0)+C(L,1)+C(L,2)+C(L,3).
double lower_bound_reference(int m, int n, double vol_roi);

}  // namespace ctri
