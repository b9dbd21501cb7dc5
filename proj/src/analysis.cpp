#include "ctri/analysis.hpp"

#include <cmath>

#include "ctri/errors.hpp"

namespace ctri {

SlopeFit fit_loglog_slope(const DecayCurve& curve, int m_min, int m_max) {
  if (m_min > m_max) throw ConfigError("empty camera-count range");
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (const DecayPoint& pt : curve.points) {
    if (pt.m < m_min || pt.m > m_max) continue;
    if (!(pt.mean_sq_err > 0.0) || !std::isfinite(pt.mean_sq_err)) {
      ++fit.points_dropped;
      continue;
    }
    xs.push_back(std::log10(static_cast<double>(pt.m)));
    ys.push_back(std::log10(pt.mean_sq_err));
    if (fit.points_used == 0) {
      fit.m_min = pt.m;
      fit.m_max = pt.m;
    } else {
      fit.m_min = std::min(fit.m_min, pt.m);
      fit.m_max = std::max(fit.m_max, pt.m);
    }
    ++fit.points_used;
  }
  if (fit.points_used < 2)
    throw ConfigError("slope fit needs at least two positive points");

  const double n = static_cast<double>(fit.points_used);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < fit.points_used; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-12 * (1.0 + n * sxx))
    throw ConfigError("slope fit needs distinct camera counts");
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;

  double ss = 0.0;
  for (int i = 0; i < fit.points_used; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  return fit;
}

double lower_bound_reference(int m, int n, double vol_roi) {
  if (m < 1 || n < 1) throw ConfigError("need m >= 1 cameras, n >= 1 pixels");
  if (!(vol_roi > 0.0) || !std::isfinite(vol_roi))
    throw ConfigError("ROI volume must be positive");
  const double np1 = static_cast<double>(n) + 1.0;
  const double L = static_cast<double>(m) * np1 * np1;
  const double regions =
      1.0 + L + L * (L - 1.0) / 2.0 + L * (L - 1.0) * (L - 2.0) / 6.0;
  const double pi = 3.14159265358979323846;
  const double K = (2.0 * pi * pi / 5.0) * std::cbrt(3.0 / (4.0 * pi));
  return K * std::pow(vol_roi / regions, 2.0 / 3.0);
}

}  // namespace ctri
