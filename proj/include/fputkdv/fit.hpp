#pragma once

// Log-log least squares and small summary statistics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fputkdv {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // ln y ≈ intercept + slope · ln x
  double residual = 0.0;   // RMS of the ln y residuals
};

/// Least-squares line through (ln x, ln y). Needs two distinct positive x.
inline SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("fit_slope: need at least two points");
  double sx = 0.0, sy = 0.0;
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("fit_slope: x and y must be > 0");
    logs.emplace_back(std::log(x), std::log(y));
    sx += logs.back().first;
    sy += logs.back().second;
  }
  const double n = static_cast<double>(logs.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (!(sxx > 1e-24 * n)) throw std::invalid_argument("fit_slope: degenerate x range");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (const auto& [lx, ly] : logs) {
    const double r = ly - (f.intercept + f.slope * lx);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

inline SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  return fit_slope(std::span<const std::pair<double, double>>(points));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// max/min of a positive sample; 1 when every entry is zero.
inline double spread(std::span<const double> v) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double x : v) {
    lo = std::min(lo, std::abs(x));
    hi = std::max(hi, std::abs(x));
  }
  if (hi == 0.0) return 1.0;
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo;
}

}  // namespace fputkdv
