//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "comove/fit.hpp"

#include <algorithm>
#include <cmath>

#include "comove/error.hpp"

namespace comove {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) {
    Fail(ErrorCode::kInvalidInput, "line fit needs at least two points");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "line fit needs distinct abscissae");
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.rss += fit.residuals[i] * fit.residuals[i];
  }
  fit.r2 = syy > 0.0 ? 1.0 - fit.rss / syy : 1.0;
  if (n > 2) {
    const double s2 = fit.rss / static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(s2 / sxx);
    fit.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return fit;
}

ConstantFit fit_constant(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n == 0) {
    Fail(ErrorCode::kInvalidInput, "constant fit needs at least one point");
  }
  ConstantFit fit;
  for (const double v : y) fit.mean += v;
  fit.mean /= static_cast<double>(n);
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = y[i] - fit.mean;
    fit.rss += fit.residuals[i] * fit.residuals[i];
  }
  if (n > 1) {
    fit.mean_se = std::sqrt(fit.rss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    Fail(ErrorCode::kInvalidInput, "median of an empty set");
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace comove
