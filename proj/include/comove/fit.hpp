//
// comove - co-moving stereo toolkit
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <vector>

namespace comove {

// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
  double slope_se = 0.0;
  double rss = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
};

// Ordinary least squares y = mean.
struct ConstantFit {
  double mean = 0.0;
  double mean_se = 0.0;
  double rss = 0.0;
  std::vector<double> residuals;
};

// Needs at least two distinct x values (kInvalidInput otherwise).
LinearFit fit_line(std::span<const double> x, std::span<const double> y);
ConstantFit fit_constant(std::span<const double> y);

double median(std::vector<double> values);

}  // namespace comove
