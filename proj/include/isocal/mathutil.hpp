#pragma once

namespace isocal {

// Standard normal CDF, accurate to a few ulp over the full double range.
double normal_cdf(double z);

// Standard normal quantile (inverse CDF) for p in (0,1), Wichura's AS241
// double-precision rational approximation. Throws std::domain_error outside
// (0,1).
double normal_quantile(double p);

}  // namespace isocal
