#pragma once

namespace tmerton {

// Standard normal CDF. Monotone; Phi(-x) == 1 - Phi(x) up to rounding.
double normal_cdf(double x);

// Standard normal density.
double normal_pdf(double x);

// Inverse of normal_cdf on the open interval (0, 1). Rational seed plus one
// Halley step against the analytic CDF; accurate to a few ulps.
double normal_icdf(double p);

}  // namespace tmerton
