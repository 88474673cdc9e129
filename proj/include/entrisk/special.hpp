#pragma once

namespace entrisk {

// Standard normal cdf via erfc.
double normal_cdf(double x);

// Standard normal pdf.
double normal_pdf(double x);

// Inverse standard normal cdf. Rational approximation refined by a
// Halley step on the cdf; absolute error well below 1e-9 on (0,1).
// Throws std::invalid_argument outside (0,1).
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Inverse of P(a, .): smallest x with P(a, x) = p. Relative error <= 1e-10.
double gamma_p_inv(double a, double p);

}  // namespace entrisk
