#ifndef COUNTNET_MATH_HPP
#define COUNTNET_MATH_HPP

// Scalar numerics used everywhere else: standard normal pdf/cdf/quantile with
// log-scale versions that stay finite deep in the tails, a stable
// log(1 - exp(x)), and the regularized incomplete gamma needed for
// chi-square tail probabilities.

#include <stdexcept>
#include <string>

namespace countnet {

// Raised on malformed inputs (bad files, inconsistent dimensions, invalid
// configuration). CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a computation cannot be completed to tolerance (failed
// fixed point, singular system, diverging optimizer). CLI maps it to exit
// code 2.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace math {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double log_sqrt_2pi = 0.91893853320467274178;  // log sqrt(2*pi)

double norm_pdf(double x);
double norm_logpdf(double x);

// Phi(x) via erfc, accurate in both tails.
double norm_cdf(double x);

// log Phi(x): erfc based for x > -20, Mills-ratio asymptotic series below.
double norm_logcdf(double x);

// Inverse of norm_cdf (Wichura's PPND16). Requires 0 < p < 1.
double norm_quantile(double p);

// log(1 - exp(a)) for a < 0 without cancellation.
double log1mexp(double a);

// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// P(X > x) for X ~ chi-square(df).
double chi2_sf(double x, double df);

// Numerically stable logistic 1 / (1 + exp(-x)) and its log.
double logistic(double x);
double log_logistic(double x);

}  // namespace math
}  // namespace countnet

#endif
