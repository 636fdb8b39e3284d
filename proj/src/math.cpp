#include "countnet/math.hpp"

#include <cmath>
#include <limits>

namespace countnet {
namespace math {

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x - log_sqrt_2pi);
}

double norm_logpdf(double x) {
  return -0.5 * x * x - log_sqrt_2pi;
}

double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

double norm_logcdf(double x) {
  if (x > -20.0) {
    // erfc keeps full precision for moderate arguments; for x not too far
    // below zero the cdf itself is representable.
    return std::log(norm_cdf(x));
  }
  // Mills ratio expansion: Phi(x) = phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - ...).
  const double x2 = x * x;
  const double corr = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)
      + 105.0 / (x2 * x2 * x2 * x2);
  return norm_logpdf(x) - std::log(-x) + std::log(corr);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw NumericalError("norm_quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  // Wichura's algorithm AS 241, the double precision variant.
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
            + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
            + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
            + 1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
            + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
            + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
            + 4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
            + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
            + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
            + 4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
            + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
            + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
            + 2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
            + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
            + 5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
            + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
            + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
            + 5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

double log1mexp(double a) {
  if (a >= 0.0) {
    if (a == 0.0) return -std::numeric_limits<double>::infinity();
    throw NumericalError("log1mexp requires a <= 0");
  }
  // Split at -log 2 to keep both branches well conditioned.
  if (a > -0.6931471805599453) return std::log(-std::expm1(a));
  return std::log1p(-std::exp(a));
}

namespace {

// Series expansion for P(a, x), x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericalError("incomplete gamma series failed to converge");
}

// Continued fraction for Q(a, x), x >= a + 1 (modified Lentz).
double gamma_q_cf(double a, double x) {
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) {
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericalError("incomplete gamma continued fraction failed to converge");
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) {
    throw NumericalError("gamma_p requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) {
    throw NumericalError("gamma_q requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, double df) {
  if (df <= 0.0) throw NumericalError("chi2_sf requires df > 0");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_logistic(double x) {
  // log(1/(1+exp(-x))) = -log1p(exp(-x)), guarded against overflow.
  if (x > 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace math
}  // namespace countnet
