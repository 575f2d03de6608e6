#include "acsbm/link.hpp"

#include <cmath>

#include "acsbm/errors.hpp"

namespace acsbm {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;

double polyval(const double* c, int n, double x) {
  double r = c[0];
  for (int i = 1; i < n; ++i) r = r * x + c[i];
  return r;
}

// Normal quantile: Acklam's rational approximation (about 1e-9 relative),
// then two Halley steps against erfc.
double normal_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01, 1.0};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00, 1.0};
  constexpr double low = 0.02425;
  double x;
  if (p < low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = polyval(c, 6, q) / polyval(d, 5, q);
  } else if (p > 1.0 - low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -polyval(c, 6, q) / polyval(d, 5, q);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = q * polyval(a, 6, r) / polyval(b, 6, r);
  }
  for (int step = 0; step < 2; ++step) {
    const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
    const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}
}  // namespace

double LinkFunction::forward(double p) const {
  switch (kind_) {
    case LinkKind::identity:
      return p;
    case LinkKind::log:
      return std::log(p);
    case LinkKind::logit:
      return std::log(p) - std::log1p(-p);
    case LinkKind::probit:
      if (p <= 0.0) return -HUGE_VAL;
      if (p >= 1.0) return HUGE_VAL;
      return normal_quantile(p);
  }
  return p;
}

double LinkFunction::inverse(double x) const {
  switch (kind_) {
    case LinkKind::identity:
      return x;
    case LinkKind::log:
      return std::exp(x);
    case LinkKind::logit:
      // Split by sign so neither branch overflows.
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      return std::exp(x) / (1.0 + std::exp(x));
    case LinkKind::probit:
      return 0.5 * std::erfc(-x / kSqrt2);
  }
  return x;
}

std::string_view LinkFunction::name() const noexcept {
  switch (kind_) {
    case LinkKind::identity:
      return "identity";
    case LinkKind::log:
      return "log";
    case LinkKind::logit:
      return "logit";
    case LinkKind::probit:
      return "probit";
  }
  return "log";
}

LinkFunction LinkFunction::parse(std::string_view name) {
  if (name == "identity") return LinkFunction(LinkKind::identity);
  if (name == "log") return LinkFunction(LinkKind::log);
  if (name == "logit") return LinkFunction(LinkKind::logit);
  if (name == "probit") return LinkFunction(LinkKind::probit);
  throw ConfigError("unknown link function '" + std::string(name) + "'");
}

}  // namespace acsbm
