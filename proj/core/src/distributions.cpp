#include "topolearn/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace topolearn::dist {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

[[noreturn]] void domain(const std::string& what) { throw std::domain_error(what); }

// lgamma(a) - [(a - 1/2) ln a - a + ln(2 pi)/2], valid for a >= 10.
double stirling_correction(double a) {
  const double r = 1.0 / a;
  const double r2 = r * r;
  return r * (1.0 / 12 +
              r2 * (-1.0 / 360 +
                    r2 * (1.0 / 1260 +
                          r2 * (-1.0 / 1680 +
                                r2 * (1.0 / 1188 + r2 * (-691.0 / 360360 + r2 * (1.0 / 156)))))));
}

// ln( x^a e^-x / Gamma(a) ), the common prefactor of P and Q.
double log_gamma_prefactor(double a, double x) {
  if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
  const double t = (x - a) / a;
  // far below the mode 1 + t cancels, so take the log of x / a directly
  const double core = x < 0.5 * a ? std::log(x / a) - t : std::log1p(t) - t;
  return a * core + 0.5 * std::log(a / (2.0 * std::numbers::pi)) - stirling_correction(a);
}

double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps * 0.5) break;
  }
  return sum * std::exp(log_gamma_prefactor(a, x));
}

// Continued fraction for Q(a, x), modified Lentz.
double gamma_q_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps * 0.5) break;
  }
  return std::exp(log_gamma_prefactor(a, x)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) domain("incomplete gamma: shape must be positive");
  if (!(x >= 0.0)) domain("incomplete gamma: x must be non-negative");
}

// Continued fraction for the incomplete beta, modified Lentz.
double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps * 0.5) break;
  }
  return h;
}

// I_x(a, b) given both x and y = 1 - x, so callers can pass an exact complement.
double beta_inc_xy(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_cf(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_cf(b, a, y) / b;
}

// Solves tail(x) == target on [0, inf) for a monotone tail function, using
// Newton steps on log(tail) safeguarded by a shrinking bracket.
template <typename Tail, typename Density>
double invert_monotone(Tail tail, Density density, bool increasing, double target, double guess) {
  double lo = 0.0;
  double hi = std::max(guess, 1.0);
  auto below = [&](double v) { return increasing ? v < target : v > target; };
  for (int k = 0; below(tail(hi)); ++k) {
    lo = hi;
    hi *= 2.0;
    if (k > 2000) domain("quantile search did not bracket the target");
  }
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  const double log_target = std::log(target);
  for (int it = 0; it < 400; ++it) {
    const double fx = tail(x);
    if (fx == target) return x;
    if (below(fx))
      lo = x;
    else
      hi = x;
    double next = std::numeric_limits<double>::quiet_NaN();
    const double g = density(x);
    if (fx > 0.0 && g > 0.0) {
      const double slope = (increasing ? g : -g) / fx;
      next = x - (std::log(fx) - log_target) / slope;
    }
    if (!(next > lo && next < hi)) next = (lo > 0.0 && hi > 8.0 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * kEps * next || hi - lo <= 4.0 * kEps * hi) return next;
    x = next;
  }
  return x;
}

// Sum over k of Poisson(k; lambda) * term(k), walking outward from the mode.
// term(k) must be monotone in k with the given direction so the tail bound holds.
template <typename Term>
double poisson_mixture(double lambda, Term term, bool term_decreasing) {
  const double k0 = std::floor(lambda);
  const double log_w0 = -lambda + k0 * std::log(lambda) - std::lgamma(k0 + 1.0);
  const double w0 = std::exp(log_w0);
  double sum = w0 * term(k0);
  // upward
  double w = w0;
  for (double k = k0 + 1.0;; k += 1.0) {
    w *= lambda / k;
    const double tk = term(k);
    sum += w * tk;
    const double ratio = lambda / (k + 1.0);
    const double rest = w * ratio / (1.0 - ratio);
    const double bound = rest * (term_decreasing ? tk : 1.0);
    if (bound <= 1e-15 * sum || w == 0.0) break;
    if (k - k0 > 1e7) break;
  }
  // downward
  w = w0;
  for (double k = k0 - 1.0; k >= 0.0; k -= 1.0) {
    w *= (k + 1.0) / lambda;
    const double tk = term(k);
    sum += w * tk;
    const double ratio = k / lambda;
    const double rest = ratio < 1.0 ? w * ratio / (1.0 - ratio) : w * k;
    const double bound = rest * (term_decreasing ? 1.0 : tk);
    if (bound <= 1e-15 * sum || w == 0.0) break;
  }
  return sum;
}

void check_dof(int d, const char* name) {
  if (d < 1) domain(std::string(name) + ": degrees of freedom must be >= 1");
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) domain("beta: arguments must be positive");
  const double small = std::min(a, b);
  const double big = std::max(a, b);
  if (big < 10.0) return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  if (small >= 10.0) {
    const double s = a + b;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (small - 0.5) * std::log(small / s) -
           (big - 0.5) * std::log1p(small / big) - 0.5 * std::log(s) + stirling_correction(a) +
           stirling_correction(b) - stirling_correction(s);
  }
  // lgamma(big) - lgamma(big + small) without cancellation
  const double diff = -(big - 0.5) * std::log1p(small / big) - small * std::log(big + small) + small +
                      stirling_correction(big) - stirling_correction(big + small);
  return std::lgamma(small) + diff;
}

double beta_inc(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) domain("incomplete beta: shapes must be positive");
  if (!(x >= 0.0 && x <= 1.0)) domain("incomplete beta: x outside [0,1]");
  return beta_inc_xy(a, b, x, 1.0 - x);
}

double chi2_cdf(double x, int d) {
  check_dof(d, "chi2_cdf");
  if (!(x >= 0.0)) domain("chi2_cdf: x must be non-negative");
  return gamma_p(0.5 * d, 0.5 * x);
}

double chi2_sf(double x, int d) {
  check_dof(d, "chi2_sf");
  if (!(x >= 0.0)) domain("chi2_sf: x must be non-negative");
  return gamma_q(0.5 * d, 0.5 * x);
}

double chi2_pdf(double x, int d) {
  check_dof(d, "chi2_pdf");
  if (!(x >= 0.0)) domain("chi2_pdf: x must be non-negative");
  if (x == 0.0) return d == 2 ? 0.5 : (d < 2 ? std::numeric_limits<double>::infinity() : 0.0);
  const double a = 0.5 * d;
  return 0.5 * std::exp(log_gamma_prefactor(a, 0.5 * x) - std::log(0.5 * x));
}

double chi2_inv(double p, int d) {
  check_dof(d, "chi2_inv");
  if (!(p >= 0.0 && p < 1.0)) domain("chi2_inv: p must lie in [0,1)");
  if (p == 0.0) return 0.0;
  if (p > 0.5) return chi2_inv_upper(1.0 - p, d);
  auto tail = [d](double x) { return chi2_cdf(x, d); };
  auto dens = [d](double x) { return chi2_pdf(x, d); };
  return invert_monotone(tail, dens, true, p, static_cast<double>(d));
}

double chi2_inv_upper(double q, int d) {
  check_dof(d, "chi2_inv_upper");
  if (!(q > 0.0 && q <= 1.0)) domain("chi2_inv_upper: q must lie in (0,1]");
  if (q == 1.0) return 0.0;
  if (q > 0.5) return chi2_inv(1.0 - q, d);
  auto tail = [d](double x) { return chi2_sf(x, d); };
  auto dens = [d](double x) { return chi2_pdf(x, d); };
  return invert_monotone(tail, dens, false, q, static_cast<double>(d) + 2.0);
}

double noncentral_chi2_cdf(double x, int d, double nc) {
  check_dof(d, "noncentral_chi2_cdf");
  if (!(x >= 0.0) || !(nc >= 0.0) || !std::isfinite(nc)) domain("noncentral_chi2_cdf: bad argument");
  if (nc == 0.0) return chi2_cdf(x, d);
  if (x == 0.0) return 0.0;
  const double half = 0.5 * x;
  auto term = [&](double k) { return gamma_p(0.5 * d + k, half); };
  return std::min(1.0, poisson_mixture(0.5 * nc, term, true));
}

double noncentral_chi2_sf(double x, int d, double nc) {
  check_dof(d, "noncentral_chi2_sf");
  if (!(x >= 0.0) || !(nc >= 0.0) || !std::isfinite(nc)) domain("noncentral_chi2_sf: bad argument");
  if (nc == 0.0) return chi2_sf(x, d);
  if (x == 0.0) return 1.0;
  const double half = 0.5 * x;
  auto term = [&](double k) { return gamma_q(0.5 * d + k, half); };
  return std::min(1.0, poisson_mixture(0.5 * nc, term, false));
}

double f_cdf(double x, int d1, int d2) {
  check_dof(d1, "f_cdf");
  check_dof(d2, "f_cdf");
  if (!(x >= 0.0)) domain("f_cdf: x must be non-negative");
  if (std::isinf(x)) return 1.0;
  const double den = d1 * x + d2;
  return beta_inc_xy(0.5 * d1, 0.5 * d2, d1 * x / den, d2 / den);
}

double f_sf(double x, int d1, int d2) {
  check_dof(d1, "f_sf");
  check_dof(d2, "f_sf");
  if (!(x >= 0.0)) domain("f_sf: x must be non-negative");
  if (std::isinf(x)) return 0.0;
  const double den = d1 * x + d2;
  return beta_inc_xy(0.5 * d2, 0.5 * d1, d2 / den, d1 * x / den);
}

namespace {
double f_pdf(double x, int d1, int d2) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * d1;
  const double b = 0.5 * d2;
  const double r = static_cast<double>(d1) / d2;
  return std::exp(a * std::log(r) + (a - 1.0) * std::log(x) - (a + b) * std::log1p(r * x) - log_beta(a, b));
}
}  // namespace

double f_inv(double p, int d1, int d2) {
  check_dof(d1, "f_inv");
  check_dof(d2, "f_inv");
  if (!(p >= 0.0 && p < 1.0)) domain("f_inv: p must lie in [0,1)");
  if (p == 0.0) return 0.0;
  if (p > 0.5) return f_inv_upper(1.0 - p, d1, d2);
  auto tail = [=](double x) { return f_cdf(x, d1, d2); };
  auto dens = [=](double x) { return f_pdf(x, d1, d2); };
  return invert_monotone(tail, dens, true, p, 1.0);
}

double f_inv_upper(double q, int d1, int d2) {
  check_dof(d1, "f_inv_upper");
  check_dof(d2, "f_inv_upper");
  if (!(q > 0.0 && q <= 1.0)) domain("f_inv_upper: q must lie in (0,1]");
  if (q == 1.0) return 0.0;
  if (q > 0.5) return f_inv(1.0 - q, d1, d2);
  auto tail = [=](double x) { return f_sf(x, d1, d2); };
  auto dens = [=](double x) { return f_pdf(x, d1, d2); };
  return invert_monotone(tail, dens, false, q, 1.0);
}

// Q1(a, b) = P[X > b^2] for X noncentral chi-square with 2 dof and
// noncentrality a^2, evaluated as a Poisson mixture of incomplete gamma terms.
// Switchover: for b^2 at or beyond the mean (2 + a^2) the upper-tail series is
// summed directly; below it the lower-tail series is summed and complemented,
// so the summed series never exceeds about one half.
double marcum_q1(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a)) domain("marcum_q1: arguments must be non-negative");
  if (b == 0.0) return 1.0;
  if (std::isinf(b)) return 0.0;
  if (a == 0.0) return std::exp(-0.5 * b * b);
  const double b2 = b * b;
  const double a2 = a * a;
  if (b2 >= a2 + 2.0) return noncentral_chi2_sf(b2, 2, a2);
  return 1.0 - noncentral_chi2_cdf(b2, 2, a2);
}

}  // namespace topolearn::dist
