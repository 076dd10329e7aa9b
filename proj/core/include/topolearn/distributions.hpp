// Special functions used by the detectors: central and noncentral chi-square,
// Fisher F quantiles and Marcum's Q1.  All functions are pure and reentrant and
// throw std::domain_error on arguments outside their domain.
#pragma once

namespace topolearn::dist {

// Regularized incomplete gamma P(a, x) and its complement Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);
double log_beta(double a, double b);

double chi2_cdf(double x, int d);
double chi2_sf(double x, int d);
double chi2_pdf(double x, int d);
// Quantile for lower-tail probability p in [0, 1).
double chi2_inv(double p, int d);
// Quantile for upper-tail probability q in (0, 1]; exact for tiny q.
double chi2_inv_upper(double q, int d);

double noncentral_chi2_cdf(double x, int d, double nc);
double noncentral_chi2_sf(double x, int d, double nc);

double f_cdf(double x, int d1, int d2);
double f_sf(double x, int d1, int d2);
double f_inv(double p, int d1, int d2);
double f_inv_upper(double q, int d1, int d2);

double marcum_q1(double a, double b);

}  // namespace topolearn::dist
