#pragma once

namespace cryptospan::dist {

/// Regularized lower incomplete gamma P(a, x), relative accuracy ~1e-14.
double gamma_p(double a, double x);
double gamma_q(double a, double x);  // 1 - P(a, x)

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

double chi2_sf(double x, double dof);            // upper tail
double f_sf(double x, double d1, double d2);     // upper tail
double student_t_sf2(double t, double dof);      // two-sided p-value
double normal_sf2(double z);                     // two-sided p-value
double normal_cdf(double z);

}  // namespace cryptospan::dist
