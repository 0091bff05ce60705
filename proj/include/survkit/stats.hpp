#pragma once

namespace survkit::stats {

double normal_cdf(double x);

// Inverse of the standard normal CDF, p in (0, 1).
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b), evaluated by continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| > |t|) for Student-t with `df` degrees.
double student_t_two_sided_p(double t, double df);

double student_t_cdf(double t, double df);

// Upper tail P(F > f) for the F distribution with (d1, d2) degrees.
double f_upper_p(double f, double d1, double d2);

}  // namespace survkit::stats
