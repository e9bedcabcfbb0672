#pragma once

// Special functions needed for likelihoods and classical inference.

namespace citepred::special {

double digamma(double x);
double trigamma(double x);

/// log Γ(y + a) − log Γ(a) for integer-valued y ≥ 0 and a > 0.
double lgamma_ratio(double y, double a);
/// ψ(y + a) − ψ(a).
double digamma_ratio(double y, double a);
/// ψ′(y + a) − ψ′(a).
double trigamma_ratio(double y, double a);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(|T| ≥ |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);
/// P(F ≥ f) for the F distribution with (df1, df2) degrees of freedom.
double f_upper_p(double f, double df1, double df2);
/// P(|Z| ≥ |z|) for a standard normal.
double normal_two_sided_p(double z);

}  // namespace citepred::special
