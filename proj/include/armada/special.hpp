#pragma once

namespace armada {

double normal_cdf(double x);
// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
// Two-sided p-value P(|T| >= |t|) for T ~ t(df).
double student_t_two_sided(double t, double df);

// Clamp a p-value into [1e-300, 1] for downstream log operations.
double clamp_pvalue(double p);

}  // namespace armada
