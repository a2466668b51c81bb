#ifndef UAML_SPECIAL_FUNCTIONS_HPP_
#define UAML_SPECIAL_FUNCTIONS_HPP_

namespace uaml {

// Log of the gamma function for x > 0 (Lanczos, g = 7, n = 9).
double log_gamma(double x);

// Digamma psi(x) = d/dx ln Gamma(x), x > 0.  Recurrence up to x >= 6 then
// the asymptotic series.
double digamma(double x);

// Trigamma psi'(x), x > 0.
double trigamma(double x);

// Log of the beta function B(a, b).
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction,
// relative tolerance 1e-10.
double incomplete_beta(double a, double b, double x);

// Inverse of incomplete_beta in x, by bisection to 1e-8.
double beta_quantile(double a, double b, double p);

}  // namespace uaml

#endif  // UAML_SPECIAL_FUNCTIONS_HPP_
