#pragma once

namespace mixchan {

/// ln Gamma(a) for a > 0. Absolute error below 1e-12 over [1e-3, 1e6]
/// wherever double precision can represent it; relative error ~1e-14 beyond.
double ln_gamma(double a);

/// Digamma psi(a) = d/da ln Gamma(a) for a > 0.
double digamma(double a);

/// Trigamma psi'(a) for a > 0.
double trigamma(double a);

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
/// Monotone non-decreasing in x, bounded to [0, 1].
double reg_lower_inc_gamma(double a, double x);

}  // namespace mixchan
