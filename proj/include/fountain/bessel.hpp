#pragma once

namespace fountain {

/// Bessel function of the first kind for order 0 or 1, x >= 0.
///
/// Absolute error is below 1e-14 on [0, 12], which covers every k*r that
/// occurs in a fountain (k*a is about 1). Beyond that a Hankel asymptotic
/// expansion is used, good to roughly 1e-11.
double bessel_j(int order, double x);

double bessel_j0(double x);
double bessel_j1(double x);

}  // namespace fountain
