#include "fountain/bessel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fountain/error.hpp"

namespace fountain {
namespace {

constexpr double kSeriesLimit = 12.0;

// sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!). Below x = 4 the largest term is
// under 5, so double suffices; above that the alternating terms grow and the
// sum is carried in long double.
template <typename Real>
double series(int n, double x) {
  const Real q = Real(-0.25) * static_cast<Real>(x) * x;
  Real term = (n == 0) ? Real(1) : Real(0.5) * x;
  Real sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<Real>(k) * (k + n));
    sum += term;
    if (std::fabs(term) < Real(1e-19) * (Real(1) + std::fabs(sum))) break;
  }
  return static_cast<double>(sum);
}

// Hankel expansion J_n(x) ~ sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)),
// chi = x - (2n+1) pi/4, truncated at the smallest term.
double asymptotic(int n, double x) {
  const double mu = 4.0 * n * n;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    if (std::fabs(term) > last) break;
    last = std::fabs(term);
    // k odd feeds Q with alternating sign, k even feeds P.
    if (k % 2 == 1) {
      q += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    } else {
      p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    }
  }
  const double chi = x - (2.0 * n + 1.0) * std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j(int order, double x) {
  if (order != 0 && order != 1) {
    fail(ErrorCode::invalid_argument, "bessel_j: only orders 0 and 1 are supported");
  }
  if (!(x >= 0.0)) {
    fail(ErrorCode::invalid_argument, "bessel_j: argument must be >= 0, got " + std::to_string(x));
  }
  if (x < 4.0) return series<double>(order, x);
  return x < kSeriesLimit ? series<long double>(order, x) : asymptotic(order, x);
}

double bessel_j0(double x) { return bessel_j(0, x); }
double bessel_j1(double x) { return bessel_j(1, x); }

}  // namespace fountain
