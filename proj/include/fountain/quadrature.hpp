#pragma once

#include <cstddef>
#include <vector>

namespace fountain {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule mapped to [lo, hi]. Nodes are computed by
/// Newton iteration on P_n and are accurate to a few ulp.
QuadratureRule gauss_legendre(std::size_t n, double lo, double hi);

/// n-point periodic trapezoid rule on [0, 2 pi). Spectrally accurate for
/// smooth periodic integrands.
QuadratureRule periodic_trapezoid(std::size_t n);

}  // namespace fountain
