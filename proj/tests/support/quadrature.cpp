#include "support/quadrature.hpp"

#include <cmath>

namespace lpspul::testing {

Quadrature gauss_legendre(int n) {
  // Nodes on [-1, 1] by Newton iteration on the Legendre recurrence, then
  // mapped to [0, 1].
  Quadrature q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    q.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    q.nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
    q.weights[static_cast<std::size_t>(i)] = 0.5 * w;
    q.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
  return q;
}

}  // namespace lpspul::testing
