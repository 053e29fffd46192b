#pragma once

#include <cmath>
#include <vector>

namespace lpspul::testing {

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// Gauss-Legendre rule on [0, 1].
Quadrature gauss_legendre(int n);

/// log of integral_0^1 exp(log_f(u)) du, evaluated stably.
template <class F>
double log_integrate_exp(const Quadrature& q, F&& log_f) {
  std::vector<double> vals(q.nodes.size());
  double m = -1e300;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    vals[i] = log_f(q.nodes[i]);
    if (vals[i] > m) m = vals[i];
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * std::exp(vals[i] - m);
  return m + std::log(acc);
}

}  // namespace lpspul::testing
