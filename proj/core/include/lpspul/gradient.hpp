#pragma once

#include "lpspul/contraction.hpp"

namespace lpspul {

/// Per-site gradient buffers mirroring a network's tensor layout.
struct NetworkGrad {
  std::vector<std::vector<double>> sites;

  static NetworkGrad zeros_like(const LpsNetwork& net);
  void set_zero();
  /// this += c * other (shapes must agree).
  void axpy(double c, const NetworkGrad& other);
  bool all_finite() const;
};

struct LogNormGrad {
  double value = 0.0;  // the log-norm itself, a byproduct of the sweep
  NetworkGrad grad;
};

/// Gradient of ln ||P Phi(x)||_2 with respect to every tensor entry, by one
/// right-to-left environment sweep plus one left-to-right sweep. Masked
/// attributes are traced (the marginalized variant); a sample with no mask
/// gives the plain log-norm gradient. Throws training_error when the norm
/// is exactly zero.
LogNormGrad grad_log_norm(const LpsNetwork& net, const EmbeddedSample& x);

/// Gradient of ln ||P||_F (every input leg traced).
LogNormGrad grad_log_frobenius(const LpsNetwork& net);

}  // namespace lpspul
