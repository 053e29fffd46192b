#pragma once

#include <functional>

#include "lpspul/contraction.hpp"
#include "lpspul/gradient.hpp"
#include "lpspul/rng.hpp"

namespace lpspul::testing {

/// The full product embedding as an explicit d^N vector, big-endian site
/// order (independent replication of what the network contraction implies).
Eigen::VectorXd kron_embedding(const EmbeddedSample& x);

/// Frobenius norm by direct entry enumeration in long double; independent
/// of both dense_materialize and the environment kernels.
long double dense_frobenius_ld(const LpsNetwork& net);

/// Random sample with entries uniform in [0, 1] embedded in the given basis.
EmbeddedSample random_sample(const BasisSpec& basis, Rng& rng);

/// Central finite difference of f over one entry of one site.
double finite_difference(LpsNetwork& net, int site, std::size_t entry,
                         const std::function<double(const LpsNetwork&)>& f, double h = 1e-5);

/// Max relative error between an analytic gradient and finite differences
/// over every entry of every site.
double max_grad_rel_error(LpsNetwork net, const NetworkGrad& grad,
                          const std::function<double(const LpsNetwork&)>& f, double h = 1e-5);

}  // namespace lpspul::testing
