#include "lpspul/lps.hpp"

#include <cmath>

#include "lpspul/contraction.hpp"
#include "lpspul/rng.hpp"

namespace lpspul {

LpsNetwork LpsNetwork::init(int num_sites, int phys_dim, int bond_dim, int skip, std::uint64_t seed) {
  if (num_sites < 1) throw parameter_error("num_sites must be >= 1");
  if (phys_dim < 1) throw parameter_error("phys_dim must be >= 1");
  if (bond_dim < 1) throw parameter_error("bond_dim must be >= 1");
  if (skip < 1 || skip > num_sites) throw parameter_error("skip must satisfy 1 <= skip <= num_sites");

  LpsNetwork net;
  net.phys_dim_ = phys_dim;
  net.bond_dim_ = bond_dim;
  net.skip_ = skip;
  net.sites_.resize(num_sites);

  Rng rng(seed);
  for (int i = 0; i < num_sites; ++i) {
    SiteTensor& s = net.sites_[i];
    s.kind = net.is_output_site(i) ? SiteKind::output : SiteKind::core;
    s.bond_left = (i == 0) ? 1 : bond_dim;
    s.bond_right = (i == num_sites - 1) ? 1 : bond_dim;
    s.phys = phys_dim;
    s.out = (s.kind == SiteKind::output) ? phys_dim : 1;
    s.data.resize(static_cast<std::size_t>(s.phys) * s.out * s.bond_left * s.bond_right);

    // E ||P||_F^2 factorizes over sites as sigma_i^2 * phys * out * bond_right;
    // choosing sigma_i as the inverse square root of that count makes the
    // product equal 1.
    const double denom = static_cast<double>(s.phys) * s.out * s.bond_right;
    const double sigma = 1.0 / std::sqrt(denom);
    for (double& x : s.data) x = sigma * rng.normal();
  }

  // The per-site variances put E ||P||_F^2 at 1, but log ||P||_F still
  // fluctuates with the draw; one uniform rescale pins it to 0 exactly.
  const double excess = log_frobenius(net);
  if (std::isfinite(excess)) {
    const double site_factor = std::exp(-excess / num_sites);
    for (int i = 0; i < num_sites; ++i) net.scale_site(i, site_factor);
  }
  return net;
}

void LpsNetwork::scale_site(int i, double factor) {
  for (double& x : sites_[i].data) x *= factor;
}

bool LpsNetwork::all_finite() const {
  for (const SiteTensor& s : sites_) {
    for (double x : s.data) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

std::size_t LpsNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const SiteTensor& s : sites_) n += s.size();
  return n;
}

bool LpsNetwork::same_shape(const LpsNetwork& other) const {
  if (num_sites() != other.num_sites() || phys_dim_ != other.phys_dim_ || bond_dim_ != other.bond_dim_ ||
      skip_ != other.skip_) {
    return false;
  }
  for (int i = 0; i < num_sites(); ++i) {
    const SiteTensor& a = sites_[i];
    const SiteTensor& b = other.sites_[i];
    if (a.kind != b.kind || a.bond_left != b.bond_left || a.bond_right != b.bond_right || a.phys != b.phys ||
        a.out != b.out) {
      return false;
    }
  }
  return true;
}

}  // namespace lpspul
