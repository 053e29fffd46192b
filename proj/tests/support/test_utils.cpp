#include "support/test_utils.hpp"

#include <cmath>

namespace lpspul::testing {

Eigen::VectorXd kron_embedding(const EmbeddedSample& x) {
  long dim = 1;
  for (int i = 0; i < x.n; ++i) dim *= x.dim;
  Eigen::VectorXd out(dim);
  for (long idx = 0; idx < dim; ++idx) {
    long rest = idx;
    double v = 1.0;
    for (int i = x.n - 1; i >= 0; --i) {
      const int digit = static_cast<int>(rest % x.dim);
      rest /= x.dim;
      v *= x.attribute(i)[digit];
    }
    out(idx) = v;
  }
  return out;
}

long double dense_frobenius_ld(const LpsNetwork& net) {
  const int n = net.num_sites();
  const int d = net.phys_dim();
  long in_dim = 1;
  for (int i = 0; i < n; ++i) in_dim *= d;
  long out_dim = 1;
  for (int i = 0; i < n; ++i) {
    if (net.is_output_site(i)) out_dim *= d;
  }

  std::vector<int> in_digits(static_cast<std::size_t>(n)), out_digits(static_cast<std::size_t>(n), 0);
  long double sum_sq = 0.0L;
  std::vector<long double> vec, nxt;
  for (long row = 0; row < out_dim; ++row) {
    long rr = row;
    for (int i = n - 1; i >= 0; --i) {
      if (net.is_output_site(i)) {
        out_digits[static_cast<std::size_t>(i)] = static_cast<int>(rr % d);
        rr /= d;
      }
    }
    for (long col = 0; col < in_dim; ++col) {
      long cc = col;
      for (int i = n - 1; i >= 0; --i) {
        in_digits[static_cast<std::size_t>(i)] = static_cast<int>(cc % d);
        cc /= d;
      }
      vec.assign(1, 1.0L);
      for (int i = 0; i < n; ++i) {
        const SiteTensor& s = net.site(i);
        const int k = in_digits[static_cast<std::size_t>(i)];
        const int o = s.kind == SiteKind::output ? out_digits[static_cast<std::size_t>(i)] : 0;
        nxt.assign(static_cast<std::size_t>(s.bond_right), 0.0L);
        for (int r = 0; r < s.bond_right; ++r) {
          long double acc = 0.0L;
          for (int l = 0; l < s.bond_left; ++l) {
            acc += vec[static_cast<std::size_t>(l)] * static_cast<long double>(s.at(l, r, k, o));
          }
          nxt[static_cast<std::size_t>(r)] = acc;
        }
        vec.swap(nxt);
      }
      sum_sq += vec[0] * vec[0];
    }
  }
  return sqrtl(sum_sq);
}

EmbeddedSample random_sample(const BasisSpec& basis, Rng& rng) {
  std::vector<double> values(static_cast<std::size_t>(basis.num_attributes()));
  for (auto& v : values) v = rng.uniform();
  return embed(values, basis);
}

double finite_difference(LpsNetwork& net, int site, std::size_t entry,
                         const std::function<double(const LpsNetwork&)>& f, double h) {
  double& x = net.site(site).data[entry];
  const double orig = x;
  x = orig + h;
  const double fp = f(net);
  x = orig - h;
  const double fm = f(net);
  x = orig;
  return (fp - fm) / (2.0 * h);
}

double max_grad_rel_error(LpsNetwork net, const NetworkGrad& grad,
                          const std::function<double(const LpsNetwork&)>& f, double h) {
  double worst = 0.0;
  for (int i = 0; i < net.num_sites(); ++i) {
    for (std::size_t j = 0; j < net.site(i).size(); ++j) {
      const double fd = finite_difference(net, i, j, f, h);
      const double an = grad.sites[static_cast<std::size_t>(i)][j];
      const double scale = std::max({std::fabs(fd), std::fabs(an), 1e-8});
      worst = std::max(worst, std::fabs(fd - an) / scale);
    }
  }
  return worst;
}

}  // namespace lpspul::testing
