#include "lpspul/gradient.hpp"

#include <cmath>

namespace lpspul {

NetworkGrad NetworkGrad::zeros_like(const LpsNetwork& net) {
  NetworkGrad g;
  g.sites.resize(static_cast<std::size_t>(net.num_sites()));
  for (int i = 0; i < net.num_sites(); ++i) {
    g.sites[static_cast<std::size_t>(i)].assign(net.site(i).size(), 0.0);
  }
  return g;
}

void NetworkGrad::set_zero() {
  for (auto& s : sites) std::fill(s.begin(), s.end(), 0.0);
}

void NetworkGrad::axpy(double c, const NetworkGrad& other) {
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& src = other.sites[i];
    auto& dst = sites[i];
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += c * src[j];
  }
}

bool NetworkGrad::all_finite() const {
  for (const auto& s : sites) {
    for (double x : s) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

namespace {

// Buffers reused across gradient calls; sized once per network shape.
struct GradWorkspace {
  std::vector<Environment> right;
  ContractionScratch adv;
  Eigen::MatrixXd tmp;
  RowMat y;
  std::vector<RowMat> ys;
};

GradWorkspace& local_workspace() {
  thread_local GradWorkspace ws;
  return ws;
}

// Gradient of the log norm at one site given its left/right environments.
// The normalizer s = <site, L site R> is the squared norm expressed at the
// local environment scale, so all rescaling factors cancel in grad = Y / s.
void site_gradient(const SiteTensor& site, const Eigen::MatrixXd& left, const Eigen::MatrixXd& right,
                   const double* phi, std::vector<double>& out, GradWorkspace& ws) {
  const int dl = site.bond_left;
  const int dr = site.bond_right;
  ws.tmp.resize(dl, dr);
  double local_sq = 0.0;

  if (phi != nullptr) {
    if (static_cast<int>(ws.ys.size()) < site.out) ws.ys.resize(static_cast<std::size_t>(site.out));
    for (int o = 0; o < site.out; ++o) {
      RowMat& m = ws.adv.m;
      m.resize(dl, dr);
      m.setZero();
      for (int k = 0; k < site.phys; ++k) {
        if (phi[k] == 0.0) continue;
        m += phi[k] * site.slice(k, o);
      }
      RowMat& y = ws.ys[static_cast<std::size_t>(o)];
      ws.tmp.noalias() = left * m;
      y.resize(dl, dr);
      y.noalias() = ws.tmp * right;
      local_sq += (m.array() * y.array()).sum();
    }
    if (local_sq <= 0.0) throw training_error("log-norm gradient undefined: zero norm");
    const double inv = 1.0 / local_sq;
    for (int k = 0; k < site.phys; ++k) {
      for (int o = 0; o < site.out; ++o) {
        const double c = phi[k] * inv;
        MatMap dst(out.data() + (static_cast<std::size_t>(k) * site.out + o) * site.slice_elems(), dl, dr);
        dst = c * ws.ys[static_cast<std::size_t>(o)];
      }
    }
  } else {
    ws.y.resize(dl, dr);
    for (int k = 0; k < site.phys; ++k) {
      for (int o = 0; o < site.out; ++o) {
        ConstMatMap a = site.slice(k, o);
        ws.tmp.noalias() = left * a;
        ws.y.noalias() = ws.tmp * right;
        local_sq += (a.array() * ws.y.array()).sum();
        MatMap dst(out.data() + (static_cast<std::size_t>(k) * site.out + o) * site.slice_elems(), dl, dr);
        dst = ws.y;
      }
    }
    if (local_sq <= 0.0) throw training_error("log-norm gradient undefined: zero norm");
    const double inv = 1.0 / local_sq;
    for (double& v : out) v *= inv;
  }
}

LogNormGrad grad_impl(const LpsNetwork& net, const EmbeddedSample* x) {
  const auto view = attribute_view(x, net);
  const std::size_t n = static_cast<std::size_t>(net.num_sites());
  GradWorkspace& ws = local_workspace();

  ws.right.resize(n + 1);
  ws.right[n].mat.resize(1, 1);
  ws.right[n].mat(0, 0) = 1.0;
  ws.right[n].log_scale = 0.0;
  for (int i = net.num_sites() - 1; i >= 0; --i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    ws.right[ui].mat = ws.right[ui + 1].mat;
    ws.right[ui].log_scale = ws.right[ui + 1].log_scale;
    advance_right(ws.right[ui], net.site(i), view[ui], ws.adv);
  }

  LogNormGrad result;
  result.grad.sites.resize(n);

  Environment left = Environment::boundary();
  for (int i = 0; i < net.num_sites(); ++i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    const SiteTensor& site = net.site(i);
    auto& g = result.grad.sites[ui];
    g.resize(site.size());
    site_gradient(site, left.mat, ws.right[ui + 1].mat, view[ui], g, ws);
    advance_left(left, site, view[ui], ws.adv);
  }

  const double v = left.mat(0, 0);
  if (v <= 0.0) throw training_error("log-norm gradient undefined: zero norm");
  result.value = 0.5 * (std::log(v) + left.log_scale);
  return result;
}

}  // namespace

LogNormGrad grad_log_norm(const LpsNetwork& net, const EmbeddedSample& x) { return grad_impl(net, &x); }

LogNormGrad grad_log_frobenius(const LpsNetwork& net) { return grad_impl(net, nullptr); }

}  // namespace lpspul
