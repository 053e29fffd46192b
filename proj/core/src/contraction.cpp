#include "lpspul/contraction.hpp"

#include <cmath>

namespace lpspul {

namespace {

// Builds the input-contracted slice sum_k phi[k] * site[:, :, k, o].
void assemble_slice(const SiteTensor& site, const double* phi, int o, RowMat& m) {
  m.resize(site.bond_left, site.bond_right);
  m.setZero();
  for (int k = 0; k < site.phys; ++k) {
    if (phi[k] == 0.0) continue;
    m += phi[k] * site.slice(k, o);
  }
}

void rescale(Environment& env) {
  const double s = env.mat.cwiseAbs().maxCoeff();
  if (s > 0.0) {
    env.mat /= s;
    env.log_scale += std::log(s);
  }
}

double finish_log_sq_norm(const Environment& env) {
  // env is 1x1 after the last site; its entry is the squared norm at the
  // accumulated scale. It is nonnegative up to roundoff.
  const double v = env.mat(0, 0);
  if (v <= 0.0) return kLogZero;
  return std::log(v) + env.log_scale;
}

ContractionScratch& local_scratch() {
  thread_local ContractionScratch scratch;
  return scratch;
}

}  // namespace

void advance_left(Environment& env, const SiteTensor& site, const double* phi, ContractionScratch& s) {
  const int dl = site.bond_left;
  const int dr = site.bond_right;
  s.next.resize(dr, dr);
  s.next.setZero();
  s.tmp.resize(dl, dr);
  if (phi != nullptr) {
    for (int o = 0; o < site.out; ++o) {
      assemble_slice(site, phi, o, s.m);
      s.tmp.noalias() = env.mat * s.m;
      s.next.noalias() += s.m.transpose() * s.tmp;
    }
  } else {
    for (int k = 0; k < site.phys; ++k) {
      for (int o = 0; o < site.out; ++o) {
        ConstMatMap a = site.slice(k, o);
        s.tmp.noalias() = env.mat * a;
        s.next.noalias() += a.transpose() * s.tmp;
      }
    }
  }
  env.mat.swap(s.next);
  rescale(env);
}

void advance_right(Environment& env, const SiteTensor& site, const double* phi, ContractionScratch& s) {
  const int dl = site.bond_left;
  const int dr = site.bond_right;
  s.next.resize(dl, dl);
  s.next.setZero();
  s.tmp.resize(dl, dr);
  if (phi != nullptr) {
    for (int o = 0; o < site.out; ++o) {
      assemble_slice(site, phi, o, s.m);
      s.tmp.noalias() = s.m * env.mat;
      s.next.noalias() += s.tmp * s.m.transpose();
    }
  } else {
    for (int k = 0; k < site.phys; ++k) {
      for (int o = 0; o < site.out; ++o) {
        ConstMatMap a = site.slice(k, o);
        s.tmp.noalias() = a * env.mat;
        s.next.noalias() += s.tmp * a.transpose();
      }
    }
  }
  env.mat.swap(s.next);
  rescale(env);
}

void advance_left(Environment& env, const SiteTensor& site, const double* phi) {
  advance_left(env, site, phi, local_scratch());
}

void advance_right(Environment& env, const SiteTensor& site, const double* phi) {
  advance_right(env, site, phi, local_scratch());
}

std::vector<const double*> attribute_view(const EmbeddedSample* x, const LpsNetwork& net) {
  std::vector<const double*> view(static_cast<std::size_t>(net.num_sites()), nullptr);
  if (x == nullptr) return view;
  if (x->n != net.num_sites()) throw parameter_error("sample attribute count does not match network");
  if (x->dim != net.phys_dim()) throw parameter_error("sample embedding dimension does not match network");
  for (int i = 0; i < x->n; ++i) {
    if (!x->missing[i]) view[static_cast<std::size_t>(i)] = x->attribute(i);
  }
  return view;
}

std::vector<Environment> left_environments(const LpsNetwork& net, const EmbeddedSample* x) {
  const auto view = attribute_view(x, net);
  std::vector<Environment> envs;
  envs.reserve(static_cast<std::size_t>(net.num_sites()) + 1);
  envs.push_back(Environment::boundary());
  for (int i = 0; i < net.num_sites(); ++i) {
    Environment e = envs.back();
    advance_left(e, net.site(i), view[static_cast<std::size_t>(i)]);
    envs.push_back(std::move(e));
  }
  return envs;
}

std::vector<Environment> right_environments(const LpsNetwork& net, const EmbeddedSample* x) {
  const auto view = attribute_view(x, net);
  std::vector<Environment> envs(static_cast<std::size_t>(net.num_sites()) + 1);
  envs.back() = Environment::boundary();
  for (int i = net.num_sites() - 1; i >= 0; --i) {
    Environment e = envs[static_cast<std::size_t>(i) + 1];
    advance_right(e, net.site(i), view[static_cast<std::size_t>(i)]);
    envs[static_cast<std::size_t>(i)] = std::move(e);
  }
  return envs;
}

namespace {

double log_sq_norm_impl(const LpsNetwork& net, const EmbeddedSample* x) {
  const auto view = attribute_view(x, net);
  ContractionScratch& scratch = local_scratch();
  Environment env = Environment::boundary();
  for (int i = 0; i < net.num_sites(); ++i) {
    advance_left(env, net.site(i), view[static_cast<std::size_t>(i)], scratch);
    if (env.is_zero()) return kLogZero;
  }
  return finish_log_sq_norm(env);
}

}  // namespace

double log_norm(const LpsNetwork& net, const EmbeddedSample& x) {
  if (x.any_missing()) throw parameter_error("log_norm requires a fully present sample");
  return 0.5 * log_sq_norm_impl(net, &x);
}

double log_frobenius(const LpsNetwork& net) { return 0.5 * log_sq_norm_impl(net, nullptr); }

double marginalized_log_norm(const LpsNetwork& net, const EmbeddedSample& x) {
  return 0.5 * log_sq_norm_impl(net, &x);
}

Eigen::MatrixXd dense_materialize(const LpsNetwork& net) {
  const int n = net.num_sites();
  const int d = net.phys_dim();
  double in_count = 1.0;
  for (int i = 0; i < n; ++i) in_count *= d;
  if (in_count > 4096.0) throw parameter_error("dense_materialize guard: phys_dim^num_sites exceeds 4096");

  const long in_dim = static_cast<long>(in_count);
  long out_dim = 1;
  for (int i = 0; i < n; ++i) {
    if (net.is_output_site(i)) out_dim *= d;
  }

  std::vector<int> in_digits(static_cast<std::size_t>(n), 0);
  std::vector<int> out_digits(static_cast<std::size_t>(n), 0);

  Eigen::MatrixXd dense(out_dim, in_dim);
  std::vector<double> vec, nxt;
  for (long row = 0; row < out_dim; ++row) {
    // Big-endian decode of the output index over output sites.
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
      vec.assign(1, 1.0);
      for (int i = 0; i < n; ++i) {
        const SiteTensor& s = net.site(i);
        const int k = in_digits[static_cast<std::size_t>(i)];
        const int o = s.kind == SiteKind::output ? out_digits[static_cast<std::size_t>(i)] : 0;
        nxt.assign(static_cast<std::size_t>(s.bond_right), 0.0);
        for (int r = 0; r < s.bond_right; ++r) {
          double acc = 0.0;
          for (int l = 0; l < s.bond_left; ++l) acc += vec[static_cast<std::size_t>(l)] * s.at(l, r, k, o);
          nxt[static_cast<std::size_t>(r)] = acc;
        }
        vec.swap(nxt);
      }
      dense(row, col) = vec[0];
    }
  }
  return dense;
}

}  // namespace lpspul
