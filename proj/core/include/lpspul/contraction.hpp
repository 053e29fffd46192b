#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "lpspul/embedding.hpp"
#include "lpspul/lps.hpp"

namespace lpspul {

/// Partial contraction of the ket and bra layers of one network over a
/// prefix (or suffix) of sites: a bond x bond matrix, rescaled to unit
/// max-abs entry after every absorbed site, with the removed magnitude
/// accumulated as log_scale. Symmetric positive semidefinite by
/// construction.
struct Environment {
  Eigen::MatrixXd mat;
  double log_scale = 0.0;

  static Environment boundary() {
    Environment e;
    e.mat = Eigen::MatrixXd::Ones(1, 1);
    return e;
  }
  bool is_zero() const { return mat.cwiseAbs().maxCoeff() == 0.0; }
};

/// Reusable temporaries for the contraction kernels; matrices keep their
/// storage across calls on same-shaped networks, which matters in training
/// loops (hundreds of sites per sample, thousands of samples per epoch).
struct ContractionScratch {
  RowMat m;
  Eigen::MatrixXd tmp;
  Eigen::MatrixXd next;
};

/// Absorbs site into env from the left (env covers sites before it).
/// phi == nullptr traces the input leg instead of contracting with an
/// embedding vector; output legs are always contracted ket-to-bra.
void advance_left(Environment& env, const SiteTensor& site, const double* phi);
void advance_left(Environment& env, const SiteTensor& site, const double* phi, ContractionScratch& scratch);
/// Mirror image: env covers the sites after `site`.
void advance_right(Environment& env, const SiteTensor& site, const double* phi);
void advance_right(Environment& env, const SiteTensor& site, const double* phi, ContractionScratch& scratch);

/// Per-attribute pointer view of a sample for the contraction kernels;
/// null entries are traced out. x == nullptr means every site is traced.
std::vector<const double*> attribute_view(const EmbeddedSample* x, const LpsNetwork& net);

/// envs[i] covers sites [0, i); envs[num_sites] is the full contraction.
std::vector<Environment> left_environments(const LpsNetwork& net, const EmbeddedSample* x);
/// envs[i] covers sites [i, num_sites); envs[0] is the full contraction.
std::vector<Environment> right_environments(const LpsNetwork& net, const EmbeddedSample* x);

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// ln ||P Phi(x)||_2 by left-to-right renormalized contraction. Requires a
/// fully present sample; returns -inf for an exactly zero vector.
double log_norm(const LpsNetwork& net, const EmbeddedSample& x);

/// ln ||P||_F via the self-contraction with every input leg traced.
double log_frobenius(const LpsNetwork& net);

/// Like log_norm but masked attributes are traced out, which by basis
/// orthonormality equals marginalizing the squared norm over them. Equals
/// log_norm when nothing is missing and log_frobenius when everything is.
double marginalized_log_norm(const LpsNetwork& net, const EmbeddedSample& x);

/// The exact map P as a dense out^k x in^N matrix, by direct per-entry
/// bond-chain products (independent of the environment kernels; serves as
/// their oracle). Big-endian site order on both index groups.
/// Guarded to phys_dim^num_sites <= 4096.
Eigen::MatrixXd dense_materialize(const LpsNetwork& net);

}  // namespace lpspul
