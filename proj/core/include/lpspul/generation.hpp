#pragma once

#include <span>

#include "lpspul/model.hpp"
#include "lpspul/objective.hpp"

namespace lpspul {

/// Site-by-site sampler over one network's Born distribution (squared norm
/// with every not-yet-sampled site traced out). Holds the conditioned left
/// environment and a reference to precomputed right marginal environments.
class SequentialSampler {
 public:
  SequentialSampler(const LpsNetwork& net, const BasisSpec& basis, const std::vector<Environment>& right_marginals);

  int position() const { return pos_; }
  bool done() const { return pos_ >= net_->num_sites(); }

  /// d x d coefficient matrix of the local unnormalized density
  /// p(u) = phi(u)^T M phi(u); positive semidefinite, symmetrized.
  Eigen::MatrixXd density_matrix() const;

  /// Fixes the current position to value u and advances the environment.
  void advance(double u);

 private:
  const LpsNetwork* net_;
  const BasisSpec* basis_;
  const std::vector<Environment>* right_;
  Environment left_;
  int pos_ = 0;
};

/// Ensemble sampling over the class networks of several models: at each
/// position the per-model densities are normalized to unit mass on the grid
/// and averaged, one value is drawn by inverse CDF (piecewise-linear within
/// grid cells), and that value is assigned to every member.
class EnsembleSampler {
 public:
  EnsembleSampler(std::vector<const LpsNetwork*> nets, const BasisSpec& basis, int grid_resolution = 1024);

  int num_attributes() const { return basis_->num_attributes(); }

  /// Density values over the uniform grid (resolution + 1 points) for the
  /// given sampler states at their current position.
  std::vector<double> ensemble_density(const std::vector<SequentialSampler>& states) const;

  std::vector<SequentialSampler> make_states() const;
  std::vector<double> sample_one(Rng& rng) const;

 private:
  const Eigen::MatrixXd& phi_grid(BasisKind kind) const;

  std::vector<const LpsNetwork*> nets_;
  const BasisSpec* basis_;
  int resolution_;
  std::vector<std::vector<Environment>> right_marginals_;  // per net
  mutable Eigen::MatrixXd phi_grid_[2];
};

/// Inverse-CDF draw from density values on the uniform grid over [0, 1].
/// Negative values (roundoff) are clipped at zero; an all-zero density is an
/// error.
double sample_from_grid(const std::vector<double>& density, Rng& rng);

struct SampleVerdict {
  std::vector<double> values;   // in the preprocessed unit-interval space
  std::vector<double> margins;  // per model: log_norm(pos) - log_norm(neg)
  double margin_min = 0.0;      // min over models of the target-signed margin
  bool accepted = false;
  bool target_positive = true;
};

/// Class-conditional acceptance: a positive-target sample needs every
/// model's margin strictly above the threshold, a negative-target sample
/// strictly below its negation.
SampleVerdict accept(const std::vector<double>& sample, std::span<const PulModel> models, bool target_positive,
                     double threshold = 20.0);

struct GenerationResult {
  std::vector<SampleVerdict> verdicts;  // in draw order, accepted and rejected
  std::size_t attempts = 0;
  std::size_t accepted_count = 0;
  double acceptance_rate = 0.0;
  bool budget_exhausted = false;
};

/// Draws from the target class's networks across the ensemble and filters
/// through accept(); stops after `count` acceptances or
/// count * max_attempts_factor attempts.
GenerationResult sample_batch(std::span<const PulModel> models, bool target_positive, std::size_t count,
                              std::uint64_t seed, double threshold = 20.0, int grid_resolution = 1024,
                              std::size_t max_attempts_factor = 100);

}  // namespace lpspul
