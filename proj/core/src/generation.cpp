#include "lpspul/generation.hpp"

#include <cmath>
#include <limits>

namespace lpspul {

SequentialSampler::SequentialSampler(const LpsNetwork& net, const BasisSpec& basis,
                                     const std::vector<Environment>& right_marginals)
    : net_(&net), basis_(&basis), right_(&right_marginals), left_(Environment::boundary()) {
  if (basis.num_attributes() != net.num_sites()) throw parameter_error("sampler: basis does not match network");
  if (basis.dim != net.phys_dim()) throw parameter_error("sampler: embedding dimension mismatch");
}

Eigen::MatrixXd SequentialSampler::density_matrix() const {
  const SiteTensor& site = net_->site(pos_);
  const Eigen::MatrixXd& left = left_.mat;
  const Eigen::MatrixXd& right = (*right_)[static_cast<std::size_t>(pos_) + 1].mat;
  const int d = site.phys;

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd tmp(site.bond_left, site.bond_right);
  Eigen::MatrixXd z(site.bond_left, site.bond_right);
  for (int o = 0; o < site.out; ++o) {
    for (int b = 0; b < d; ++b) {
      tmp.noalias() = left * site.slice(b, o);
      z.noalias() = tmp * right;
      for (int a = 0; a < d; ++a) {
        m(a, b) += (site.slice(a, o).array() * z.array()).sum();
      }
    }
  }
  m = 0.5 * (m + m.transpose()).eval();
  return m;
}

void SequentialSampler::advance(double u) {
  if (done()) throw parameter_error("sampler already finished");
  std::vector<double> phi(static_cast<std::size_t>(basis_->dim));
  embed_local(u, basis_->kinds[static_cast<std::size_t>(pos_)], basis_->dim, phi.data());
  advance_left(left_, net_->site(pos_), phi.data());
  left_.mat = (0.5 * (left_.mat + left_.mat.transpose())).eval();
  ++pos_;
}

EnsembleSampler::EnsembleSampler(std::vector<const LpsNetwork*> nets, const BasisSpec& basis, int grid_resolution)
    : nets_(std::move(nets)), basis_(&basis), resolution_(grid_resolution) {
  if (nets_.empty()) throw parameter_error("ensemble sampler needs at least one network");
  if (resolution_ < 64) throw parameter_error("grid resolution must be >= 64");
  for (const LpsNetwork* net : nets_) {
    if (net->num_sites() != nets_.front()->num_sites() || net->phys_dim() != nets_.front()->phys_dim()) {
      throw parameter_error("ensemble networks must share shape");
    }
    right_marginals_.push_back(right_environments(*net, nullptr));
  }
}

const Eigen::MatrixXd& EnsembleSampler::phi_grid(BasisKind kind) const {
  Eigen::MatrixXd& cache = phi_grid_[static_cast<int>(kind)];
  if (cache.size() == 0) {
    const int d = basis_->dim;
    cache.resize(resolution_ + 1, d);
    std::vector<double> phi(static_cast<std::size_t>(d));
    for (int j = 0; j <= resolution_; ++j) {
      const double u = static_cast<double>(j) / resolution_;
      embed_local(u, kind, d, phi.data());
      for (int a = 0; a < d; ++a) cache(j, a) = phi[static_cast<std::size_t>(a)];
    }
  }
  return cache;
}

std::vector<SequentialSampler> EnsembleSampler::make_states() const {
  std::vector<SequentialSampler> states;
  states.reserve(nets_.size());
  for (std::size_t i = 0; i < nets_.size(); ++i) {
    states.emplace_back(*nets_[i], *basis_, right_marginals_[i]);
  }
  return states;
}

std::vector<double> EnsembleSampler::ensemble_density(const std::vector<SequentialSampler>& states) const {
  const int pos = states.front().position();
  const Eigen::MatrixXd& grid = phi_grid(basis_->kinds[static_cast<std::size_t>(pos)]);
  const int points = resolution_ + 1;

  std::vector<double> density(static_cast<std::size_t>(points), 0.0);
  Eigen::VectorXd p(points);
  for (const SequentialSampler& state : states) {
    const Eigen::MatrixXd m = state.density_matrix();
    p.noalias() = ((grid * m).array() * grid.array()).rowwise().sum().matrix();
    // Clip the tiny negative roundoff of the quadratic form.
    for (int j = 0; j < points; ++j) {
      if (p(j) < 0.0) p(j) = 0.0;
    }
    double mass = 0.0;
    for (int j = 0; j + 1 < points; ++j) mass += 0.5 * (p(j) + p(j + 1));
    mass /= resolution_;
    if (mass <= 0.0) throw data_error("sampling: local density vanished on the whole grid");
    const double inv = 1.0 / (mass * static_cast<double>(nets_.size()));
    for (int j = 0; j < points; ++j) density[static_cast<std::size_t>(j)] += inv * p(j);
  }
  return density;
}

std::vector<double> EnsembleSampler::sample_one(Rng& rng) const {
  auto states = make_states();
  const int n = nets_.front()->num_sites();
  std::vector<double> sample(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const auto density = ensemble_density(states);
    const double u = sample_from_grid(density, rng);
    sample[static_cast<std::size_t>(i)] = u;
    for (auto& state : states) state.advance(u);
  }
  return sample;
}

double sample_from_grid(const std::vector<double>& density, Rng& rng) {
  const std::size_t points = density.size();
  if (points < 2) throw parameter_error("density grid needs at least two points");
  std::vector<double> cdf(points, 0.0);
  for (std::size_t j = 0; j + 1 < points; ++j) {
    const double a = std::max(density[j], 0.0);
    const double b = std::max(density[j + 1], 0.0);
    cdf[j + 1] = cdf[j] + 0.5 * (a + b);
  }
  const double total = cdf.back();
  if (total <= 0.0) throw data_error("sampling: zero density");

  const double v = rng.uniform() * total;
  std::size_t lo = 0, hi = points - 1;
  while (lo + 1 < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cdf[mid] <= v) lo = mid;
    else hi = mid;
  }
  const double cell = cdf[hi] - cdf[lo];
  const double frac = cell > 0.0 ? (v - cdf[lo]) / cell : 0.5;
  const double step = 1.0 / static_cast<double>(points - 1);
  return (static_cast<double>(lo) + frac) * step;
}

SampleVerdict accept(const std::vector<double>& sample, std::span<const PulModel> models, bool target_positive,
                     double threshold) {
  if (!(threshold > 0.0)) throw parameter_error("acceptance threshold must be positive");
  if (models.empty()) throw parameter_error("accept: no models");

  SampleVerdict verdict;
  verdict.values = sample;
  verdict.target_positive = target_positive;
  verdict.margin_min = std::numeric_limits<double>::infinity();
  bool ok = true;
  const EmbeddedSample x = embed(sample, models.front().basis);
  for (const PulModel& model : models) {
    const double lp = log_norm(model.positive, x);
    const double ln = log_norm(model.negative, x);
    const double margin = lp - ln;  // may be NaN when both norms vanish
    verdict.margins.push_back(margin);
    const double signed_margin = target_positive ? margin : -margin;
    if (!(signed_margin > threshold)) ok = false;
    verdict.margin_min = std::min(verdict.margin_min, std::isnan(signed_margin)
                                                          ? -std::numeric_limits<double>::infinity()
                                                          : signed_margin);
  }
  verdict.accepted = ok;
  return verdict;
}

GenerationResult sample_batch(std::span<const PulModel> models, bool target_positive, std::size_t count,
                              std::uint64_t seed, double threshold, int grid_resolution,
                              std::size_t max_attempts_factor) {
  if (count < 1) throw parameter_error("sample count must be >= 1");
  if (models.empty()) throw parameter_error("sample_batch: no models");
  for (const PulModel& m : models) {
    if (!m.compatible_with(models.front())) throw parameter_error("sample_batch: incompatible models");
  }

  std::vector<const LpsNetwork*> nets;
  for (const PulModel& m : models) nets.push_back(target_positive ? &m.positive : &m.negative);
  EnsembleSampler sampler(std::move(nets), models.front().basis, grid_resolution);

  GenerationResult result;
  Rng rng(seed);
  const std::size_t budget = count * max_attempts_factor;
  while (result.accepted_count < count && result.attempts < budget) {
    ++result.attempts;
    const auto sample = sampler.sample_one(rng);
    SampleVerdict verdict = accept(sample, models, target_positive, threshold);
    if (verdict.accepted) ++result.accepted_count;
    result.verdicts.push_back(std::move(verdict));
  }
  result.acceptance_rate =
      result.attempts > 0 ? static_cast<double>(result.accepted_count) / static_cast<double>(result.attempts) : 0.0;
  result.budget_exhausted = result.accepted_count < count;
  return result;
}

}  // namespace lpspul
