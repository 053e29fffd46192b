#include "lpspul/training.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace lpspul {

std::size_t TrainView::labeled_count() const {
  std::size_t n = 0;
  for (auto f : labeled) n += f;
  return n;
}

void TrainConfig::validate() const {
  if (embed_dim < 1 || bond_dim < 1 || skip < 1 || repetitions < 1) {
    throw parameter_error("model dimensions must be >= 1");
  }
  if (!(lr > 0.0)) throw parameter_error("learning rate must be positive");
  if (epochs < 1) throw parameter_error("epochs must be >= 1");
  if (ensemble < 2) throw parameter_error("ensemble size must be >= 2");
  if (batch_size && *batch_size < 1) throw parameter_error("batch size must be >= 1");
  if (patience && *patience < 1) throw parameter_error("patience must be >= 1");
  if (workers < 1) throw parameter_error("workers must be >= 1");
  if (!(weights.mu0 > weights.mu1)) throw parameter_error("mu0 must exceed mu1");
}

std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::uint8_t>& labeled,
                                                   std::optional<int> batch_size, bool resample_labeled,
                                                   std::uint64_t seed, int epoch) {
  const std::size_t n = labeled.size();
  if (n == 0) throw parameter_error("make_batches: empty dataset");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);

  const std::size_t bsz = batch_size ? static_cast<std::size_t>(*batch_size) : n;
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += bsz) {
    const std::size_t stop = std::min(start + bsz, n);
    batches.emplace_back(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(stop));
  }

  if (resample_labeled) {
    std::vector<std::size_t> labeled_idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (labeled[i]) labeled_idx.push_back(i);
    }
    if (labeled_idx.empty()) throw data_error("labeled resampling requested but no labeled samples exist");
    for (auto& batch : batches) {
      const std::size_t add = batch.size();
      for (std::size_t j = 0; j < add; ++j) batch.push_back(labeled_idx[rng.index(labeled_idx.size())]);
    }
  }
  return batches;
}

AdamState AdamState::init(const PulModel& model) {
  AdamState s;
  s.m_pos = NetworkGrad::zeros_like(model.positive);
  s.v_pos = NetworkGrad::zeros_like(model.positive);
  s.m_neg = NetworkGrad::zeros_like(model.negative);
  s.v_neg = NetworkGrad::zeros_like(model.negative);
  return s;
}

namespace {

void adam_update_network(LpsNetwork& net, const NetworkGrad& g, NetworkGrad& m, NetworkGrad& v,
                         const AdamState& s, double lr, double bc1, double bc2, const char* which) {
  for (std::size_t i = 0; i < g.sites.size(); ++i) {
    const auto& gs = g.sites[i];
    auto& ms = m.sites[i];
    auto& vs = v.sites[i];
    auto& data = net.site(static_cast<int>(i)).data;
    for (std::size_t j = 0; j < gs.size(); ++j) {
      const double gj = gs[j];
      if (std::isnan(gj)) {
        throw training_error(std::string("NaN gradient in ") + which + " network at site " + std::to_string(i));
      }
      ms[j] = s.beta1 * ms[j] + (1.0 - s.beta1) * gj;
      vs[j] = s.beta2 * vs[j] + (1.0 - s.beta2) * gj * gj;
      const double mhat = ms[j] / bc1;
      const double vhat = vs[j] / bc2;
      data[j] -= lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  }
}

}  // namespace

void adam_step(PulModel& model, const BatchGradient& grads, AdamState& state, double lr) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  adam_update_network(model.positive, grads.positive, state.m_pos, state.v_pos, state, lr, bc1, bc2, "positive");
  adam_update_network(model.negative, grads.negative, state.m_neg, state.v_neg, state, lr, bc1, bc2, "negative");
}

TrainResult train_model(const TrainView& view, const BasisSpec& basis, const PreprocessSpec& preprocess,
                        const TrainConfig& cfg, int member_index) {
  cfg.validate();
  if (view.size() == 0) throw parameter_error("train_model: empty dataset");

  const int num_sites = view.samples.front().n;
  const std::uint64_t member_seed = Rng::mix(cfg.seed, static_cast<std::uint64_t>(member_index));

  TrainResult result;
  result.model.basis = basis;
  result.model.preprocess = preprocess;
  result.model.seed = member_seed;
  result.model.mu0 = cfg.weights.mu0;
  result.model.mu1 = cfg.weights.mu1;
  result.model.positive = LpsNetwork::init(num_sites, cfg.embed_dim, cfg.bond_dim, cfg.skip, Rng::mix(member_seed, 1));
  result.model.negative = LpsNetwork::init(num_sites, cfg.embed_dim, cfg.bond_dim, cfg.skip, Rng::mix(member_seed, 2));
  if (cfg.init_log_frobenius != 0.0) {
    const double site_factor = std::exp(cfg.init_log_frobenius / num_sites);
    for (int i = 0; i < num_sites; ++i) {
      result.model.positive.scale_site(i, site_factor);
      result.model.negative.scale_site(i, site_factor);
    }
  }
  PulModel& model = result.model;

  AdamState adam = AdamState::init(model);
  Lambda7Controller controller(cfg.lambda7);
  double lr = cfg.lr;
  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;

  std::vector<const EmbeddedSample*> batch_ptr;
  std::vector<std::uint8_t> batch_labeled;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(view.labeled, cfg.batch_size, cfg.resample_labeled, member_seed, epoch);
    LossTerms mean_terms;
    for (const auto& batch : batches) {
      batch_ptr.clear();
      batch_labeled.clear();
      for (std::size_t idx : batch) {
        batch_ptr.push_back(&view.samples[idx]);
        batch_labeled.push_back(view.labeled[idx]);
      }
      const BatchGradient bg = grad_total(model, batch_ptr, batch_labeled, cfg.weights, controller.value());
      if (!std::isfinite(bg.terms.total())) {
        throw training_error("non-finite loss at epoch " + std::to_string(epoch));
      }
      adam_step(model, bg, adam, lr);
      mean_terms.l1 += bg.terms.l1;
      mean_terms.l2 += bg.terms.l2;
      mean_terms.l3 += bg.terms.l3;
      mean_terms.l4 += bg.terms.l4;
      mean_terms.l5 += bg.terms.l5;
    }
    const double nb = static_cast<double>(batches.size());
    mean_terms.l1 /= nb;
    mean_terms.l2 /= nb;
    mean_terms.l3 /= nb;
    mean_terms.l4 /= nb;
    mean_terms.l5 /= nb;

    // End-of-epoch predictions with the current parameters.
    std::size_t labeled_hits = 0, labeled_total = 0, unl_pos = 0, unl_total = 0;
    for (std::size_t i = 0; i < view.size(); ++i) {
      const Classification c = classify(model, view.samples[i]);
      if (view.labeled[i]) {
        ++labeled_total;
        if (c.positive) ++labeled_hits;
      } else {
        ++unl_total;
        if (c.positive) ++unl_pos;
      }
    }
    const double labeled_acc =
        labeled_total > 0 ? static_cast<double>(labeled_hits) / static_cast<double>(labeled_total) : 1.0;
    controller.update(labeled_acc);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.terms = mean_terms;
    rec.lambda7 = controller.value();
    rec.labeled_accuracy = labeled_acc;
    rec.positive_fraction = unl_total > 0 ? static_cast<double>(unl_pos) / static_cast<double>(unl_total) : 0.0;
    rec.lr = lr;
    result.log.push_back(rec);

    if (cfg.patience) {
      const double epoch_loss = mean_terms.total();
      if (epoch_loss < best_loss - 1e-6) {
        best_loss = epoch_loss;
        stall = 0;
      } else if (++stall >= *cfg.patience) {
        lr *= 0.5;
        stall = 0;
      }
    }
  }

  if (!model.positive.all_finite() || !model.negative.all_finite()) {
    throw training_error("non-finite parameters after training");
  }
  return result;
}

std::vector<TrainResult> train_ensemble(const TrainView& view, const BasisSpec& basis,
                                        const PreprocessSpec& preprocess, const TrainConfig& cfg) {
  cfg.validate();
  std::vector<TrainResult> results(static_cast<std::size_t>(cfg.ensemble));
  std::exception_ptr first_error;

  if (cfg.workers <= 1) {
    for (int m = 0; m < cfg.ensemble; ++m) {
      try {
        results[static_cast<std::size_t>(m)] = train_model(view, basis, preprocess, cfg, m);
      } catch (const std::exception& e) {
        throw training_error("ensemble member " + std::to_string(m) + " failed: " + e.what());
      }
    }
    return results;
  }

  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::atomic<int> failed{-1};
  std::mutex err_mutex;
  const int workers = std::min(cfg.workers, cfg.ensemble);
  for (int wkr = 0; wkr < workers; ++wkr) {
    pool.emplace_back([&] {
      for (int m = next.fetch_add(1); m < cfg.ensemble; m = next.fetch_add(1)) {
        try {
          results[static_cast<std::size_t>(m)] = train_model(view, basis, preprocess, cfg, m);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) {
            first_error = std::current_exception();
            failed.store(m);
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      throw training_error("ensemble member " + std::to_string(failed.load()) + " failed: " + e.what());
    }
  }
  return results;
}

}  // namespace lpspul
