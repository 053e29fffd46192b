#include "lpspul/objective.hpp"

#include <cmath>

namespace lpspul {

void Lambda7Controller::update(double labeled_accuracy) {
  if (!(labeled_accuracy >= 0.0 && labeled_accuracy <= 1.0)) {
    throw parameter_error("labeled accuracy outside [0, 1]");
  }
  if (labeled_accuracy == 1.0) {
    if (last_ == Direction::dec) {
      k_inc_ = std::pow(k_inc_, anneal_exponent_);
      k_dec_ = std::pow(k_dec_, anneal_exponent_);
    }
    value_ = std::min(value_ * k_inc_, max_value_);
    last_ = Direction::inc;
  } else if (labeled_accuracy < 0.95) {
    value_ = std::max(value_ * k_dec_, min_value_);
    last_ = Direction::dec;
  }
}

Classification classify(const PulModel& model, const EmbeddedSample& x) {
  const bool masked = x.any_missing();
  const double lp = masked ? marginalized_log_norm(model.positive, x) : log_norm(model.positive, x);
  const double ln = masked ? marginalized_log_norm(model.negative, x) : log_norm(model.negative, x);
  if (lp == kLogZero && ln == kLogZero) {
    throw training_error("classification undefined: both projections have zero norm");
  }
  Classification c;
  c.margin = lp - ln;
  c.positive = c.margin > 0.0;
  return c;
}

std::size_t BatchPartition::count(Group g) const {
  std::size_t n = 0;
  for (Group x : group) {
    if (x == g) ++n;
  }
  return n;
}

std::vector<std::size_t> BatchPartition::indices(Group g) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i] == g) idx.push_back(i);
  }
  return idx;
}

BatchPartition partition(const PulModel& model, std::span<const EmbeddedSample* const> batch,
                         std::span<const std::uint8_t> labeled) {
  if (batch.empty()) throw parameter_error("partition: empty batch");
  if (batch.size() != labeled.size()) throw parameter_error("partition: flag count mismatch");

  BatchPartition part;
  part.group.resize(batch.size());
  part.log_pos.resize(batch.size());
  part.log_neg.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const EmbeddedSample& x = *batch[i];
    const bool masked = x.any_missing();
    const double lp = masked ? marginalized_log_norm(model.positive, x) : log_norm(model.positive, x);
    const double ln = masked ? marginalized_log_norm(model.negative, x) : log_norm(model.negative, x);
    part.log_pos[i] = lp;
    part.log_neg[i] = ln;
    if (labeled[i]) {
      part.group[i] = Group::labeled;
    } else {
      if (lp == kLogZero && ln == kLogZero) {
        throw training_error("classification undefined: both projections have zero norm");
      }
      part.group[i] = (lp - ln > 0.0) ? Group::unlabeled_pos : Group::unlabeled_neg;
    }
  }
  return part;
}

namespace {

double sq(double x) { return x * x; }

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct FrobeniusPair {
  double log_pos;
  double log_neg;
};

FrobeniusPair frobenius_logs(const PulModel& model) {
  return {log_frobenius(model.positive), log_frobenius(model.negative)};
}

LossTerms loss_terms_impl(const BatchPartition& part, const LossWeights& w, double lambda7,
                          const FrobeniusPair& frob) {
  LossTerms t;
  std::size_t n_l = 0, n_p = 0, n_n = 0, n_u = 0;
  double mean_margin = 0.0;
  for (std::size_t i = 0; i < part.group.size(); ++i) {
    const double lp = part.log_pos[i];
    const double ln = part.log_neg[i];
    switch (part.group[i]) {
      case Group::labeled:
        t.l1 += w.lambda1 * sq(lp - w.mu0) + w.lambda2 * sq(ln - w.mu1);
        ++n_l;
        break;
      case Group::unlabeled_pos:
        t.l2 += w.lambda3 * sq(lp - w.mu0) + w.lambda4 * sq(ln - w.mu1);
        ++n_p;
        break;
      case Group::unlabeled_neg:
        // Roles of the maps are swapped for negatives: the negative norm is
        // pulled to mu0 and the positive norm to mu1.
        t.l3 += w.lambda5 * sq(ln - w.mu0) + w.lambda6 * sq(lp - w.mu1);
        ++n_n;
        break;
    }
    if (part.group[i] != Group::labeled) {
      mean_margin += lp - ln;
      ++n_u;
    }
  }
  if (n_l > 0) t.l1 /= static_cast<double>(n_l);
  if (n_p > 0) t.l2 /= static_cast<double>(n_p);
  if (n_n > 0) t.l3 /= static_cast<double>(n_n);
  if (n_u > 0) {
    mean_margin /= static_cast<double>(n_u);
    t.l5 = w.lambda8 * sq(mean_margin);
  }
  t.l4 = lambda7 * (std::fabs(frob.log_pos) + std::fabs(frob.log_neg) + std::fabs(frob.log_pos - frob.log_neg));
  return t;
}

}  // namespace

LossTerms loss_terms(const PulModel& model, const BatchPartition& part, const LossWeights& w, double lambda7) {
  return loss_terms_impl(part, w, lambda7, frobenius_logs(model));
}

BatchGradient grad_total(const PulModel& model, std::span<const EmbeddedSample* const> batch,
                         std::span<const std::uint8_t> labeled, const LossWeights& w, double lambda7) {
  BatchGradient out;
  out.part = partition(model, batch, labeled);
  const BatchPartition& part = out.part;

  const double n_l = static_cast<double>(part.count(Group::labeled));
  const double n_p = static_cast<double>(part.count(Group::unlabeled_pos));
  const double n_n = static_cast<double>(part.count(Group::unlabeled_neg));
  const double n_u = n_p + n_n;
  double mean_margin = 0.0;
  if (n_u > 0) {
    for (std::size_t i = 0; i < part.group.size(); ++i) {
      if (part.group[i] != Group::labeled) mean_margin += part.log_pos[i] - part.log_neg[i];
    }
    mean_margin /= n_u;
  }

  out.positive = NetworkGrad::zeros_like(model.positive);
  out.negative = NetworkGrad::zeros_like(model.negative);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double lp = part.log_pos[i];
    const double ln = part.log_neg[i];
    double cp = 0.0, cn = 0.0;
    switch (part.group[i]) {
      case Group::labeled:
        cp = 2.0 * w.lambda1 * (lp - w.mu0) / n_l;
        cn = 2.0 * w.lambda2 * (ln - w.mu1) / n_l;
        break;
      case Group::unlabeled_pos:
        cp = 2.0 * w.lambda3 * (lp - w.mu0) / n_p;
        cn = 2.0 * w.lambda4 * (ln - w.mu1) / n_p;
        break;
      case Group::unlabeled_neg:
        cn = 2.0 * w.lambda5 * (ln - w.mu0) / n_n;
        cp = 2.0 * w.lambda6 * (lp - w.mu1) / n_n;
        break;
    }
    if (part.group[i] != Group::labeled && n_u > 0) {
      const double c5 = 2.0 * w.lambda8 * mean_margin / n_u;
      cp += c5;
      cn -= c5;
    }
    if (cp != 0.0) out.positive.axpy(cp, grad_log_norm(model.positive, *batch[i]).grad);
    if (cn != 0.0) out.negative.axpy(cn, grad_log_norm(model.negative, *batch[i]).grad);
  }

  const LogNormGrad fp = grad_log_frobenius(model.positive);
  const LogNormGrad fn = grad_log_frobenius(model.negative);
  const double dp = lambda7 * (sign(fp.value) + sign(fp.value - fn.value));
  const double dn = lambda7 * (sign(fn.value) - sign(fp.value - fn.value));
  if (dp != 0.0) out.positive.axpy(dp, fp.grad);
  if (dn != 0.0) out.negative.axpy(dn, fn.grad);

  out.terms = loss_terms_impl(part, w, lambda7, {fp.value, fn.value});
  return out;
}

}  // namespace lpspul
