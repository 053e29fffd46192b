#pragma once

#include <span>
#include <vector>

#include "lpspul/gradient.hpp"
#include "lpspul/model.hpp"

namespace lpspul {

/// Loss coefficients and log-norm targets. Defaults are the fixed working
/// set used throughout: lambda1 = lambda2 = lambda8 = 4, lambda4 = lambda5 = 2,
/// lambda3 = lambda6 = 1, mu0 = 5, mu1 = -50.
struct LossWeights {
  double lambda1 = 4.0;
  double lambda2 = 4.0;
  double lambda3 = 1.0;
  double lambda4 = 2.0;
  double lambda5 = 2.0;
  double lambda6 = 1.0;
  double lambda8 = 4.0;
  double mu0 = 5.0;
  double mu1 = -50.0;
};

struct Lambda7Settings {
  double initial = 1.0;
  double k_inc = 1.1;
  double k_dec = 0.9;
  double max_value = 10.0;
  double min_value = 0.1;
  double anneal_exponent = 0.8;
};

/// Dynamic schedule for the Frobenius-penalty weight. Perfect labeled
/// accuracy multiplies the value by k_inc (capped at max_value); accuracy
/// below 0.95 multiplies by k_dec (floored at min_value). On every
/// decrease-to-increase turnaround both factors are annealed toward 1 as
/// k <- k^0.8 before that step's update.
class Lambda7Controller {
 public:
  Lambda7Controller() = default;
  explicit Lambda7Controller(const Lambda7Settings& s)
      : value_(s.initial), k_inc_(s.k_inc), k_dec_(s.k_dec), max_value_(s.max_value), min_value_(s.min_value),
        anneal_exponent_(s.anneal_exponent) {}

  double value() const { return value_; }
  double k_inc() const { return k_inc_; }
  double k_dec() const { return k_dec_; }

  void update(double labeled_accuracy);

 private:
  enum class Direction { none, inc, dec };
  double value_ = 1.0;
  double k_inc_ = 1.1;
  double k_dec_ = 0.9;
  double max_value_ = 10.0;
  double min_value_ = 0.1;
  double anneal_exponent_ = 0.8;
  Direction last_ = Direction::none;
};

struct Classification {
  bool positive = false;
  double margin = 0.0;  // log_norm(positive net) - log_norm(negative net)
};

/// Predicted label by comparing the two projection norms; masked samples go
/// through the marginalized norms. An exact tie is negative. Throws
/// training_error when both norms are -inf.
Classification classify(const PulModel& model, const EmbeddedSample& x);

enum class Group : std::uint8_t { labeled = 0, unlabeled_pos = 1, unlabeled_neg = 2 };

/// A batch split into labeled positives and unlabeled samples classified
/// positive/negative, with the log norms cached for the loss.
struct BatchPartition {
  std::vector<Group> group;
  std::vector<double> log_pos;
  std::vector<double> log_neg;

  std::size_t count(Group g) const;
  std::vector<std::size_t> indices(Group g) const;
};

BatchPartition partition(const PulModel& model, std::span<const EmbeddedSample* const> batch,
                         std::span<const std::uint8_t> labeled);

struct LossTerms {
  double l1 = 0.0;  // labeled positives toward (mu0, mu1)
  double l2 = 0.0;  // unlabeled classified positive, same targets
  double l3 = 0.0;  // unlabeled classified negative, roles of the maps swapped
  double l4 = 0.0;  // Frobenius norms toward 1 and toward each other
  double l5 = 0.0;  // mean positive/negative log norms toward each other
  double total() const { return l1 + l2 + l3 + l4 + l5; }
};

LossTerms loss_terms(const PulModel& model, const BatchPartition& part, const LossWeights& w, double lambda7);

struct BatchGradient {
  NetworkGrad positive;
  NetworkGrad negative;
  LossTerms terms;
  BatchPartition part;
};

/// Exact gradient of the total loss over a batch: chain rule over the
/// cached log norms, with sign(0) = 0 subgradients for the absolute values
/// in the Frobenius term.
BatchGradient grad_total(const PulModel& model, std::span<const EmbeddedSample* const> batch,
                         std::span<const std::uint8_t> labeled, const LossWeights& w, double lambda7);

}  // namespace lpspul
