#pragma once

#include "lpspul/datasets.hpp"

namespace lpspul {

/// Predicted labels (1 positive / 0 negative) for every sample.
std::vector<int> predict(const PulModel& model, const std::vector<EmbeddedSample>& samples);

/// Fraction of samples on which the two models predict the same label.
double agreement_fraction(const PulModel& a, const PulModel& b, const std::vector<EmbeddedSample>& samples);

/// M x M symmetric pairwise agreement matrix with unit diagonal.
Eigen::MatrixXd agreement_matrix(const std::vector<PulModel>& models, const std::vector<EmbeddedSample>& samples);
Eigen::MatrixXd agreement_matrix(const std::vector<std::vector<int>>& predictions);

struct SelectedPair {
  int first = 0;
  int second = 1;
  double estimated_accuracy = 0.0;  // their agreement fraction
};

/// The pair that agrees most; ties go to the lowest member indices. The
/// agreement fraction doubles as a label-free accuracy estimate.
SelectedPair select_models(const std::vector<PulModel>& models, const std::vector<EmbeddedSample>& samples);
SelectedPair select_pair(const Eigen::MatrixXd& agreement);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth);
/// F1 of the positive class; 0 when precision + recall vanishes.
double f1_score(const std::vector<int>& predictions, const std::vector<int>& truth);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  bool defined = true;  // false when either input is constant
};

/// Rank correlation with average ranks on ties; two-sided p-value from the
/// t approximation t = rho sqrt((n-2) / (1 - rho^2)).
SpearmanResult spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Regularized incomplete beta function I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

/// One hyperparameter tuple of the tuning grid.
struct HyperTuple {
  int embed_dim = 4;
  int bond_dim = 2;
  int epochs = 20;
  double lr = 0.1;

  std::string describe() const;
};

struct TuneOptions {
  int folds = 10;
  int models_per_cell = 10;  // ensemble size per (tuple, fold)
  int skip = 1;
  int repetitions = 1;
  std::optional<int> batch_size;
  bool resample_labeled = false;
  std::optional<int> patience;
  std::uint64_t seed = 0;
  int workers = 1;
  bool validate_f1 = true;  // also compute held-out F1 (validation studies)
};

struct TuneCell {
  int tuple_index = 0;
  int fold = 0;
  double estimated_accuracy = 0.0;
  double test_f1 = 0.0;
  bool skipped = false;  // fold had no positive training samples
};

struct TuningResult {
  std::vector<TuneCell> cells;
  std::vector<double> mean_estimated_accuracy;  // per tuple
  std::vector<double> mean_test_f1;             // per tuple (validation mode)
  int best_tuple = 0;
};

/// Persistence hook so long tuning runs can resume: cells present in the
/// store are not recomputed.
class TuneCellStore {
 public:
  virtual ~TuneCellStore() = default;
  virtual bool load(int tuple_index, int fold, TuneCell& cell) = 0;
  virtual void save(const TuneCell& cell) = 0;
};

/// Stratified fold ids (by hidden class, evaluation plumbing only).
std::vector<int> stratified_folds(const std::vector<int>& truth, int folds, std::uint64_t seed);

/// Grid search: per (tuple, fold), train an ensemble on the training folds,
/// select the best pair by agreement on the fold's training samples, and
/// record the agreement as the accuracy estimate (plus held-out F1 when
/// validating). The winning tuple maximizes mean estimated accuracy; ties
/// break toward smaller bond dimension, then smaller embedding dimension.
TuningResult tune(const PuDataset& data, const std::vector<HyperTuple>& grid, const TuneOptions& options,
                  TuneCellStore* store = nullptr);

/// Mean of the selected pair's metrics on a held-out set.
struct PairEvaluation {
  double metric_first = 0.0;
  double metric_second = 0.0;
  double mean() const { return 0.5 * (metric_first + metric_second); }
};

}  // namespace lpspul
