#include "lpspul/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lpspul {

std::vector<int> predict(const PulModel& model, const std::vector<EmbeddedSample>& samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& x : samples) out.push_back(classify(model, x).positive ? 1 : 0);
  return out;
}

double agreement_fraction(const PulModel& a, const PulModel& b, const std::vector<EmbeddedSample>& samples) {
  if (samples.empty()) throw parameter_error("agreement_fraction: empty data");
  const auto pa = predict(a, samples);
  const auto pb = predict(b, samples);
  std::size_t same = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) same += pa[i] == pb[i];
  return static_cast<double>(same) / static_cast<double>(samples.size());
}

Eigen::MatrixXd agreement_matrix(const std::vector<std::vector<int>>& predictions) {
  const int m = static_cast<int>(predictions.size());
  Eigen::MatrixXd mat = Eigen::MatrixXd::Identity(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      std::size_t same = 0;
      for (std::size_t k = 0; k < predictions[static_cast<std::size_t>(i)].size(); ++k) {
        same += predictions[static_cast<std::size_t>(i)][k] == predictions[static_cast<std::size_t>(j)][k];
      }
      const double frac = static_cast<double>(same) / static_cast<double>(predictions[static_cast<std::size_t>(i)].size());
      mat(i, j) = frac;
      mat(j, i) = frac;
    }
  }
  return mat;
}

Eigen::MatrixXd agreement_matrix(const std::vector<PulModel>& models, const std::vector<EmbeddedSample>& samples) {
  if (samples.empty()) throw parameter_error("agreement_matrix: empty data");
  std::vector<std::vector<int>> preds;
  preds.reserve(models.size());
  for (const auto& m : models) preds.push_back(predict(m, samples));
  return agreement_matrix(preds);
}

SelectedPair select_pair(const Eigen::MatrixXd& agreement) {
  const int m = static_cast<int>(agreement.rows());
  if (m < 2) throw parameter_error("model selection needs at least two models");
  SelectedPair best;
  best.estimated_accuracy = -1.0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (agreement(i, j) > best.estimated_accuracy) {
        best = {i, j, agreement(i, j)};
      }
    }
  }
  return best;
}

SelectedPair select_models(const std::vector<PulModel>& models, const std::vector<EmbeddedSample>& samples) {
  return select_pair(agreement_matrix(models, samples));
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth) {
  if (predictions.empty() || predictions.size() != truth.size()) {
    throw parameter_error("accuracy: length mismatch or empty input");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double f1_score(const std::vector<int>& predictions, const std::vector<int>& truth) {
  if (predictions.empty() || predictions.size() != truth.size()) {
    throw parameter_error("f1: length mismatch or empty input");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == 1 && truth[i] == 1) ++tp;
    else if (predictions[i] == 1 && truth[i] == 0) ++fp;
    else if (predictions[i] == 0 && truth[i] == 1) ++fn;
  }
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average rank
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double beta_cf(double a, double b, double x) {
  // Lentz's continued fraction for the incomplete beta.
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

SpearmanResult spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw parameter_error("spearman: length mismatch");
  const std::size_t n = xs.size();
  if (n < 3) throw parameter_error("spearman needs at least three points");

  SpearmanResult res;
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    res.defined = false;
    res.rho = 0.0;
    res.p_value = 1.0;
    return res;
  }
  res.rho = sxy / std::sqrt(sxx * syy);

  const double nu = static_cast<double>(n) - 2.0;
  if (std::fabs(res.rho) >= 1.0) {
    res.p_value = 0.0;
  } else {
    const double t2 = res.rho * res.rho * nu / (1.0 - res.rho * res.rho);
    // Two-sided p for Student's t: I_{nu/(nu+t^2)}(nu/2, 1/2).
    res.p_value = incomplete_beta(0.5 * nu, 0.5, nu / (nu + t2));
  }
  return res;
}

std::string HyperTuple::describe() const {
  return "d=" + std::to_string(embed_dim) + " D=" + std::to_string(bond_dim) + " epochs=" +
         std::to_string(epochs) + " lr=" + std::to_string(lr);
}

std::vector<int> stratified_folds(const std::vector<int>& truth, int folds, std::uint64_t seed) {
  if (folds < 2) throw parameter_error("need at least two folds");
  std::vector<int> fold_of(truth.size(), -1);
  Rng rng(Rng::mix(seed, 0x666f6c64ULL));
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == cls) idx.push_back(i);
    }
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k) fold_of[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return fold_of;
}

TuningResult tune(const PuDataset& data, const std::vector<HyperTuple>& grid, const TuneOptions& options,
                  TuneCellStore* store) {
  if (grid.empty()) throw parameter_error("tune: empty grid");
  const auto fold_of = stratified_folds(data.truth, options.folds, options.seed);

  TuningResult result;
  for (int t = 0; t < static_cast<int>(grid.size()); ++t) {
    for (int f = 0; f < options.folds; ++f) {
      TuneCell cell;
      if (store != nullptr && store->load(t, f, cell)) {
        result.cells.push_back(cell);
        continue;
      }
      cell.tuple_index = t;
      cell.fold = f;

      std::vector<std::size_t> train_idx, test_idx;
      for (std::size_t i = 0; i < data.size(); ++i) {
        (fold_of[i] == f ? test_idx : train_idx).push_back(i);
      }
      PuDataset train;
      train.features = data.features.select_rows(train_idx);
      PuDataset test;
      test.features = data.features.select_rows(test_idx);
      bool train_has_labeled = false;
      for (std::size_t i : train_idx) {
        train.labeled.push_back(data.labeled[i]);
        train.truth.push_back(data.truth[i]);
        train_has_labeled = train_has_labeled || data.labeled[i];
      }
      for (std::size_t i : test_idx) {
        test.labeled.push_back(data.labeled[i]);
        test.truth.push_back(data.truth[i]);
      }
      if (!train_has_labeled || train.positive_count() == 0) {
        cell.skipped = true;
        result.cells.push_back(cell);
        if (store != nullptr) store->save(cell);
        continue;
      }

      const HyperTuple& h = grid[static_cast<std::size_t>(t)];
      TrainConfig cfg;
      cfg.embed_dim = h.embed_dim;
      cfg.bond_dim = h.bond_dim;
      cfg.epochs = h.epochs;
      cfg.lr = h.lr;
      cfg.skip = options.skip;
      cfg.repetitions = options.repetitions;
      cfg.batch_size = options.batch_size;
      cfg.resample_labeled = options.resample_labeled;
      cfg.patience = options.patience;
      cfg.ensemble = options.models_per_cell;
      cfg.workers = options.workers;
      cfg.seed = Rng::mix(options.seed, Rng::mix(static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(f)));

      const PreprocessSpec prep = fit_preprocess(train.features, cfg.repetitions);
      const BasisSpec basis = BasisSpec::uniform(BasisKind::cosine, cfg.embed_dim, prep.output_dim());
      const TrainView view = make_train_view(train, prep, basis);
      const auto members = train_ensemble(view, basis, prep, cfg);

      std::vector<PulModel> models;
      models.reserve(members.size());
      for (const auto& r : members) models.push_back(r.model);
      const SelectedPair pair = select_models(models, view.samples);
      cell.estimated_accuracy = pair.estimated_accuracy;

      if (options.validate_f1) {
        const auto test_samples = embed_rows(test.features, prep, basis);
        const double f1_a = f1_score(predict(models[static_cast<std::size_t>(pair.first)], test_samples), test.truth);
        const double f1_b = f1_score(predict(models[static_cast<std::size_t>(pair.second)], test_samples), test.truth);
        cell.test_f1 = 0.5 * (f1_a + f1_b);
      }
      result.cells.push_back(cell);
      if (store != nullptr) store->save(cell);
    }
  }

  result.mean_estimated_accuracy.assign(grid.size(), 0.0);
  result.mean_test_f1.assign(grid.size(), 0.0);
  std::vector<int> counted(grid.size(), 0);
  for (const TuneCell& c : result.cells) {
    if (c.skipped) continue;
    result.mean_estimated_accuracy[static_cast<std::size_t>(c.tuple_index)] += c.estimated_accuracy;
    result.mean_test_f1[static_cast<std::size_t>(c.tuple_index)] += c.test_f1;
    ++counted[static_cast<std::size_t>(c.tuple_index)];
  }
  for (std::size_t t = 0; t < grid.size(); ++t) {
    if (counted[t] > 0) {
      result.mean_estimated_accuracy[t] /= counted[t];
      result.mean_test_f1[t] /= counted[t];
    }
  }

  result.best_tuple = 0;
  for (int t = 1; t < static_cast<int>(grid.size()); ++t) {
    const double cur = result.mean_estimated_accuracy[static_cast<std::size_t>(t)];
    const double best = result.mean_estimated_accuracy[static_cast<std::size_t>(result.best_tuple)];
    const auto& ht = grid[static_cast<std::size_t>(t)];
    const auto& hb = grid[static_cast<std::size_t>(result.best_tuple)];
    if (cur > best ||
        (cur == best && (ht.bond_dim < hb.bond_dim || (ht.bond_dim == hb.bond_dim && ht.embed_dim < hb.embed_dim)))) {
      result.best_tuple = t;
    }
  }
  return result;
}

}  // namespace lpspul
