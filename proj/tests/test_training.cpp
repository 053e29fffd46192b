#include <doctest.h>

#include <cmath>
#include <set>

#include "lpspul/datasets.hpp"
#include "lpspul/training.hpp"
#include "support/test_utils.hpp"

using namespace lpspul;
using namespace lpspul::testing;

namespace {

TrainView toy_view(std::size_t n, std::size_t n_labeled, const BasisSpec& basis, std::uint64_t seed) {
  TrainView view;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) view.samples.push_back(random_sample(basis, rng));
  view.labeled.assign(n, 0);
  for (std::size_t i = 0; i < n_labeled; ++i) view.labeled[i] = 1;
  return view;
}

}  // namespace

TEST_CASE("make_batches shapes, determinism and labeled resampling") {
  std::vector<std::uint8_t> labeled(1000, 0);
  for (int i = 0; i < 100; ++i) labeled[static_cast<std::size_t>(i)] = 1;

  SUBCASE("full batch without resampling is the identity") {
    const auto batches = make_batches(labeled, std::nullopt, false, 5, 0);
    REQUIRE(batches.size() == 1);
    CHECK(batches[0].size() == 1000);
    std::set<std::size_t> seen(batches[0].begin(), batches[0].end());
    CHECK(seen.size() == 1000);
  }

  SUBCASE("resampling doubles every batch with labeled draws") {
    const auto batches = make_batches(labeled, 256, true, 5, 3);
    REQUIRE(batches.size() == 4);  // 1000 = 3 * 256 + 232
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const std::size_t original = b + 1 < batches.size() ? 256 : 232;
      CHECK(batches[b].size() == 2 * original);
      std::size_t labeled_count = 0;
      for (std::size_t i = 0; i < batches[b].size(); ++i) labeled_count += labeled[batches[b][i]];
      CHECK(labeled_count >= original);
    }
  }

  SUBCASE("same seed and epoch reproduce the batches") {
    CHECK(make_batches(labeled, 64, true, 9, 4) == make_batches(labeled, 64, true, 9, 4));
    CHECK(make_batches(labeled, 64, true, 9, 4) != make_batches(labeled, 64, true, 9, 5));
  }

  SUBCASE("resampling with no labeled samples is an error") {
    std::vector<std::uint8_t> none(10, 0);
    CHECK_THROWS_AS(make_batches(none, 4, true, 1, 0), data_error);
  }
}

TEST_CASE("adam_step follows the bias-corrected recurrence") {
  PulModel model;
  model.positive = LpsNetwork::init(1, 1, 1, 1, 3);
  model.negative = LpsNetwork::init(1, 1, 1, 1, 4);
  model.positive.site(0).data[0] = 1.0;
  AdamState state = AdamState::init(model);

  BatchGradient g;
  g.positive = NetworkGrad::zeros_like(model.positive);
  g.negative = NetworkGrad::zeros_like(model.negative);

  // Scalar trace of m, v, bias correction and update for grads
  // 0.5, -0.3, 0.2 at lr 0.1 (values computed by hand from the recurrence).
  const double grads[3] = {0.5, -0.3, 0.2};
  const double expected[3] = {0.90000000199999997, 0.88085019894177519, 0.84610743079088202};
  for (int t = 0; t < 3; ++t) {
    g.positive.sites[0][0] = grads[t];
    adam_step(model, g, state, 0.1);
    CHECK(model.positive.site(0).data[0] == doctest::Approx(expected[t]).epsilon(1e-12));
  }
  CHECK(state.step == 3);

  SUBCASE("zero gradient from a fresh state leaves parameters fixed") {
    PulModel m2;
    m2.positive = LpsNetwork::init(2, 2, 2, 1, 5);
    m2.negative = LpsNetwork::init(2, 2, 2, 1, 6);
    const auto before_p = m2.positive.site(0).data;
    AdamState s2 = AdamState::init(m2);
    BatchGradient zero;
    zero.positive = NetworkGrad::zeros_like(m2.positive);
    zero.negative = NetworkGrad::zeros_like(m2.negative);
    adam_step(m2, zero, s2, 0.1);
    CHECK(s2.step == 1);
    CHECK(m2.positive.site(0).data == before_p);
  }

  SUBCASE("identical gradients give identical updates") {
    PulModel m3;
    m3.positive = LpsNetwork::init(1, 2, 1, 1, 7);
    m3.negative = LpsNetwork::init(1, 2, 1, 1, 8);
    m3.positive.site(0).data.assign(4, 1.0);
    AdamState s3 = AdamState::init(m3);
    BatchGradient g3;
    g3.positive = NetworkGrad::zeros_like(m3.positive);
    g3.negative = NetworkGrad::zeros_like(m3.negative);
    g3.positive.sites[0] = {0.7, 0.7, 0.7, 0.7};
    adam_step(m3, g3, s3, 0.05);
    const auto& d = m3.positive.site(0).data;
    CHECK(d[0] == d[1]);
    CHECK(d[1] == d[2]);
    CHECK(d[2] == d[3]);
  }

  SUBCASE("NaN gradient names the failing site") {
    g.positive.sites[0][0] = std::nan("");
    try {
      adam_step(model, g, state, 0.1);
      FAIL("expected training_error");
    } catch (const training_error& e) {
      CHECK(std::string(e.what()).find("site 0") != std::string::npos);
      CHECK(std::string(e.what()).find("positive") != std::string::npos);
    }
  }
}

TEST_CASE("train_model is deterministic and rejects bad configs") {
  const BasisSpec basis = BasisSpec::uniform(BasisKind::cosine, 3, 4);
  const TrainView view = toy_view(24, 6, basis, 42);
  PreprocessSpec prep;
  prep.repetitions = 1;

  TrainConfig cfg;
  cfg.embed_dim = 3;
  cfg.bond_dim = 2;
  cfg.skip = 2;
  cfg.epochs = 4;
  cfg.lr = 0.05;
  cfg.seed = 77;

  const TrainResult a = train_model(view, basis, prep, cfg, 0);
  const TrainResult b = train_model(view, basis, prep, cfg, 0);
  for (int i = 0; i < a.model.positive.num_sites(); ++i) {
    CHECK(a.model.positive.site(i).data == b.model.positive.site(i).data);
    CHECK(a.model.negative.site(i).data == b.model.negative.site(i).data);
  }
  REQUIRE(a.log.size() == 4);
  for (const EpochRecord& rec : a.log) {
    CHECK(std::isfinite(rec.terms.total()));
    CHECK(rec.lambda7 >= 0.1);
    CHECK(rec.lambda7 <= 10.0);
    CHECK(rec.labeled_accuracy >= 0.0);
    CHECK(rec.labeled_accuracy <= 1.0);
    CHECK(rec.positive_fraction >= 0.0);
    CHECK(rec.positive_fraction <= 1.0);
  }

  const TrainResult c = train_model(view, basis, prep, cfg, 1);
  CHECK(a.model.positive.site(0).data != c.model.positive.site(0).data);

  TrainConfig bad = cfg;
  bad.epochs = 0;
  CHECK_THROWS_AS(train_model(view, basis, prep, bad, 0), parameter_error);
  TrainConfig bad2 = cfg;
  bad2.lr = 0.0;
  CHECK_THROWS_AS(train_model(view, basis, prep, bad2, 0), parameter_error);
}

TEST_CASE("training drives the losses down on a separable toy set") {
  // Two well-separated blobs; a short full-batch run should fit the labeled
  // targets and classify most unlabeled points consistently.
  PuDataset data = gen_blobs(60, 2, 0.3, 11);
  label_positives(data, 10, 5);
  const PreprocessSpec prep = fit_preprocess(data.features, 2);
  const BasisSpec basis = BasisSpec::uniform(BasisKind::cosine, 4, prep.output_dim());
  const TrainView view = make_train_view(data, prep, basis);

  TrainConfig cfg;
  cfg.embed_dim = 4;
  cfg.bond_dim = 3;
  cfg.skip = 2;
  cfg.repetitions = 2;
  cfg.epochs = 40;
  cfg.lr = 0.1;
  cfg.seed = 3;

  const TrainResult result = train_model(view, basis, prep, cfg, 0);
  CHECK(result.log.back().terms.total() < 0.2 * result.log.front().terms.total());
  CHECK(result.log.back().labeled_accuracy == doctest::Approx(1.0));
  CHECK(result.model.positive.all_finite());
  CHECK(result.model.negative.all_finite());
}

TEST_CASE("patience halves the learning rate on plateaus") {
  const BasisSpec basis = BasisSpec::uniform(BasisKind::cosine, 2, 3);
  const TrainView view = toy_view(8, 2, basis, 9);
  PreprocessSpec prep;

  TrainConfig cfg;
  cfg.embed_dim = 2;
  cfg.bond_dim = 1;
  cfg.skip = 3;
  cfg.epochs = 30;
  cfg.lr = 1e-9;  // effectively frozen: the loss cannot improve by 1e-6
  cfg.patience = 5;
  cfg.seed = 21;

  const TrainResult r = train_model(view, basis, prep, cfg, 0);
  CHECK(r.log.front().lr == doctest::Approx(1e-9));
  CHECK(r.log.back().lr < 1e-9 / 4.0);  // halved at least twice over 30 epochs
}

TEST_CASE("ensembles are ordered, deterministic and parallel-safe") {
  const BasisSpec basis = BasisSpec::uniform(BasisKind::cosine, 2, 4);
  const TrainView view = toy_view(16, 4, basis, 13);
  PreprocessSpec prep;

  TrainConfig cfg;
  cfg.embed_dim = 2;
  cfg.bond_dim = 2;
  cfg.skip = 2;
  cfg.epochs = 3;
  cfg.lr = 0.05;
  cfg.seed = 99;
  cfg.ensemble = 4;

  cfg.workers = 1;
  const auto serial = train_ensemble(view, basis, prep, cfg);
  cfg.workers = 4;
  const auto parallel = train_ensemble(view, basis, prep, cfg);
  REQUIRE(serial.size() == 4);
  REQUIRE(parallel.size() == 4);
  for (std::size_t m = 0; m < 4; ++m) {
    for (int i = 0; i < 4; ++i) {
      CHECK(serial[m].model.positive.site(i).data == parallel[m].model.positive.site(i).data);
    }
  }
  // members differ from each other
  CHECK(serial[0].model.positive.site(0).data != serial[1].model.positive.site(0).data);

  TrainConfig tiny = cfg;
  tiny.ensemble = 1;
  CHECK_THROWS_AS(train_ensemble(view, basis, prep, tiny), parameter_error);
}
