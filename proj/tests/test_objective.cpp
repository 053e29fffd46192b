#include <doctest.h>

#include <cmath>

#include "lpspul/objective.hpp"
#include "support/test_utils.hpp"

using namespace lpspul;
using namespace lpspul::testing;

namespace {

PulModel small_model(std::uint64_t seed, int n = 4, int d = 2, int D = 2, int S = 2) {
  PulModel m;
  m.positive = LpsNetwork::init(n, d, D, S, Rng::mix(seed, 1));
  m.negative = LpsNetwork::init(n, d, D, S, Rng::mix(seed, 2));
  m.basis = BasisSpec::uniform(BasisKind::cosine, d, n);
  return m;
}

std::vector<EmbeddedSample> random_batch(const BasisSpec& basis, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EmbeddedSample> batch;
  for (std::size_t i = 0; i < count; ++i) batch.push_back(random_sample(basis, rng));
  return batch;
}

std::vector<const EmbeddedSample*> ptrs(const std::vector<EmbeddedSample>& batch) {
  std::vector<const EmbeddedSample*> p;
  for (const auto& x : batch) p.push_back(&x);
  return p;
}

}  // namespace

TEST_CASE("classification compares log norms, margin invariant under joint rescale") {
  PulModel m = small_model(1);
  Rng rng(3);
  const EmbeddedSample x = random_sample(m.basis, rng);
  const Classification before = classify(m, x);
  CHECK(before.margin == doctest::Approx(log_norm(m.positive, x) - log_norm(m.negative, x)));
  CHECK(before.positive == (before.margin > 0.0));

  m.positive.scale_site(0, 3.0);
  m.negative.scale_site(0, 3.0);
  const Classification after = classify(m, x);
  CHECK(after.margin == doctest::Approx(before.margin).epsilon(1e-10));
  CHECK(after.positive == before.positive);
}

TEST_CASE("margin extremes and the tie rule") {
  // A model whose networks are scaled copies gives an exactly controllable
  // margin: scaling one network by e^c shifts the margin by c.
  PulModel m = small_model(2);
  m.negative = m.positive;
  Rng rng(9);
  const EmbeddedSample x = random_sample(m.basis, rng);
  CHECK(classify(m, x).margin == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(classify(m, x).positive);  // exact tie is negative

  PulModel wide = small_model(3);
  wide.negative = wide.positive;
  wide.positive.scale_site(0, std::exp(55.0));
  const Classification c = classify(wide, x);
  CHECK(c.margin == doctest::Approx(55.0).epsilon(1e-9));
  CHECK(c.positive);
  wide.positive.scale_site(0, std::exp(-110.0));
  const Classification cneg = classify(wide, x);
  CHECK(cneg.margin == doctest::Approx(-55.0).epsilon(1e-9));
  CHECK_FALSE(cneg.positive);

  PulModel dead = small_model(4);
  dead.positive.scale_site(0, 0.0);
  dead.negative.scale_site(0, 0.0);
  CHECK_THROWS_AS(classify(dead, x), training_error);
}

TEST_CASE("partition splits by flags and current classification") {
  const PulModel m = small_model(5);
  const auto batch = random_batch(m.basis, 12, 17);
  std::vector<std::uint8_t> labeled(12, 0);
  labeled[0] = labeled[3] = 1;

  const BatchPartition part = partition(m, ptrs(batch), labeled);
  CHECK(part.count(Group::labeled) == 2);
  CHECK(part.count(Group::labeled) + part.count(Group::unlabeled_pos) + part.count(Group::unlabeled_neg) == 12);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (labeled[i]) {
      CHECK(part.group[i] == Group::labeled);
    } else {
      const Classification c = classify(m, batch[i]);
      CHECK((part.group[i] == Group::unlabeled_pos) == c.positive);
    }
    CHECK(part.log_pos[i] == doctest::Approx(log_norm(m.positive, batch[i])));
  }

  std::vector<std::uint8_t> all_labeled(12, 1);
  const BatchPartition all = partition(m, ptrs(batch), all_labeled);
  CHECK(all.count(Group::unlabeled_pos) == 0);
  CHECK(all.count(Group::unlabeled_neg) == 0);
}

TEST_CASE("loss terms at their minima vanish") {
  const LossWeights w;
  CHECK(w.lambda1 == 4.0);
  CHECK(w.lambda4 == 2.0);
  CHECK(w.lambda3 == 1.0);
  CHECK(w.lambda8 == 4.0);
  CHECK(w.mu0 == 5.0);
  CHECK(w.mu1 == -50.0);

  PulModel m = small_model(6);
  BatchPartition part;
  part.group = {Group::labeled, Group::labeled};
  part.log_pos = {w.mu0, w.mu0};
  part.log_neg = {w.mu1, w.mu1};
  // Unit-Frobenius networks zero out the penalty term.
  const LossTerms t = loss_terms(m, part, w, 1.0);
  CHECK(t.l1 == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(t.l2 == 0.0);  // empty groups contribute nothing
  CHECK(t.l3 == 0.0);
  CHECK(t.l4 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(t.l5 == 0.0);
  CHECK(t.total() == t.l1 + t.l2 + t.l3 + t.l4 + t.l5);
}

TEST_CASE("loss term bookkeeping per group") {
  const LossWeights w;
  PulModel m = small_model(7);
  BatchPartition part;
  part.group = {Group::unlabeled_pos, Group::unlabeled_neg};
  part.log_pos = {w.mu0 + 1.0, w.mu1};
  part.log_neg = {w.mu1, w.mu0};
  const LossTerms t = loss_terms(m, part, w, 1.0);
  CHECK(t.l2 == doctest::Approx(w.lambda3 * 1.0));
  CHECK(t.l3 == doctest::Approx(0.0));  // swapped roles: neg at mu0, pos at mu1
  // l5: margins are (mu0 + 1 - mu1) and (mu1 - mu0); mean = 0.5
  CHECK(t.l5 == doctest::Approx(w.lambda8 * 0.25));

  BatchPartition single;
  single.group = {Group::unlabeled_pos};
  single.log_pos = {10.0};
  single.log_neg = {10.0};
  CHECK(loss_terms(m, single, w, 1.0).l5 == doctest::Approx(0.0));
  single.log_pos = {12.0};
  CHECK(loss_terms(m, single, w, 1.0).l5 == doctest::Approx(16.0));

  SUBCASE("all loss terms are nonnegative on random partitions") {
    Rng rng(123);
    for (int trial = 0; trial < 10; ++trial) {
      BatchPartition p;
      for (int i = 0; i < 6; ++i) {
        p.group.push_back(static_cast<Group>(rng.index(3)));
        p.log_pos.push_back(rng.uniform(-60.0, 10.0));
        p.log_neg.push_back(rng.uniform(-60.0, 10.0));
      }
      const LossTerms lt = loss_terms(m, p, w, rng.uniform(0.1, 10.0));
      CHECK(lt.l1 >= 0.0);
      CHECK(lt.l2 >= 0.0);
      CHECK(lt.l3 >= 0.0);
      CHECK(lt.l4 >= 0.0);
      CHECK(lt.l5 >= 0.0);
    }
  }
}

TEST_CASE("total-loss gradient matches finite differences") {
  PulModel model = small_model(8);
  // Move both Frobenius logs away from the |.| kinks of the penalty term
  // (init pins them to 0, where the loss is not differentiable).
  model.positive.scale_site(0, 1.4);
  model.negative.scale_site(0, 0.6);
  const auto batch = random_batch(model.basis, 6, 31);
  std::vector<std::uint8_t> labeled = {1, 0, 0, 1, 0, 0};
  const LossWeights w;
  const double lambda7 = 1.7;

  const BatchGradient bg = grad_total(model, ptrs(batch), labeled, w, lambda7);
  CHECK(bg.terms.total() == doctest::Approx(loss_terms(model, bg.part, w, lambda7).total()));

  // Perturbing a network entry re-partitions, so probe the loss with the
  // partition frozen the way the analytic gradient sees it: rebuild from
  // current norms each time but with identical grouping (margins are far
  // from zero for this seed, so grouping is stable under h = 1e-6).
  auto loss_at = [&](const PulModel& m) {
    std::vector<const EmbeddedSample*> p = ptrs(batch);
    return grad_total(m, p, labeled, w, lambda7).terms.total();
  };

  for (int net_id = 0; net_id < 2; ++net_id) {
    LpsNetwork& net = net_id == 0 ? model.positive : model.negative;
    const NetworkGrad& grad = net_id == 0 ? bg.positive : bg.negative;
    double worst = 0.0;
    for (int site = 0; site < net.num_sites(); ++site) {
      for (std::size_t e = 0; e < net.site(site).size(); ++e) {
        const double h = 1e-6;
        double& x = net.site(site).data[e];
        const double orig = x;
        x = orig + h;
        const double fp = loss_at(model);
        x = orig - h;
        const double fm = loss_at(model);
        x = orig;
        const double fd = (fp - fm) / (2.0 * h);
        const double an = grad.sites[static_cast<std::size_t>(site)][e];
        worst = std::max(worst, std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1.0}));
      }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("gradient scales linearly in the loss weights") {
  PulModel model = small_model(9);
  const auto batch = random_batch(model.basis, 4, 77);
  std::vector<std::uint8_t> labeled = {1, 1, 0, 0};
  LossWeights w;
  w.lambda2 = w.lambda3 = w.lambda4 = w.lambda5 = w.lambda6 = w.lambda8 = 0.0;
  w.lambda1 = 1.0;
  const BatchGradient g1 = grad_total(model, ptrs(batch), labeled, w, 0.0);
  w.lambda1 = 2.0;
  const BatchGradient g2 = grad_total(model, ptrs(batch), labeled, w, 0.0);
  for (std::size_t s = 0; s < g1.positive.sites.size(); ++s) {
    for (std::size_t j = 0; j < g1.positive.sites[s].size(); ++j) {
      CHECK(g2.positive.sites[s][j] == doctest::Approx(2.0 * g1.positive.sites[s][j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("gradient vanishes at a loss minimum") {
  // Labeled-only batch with the targets set to the exact current log norms
  // and lambda7 = 0: every chain coefficient is exactly zero.
  PulModel model = small_model(10);
  Rng rng(5);
  const EmbeddedSample x = random_sample(model.basis, rng);
  LossWeights w;
  w.mu0 = log_norm(model.positive, x);
  w.mu1 = log_norm(model.negative, x);
  std::vector<const EmbeddedSample*> batch = {&x};
  std::vector<std::uint8_t> labeled = {1};
  const BatchGradient bg = grad_total(model, batch, labeled, w, 0.0);
  CHECK(bg.terms.total() == 0.0);
  for (const auto& net_grad : {bg.positive, bg.negative}) {
    for (const auto& site : net_grad.sites) {
      for (double v : site) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("lambda7 controller follows the schedule") {
  Lambda7Controller c;
  CHECK(c.value() == 1.0);
  c.update(1.0);
  CHECK(c.value() == doctest::Approx(1.1));

  Lambda7Controller cap;
  for (int i = 0; i < 60; ++i) cap.update(1.0);
  CHECK(cap.value() == doctest::Approx(10.0));

  Lambda7Controller floor;
  for (int i = 0; i < 80; ++i) floor.update(0.5);
  CHECK(floor.value() == doctest::Approx(0.1));

  SUBCASE("anneal fires on the decrease-to-increase turnaround") {
    Lambda7Controller turn;
    turn.update(0.9);  // decrease: 1.0 -> 0.9
    CHECK(turn.value() == doctest::Approx(0.9));
    CHECK(turn.k_inc() == doctest::Approx(1.1));
    turn.update(1.0);  // anneal both factors, then increase
    CHECK(turn.k_inc() == doctest::Approx(1.0792303452988909));
    CHECK(turn.k_dec() == doctest::Approx(std::pow(0.9, 0.8)));
    CHECK(turn.value() == doctest::Approx(0.9713073107690019));
  }

  SUBCASE("intermediate accuracies leave the value alone") {
    Lambda7Controller hold;
    hold.update(0.97);
    CHECK(hold.value() == 1.0);
  }

  SUBCASE("value stays within bounds for arbitrary sequences") {
    Lambda7Controller any;
    Rng rng(44);
    for (int i = 0; i < 500; ++i) {
      any.update(rng.uniform());
      CHECK(any.value() >= 0.1 - 1e-12);
      CHECK(any.value() <= 10.0 + 1e-12);
    }
  }
}
