#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "marq/cl/fisher.hpp"
#include "marq/cl/strategy.hpp"

using namespace marq;
using namespace marq::cl;

namespace {

/// Model that predicts a constant c regardless of input ("scalar" model).
nn::Model constant_model(double c) {
  nn::Model m;
  m.b2 = c;
  return m;
}

double plain_mse(const nn::Model& m, nn::Batch batch) { return nn::dataset_mse(m, batch); }

}  // namespace

TEST_CASE("baseline loss is the batch MSE, zero on perfect predictions") {
  Rng rng(61);
  BaselineStrategy baseline;
  auto batch = testutil::random_batch(rng, 8);
  nn::Model m = constant_model(0.25);
  for (auto& s : batch) s.y = 0.25;
  CHECK(baseline.loss(m, batch) == 0.0);

  const auto batch2 = testutil::random_batch(rng, 16);
  CHECK(baseline.loss(m, batch2) == plain_mse(m, batch2));
}

TEST_CASE("reduction identities: degenerate strategies equal baseline") {
  Rng rng(67);
  BaselineStrategy baseline;
  LwfStrategy lwf0(0.0);
  EwcStrategy ewc(0.75);
  DerStrategy der(200.0, 200.0, 5);

  // EWC with anchors whose Fisher is exactly zero (single-sample task).
  nn::Model anchor_model = testutil::random_model(rng);
  nn::Dataset one_sample = {testutil::random_sample(rng)};
  ewc.end_task(anchor_model, one_sample);

  // LWF with lambda=0 still carries snapshots; they must not contribute.
  lwf0.end_task(testutil::random_model(rng), one_sample);

  for (int trial = 0; trial < 200; ++trial) {
    const nn::Model m = testutil::random_model(rng);
    const auto batch = testutil::random_batch(rng, 7);
    Rng r(1000 + static_cast<std::uint64_t>(trial));
    lwf0.prepare_batch(const_cast<nn::Model&>(m), batch, false, r);
    der.prepare_batch(const_cast<nn::Model&>(m), batch, false, r);
    const double base = baseline.loss(m, batch);
    CHECK(std::abs(lwf0.loss(m, batch) - base) < 1e-12);
    CHECK(std::abs(ewc.loss(m, batch) - base) < 1e-12);
    CHECK(std::abs(der.loss(m, batch) - base) < 1e-12);
  }
}

TEST_CASE("lwf distillation vanishes when the model equals its snapshot") {
  Rng rng(71);
  LwfStrategy lwf(0.9);
  const nn::Model m = testutil::random_model(rng);
  nn::Dataset dummy;
  lwf.end_task(m, dummy);
  const auto batch = testutil::random_batch(rng, 6);
  Rng r(5);
  lwf.prepare_batch(const_cast<nn::Model&>(m), batch, false, r);
  CHECK(lwf.loss(m, batch) == Catch::Approx(0.1 * plain_mse(m, batch)).margin(1e-12));
}

TEST_CASE("lwf matches a hand-computed weighted sum on a scalar model") {
  // Constant-output models: predictions depend only on b2.
  const double c = 0.7, c1 = 0.2, c2 = 0.5;
  LwfStrategy lwf(0.9);
  nn::Dataset dummy;
  lwf.end_task(constant_model(c1), dummy);
  lwf.end_task(constant_model(c2), dummy);

  std::vector<nn::Sample> batch(3);
  batch[0].y = 0.1;
  batch[1].y = 0.4;
  batch[2].y = 0.9;
  nn::Model cur = constant_model(c);
  Rng r(6);
  lwf.prepare_batch(cur, batch, false, r);

  double mse_cur = 0.0;
  for (const auto& s : batch) mse_cur += (c - s.y) * (c - s.y);
  mse_cur /= 3.0;
  const double expected =
      0.1 * mse_cur + (0.9 / 2.0) * ((c - c1) * (c - c1) + (c - c2) * (c - c2));
  CHECK(lwf.loss(cur, batch) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("lwf keeps one snapshot per completed task") {
  LwfStrategy lwf(0.9);
  nn::Dataset dummy;
  Rng rng(73);
  for (int k = 0; k < 3; ++k) lwf.end_task(testutil::random_model(rng), dummy);
  CHECK(lwf.snapshot_count() == 3);

  LwfStrategy prev_only(0.9, /*previous_only=*/true);
  for (int k = 0; k < 3; ++k) prev_only.end_task(testutil::random_model(rng), dummy);
  CHECK(prev_only.snapshot_count() == 1);
}

TEST_CASE("ewc penalty is zero at the anchors and hand-computable off them") {
  Rng rng(79);
  const nn::Model m = testutil::random_model(rng);
  EwcStrategy ewc(0.75);
  nn::Dataset task_data = testutil::random_batch(rng, 12);
  ewc.end_task(m, task_data);
  const auto batch = testutil::random_batch(rng, 5);
  // Parameters exactly at the anchor: loss reduces to the data term.
  CHECK(ewc.loss(m, batch) == Catch::Approx(plain_mse(m, batch)).margin(1e-12));

  // Hand computation: F nonzero in two slots, parameters shifted by one.
  EwcStrategy toy(0.75);
  std::vector<double> theta = nn::flatten(m);
  std::vector<double> fisher(theta.size(), 0.0);
  fisher[0] = 1.0;
  fisher[1] = 2.0;
  std::vector<double> anchor = theta;
  anchor[0] -= 1.0;
  anchor[1] -= 1.0;
  toy.load_state({{"anchors", {{{"theta", anchor}, {"fisher", fisher}}}}});
  CHECK(toy.loss(m, batch) - plain_mse(m, batch) == Catch::Approx(1.125).margin(1e-12));
}

TEST_CASE("ewc anchors accumulate per task and stay immutable") {
  Rng rng(83);
  EwcStrategy ewc(0.75);
  nn::Dataset data = testutil::random_batch(rng, 10);
  ewc.end_task(testutil::random_model(rng), data);
  ewc.end_task(testutil::random_model(rng), data);
  REQUIRE(ewc.anchors().size() == 2);
  const nlohmann::json before = ewc.state_json();
  // Evaluation does not mutate anchors.
  const auto batch = testutil::random_batch(rng, 4);
  const nn::Model m = testutil::random_model(rng);
  (void)ewc.loss(m, batch);
  (void)ewc.gradient(m, batch);
  CHECK(ewc.state_json() == before);
}

TEST_CASE("fisher diagonal: degenerate datasets give zero importance") {
  Rng rng(89);
  const nn::Model m = testutil::random_model(rng);

  nn::Dataset one = {testutil::random_sample(rng)};
  for (double v : fisher_diagonal(m, one)) CHECK(v == 0.0);

  nn::Dataset dup(6, one[0]);  // identical samples, identical gradients
  for (double v : fisher_diagonal(m, dup)) CHECK(v == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("fisher diagonal matches a brute-force two-pass variance") {
  Rng rng(97);
  const nn::Model m = testutil::random_model(rng);
  const nn::Dataset data = testutil::random_batch(rng, 5);
  const std::vector<double> fisher = fisher_diagonal(m, data);

  // Brute force: collect per-sample gradients, then two-pass population variance.
  std::vector<std::vector<double>> grads;
  for (const nn::Sample& s : data) {
    nn::Gradients g;
    nn::accumulate_mse_gradient(m, std::span<const nn::Features>(&s.x, 1),
                                std::span<const double>(&s.y, 1), 1.0, g);
    grads.push_back(nn::flatten(g));
  }
  for (std::size_t i = 0; i < fisher.size(); ++i) {
    double mean = 0.0;
    for (const auto& g : grads) mean += g[i];
    mean /= static_cast<double>(grads.size());
    double var = 0.0;
    for (const auto& g : grads) var += (g[i] - mean) * (g[i] - mean);
    var /= static_cast<double>(grads.size());
    CHECK(fisher[i] == Catch::Approx(var).margin(1e-10));
    CHECK(fisher[i] >= 0.0);
  }
}

TEST_CASE("clear threshold splits the stream with ties going familiar") {
  ClearStrategy clear(2.0, 0.5, 50);
  nn::TrainConfig cfg;
  clear.begin_task(1, cfg);
  nn::Model zero;  // predicts 0, so a sample's loss is y^2 (no anchor yet)
  Rng rng(101);

  SECTION("unset mse_min means infinite threshold: everything familiar") {
    CHECK(clear.threshold() == std::numeric_limits<double>::infinity());
    nn::Sample s;
    s.y = 100.0;
    clear.step_sample(zero, s, rng);
    CHECK(clear.familiarity_count() == 1);
    CHECK(clear.novelty_count() == 0);
    CHECK(clear.retrain_count() == 0);
  }

  SECTION("loss exactly at threshold goes to the familiarity buffer") {
    clear.observe_validation(0.32000000000000006);
    CHECK(clear.threshold() == 0.16000000000000003);
    nn::Sample s;
    s.y = 0.4;  // loss = 0.16000000000000003 exactly
    REQUIRE(s.y * s.y == clear.threshold());
    clear.step_sample(zero, s, rng);
    CHECK(clear.familiarity_count() == 1);
    s.y = 0.5;  // above threshold
    clear.step_sample(zero, s, rng);
    CHECK(clear.novelty_count() == 1);
  }
}

TEST_CASE("clear retrains exactly when the buffers reach their limit") {
  ClearStrategy clear(2.0, 0.5, 50, /*retrain_epochs=*/2);
  nn::TrainConfig cfg;
  cfg.learning_rate = 0.01;
  clear.begin_task(1, cfg);
  clear.observe_validation(0.5);  // threshold 0.25
  nn::Model model;                // predicts 0
  Rng rng(103);
  nn::Sample high;
  high.y = 1.0;  // loss 1.0 > 0.25: novel
  for (int i = 0; i < 49; ++i) {
    clear.step_sample(model, high, rng);
    CHECK(clear.retrain_count() == 0);
  }
  CHECK(clear.buffered_total() == 49);
  clear.step_sample(model, high, rng);  // the 50th triggers the pause
  CHECK(clear.retrain_count() == 1);
  CHECK(clear.buffered_total() == 0);
}

TEST_CASE("clear mse_min is non-increasing and updated from familiar samples") {
  ClearStrategy clear(2.0, 0.5, 4, 1);
  nn::TrainConfig cfg;
  cfg.learning_rate = 0.0;  // retraining leaves the model unchanged
  clear.begin_task(1, cfg);
  clear.observe_validation(0.25);  // mse_min 0.25, threshold 0.125
  nn::Model model;                 // predicts 0
  Rng rng(107);

  double last_min = *clear.mse_min();
  // Familiar samples with smaller and smaller losses, flushing at limit 4.
  const double ys[8] = {0.3, 0.2, 0.1, 0.05, 0.3, 0.2, 0.1, 0.02};
  for (double y : ys) {
    nn::Sample s;
    s.y = y;
    clear.step_sample(model, s, rng);
    REQUIRE(clear.mse_min().has_value());
    CHECK(*clear.mse_min() <= last_min);
    last_min = *clear.mse_min();
  }
  // Lowest familiar loss seen in the second flush: 0.02^2
  CHECK(*clear.mse_min() == Catch::Approx(0.02 * 0.02).margin(1e-15));
  CHECK(clear.threshold() == Catch::Approx(0.5 * 0.02 * 0.02).margin(1e-15));

  // A later validation observation must not reset mse_min.
  clear.observe_validation(10.0);
  CHECK(*clear.mse_min() == Catch::Approx(0.02 * 0.02).margin(1e-15));
}

TEST_CASE("clear keeps a single anchor from the most recent task") {
  Rng rng(109);
  ClearStrategy clear(2.0, 0.5, 50);
  nn::Dataset data = testutil::random_batch(rng, 8);
  const nn::Model m1 = testutil::random_model(rng);
  const nn::Model m2 = testutil::random_model(rng);
  clear.end_task(m1, data);
  clear.end_task(m2, data);
  const nlohmann::json state = clear.state_json();
  CHECK(state.at("anchor").at("theta").get<std::vector<double>>() == nn::flatten(m2));
}

TEST_CASE("der replay terms vanish on matched logits and targets") {
  Rng rng(113);
  DerStrategy der(200.0, 200.0, 5);
  nn::Model m = testutil::random_model(rng);
  // Buffer entries whose stored raw output and target equal the model's own.
  for (int i = 0; i < 3; ++i) {
    nn::Sample s = testutil::random_sample(rng);
    const double raw = nn::forward(m, s.x).raw;
    s.y = raw;
    der.insert(s, raw, rng);
  }
  const auto batch = testutil::random_batch(rng, 4);
  Rng r(9);
  der.prepare_batch(m, batch, false, r);
  CHECK(der.loss(m, batch) == Catch::Approx(plain_mse(m, batch)).margin(1e-12));
}

TEST_CASE("der matches a hand-computed three-term sum on a scalar model") {
  DerStrategy der(200.0, 200.0, 5);
  nn::Model m = constant_model(0.3);
  Rng rng(127);
  nn::Sample entry;
  entry.y = 0.9;
  der.insert(entry, /*raw=*/0.5, rng);

  std::vector<nn::Sample> batch(2);
  batch[0].y = 0.1;
  batch[1].y = 0.7;
  Rng r(10);
  der.prepare_batch(m, batch, false, r);

  const double data_term = ((0.3 - 0.1) * (0.3 - 0.1) + (0.3 - 0.7) * (0.3 - 0.7)) / 2.0;
  const double alpha_term = 200.0 * (0.5 - 0.3) * (0.5 - 0.3);
  const double beta_term = 200.0 * (0.9 - 0.3) * (0.9 - 0.3);
  CHECK(der.loss(m, batch) == Catch::Approx(data_term + alpha_term + beta_term).margin(1e-12));
}

TEST_CASE("der reservoir keeps the first entries and honors capacity zero") {
  Rng rng(131);
  DerStrategy der(200.0, 200.0, 5);
  for (int i = 0; i < 5; ++i) der.insert(testutil::random_sample(rng), 0.0, rng);
  CHECK(der.buffer().size() == 5);
  CHECK(der.seen() == 5);

  DerStrategy empty(200.0, 200.0, 0);
  for (int i = 0; i < 100; ++i) empty.insert(testutil::random_sample(rng), 0.0, rng);
  CHECK(empty.buffer().empty());
  // Degenerate capacity reduces to baseline.
  BaselineStrategy baseline;
  const nn::Model m = testutil::random_model(rng);
  const auto batch = testutil::random_batch(rng, 6);
  Rng r(11);
  empty.prepare_batch(const_cast<nn::Model&>(m), batch, false, r);
  CHECK(empty.loss(m, batch) == baseline.loss(m, batch));
}

TEST_CASE("der reservoir sampling is roughly uniform (coarse check)") {
  // Full-precision uniformity is exercised by the acceptance suite.
  const int kTrials = 2000;
  const int kStream = 100;
  const int kCapacity = 5;
  std::vector<int> included(kStream, 0);
  Rng rng(137);
  for (int t = 0; t < kTrials; ++t) {
    DerStrategy der(1.0, 1.0, kCapacity);
    for (int i = 0; i < kStream; ++i) {
      nn::Sample s;
      s.y = static_cast<double>(i);  // identify the position by its target
      der.insert(s, 0.0, rng);
    }
    for (const auto& e : der.buffer()) ++included[static_cast<std::size_t>(e.y)];
  }
  const double p = static_cast<double>(kCapacity) / kStream;
  const double sigma = std::sqrt(p * (1.0 - p) / kTrials);
  for (int i = 0; i < kStream; ++i) {
    const double freq = static_cast<double>(included[static_cast<std::size_t>(i)]) / kTrials;
    CHECK(std::abs(freq - p) <= 5.0 * sigma);  // generous at this trial count
  }
}

TEST_CASE("strategy factory builds every variant and round-trips state") {
  Rng rng(139);
  Hyperparams hp;
  nn::Dataset data = testutil::random_batch(rng, 6);
  for (const std::string& name : strategy_names()) {
    auto s = make_strategy(name, hp);
    REQUIRE(s);
    CHECK(s->name() == name);
    s->end_task(testutil::random_model(rng), data);
    auto clone = make_strategy(name, hp);
    clone->load_state(s->state_json());
    CHECK(clone->state_json() == s->state_json());
  }
  CHECK_THROWS_AS(make_strategy("nope", hp), ConfigError);

  Hyperparams bad;
  bad.lwf_lambda = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("composite gradients pass finite-difference spot checks") {
  Rng rng(149);
  Hyperparams hp;
  nn::Dataset task_data = testutil::random_batch(rng, 8);
  for (const std::string& name : strategy_names()) {
    auto strategy = make_strategy(name, hp);
    if (name == "clear") {
      auto* c = dynamic_cast<ClearStrategy*>(strategy.get());
      c->observe_validation(0.3);
    }
    strategy->end_task(testutil::random_model(rng), task_data);
    if (name == "der") {
      auto* d = dynamic_cast<DerStrategy*>(strategy.get());
      for (int i = 0; i < 3; ++i) d->insert(testutil::random_sample(rng), 0.2, rng);
    }
    nn::Model m = testutil::random_model(rng);
    const auto batch = testutil::random_batch(rng, 5);
    Rng r(12);
    strategy->prepare_batch(m, batch, false, r);
    INFO(name);
    CHECK(testutil::max_grad_rel_error(*strategy, m, batch) < 1e-4);
  }
}
