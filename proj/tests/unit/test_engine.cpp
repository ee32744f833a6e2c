#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sumer/engine.hpp"
#include "sumer/error.hpp"
#include "sumer/synthgen.hpp"

using namespace sumer;

namespace {

Dataset separated(std::size_t per_class, std::uint64_t seed) {
  return gen_two_gaussians(
      GaussianSpec{{{-3.0, 0.0}, {3.0, 0.0}}, {{{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}}, {per_class, per_class}}, seed);
}

Dataset unlabel(const Dataset& d) {
  auto labs = d.labels();
  for (auto& l : labs) l = LabelRecord::unlabeled(l.truth);
  return d.with_labels(labs);
}

ClassifierSpec knn_spreading() {
  SpreadSpec s;
  s.affinity = KnnGraphAffinity{10};
  return ClassifierSpec{SpreadLearnerSpec{s}};
}

ExperimentConfig small_stream(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.data = MoonsSource{600, 0.1};
  c.split.labeled_fraction = 0.02;
  c.stream = {50, 4};
  c.learner = ClassifierSpec{ForestSpec{20, 32, 1, 0, 0}};
  c.gate.tau = 0.7;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return 0.5 * (v[(v.size() - 1) / 2] + v[v.size() / 2]);
}

}  // namespace

TEST_CASE("coverage confidence") {
  const std::vector<std::vector<double>> train{{0.0}, {1.0}, {2.0}, {3.0}, {10.0}};
  const std::vector<double> at{2.0};
  CHECK(coverage_confidence(at, train, 1) == 1.0);

  const CoverageIndex idx(train, 1, 0.9);
  // leave-one-out 1-NN distances {1, 1, 1, 1, 7}; 0.9 quantile = 1 + 0.6 * 6
  CHECK(idx.reference() == doctest::Approx(4.6));
  const std::vector<double> ref{14.6};
  CHECK(idx.score(ref) == doctest::Approx(0.5));
  double last = 1.0;
  for (double x = 10.0; x < 40.0; x += 0.5) {
    const std::vector<double> p{x};
    const double s = idx.score(p);
    CHECK(s <= last);
    CHECK(s >= 0.0);
    last = s;
  }
  CHECK(last < 0.02);
}

TEST_CASE("self_label gating") {
  const auto train = separated(100, 1);
  const auto window = unlabel(separated(100, 2));
  const auto model = fit(ClassifierSpec{ForestSpec{30, 32, 1, 0, 3}}, train);

  const auto all = self_label(model, window, GateSpec{0.0, std::nullopt}, 1);
  CHECK(all.accepted.size() == window.size());
  CHECK(all.rejected.empty());
  for (const auto& l : all.accepted.labels()) {
    CHECK(l.state == LabelState::SelfLabeled);
    CHECK(l.round == 1);
  }

  const auto strict = self_label(model, window, GateSpec{0.9, std::nullopt}, 2);
  CHECK(strict.accepted.size() + strict.rejected.size() == window.size());
  std::size_t right = 0;
  for (const auto& l : strict.accepted.labels()) {
    right += l.cls == *l.truth;
    CHECK(l.confidence >= 0.9);
  }
  CHECK(static_cast<double>(right) / static_cast<double>(strict.accepted.size()) >= 0.98);
  for (const auto& l : strict.rejected.labels()) CHECK(l.state == LabelState::Unlabeled);
}

TEST_CASE("coverage gating rejects far-away rows") {
  const auto train = separated(50, 1);
  const auto model = fit(ClassifierSpec{KnnSpec{5}}, train);
  std::vector<Instance> inst{{9000, {-3.0, 0.0}}, {9001, {-60.0, 40.0}}};
  const Dataset window(inst, {LabelRecord::unlabeled(0), LabelRecord::unlabeled(0)}, 2);
  std::vector<std::vector<double>> pts;
  for (const auto& i : train.instances()) pts.push_back(i.features);
  const CoverageIndex cov(pts, 5, 0.9);
  const GateSpec gate{0.5, CoverageSpec{5, 0.9}};
  const auto r = self_label(model, window, gate, 1, &cov);
  CHECK(r.accepted.ids() == std::vector<InstanceId>{9000});
  CHECK(r.rejected.ids() == std::vector<InstanceId>{9001});
}

TEST_CASE("prepared data follows the split") {
  auto c = small_stream(3);
  c.seed_noise = NoiseSpec{SymmetricFlip{0.25}, 0};
  const auto d = prepare_data(c);
  CHECK(d.seed.size() == 12);
  CHECK(d.holdout.size() == 120);
  CHECK(d.unlabeled.size() == 468);
  CHECK(d.flipped_ids.size() == 3);
  for (auto id : d.flipped_ids) {
    const auto& l = d.seed.label(d.seed.index_of(id));
    CHECK(l.cls != *l.truth);
  }
}

TEST_CASE("anchor seed selection picks the nearest rows per class") {
  auto c = small_stream(4);
  c.split.selection = SeedSelection::NearestToAnchor;
  c.split.anchors = {{1.0, 0.0}, {0.0, 0.5}};
  const auto d = prepare_data(c);
  REQUIRE(d.seed.size() == 12);
  const auto pool = d.seed.concat(d.unlabeled);
  for (int y = 0; y < 2; ++y) {
    const auto& a = c.split.anchors[static_cast<std::size_t>(y)];
    double worst_seed = 0.0, best_other = 1e300;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (*pool.label(i).truth != y) continue;
      const double dist = std::hypot(pool.features(i)[0] - a[0], pool.features(i)[1] - a[1]);
      (i < d.seed.size() ? worst_seed : best_other) =
          i < d.seed.size() ? std::max(worst_seed, dist) : std::min(best_other, dist);
    }
    CHECK(worst_seed <= best_other);
  }
}

TEST_CASE("trace bookkeeping") {
  auto c = small_stream(5);
  c.strategies = {Strategy::Static, Strategy::SUM, Strategy::Oracle};
  const auto t = run_experiment(c);
  REQUIRE(t.rows.size() == 3 * 5);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    CHECK(r.window == k / 3);
    CHECK(r.strategy == c.strategies[k % 3]);
    CHECK(r.seen == r.window * 50);
    if (r.window > 0) CHECK(r.accepted + r.rejected == 50);
    if (r.strategy == Strategy::Static && r.window > 0) CHECK(r.rejected == 50);
    if (r.strategy == Strategy::SUM && r.accepted > 0) CHECK(r.selflabel_precision.has_value());
    CHECK_FALSE(r.estimate.has_value());
  }
  for (std::size_t s = 1; s < 3; ++s) CHECK(t.rows[s].holdout_acc == t.rows[0].holdout_acc);
  CHECK(t.final_row(Strategy::Static).holdout_acc == t.rows[0].holdout_acc);
  CHECK_THROWS(t.final_row(Strategy::SUMER));
}

TEST_CASE("zero windows leave only the initial evaluation") {
  auto c = small_stream(6);
  c.stream.n_windows = 0;
  c.strategies = {Strategy::Static, Strategy::StaticRemediated, Strategy::SUM, Strategy::SUMER, Strategy::Oracle};
  c.seed_noise = NoiseSpec{SymmetricFlip{0.2}, 0};
  const auto t = run_experiment(c);
  REQUIRE(t.rows.size() == 5);
  for (const auto& r : t.rows) {
    CHECK(r.window == 0);
    CHECK(r.holdout_acc == t.rows[0].holdout_acc);
  }
}

TEST_CASE("runs are deterministic and blind to truth") {
  auto c = small_stream(7);
  c.strategies = {Strategy::SUM, Strategy::SUMER};
  c.seed_noise = NoiseSpec{SymmetricFlip{0.2}, 0};
  const auto data = prepare_data(c);
  PreparedData blind = data;
  blind.seed = data.seed.without_truth();
  blind.unlabeled = data.unlabeled.without_truth();
  const auto a = run_experiment(c, data), b = run_experiment(c, blind);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].holdout_acc == b.rows[i].holdout_acc);
    CHECK(a.rows[i].accepted == b.rows[i].accepted);
    CHECK(a.rows[i].pruned == b.rows[i].pruned);
    CHECK_FALSE(b.rows[i].selflabel_precision.has_value());
  }
  const auto again = run_experiment(c, data);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(again.rows[i].holdout_acc == a.rows[i].holdout_acc);
}

TEST_CASE("validation failures") {
  auto c = small_stream(1);
  c.stream = {100, 5};
  CHECK_THROWS_AS(run_experiment(c), ValidationError);
  c = small_stream(1);
  c.gate.tau = 1.5;
  CHECK_THROWS_AS(run_experiment(c), ValidationError);
  c = small_stream(1);
  c.strategies.clear();
  CHECK_THROWS_AS(run_experiment(c), ValidationError);
  c = small_stream(1);
  c.mode = RunMode::FractionSweep;
  c.strategies = {Strategy::SUMER};
  CHECK_THROWS_AS(run_fraction_sweep(c), ValidationError);
}

TEST_CASE("single round with every row provided") {
  const auto d = gen_two_moons(MoonsSpec{200, 0.1, 1});
  const auto r = single_round_sum(d, knn_spreading());
  CHECK(r.self_labeled == 0);
  CHECK(r.accuracy == 1.0);
  const auto noisy = inject_noise(d, NoiseSpec{SymmetricFlip{0.1}, 1}).noisy;
  CHECK(single_round_sum(noisy, knn_spreading()).accuracy == doctest::Approx(0.9));
}

TEST_CASE("single round on two-moons with 20 labels") {
  ExperimentConfig c;
  c.mode = RunMode::SingleRound;
  c.data = MoonsSource{1000, 0.1};
  c.learner = knn_spreading();
  std::vector<double> acc;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    c.seed = s;
    const auto r = run_single_round(c);
    CHECK(r.labeled == 20);
    acc.push_back(r.holdout_acc);
  }
  CHECK(median(acc) > 0.95);
}

TEST_CASE("label correction keeps up with SUM on noisy moons") {
  ExperimentConfig c;
  c.strategies = {Strategy::SUM, Strategy::SUMER};
  c.data = MoonsSource{2000, 0.1};
  c.split.labeled_fraction = 0.025;
  c.seed_noise = NoiseSpec{SymmetricFlip{0.2}, 0};
  c.learner = knn_spreading();
  c.gate.tau = 0.7;
  c.remediation.method = RemediationMethod::SpreadCorrect;
  std::vector<double> gain;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    c.seed = s;
    const auto t = run_experiment(c);
    gain.push_back(t.final_row(Strategy::SUMER).holdout_acc - t.final_row(Strategy::SUM).holdout_acc);
  }
  CHECK(median(gain) >= -0.01);
}
