#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sumer/error.hpp"
#include "sumer/remediation.hpp"
#include "sumer/rng.hpp"
#include "sumer/synthgen.hpp"

using namespace sumer;

namespace {

Dataset separated(std::size_t per_class, std::uint64_t seed) {
  return gen_two_gaussians(
      GaussianSpec{{{-3.0, 0.0}, {3.0, 0.0}}, {{{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}}, {per_class, per_class}}, seed);
}

std::vector<int> visible(const Dataset& d) {
  std::vector<int> y(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) y[i] = *d.label(i).visible();
  return y;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return 0.5 * (v[(v.size() - 1) / 2] + v[v.size() / 2]);
}

const ClassifierSpec kForest{ForestSpec{50, 32, 5, 0, 1}};

}  // namespace

TEST_CASE("clean calibrated probabilities give zero noise") {
  const std::vector<double> p1{0.01, 0.02, 0.05, 0.1, 0.9, 0.95, 0.97, 0.99};
  const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
  const auto e = estimate_noise_rates(p1, y);
  CHECK_FALSE(e.degenerate);
  CHECK(e.pi0 == 0.0);
  CHECK(e.pi1 == 0.0);
}

TEST_CASE("uninformative probabilities are degenerate") {
  const std::vector<double> p1(10, 0.5);
  const std::vector<int> y{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto e = estimate_noise_rates(p1, y);
  CHECK(e.degenerate);
  CHECK(e.pi0 == 0.0);
  CHECK(e.pi1 == 0.0);
}

TEST_CASE("estimator input validation") {
  const std::vector<double> p1{0.1, 0.2};
  const std::vector<int> same{0, 0};
  CHECK_THROWS_AS(estimate_noise_rates(p1, same), ValidationError);
  const std::vector<int> shorter{0};
  CHECK_THROWS_AS(estimate_noise_rates(p1, shorter), ValidationError);
}

TEST_CASE("20% symmetric noise on separated gaussians is recovered") {
  std::vector<double> e0, e1;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto noisy = inject_noise(separated(500, s), NoiseSpec{SymmetricFlip{0.2}, s}).noisy;
    const auto e = estimate_noise_rates(cross_val_proba(kForest, noisy, 5, s), visible(noisy));
    e0.push_back(std::abs(e.pi0 - 0.2));
    e1.push_back(std::abs(e.pi1 - 0.2));
  }
  CHECK(median(e0) <= 0.05);
  CHECK(median(e1) <= 0.05);
}

// Given-class densities built as contaminated mixtures of two 1-d normals,
// scored with the exact clean posterior.
TEST_CASE("mixture identity") {
  const double pi0 = 0.15, pi1 = 0.25;
  Rng rng(3);
  std::vector<double> p1;
  std::vector<int> given;
  const auto posterior = [](double x) { return 1.0 / (1.0 + std::exp(-6.0 * x)); };  // means +-3, unit variance
  for (int i = 0; i < 20000; ++i) {
    const int g = i % 2;
    const double contamination = g == 0 ? pi0 : pi1;
    const int source = rng.uniform() < contamination ? 1 - g : g;
    const double x = rng.normal(source == 1 ? 3.0 : -3.0, 1.0);
    p1.push_back(posterior(x));
    given.push_back(g);
  }
  const auto e = estimate_noise_rates(p1, given);
  CHECK(std::abs(e.pi0 - pi0) < 0.02);
  CHECK(std::abs(e.pi1 - pi1) < 0.02);
}

TEST_CASE("cross-validated probabilities are out of sample and seeded") {
  const auto d = inject_noise(separated(60, 2), NoiseSpec{SymmetricFlip{0.2}, 2}).noisy;
  const auto a = cross_val_proba(kForest, d, 5, 9);
  CHECK(a == cross_val_proba(kForest, d, 5, 9));
  REQUIRE(a.rows() == d.size());
  for (std::size_t i = 0; i < a.rows(); ++i) CHECK(a(i, 0) + a(i, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cross_val_proba(kForest, d, 1, 9), ValidationError);
}

TEST_CASE("rank prune identity and arithmetic") {
  const auto d = separated(100, 4);
  Matrix p(d.size(), 2);
  for (std::size_t i = 0; i < d.size(); ++i) {
    p(i, 1) = 0.5 + 0.004 * static_cast<double>(i % 100) * (*d.label(i).truth == 1 ? 1 : -1);
    p(i, 0) = 1.0 - p(i, 1);
  }
  NoiseEstimate none;
  const auto id = rank_prune(d, p, none);
  CHECK(id.removed.empty());
  CHECK(id.kept.size() == d.size());
  for (double w : id.weights) CHECK(w == 1.0);

  NoiseEstimate e;
  e.pi1 = 0.2;
  const auto r = rank_prune(d, p, e);
  CHECK(r.removed.size() == 20);
  std::set<InstanceId> removed(r.removed.begin(), r.removed.end());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool gone = removed.count(d.instance(i).id) > 0;
    // lowest P(1) among given-1 rows are the first 20 of that class
    CHECK(gone == (*d.label(i).truth == 1 && i % 100 < 20));
  }
  for (std::size_t k = 0; k < r.kept.size(); ++k) {
    const int y = *d.label(d.index_of(r.kept[k])).visible();
    CHECK(r.weights[k] == doctest::Approx(y == 1 ? 1.25 : 1.0));
  }
}

TEST_CASE("rank prune never empties a class") {
  const auto d = separated(5, 4);
  Matrix p(d.size(), 2, 0.5);
  NoiseEstimate e;
  e.pi0 = 1.0 - 1e-10;  // rounds up to the whole class
  const auto r = rank_prune(d, p, e);
  CHECK(r.removed.size() == 4);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("rank prune removes mostly flipped rows") {
  std::vector<double> precision;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto noisy = inject_noise(separated(500, s), NoiseSpec{SymmetricFlip{0.2}, s});
    const auto p = cross_val_proba(kForest, noisy.noisy, 5, s);
    const auto r = rank_prune(noisy.noisy, p, estimate_noise_rates(p, visible(noisy.noisy)));
    const std::set<InstanceId> flipped(noisy.flipped_ids.begin(), noisy.flipped_ids.end());
    std::size_t hit = 0;
    for (auto id : r.removed) hit += flipped.count(id);
    precision.push_back(static_cast<double>(hit) / static_cast<double>(r.removed.size()));
  }
  CHECK(median(precision) >= 0.7);
}

TEST_CASE("spread_correct") {
  SpreadSpec clamp;
  clamp.affinity = KnnGraphAffinity{10};
  SpreadSpec move = clamp;
  move.alpha = 0.9;

  SUBCASE("alpha = 0 changes nothing") {
    const auto noisy = inject_noise(gen_two_moons(MoonsSpec{300, 0.1, 1}), NoiseSpec{SymmetricFlip{0.2}, 1}).noisy;
    CHECK(spread_correct(noisy, clamp).changed.empty());
  }
  SUBCASE("clean separated clusters change nothing") {
    CHECK(spread_correct(separated(100, 3), move).changed.empty());
  }
  SUBCASE("noisy moons: changed ids are mostly flipped") {
    std::vector<double> precision;
    for (std::uint64_t s = 1; s <= 10; ++s) {
      const auto noisy = inject_noise(gen_two_moons(MoonsSpec{1000, 0.1, s}), NoiseSpec{SymmetricFlip{0.2}, s});
      const auto r = spread_correct(noisy.noisy, move);
      const std::set<InstanceId> flipped(noisy.flipped_ids.begin(), noisy.flipped_ids.end());
      std::size_t hit = 0;
      for (auto id : r.changed) hit += flipped.count(id);
      precision.push_back(r.changed.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(r.changed.size()));
    }
    CHECK(median(precision) >= 0.6);
  }
}

TEST_CASE("coupling report") {
  const std::vector<int> a{0, 1, 1, 0, 1, 0, 0, 1, 1, 0};
  NoiseEstimate zero;
  const auto same = coupling_report(a, a, zero, 0.02);
  CHECK(same.agreement == 1.0);
  CHECK(same.coupled);

  auto b = a;
  for (std::size_t i = 0; i < 3; ++i) b[i] = 1 - b[i];
  const auto r = coupling_report(a, b, zero, 0.02);
  CHECK(r.agreement == doctest::Approx(0.7));
  CHECK_FALSE(r.coupled);

  NoiseEstimate noisy;
  noisy.pi1 = 0.1;
  CHECK_FALSE(coupling_report(a, a, noisy, 0.02).coupled);
  const std::vector<int> shorter{0};
  CHECK_THROWS_AS(coupling_report(a, shorter, zero, 0.02), ValidationError);
}
