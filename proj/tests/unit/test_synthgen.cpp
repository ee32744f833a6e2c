#include <doctest.h>

#include <cmath>
#include <set>

#include "sumer/error.hpp"
#include "sumer/learners.hpp"
#include "sumer/synthgen.hpp"

using namespace sumer;

namespace {

GaussianSpec blobs(std::size_t n0, std::size_t n1) {
  return GaussianSpec{{{-2.0, 0.0}, {2.0, 0.0}}, {{{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}}, {n0, n1}};
}

Dataset sized(std::size_t n0, std::size_t n1) { return gen_two_gaussians(blobs(n0, n1), 1); }

}  // namespace

TEST_CASE("gaussian sample means match the spec") {
  const auto d = gen_two_gaussians(blobs(500, 500), 42);
  double sum[2][2] = {{0, 0}, {0, 0}};
  std::size_t n[2] = {0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int y = *d.label(i).truth;
    ++n[y];
    for (int k = 0; k < 2; ++k) sum[y][k] += d.features(i)[static_cast<std::size_t>(k)];
  }
  CHECK(n[0] == 500);
  CHECK(n[1] == 500);
  CHECK(std::abs(sum[0][0] / 500 + 2.0) < 0.15);
  CHECK(std::abs(sum[0][1] / 500) < 0.15);
  CHECK(std::abs(sum[1][0] / 500 - 2.0) < 0.15);
  CHECK(std::abs(sum[1][1] / 500) < 0.15);
}

TEST_CASE("gaussian sample covariance follows the cholesky factor") {
  GaussianSpec g{{{0.0, 0.0}, {5.0, 5.0}}, {{{2.0, 0.8}, {0.8, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}}, {20000, 10}};
  const auto d = gen_two_gaussians(g, 5);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (*d.label(i).truth != 0) continue;
    const auto x = d.features(i);
    sxx += x[0] * x[0];
    sxy += x[0] * x[1];
    syy += x[1] * x[1];
  }
  const double n = 20000.0;
  CHECK(sxx / n == doctest::Approx(2.0).epsilon(0.05));
  CHECK(sxy / n == doctest::Approx(0.8).epsilon(0.08));
  CHECK(syy / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("gaussian generator validates and is deterministic") {
  CHECK_THROWS_AS(gen_two_gaussians(blobs(0, 10), 1), ValidationError);
  auto bad = blobs(5, 5);
  bad.covariances[1] = {{1.0, 2.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(gen_two_gaussians(bad, 1), ValidationError);
  CHECK_THROWS_AS(cholesky({{1.0, 0.5}, {0.4, 1.0}}), ValidationError);
  const auto a = gen_two_gaussians(blobs(30, 30), 9), b = gen_two_gaussians(blobs(30, 30), 9);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.instance(i).features == b.instance(i).features);
  CHECK(a.labels() == b.labels());
}

TEST_CASE("cholesky factor reproduces the matrix") {
  const std::vector<std::vector<double>> a{{4, 2, 0.4}, {2, 5, 1}, {0.4, 1, 3}};
  const auto l = cholesky(a);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 3; ++k) s += l[i][k] * l[j][k];
      CHECK(s == doctest::Approx(a[i][j]));
    }
}

TEST_CASE("noise-free moons lie on their arcs") {
  const auto d = gen_two_moons(MoonsSpec{1000, 0.0, 3});
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = d.features(i);
    const double r = *d.label(i).truth == 0 ? std::hypot(x[0], x[1]) : std::hypot(1.0 - x[0], 0.5 - x[1]);
    CHECK(std::abs(r - 1.0) < 1e-9);
  }
}

TEST_CASE("moons are learnable by knn and balanced") {
  const auto d = gen_two_moons(MoonsSpec{1000, 0.1, 7});
  CHECK(accuracy(fit(ClassifierSpec{KnnSpec{5}}, d), d) > 0.95);
  const auto three = gen_two_moons(MoonsSpec{3, 0.1, 0});
  int c0 = 0;
  for (const auto& l : three.labels()) c0 += *l.truth == 0;
  CHECK(c0 == 2);
}

TEST_CASE("symmetric flips hit an exact count") {
  const auto d = sized(500, 500);
  const auto r = inject_noise(d, NoiseSpec{SymmetricFlip{0.2}, 3});
  CHECK(r.flipped_ids.size() == 200);
  const std::set<InstanceId> flipped(r.flipped_ids.begin(), r.flipped_ids.end());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool f = flipped.count(d.instance(i).id) > 0;
    CHECK((r.noisy.label(i).cls != *d.label(i).truth) == f);
    CHECK(r.noisy.label(i).truth == d.label(i).truth);
  }
  const auto none = inject_noise(d, NoiseSpec{SymmetricFlip{0.0}, 3});
  CHECK(none.flipped_ids.empty());
  CHECK(none.noisy.labels() == d.labels());
}

TEST_CASE("class-conditional flips use per-class counts") {
  const auto d = sized(200, 100);
  const auto r = inject_noise(d, NoiseSpec{ClassConditionalFlip{0.1, 0.3}, 4});
  std::size_t f[2] = {0, 0};
  const std::set<InstanceId> ids(r.flipped_ids.begin(), r.flipped_ids.end());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (ids.count(d.instance(i).id)) ++f[*d.label(i).truth];
  CHECK(f[0] == 20);
  CHECK(f[1] == 30);
  CHECK_THROWS_AS(inject_noise(d, NoiseSpec{ClassConditionalFlip{1.2, 0.0}, 0}), ValidationError);
}

TEST_CASE("flip rates for a target contamination") {
  const auto r = flip_rates_for_contamination(0.2, 0.1, 1000, 1000);
  // given-0 contamination = rho1 n1 / (n0 (1 - rho0) + rho1 n1)
  const double g0 = r.pi1 * 1000 / (1000 * (1 - r.pi0) + r.pi1 * 1000);
  const double g1 = r.pi0 * 1000 / (1000 * (1 - r.pi1) + r.pi0 * 1000);
  CHECK(g0 == doctest::Approx(0.2));
  CHECK(g1 == doctest::Approx(0.1));
}

TEST_CASE("stream plan partitions the source") {
  const auto d = sized(400, 400);
  const auto plan = plan_stream(d, 100, 8, 11);
  REQUIRE(plan.windows.size() == 8);
  std::set<InstanceId> all;
  for (const auto& w : plan.windows) {
    CHECK(w.size() == 100);
    all.insert(w.begin(), w.end());
  }
  CHECK(all.size() == 800);
  CHECK_THROWS_AS(plan_stream(d, 100, 9, 11), ValidationError);
  CHECK(StreamPlan::from_json(plan.to_json()) == plan);
  CHECK(plan_stream(d, 100, 8, 11) == plan);
  CHECK_FALSE(plan_stream(d, 100, 8, 12) == plan);
}
