#include <doctest.h>

#include <vector>

#include "sumer/error.hpp"
#include "sumer/learners.hpp"
#include "sumer/synthgen.hpp"

using namespace sumer;

namespace {

Dataset separated(std::size_t per_class, std::uint64_t seed) {
  return gen_two_gaussians(
      GaussianSpec{{{-3.0, 0.0}, {3.0, 0.0}}, {{{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}}, {per_class, per_class}}, seed);
}

Dataset points(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys) {
  std::vector<Instance> inst;
  std::vector<LabelRecord> labs;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    inst.push_back({i, xs[i]});
    labs.push_back(LabelRecord::provided(ys[i], ys[i]));
  }
  return Dataset(inst, labs, 2);
}

std::vector<ClassifierSpec> all_learners() {
  SpreadSpec s;
  s.affinity = KnnGraphAffinity{10};
  return {ClassifierSpec{KnnSpec{5}}, ClassifierSpec{TreeSpec{}}, ClassifierSpec{ForestSpec{30, 32, 1, 0, 4}},
          ClassifierSpec{SpreadLearnerSpec{s}}};
}

}  // namespace

TEST_CASE("every learner separates 3-sigma blobs") {
  const auto train = separated(100, 1), test = separated(100, 2);
  for (const auto& spec : all_learners()) {
    INFO(spec.name());
    CHECK(accuracy(fit(spec, train), test) > 0.99);
  }
}

TEST_CASE("knn with one training point predicts its class") {
  const auto m = fit(ClassifierSpec{KnnSpec{1}}, points({{0.0, 0.0}}, {1}));
  const std::vector<std::vector<double>> probe{{5.0, 5.0}, {-100.0, 3.0}};
  const auto p = predict_proba(m, probe);
  CHECK(p(0, 1) == 1.0);
  CHECK(p(1, 1) == 1.0);
}

TEST_CASE("knn probabilities are vote fractions") {
  const auto m = fit(ClassifierSpec{KnnSpec{3}}, points({{0.0}, {1.0}, {2.0}, {10.0}}, {0, 0, 1, 1}));
  const std::vector<std::vector<double>> probe{{1.0}};
  const auto p = predict_proba(m, probe);
  CHECK(p(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(p(0, 1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("zero weights remove a class from a tree") {
  const auto d = separated(50, 3);
  std::vector<double> w(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) w[i] = *d.label(i).truth == 0 ? 1.0 : 0.0;
  const auto m = fit(ClassifierSpec{TreeSpec{}}, d, w);
  for (int y : predict(m, d)) CHECK(y == 0);
}

TEST_CASE("argmax ties go to the lower class") {
  const auto m = fit(ClassifierSpec{KnnSpec{2}}, points({{-1.0}, {1.0}}, {1, 0}));
  const std::vector<std::vector<double>> probe{{0.0}};
  CHECK(argmax(predict_proba(m, probe).row(0)) == 0);
}

TEST_CASE("seeded forests are deterministic") {
  const auto d = gen_two_moons(MoonsSpec{300, 0.25, 1});
  const ClassifierSpec spec{ForestSpec{20, 32, 1, 0, 77}};
  CHECK(predict_proba(fit(spec, d), d) == predict_proba(fit(spec, d), d));
  CHECK(model_to_json(fit(spec, d)) == model_to_json(fit(spec, d)));
  const ClassifierSpec other{ForestSpec{20, 32, 1, 0, 78}};
  CHECK_FALSE(model_to_json(fit(other, d)) == model_to_json(fit(spec, d)));
}

TEST_CASE("predict agrees with argmax of predict_proba") {
  const auto d = gen_two_moons(MoonsSpec{200, 0.3, 2});
  for (const auto& spec : all_learners()) {
    const auto m = fit(spec, d);
    const auto p = predict_proba(m, d);
    const auto y = predict(m, d);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < d.size(); ++i) agree += y[i] == argmax(p.row(i));
    CHECK(agree == d.size());
  }
}

TEST_CASE("models round-trip through json") {
  const auto d = gen_two_moons(MoonsSpec{150, 0.2, 3});
  for (const auto& spec : all_learners()) {
    const auto m = fit(spec, d);
    const auto back = model_from_json(model_to_json(m));
    CHECK(predict_proba(back, d) == predict_proba(m, d));
    CHECK(model_to_json(back) == model_to_json(m));
  }
  CHECK_THROWS_AS(model_from_json("{\"format\":\"other\"}"), ValidationError);
}

TEST_CASE("invalid specs and inputs are rejected") {
  const auto d = separated(10, 1);
  CHECK_THROWS_AS(fit(ClassifierSpec{KnnSpec{0}}, d), ValidationError);
  CHECK_THROWS_AS(fit(ClassifierSpec{ForestSpec{0, 32, 1, 0, 0}}, d), ValidationError);
  const std::vector<double> short_w(3, 1.0);
  CHECK_THROWS_AS(fit(ClassifierSpec{TreeSpec{}}, d, short_w), ValidationError);
  const auto m = fit(ClassifierSpec{KnnSpec{3}}, d);
  const std::vector<std::vector<double>> wrong_dim{{1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(predict_proba(m, wrong_dim), ValidationError);
  auto labs = d.labels();
  for (auto& l : labs) l = LabelRecord::unlabeled(l.truth);
  CHECK_THROWS_AS(fit(ClassifierSpec{TreeSpec{}}, d.with_labels(labs)), ValidationError);
}
