#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "sumer/dataset.hpp"
#include "sumer/error.hpp"
#include "sumer/synthgen.hpp"

using namespace sumer;

namespace {

Dataset tiny() {
  std::vector<Instance> inst{{10, {0.0, 1.0}}, {11, {1.0, 0.0}}, {12, {2.0, 2.0}}};
  std::vector<LabelRecord> labs{LabelRecord::provided(0, 0), LabelRecord::unlabeled(1),
                                LabelRecord::self_labeled(1, 0.9, 1, 1)};
  return Dataset(inst, labs, 2);
}

}  // namespace

TEST_CASE("dataset construction validates its rows") {
  const auto d = tiny();
  CHECK(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.index_of(12) == 2);
  CHECK_THROWS(d.index_of(99));

  std::vector<Instance> dup{{1, {0.0}}, {1, {1.0}}};
  CHECK_THROWS_AS(Dataset(dup, {LabelRecord::unlabeled(0), LabelRecord::unlabeled(1)}, 2), ValidationError);
  std::vector<Instance> ragged{{1, {0.0}}, {2, {1.0, 2.0}}};
  CHECK_THROWS_AS(Dataset(ragged, {LabelRecord::unlabeled(0), LabelRecord::unlabeled(1)}, 2), ValidationError);
  std::vector<Instance> one{{1, {0.0}}};
  CHECK_THROWS_AS(Dataset(one, {LabelRecord::provided(2, 2)}, 2), ValidationError);
  CHECK_THROWS_AS(Dataset(one, {}, 2), ValidationError);
  std::vector<Instance> nan{{1, {std::numeric_limits<double>::quiet_NaN()}}};
  CHECK_THROWS_AS(Dataset(nan, {LabelRecord::unlabeled(0)}, 2), ValidationError);
}

TEST_CASE("visible label hides truth of unlabeled rows") {
  const auto d = tiny();
  CHECK(d.label(0).visible() == 0);
  CHECK_FALSE(d.label(1).visible().has_value());
  CHECK(d.label(2).visible() == 1);
  const auto blind = d.without_truth();
  for (const auto& l : blind.labels()) CHECK_FALSE(l.truth.has_value());
  CHECK(blind.label(2).visible() == 1);
}

TEST_CASE("subset and concat keep ids") {
  const auto d = tiny();
  const std::vector<std::size_t> rows{2, 0};
  const auto s = d.subset(rows);
  CHECK(s.ids() == std::vector<InstanceId>{12, 10});
  CHECK_THROWS_AS(d.concat(s), ValidationError);
}

TEST_CASE("split sizes follow the fractions") {
  const auto d = gen_two_moons(MoonsSpec{1000, 0.1, 3});
  const auto sp = split_dataset(d, SplitSpec{0.02, 0.2, 5, true});
  CHECK(sp.labeled.size() == 20);
  CHECK(sp.unlabeled.size() == 780);
  CHECK(sp.holdout.size() == 200);

  std::set<InstanceId> all;
  for (const auto* part : {&sp.labeled, &sp.unlabeled, &sp.holdout})
    for (auto id : part->ids()) all.insert(id);
  CHECK(all.size() == 1000);

  for (const auto& l : sp.labeled.labels()) {
    CHECK(l.state == LabelState::Provided);
    CHECK(l.cls == *l.truth);
  }
  for (const auto& l : sp.unlabeled.labels()) {
    CHECK(l.state == LabelState::Unlabeled);
    CHECK(l.truth.has_value());
  }
  const auto counts = class_summary(sp.labeled).counts.provided;
  CHECK(counts[0] == 10);
  CHECK(counts[1] == 10);
}

TEST_CASE("split is deterministic and rejects bad fractions") {
  const auto d = gen_two_moons(MoonsSpec{300, 0.1, 3});
  const SplitSpec spec{0.1, 0.2, 9, true};
  CHECK(split_dataset(d, spec).labeled.ids() == split_dataset(d, spec).labeled.ids());
  CHECK(split_dataset(d, spec).holdout.ids() == split_dataset(d, spec).holdout.ids());
  CHECK_THROWS_AS(split_dataset(d, SplitSpec{1.0, 0.0, 0, true}), ValidationError);
  CHECK_THROWS_AS(split_dataset(d, SplitSpec{0.9, 0.2, 0, true}), ValidationError);
  CHECK_THROWS_AS(split_dataset(d, SplitSpec{0.1, 1.0, 0, true}), ValidationError);
}

TEST_CASE("class summary counts label states") {
  CHECK(class_summary(Dataset{}).counts.total() == 0);

  const auto d = gen_two_moons(MoonsSpec{200, 0.1, 1});
  auto labs = d.labels();
  for (std::size_t i = 0; i < 50; ++i) labs[i] = LabelRecord::self_labeled(*labs[i].truth, 0.9, 1, labs[i].truth);
  for (std::size_t i = 50; i < 120; ++i) labs[i] = LabelRecord::unlabeled(labs[i].truth);
  const auto s = class_summary(d.with_labels(labs));
  std::size_t self = 0, provided = 0, unl = 0;
  for (int c = 0; c < 2; ++c) {
    self += s.counts.self_labeled[static_cast<std::size_t>(c)];
    provided += s.counts.provided[static_cast<std::size_t>(c)];
    unl += s.counts.unlabeled[static_cast<std::size_t>(c)];
  }
  CHECK(self == 50);
  CHECK(unl == 70);
  CHECK(provided == 80);
  CHECK(s.counts.total() == 200);
}
