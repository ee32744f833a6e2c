#include "sumer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sumer/error.hpp"
#include "sumer/rng.hpp"

namespace sumer {

std::string_view to_string(LabelState s) noexcept {
  switch (s) {
    case LabelState::Unlabeled: return "unlabeled";
    case LabelState::Provided: return "provided";
    case LabelState::SelfLabeled: return "self_labeled";
  }
  return "?";
}

Dataset::Dataset(std::vector<Instance> instances, std::vector<LabelRecord> labels, int num_classes)
    : instances_(std::move(instances)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (num_classes_ < 2) throw ValidationError("dataset needs at least 2 classes");
  if (instances_.size() != labels_.size())
    throw ValidationError("instances and labels differ in length");
  std::unordered_set<InstanceId> seen;
  seen.reserve(instances_.size());
  const std::size_t d = dim();
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& inst = instances_[i];
    if (!seen.insert(inst.id).second)
      throw ValidationError("duplicate instance id " + std::to_string(inst.id));
    if (inst.features.empty()) throw ValidationError("instance with zero features");
    if (inst.features.size() != d)
      throw ValidationError("instance " + std::to_string(inst.id) + " has dimension " +
                            std::to_string(inst.features.size()) + ", expected " + std::to_string(d));
    for (double v : inst.features)
      if (!std::isfinite(v))
        throw ValidationError("non-finite feature in instance " + std::to_string(inst.id));
    const auto& lab = labels_[i];
    if (lab.truth && (*lab.truth < 0 || *lab.truth >= num_classes_))
      throw ValidationError("truth class out of range for instance " + std::to_string(inst.id));
    if (lab.state != LabelState::Unlabeled && (lab.cls < 0 || lab.cls >= num_classes_))
      throw ValidationError("label class out of range for instance " + std::to_string(inst.id));
    if (lab.state == LabelState::SelfLabeled &&
        (!(lab.confidence >= 0.0 && lab.confidence <= 1.0) || lab.round < 1))
      throw ValidationError("invalid self-label for instance " + std::to_string(inst.id));
    if (!(lab.weight >= 0.0) || !std::isfinite(lab.weight))
      throw ValidationError("negative or non-finite weight for instance " + std::to_string(inst.id));
  }
}

std::vector<InstanceId> Dataset::ids() const {
  std::vector<InstanceId> out;
  out.reserve(instances_.size());
  for (const auto& inst : instances_) out.push_back(inst.id);
  return out;
}

std::size_t Dataset::index_of(InstanceId id) const {
  for (std::size_t i = 0; i < instances_.size(); ++i)
    if (instances_[i].id == id) return i;
  throw ValidationError("unknown instance id " + std::to_string(id));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Instance> inst;
  std::vector<LabelRecord> labs;
  inst.reserve(rows.size());
  labs.reserve(rows.size());
  for (auto r : rows) {
    inst.push_back(instances_.at(r));
    labs.push_back(labels_.at(r));
  }
  return Dataset(std::move(inst), std::move(labs), num_classes_);
}

Dataset Dataset::with_labels(std::vector<LabelRecord> labels) const {
  return Dataset(instances_, std::move(labels), num_classes_);
}

Dataset Dataset::concat(const Dataset& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  if (other.num_classes_ != num_classes_) throw ValidationError("concat: class count mismatch");
  auto inst = instances_;
  auto labs = labels_;
  inst.insert(inst.end(), other.instances_.begin(), other.instances_.end());
  labs.insert(labs.end(), other.labels_.begin(), other.labels_.end());
  return Dataset(std::move(inst), std::move(labs), num_classes_);
}

Dataset Dataset::without_truth() const {
  auto labs = labels_;
  for (auto& l : labs) l.truth.reset();
  return Dataset(instances_, std::move(labs), num_classes_);
}

void SplitSpec::validate() const {
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0))
    throw ValidationError("labeled_fraction must be in (0, 1]");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw ValidationError("holdout_fraction must be in (0, 1)");
  if (labeled_fraction + holdout_fraction > 1.0 + 1e-12)
    throw ValidationError("labeled_fraction + holdout_fraction must not exceed 1");
}

namespace {

std::size_t fraction_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

// Largest-remainder allocation of `total` across strata proportional to sizes.
std::vector<std::size_t> allocate(std::size_t total, const std::vector<std::size_t>& sizes) {
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> out(sizes.size(), 0);
  if (n == 0) return out;
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const double exact = static_cast<double>(total) * static_cast<double>(sizes[c]) / static_cast<double>(n);
    out[c] = std::min(sizes[c], static_cast<std::size_t>(std::floor(exact)));
    used += out[c];
    rem.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total && k < rem.size() * 2; ++k) {
    const auto c = rem[k % rem.size()].second;
    if (out[c] < sizes[c]) {
      ++out[c];
      ++used;
    }
  }
  return out;
}

}  // namespace

Split split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  if (dataset.empty()) throw ValidationError("cannot split an empty dataset");
  spec.validate();
  const std::size_t n = dataset.size();
  const int C = dataset.num_classes();
  for (const auto& l : dataset.labels())
    if (!l.truth) throw ValidationError("split_dataset requires ground truth on every instance");

  const std::size_t n_hold = fraction_count(spec.holdout_fraction, n);
  const std::size_t n_lab = fraction_count(spec.labeled_fraction, n);
  if (n_hold == 0) throw ValidationError("holdout_fraction selects no instances");
  if (n_lab == 0) throw ValidationError("labeled_fraction selects no instances");

  Rng rng = Rng(spec.seed).split("split");
  std::vector<std::size_t> hold_rows, lab_rows, rest_rows;

  if (spec.stratified) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(C));
    for (std::size_t i = 0; i < n; ++i)
      by_class[static_cast<std::size_t>(*dataset.label(i).truth)].push_back(i);
    std::vector<std::size_t> sizes;
    for (int c = 0; c < C; ++c) {
      if (by_class[static_cast<std::size_t>(c)].empty())
        throw ValidationError("stratified split impossible: class " + std::to_string(c) + " is empty");
      sizes.push_back(by_class[static_cast<std::size_t>(c)].size());
    }
    const auto hold_alloc = allocate(n_hold, sizes);
    std::vector<std::size_t> remaining(sizes.size());
    for (std::size_t c = 0; c < sizes.size(); ++c) remaining[c] = sizes[c] - hold_alloc[c];
    const auto lab_alloc = allocate(n_lab, remaining);
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      auto rows = by_class[c];
      rng.shuffle(rows);
      std::size_t k = 0;
      for (; k < hold_alloc[c]; ++k) hold_rows.push_back(rows[k]);
      for (std::size_t j = 0; j < lab_alloc[c]; ++j, ++k) lab_rows.push_back(rows[k]);
      for (; k < rows.size(); ++k) rest_rows.push_back(rows[k]);
    }
  } else {
    const auto perm = rng.permutation(n);
    std::size_t k = 0;
    for (; k < n_hold; ++k) hold_rows.push_back(perm[k]);
    for (std::size_t j = 0; j < n_lab && k < n; ++j, ++k) lab_rows.push_back(perm[k]);
    for (; k < n; ++k) rest_rows.push_back(perm[k]);
  }
  // Keep source order inside each part.
  std::sort(hold_rows.begin(), hold_rows.end());
  std::sort(lab_rows.begin(), lab_rows.end());
  std::sort(rest_rows.begin(), rest_rows.end());

  auto relabel = [&](const std::vector<std::size_t>& rows, bool provide) {
    Dataset part = dataset.subset(rows);
    std::vector<LabelRecord> labs;
    labs.reserve(rows.size());
    for (const auto& l : part.labels())
      labs.push_back(provide ? LabelRecord::provided(*l.truth, l.truth) : LabelRecord::unlabeled(l.truth));
    return part.with_labels(std::move(labs));
  };

  Split out;
  out.labeled = relabel(lab_rows, true);
  out.unlabeled = relabel(rest_rows, false);
  out.holdout = relabel(hold_rows, false);
  return out;
}

std::size_t ClassCounts::total() const noexcept {
  std::size_t t = 0;
  for (auto v : unlabeled) t += v;
  for (auto v : provided) t += v;
  for (auto v : self_labeled) t += v;
  return t;
}

ClassSummary class_summary(const Dataset& dataset) {
  ClassSummary s;
  s.num_classes = dataset.num_classes();
  s.size = dataset.size();
  s.dim = dataset.dim();
  const auto C = static_cast<std::size_t>(s.num_classes);
  s.counts.unlabeled.assign(C, 0);
  s.counts.provided.assign(C, 0);
  s.counts.self_labeled.assign(C, 0);
  s.counts.truth.assign(C, 0);
  for (const auto& l : dataset.labels()) {
    if (l.truth) ++s.counts.truth[static_cast<std::size_t>(*l.truth)];
    switch (l.state) {
      case LabelState::Provided: ++s.counts.provided[static_cast<std::size_t>(l.cls)]; break;
      case LabelState::SelfLabeled: ++s.counts.self_labeled[static_cast<std::size_t>(l.cls)]; break;
      case LabelState::Unlabeled:
        if (l.truth)
          ++s.counts.unlabeled[static_cast<std::size_t>(*l.truth)];
        else
          ++s.unlabeled_unknown;
        break;
    }
  }
  return s;
}

std::string format_summary(const ClassSummary& s) {
  std::ostringstream os;
  os << "rows=" << s.size << " dim=" << s.dim << " classes=" << s.num_classes << "\n";
  for (int c = 0; c < s.num_classes; ++c) {
    const auto k = static_cast<std::size_t>(c);
    os << "class" << c << ": provided=" << s.counts.provided[k] << " self_labeled=" << s.counts.self_labeled[k]
       << " unlabeled=" << s.counts.unlabeled[k] << "\n";
  }
  if (s.unlabeled_unknown > 0) os << "unlabeled (no truth): " << s.unlabeled_unknown << "\n";
  return os.str();
}

}  // namespace sumer
