#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sumer {

using InstanceId = std::uint64_t;

struct Instance {
  InstanceId id = 0;
  std::vector<double> features;
};

enum class LabelState { Unlabeled, Provided, SelfLabeled };

std::string_view to_string(LabelState s) noexcept;

/// Label lifecycle of one instance. `truth` is the hidden ground truth and
/// is never read by a learner; only visible() is.
struct LabelRecord {
  std::optional<int> truth;
  LabelState state = LabelState::Unlabeled;
  int cls = -1;             // Provided / SelfLabeled class
  double confidence = 1.0;  // SelfLabeled only
  int round = 0;            // SelfLabeled only, >= 1
  double weight = 1.0;

  static LabelRecord unlabeled(std::optional<int> truth) {
    return LabelRecord{truth, LabelState::Unlabeled, -1, 1.0, 0, 1.0};
  }
  static LabelRecord provided(int cls, std::optional<int> truth) {
    return LabelRecord{truth, LabelState::Provided, cls, 1.0, 0, 1.0};
  }
  static LabelRecord self_labeled(int cls, double confidence, int round, std::optional<int> truth) {
    return LabelRecord{truth, LabelState::SelfLabeled, cls, confidence, round, 1.0};
  }

  /// The label a learner may see, if any.
  std::optional<int> visible() const noexcept {
    if (state == LabelState::Unlabeled) return std::nullopt;
    return cls;
  }

  bool operator==(const LabelRecord&) const = default;
};

/// Ordered, immutable collection of instances with parallel label records.
/// Operations return new datasets.
class Dataset {
 public:
  Dataset() = default;
  /// Validates parallel lengths, unique ids, shared finite dimension and
  /// class ranges. Throws ValidationError.
  Dataset(std::vector<Instance> instances, std::vector<LabelRecord> labels, int num_classes);

  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  /// Feature dimension; 0 for an empty dataset.
  std::size_t dim() const noexcept { return instances_.empty() ? 0 : instances_.front().features.size(); }
  int num_classes() const noexcept { return num_classes_; }

  const std::vector<Instance>& instances() const noexcept { return instances_; }
  const std::vector<LabelRecord>& labels() const noexcept { return labels_; }
  const Instance& instance(std::size_t i) const { return instances_.at(i); }
  const LabelRecord& label(std::size_t i) const { return labels_.at(i); }
  std::span<const double> features(std::size_t i) const { return instances_.at(i).features; }

  std::vector<InstanceId> ids() const;
  /// Row index of an id; throws if absent.
  std::size_t index_of(InstanceId id) const;

  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_labels(std::vector<LabelRecord> labels) const;
  /// Concatenation; ids must stay unique.
  Dataset concat(const Dataset& other) const;
  /// Copy with every truth field removed.
  Dataset without_truth() const;

 private:
  std::vector<Instance> instances_;
  std::vector<LabelRecord> labels_;
  int num_classes_ = 2;
};

struct SplitSpec {
  double labeled_fraction = 0.02;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;
  bool stratified = true;

  /// Throws ValidationError when out of range.
  void validate() const;
};

struct Split {
  Dataset labeled;
  Dataset unlabeled;
  Dataset holdout;
};

/// Holdout is drawn first, then the labeled seed from the remainder; the
/// rest is unlabeled with hidden truth retained. Labeled rows become
/// Provided = truth. Requires ground truth on every row.
Split split_dataset(const Dataset& dataset, const SplitSpec& spec);

struct ClassCounts {
  std::vector<std::size_t> unlabeled;
  std::vector<std::size_t> provided;
  std::vector<std::size_t> self_labeled;
  std::vector<std::size_t> truth;  // by hidden truth, where present

  std::size_t total() const noexcept;
};

/// Per-class counts by label state. Unlabeled rows are counted by truth
/// (or in no class when truth is absent, which keeps totals consistent
/// through `unlabeled_unknown`).
struct ClassSummary {
  int num_classes = 0;
  std::size_t size = 0;
  std::size_t dim = 0;
  ClassCounts counts;
  std::size_t unlabeled_unknown = 0;
};

ClassSummary class_summary(const Dataset& dataset);

std::string format_summary(const ClassSummary& summary);

}  // namespace sumer
