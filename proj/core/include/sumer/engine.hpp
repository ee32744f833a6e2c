#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sumer/config.hpp"
#include "sumer/dataset.hpp"
#include "sumer/learners.hpp"
#include "sumer/remediation.hpp"

namespace sumer {

/// Coverage score of new points against a fixed training set:
///   exp(-ln2 * d_k(x) / d*)
/// with d_k the mean distance to the k nearest training points and d* the
/// `quantile` of the leave-one-out d_k over the training set itself.
class CoverageIndex {
 public:
  CoverageIndex(std::vector<std::vector<double>> training, std::size_t k, double quantile);

  double mean_knn_distance(std::span<const double> x) const;
  double score(std::span<const double> x) const;
  double reference() const noexcept { return reference_; }

 private:
  std::vector<std::vector<double>> points_;
  std::size_t k_;
  double reference_ = 0.0;
};

double coverage_confidence(std::span<const double> x, std::span<const std::vector<double>> training, std::size_t k,
                           double quantile = 0.9);

struct SelfLabelResult {
  Dataset accepted;  // SelfLabeled rows, window order
  Dataset rejected;  // untouched rows, window order
};

/// Gates each row on max-probability times the coverage score (if any).
SelfLabelResult self_label(const Matrix& probas, const Dataset& window, const GateSpec& gate, int round,
                           const CoverageIndex* coverage = nullptr);
SelfLabelResult self_label(const FittedModel& model, const Dataset& window, const GateSpec& gate, int round,
                           const CoverageIndex* coverage = nullptr);

struct TraceRow {
  std::size_t window = 0;
  Strategy strategy = Strategy::Static;
  std::size_t seen = 0;
  double holdout_acc = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::optional<double> selflabel_precision;
  std::optional<NoiseEstimate> estimate;
  std::optional<CouplingReport> coupling;
  // JSON-only diagnostics
  std::size_t backlog_accepted = 0;
  std::size_t backlog = 0;
  std::size_t train_size = 0;
  std::size_t pruned = 0;
  std::size_t corrected = 0;
};

struct MetricsTrace {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;  // window-major, strategies in config order

  /// Row of `strategy` at the last window; throws if absent.
  const TraceRow& final_row(Strategy strategy) const;
};

/// Initial data for a run, before any strategy touches it.
struct PreparedData {
  Dataset seed;       // Provided labels, noise already injected
  Dataset unlabeled;  // stream source (truth hidden from learners)
  Dataset holdout;
  std::vector<InstanceId> flipped_ids;
};

/// Loads or generates data, splits, selects and corrupts the seed set.
PreparedData prepare_data(const ExperimentConfig& config);

/// Seed set replaced by the rows closest to each class anchor (by truth),
/// keeping the per-class seed counts of `split`.
Split select_seed_near_anchors(const Split& split, const std::vector<std::vector<double>>& anchors);

MetricsTrace run_experiment(const ExperimentConfig& config);
MetricsTrace run_experiment(const ExperimentConfig& config, const PreparedData& data);

struct SingleRoundResult {
  Dataset labeled;           // every row that received a label carries it
  double accuracy = 0.0;     // visible label vs truth over rows with truth
  std::size_t self_labeled = 0;
};

/// One self-labeling pass over all unlabeled rows: transductive spreading
/// for spreading learners, otherwise fit + self-label with tau = 0.
SingleRoundResult single_round_sum(const Dataset& data, const ClassifierSpec& spec);

struct SingleRoundReport {
  std::size_t labeled = 0;
  std::size_t self_labeled = 0;
  double holdout_acc = 0.0;  // holdout rows take part as unlabeled nodes
  double overall_acc = 0.0;
};

/// single_round_sum over seed + unlabeled + holdout, scored on the holdout.
SingleRoundReport run_single_round(const ExperimentConfig& config);
SingleRoundReport run_single_round(const ExperimentConfig& config, const PreparedData& data);

struct SweepRow {
  double fraction = 0.0;
  Strategy strategy = Strategy::Static;
  double holdout_acc = 0.0;
};

/// Labeled-fraction sweep. Fractions are relative to the non-holdout data.
/// Static is supervised on the labeled rows; SUM adds one gated round of
/// self-labels over the rest; Oracle trains on everything non-holdout.
std::vector<SweepRow> run_fraction_sweep(const ExperimentConfig& config);

}  // namespace sumer
