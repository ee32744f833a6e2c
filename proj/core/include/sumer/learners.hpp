#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sumer/dataset.hpp"
#include "sumer/matrix.hpp"

namespace sumer {

// ---------------------------------------------------------------------------
// Specs

struct KnnSpec {
  std::size_t k = 5;
};

struct TreeSpec {
  std::size_t max_depth = 32;
  std::size_t min_leaf = 1;
};

struct ForestSpec {
  std::size_t n_trees = 50;
  std::size_t max_depth = 32;
  std::size_t min_leaf = 1;
  /// 0 selects floor(sqrt(d)), at least 1.
  std::size_t features_per_split = 0;
  std::uint64_t seed = 0;
};

struct RbfAffinity {
  /// <= 0 selects 1 / (d * median pairwise squared distance).
  double gamma = 0.0;
};
struct KnnGraphAffinity {
  std::size_t k = 10;
};

/// Graph label spreading.
///
/// Iterates F <- a_i (S F)_i + (1 - a_i) Y0_i with S = D^-1/2 W D^-1/2,
/// where a_i = `alpha` on rows carrying a visible label and a_i =
/// `propagation` on unlabeled rows. With alpha == propagation this is the
/// classic spreading iteration; alpha = 0 clamps visible labels
/// (propagation); alpha > 0 lets them move, which is what corrects them.
struct SpreadSpec {
  std::variant<RbfAffinity, KnnGraphAffinity> affinity = KnnGraphAffinity{};
  double alpha = 0.0;
  double propagation = 0.99;
  std::size_t max_iter = 5000;
  double tolerance = 1e-6;

  void validate() const;
};

/// Label spreading used as a learner: fit is transductive over every row
/// (unlabeled rows included), prediction on new points is inductive.
struct SpreadLearnerSpec {
  SpreadSpec spread;
};

struct ClassifierSpec {
  std::variant<KnnSpec, TreeSpec, ForestSpec, SpreadLearnerSpec> kind = ForestSpec{};

  std::string name() const;
  bool transductive() const noexcept { return std::holds_alternative<SpreadLearnerSpec>(kind); }
  void validate(std::size_t dim) const;
};

// ---------------------------------------------------------------------------
// Fitted model parameters

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> dist;  // class distribution at the node, sums to 1
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::span<const double> leaf(std::span<const double> x) const;
};

struct KnnModel {
  std::vector<std::vector<double>> points;
  std::vector<int> labels;
  std::vector<double> weights;
};

struct ForestModel {
  std::vector<TreeModel> trees;
};

struct SpreadModel {
  std::vector<std::vector<double>> points;
  Matrix soft;  // row-normalized F of the training nodes; zero rows are undecidable
  double gamma = 0.0;  // resolved RBF gamma, or 0 for KNN graphs
  std::size_t k = 0;   // KNN graph k, or 0 for RBF
};

/// Immutable after fit; safe to share across threads.
class FittedModel {
 public:
  using Params = std::variant<KnnModel, TreeModel, ForestModel, SpreadModel>;

  FittedModel(ClassifierSpec spec, std::size_t dim, int num_classes, Params params)
      : spec_(std::move(spec)), dim_(dim), num_classes_(num_classes), params_(std::move(params)) {}

  const ClassifierSpec& spec() const noexcept { return spec_; }
  std::size_t dim() const noexcept { return dim_; }
  int num_classes() const noexcept { return num_classes_; }
  const Params& params() const noexcept { return params_; }

  /// Transductive class distribution of the training rows, for spreading
  /// models only (row order of the dataset passed to fit).
  const Matrix* training_soft_labels() const noexcept;

 private:
  ClassifierSpec spec_;
  std::size_t dim_;
  int num_classes_;
  Params params_;
};

// ---------------------------------------------------------------------------
// Operations

/// Fits on the visible labels of `train`. `weights` must match its length;
/// pass an empty span to use each record's own weight. Spreading learners
/// also use the unlabeled rows as graph nodes.
FittedModel fit(const ClassifierSpec& spec, const Dataset& train, std::span<const double> weights = {});

/// n x C class probabilities; rows are on the simplex.
Matrix predict_proba(const FittedModel& model, std::span<const std::vector<double>> points);
Matrix predict_proba(const FittedModel& model, const Dataset& data);

/// Class predictions computed without predict_proba (per-learner vote
/// paths). Agrees with argmax(predict_proba) up to floating-point ties.
std::vector<int> predict(const FittedModel& model, const Dataset& data);

/// Fraction of rows whose prediction equals the hidden truth.
double accuracy(const FittedModel& model, const Dataset& truth_labeled);

struct SpreadResult {
  Matrix soft;                   // row-normalized F
  Matrix raw;                    // F before normalization
  std::vector<int> labels;       // argmax of soft, -1 when undecidable
  std::vector<bool> undecidable; // component without any visible label
  std::size_t iterations = 0;
  double last_change = 0.0;
  bool converged = false;
  double gamma = 0.0;            // resolved RBF gamma (0 for KNN graphs)
};

/// Sparse symmetric-normalized affinity S (CSR), exposed for tests.
struct Affinity {
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col;
  std::vector<double> value;
  double gamma = 0.0;
  std::size_t n() const noexcept { return row_start.empty() ? 0 : row_start.size() - 1; }
};

Affinity normalized_affinity(std::span<const std::vector<double>> points, const SpreadSpec& spec);

/// Requires >= 2 instances and >= 1 visible label.
SpreadResult label_spread(const Dataset& data, const SpreadSpec& spec);

/// Median-heuristic gamma for a point set.
double median_gamma(std::span<const std::vector<double>> points);

// ---------------------------------------------------------------------------
// Serialization: versioned JSON document {format, version, spec, dim,
// num_classes, params}.

std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& text);

}  // namespace sumer
