#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sumer/dataset.hpp"
#include "sumer/learners.hpp"
#include "sumer/matrix.hpp"

namespace sumer {

/// Binary noise estimate under the contaminated-mixture model
///   P~0 = (1 - pi0) P0 + pi0 P1,   P~1 = (1 - pi1) P1 + pi1 P0.
///
/// pi0 / pi1 are contamination rates of the given-0 / given-1 sets (the
/// quantities rank pruning removes). rho0 = P(given 1 | true 0) and
/// rho1 = P(given 0 | true 1) are the matching flip rates.
struct NoiseEstimate {
  double pi0 = 0.0;
  double pi1 = 0.0;
  double rho0 = 0.0;
  double rho1 = 0.0;
  double lower_bound = 0.0;  // LB: mean P(1) over given-1 rows
  double upper_bound = 0.0;  // UB: mean P(1) over given-0 rows
  std::size_t n11 = 0;       // given 1, P(1) >= LB
  std::size_t n10 = 0;       // given 1, P(1) <= UB
  std::size_t n01 = 0;       // given 0, P(1) >= LB
  std::size_t n00 = 0;       // given 0, P(1) <= UB
  /// True when the thresholds or the rate inversion were degenerate; the
  /// rates are then 0 and callers should skip remediation.
  bool degenerate = false;
  std::string method = "confident_counts";
};

/// Cap on pi0 + pi1; estimates are scaled into this region.
inline constexpr double kMaxTotalNoise = 0.95;

/// `p1` holds out-of-sample P(class 1) per row; `given` the noisy labels.
/// Throws ValidationError if either given class is empty or lengths differ.
NoiseEstimate estimate_noise_rates(std::span<const double> p1, std::span<const int> given);
NoiseEstimate estimate_noise_rates(const Matrix& probas, std::span<const int> given);

/// K-fold out-of-sample probabilities for the visible labels of `data`.
/// Fold assignment is a seeded permutation; every row must be labeled.
Matrix cross_val_proba(const ClassifierSpec& spec, const Dataset& data, std::size_t folds, std::uint64_t seed);

struct PruneResult {
  std::vector<InstanceId> kept;
  std::vector<InstanceId> removed;
  std::vector<double> weights;  // parallel to kept
  std::vector<std::string> warnings;
};

/// Removes floor(pi1 * n1) given-1 rows with the lowest P(1) and
/// floor(pi0 * n0) given-0 rows with the lowest P(0) (ties: lower id), then
/// weights kept rows of given class y by 1 / (1 - pi_y). A prune count that
/// would empty a class is clipped to n_y - 1 with a warning.
PruneResult rank_prune(const Dataset& data, const Matrix& probas, const NoiseEstimate& estimate);

struct CorrectionResult {
  std::vector<int> labels;  // hard label per row; -1 when undecidable
  std::vector<InstanceId> changed;  // labeled rows whose label moved
  SpreadResult spread;
};

/// Spreading with movable labels; returns the corrected assignment.
CorrectionResult spread_correct(const Dataset& data, const SpreadSpec& spec);

struct CouplingReport {
  double agreement = 1.0;
  double pi0 = 0.0;
  double pi1 = 0.0;
  double theta = 0.02;
  bool coupled = false;
};

/// agreement = fraction of equal entries; coupled iff pi0 < theta,
/// pi1 < theta and agreement > 1 - theta.
CouplingReport coupling_report(std::span<const int> predictor_labels, std::span<const int> corrected_labels,
                               const NoiseEstimate& estimate, double theta = 0.02);

}  // namespace sumer
