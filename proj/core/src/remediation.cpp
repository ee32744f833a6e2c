#include "sumer/remediation.hpp"

#include <algorithm>
#include <cmath>

#include "sumer/error.hpp"
#include "sumer/rng.hpp"

namespace sumer {

NoiseEstimate estimate_noise_rates(std::span<const double> p1, std::span<const int> given) {
  if (p1.size() != given.size()) throw ValidationError("probabilities and labels differ in length");
  std::size_t c0 = 0, c1 = 0;
  double sum0 = 0.0, sum1 = 0.0;
  for (std::size_t i = 0; i < given.size(); ++i) {
    if (given[i] == 1) {
      ++c1;
      sum1 += p1[i];
    } else if (given[i] == 0) {
      ++c0;
      sum0 += p1[i];
    } else {
      throw ValidationError("noise estimation is defined for binary labels only");
    }
  }
  if (c0 == 0 || c1 == 0) throw ValidationError("noise estimation needs both given classes");

  NoiseEstimate e;
  e.lower_bound = sum1 / static_cast<double>(c1);
  e.upper_bound = sum0 / static_cast<double>(c0);
  if (e.lower_bound <= e.upper_bound) {
    e.degenerate = true;
    return e;
  }
  for (std::size_t i = 0; i < given.size(); ++i) {
    const bool hi = p1[i] >= e.lower_bound;
    const bool lo = p1[i] <= e.upper_bound;
    if (given[i] == 1) {
      e.n11 += hi;
      e.n10 += lo;
    } else {
      e.n01 += hi;
      e.n00 += lo;
    }
  }
  // Flip rates from the confident sets: among rows confidently of true class
  // y, the share carrying the other given label.
  const auto ratio = [](std::size_t a, std::size_t b) {
    return a + b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(a + b);
  };
  e.rho1 = ratio(e.n01, e.n11);
  e.rho0 = ratio(e.n10, e.n00);
  const double denom = 1.0 - e.rho0 - e.rho1;
  if (denom <= 0.0) {
    e.degenerate = true;
    e.rho0 = e.rho1 = 0.0;
    return e;
  }
  // Bayes inversion to contamination of the given sets.
  const double ps1 = static_cast<double>(c1) / static_cast<double>(c0 + c1);
  const double py1 = std::clamp((ps1 - e.rho0) / denom, 0.0, 1.0);
  e.pi1 = std::clamp(e.rho0 * (1.0 - py1) / ps1, 0.0, 1.0);
  e.pi0 = std::clamp(e.rho1 * py1 / (1.0 - ps1), 0.0, 1.0);
  if (e.pi0 + e.pi1 > kMaxTotalNoise) {
    const double scale = kMaxTotalNoise / (e.pi0 + e.pi1);
    e.pi0 *= scale;
    e.pi1 *= scale;
  }
  return e;
}

NoiseEstimate estimate_noise_rates(const Matrix& probas, std::span<const int> given) {
  if (probas.cols() != 2) throw ValidationError("noise estimation needs a binary probability matrix");
  std::vector<double> p1(probas.rows());
  for (std::size_t i = 0; i < probas.rows(); ++i) p1[i] = probas(i, 1);
  return estimate_noise_rates(p1, given);
}

Matrix cross_val_proba(const ClassifierSpec& spec, const Dataset& data, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  const std::size_t n = data.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!data.label(i).visible()) throw ValidationError("cross-validation rows must all be labeled");
  if (n < folds) throw ValidationError("fewer rows than folds");
  const auto perm = Rng(seed).split("cv").permutation(n);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) fold_of[perm[k]] = k % folds;

  Matrix out(n, static_cast<std::size_t>(data.num_classes()));
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test_rows : train_rows).push_back(i);
    const auto model = fit(spec, data.subset(train_rows));
    const auto p = predict_proba(model, data.subset(test_rows));
    for (std::size_t t = 0; t < test_rows.size(); ++t)
      for (std::size_t c = 0; c < out.cols(); ++c) out(test_rows[t], c) = p(t, c);
  }
  return out;
}

PruneResult rank_prune(const Dataset& data, const Matrix& probas, const NoiseEstimate& estimate) {
  if (data.num_classes() != 2 || probas.cols() != 2) throw ValidationError("rank pruning is binary only");
  if (probas.rows() != data.size()) throw ValidationError("probabilities and dataset differ in length");
  if (!(estimate.pi0 >= 0.0 && estimate.pi0 < 1.0 && estimate.pi1 >= 0.0 && estimate.pi1 < 1.0))
    throw ValidationError("noise estimate out of range");

  PruneResult r;
  std::vector<bool> removed(data.size(), false);
  for (int y = 0; y < 2; ++y) {
    // (confidence in the given label, id, row)
    std::vector<std::tuple<double, InstanceId, std::size_t>> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto v = data.label(i).visible();
      if (!v) throw ValidationError("rank pruning needs every row labeled");
      if (*v == y) rows.emplace_back(probas(i, static_cast<std::size_t>(y)), data.instance(i).id, i);
    }
    const double pi = y == 0 ? estimate.pi0 : estimate.pi1;
    auto k = static_cast<std::size_t>(std::floor(pi * static_cast<double>(rows.size()) + 1e-9));
    if (!rows.empty() && k >= rows.size()) {
      r.warnings.push_back("prune count for class " + std::to_string(y) + " clipped to " +
                           std::to_string(rows.size() - 1));
      k = rows.size() - 1;
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
      return std::get<1>(a) < std::get<1>(b);
    });
    for (std::size_t t = 0; t < k; ++t) removed[std::get<2>(rows[t])] = true;
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto id = data.instance(i).id;
    if (removed[i]) {
      r.removed.push_back(id);
      continue;
    }
    const double pi = *data.label(i).visible() == 0 ? estimate.pi0 : estimate.pi1;
    r.kept.push_back(id);
    r.weights.push_back(1.0 / (1.0 - pi));
  }
  return r;
}

CorrectionResult spread_correct(const Dataset& data, const SpreadSpec& spec) {
  CorrectionResult r;
  r.spread = label_spread(data, spec);
  r.labels = r.spread.labels;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto v = data.label(i).visible();
    if (!v) continue;
    if (r.labels[i] < 0) {
      r.labels[i] = *v;  // undecidable rows keep their label
      continue;
    }
    if (r.labels[i] != *v) r.changed.push_back(data.instance(i).id);
  }
  return r;
}

CouplingReport coupling_report(std::span<const int> predictor_labels, std::span<const int> corrected_labels,
                               const NoiseEstimate& estimate, double theta) {
  if (predictor_labels.size() != corrected_labels.size())
    throw ValidationError("coupling report: label lists differ in length");
  CouplingReport r;
  std::size_t same = 0;
  for (std::size_t i = 0; i < predictor_labels.size(); ++i) same += predictor_labels[i] == corrected_labels[i];
  r.agreement = predictor_labels.empty() ? 1.0
                                         : static_cast<double>(same) / static_cast<double>(predictor_labels.size());
  r.pi0 = estimate.pi0;
  r.pi1 = estimate.pi1;
  r.theta = theta;
  r.coupled = r.pi0 < theta && r.pi1 < theta && r.agreement > 1.0 - theta;
  return r;
}

}  // namespace sumer
