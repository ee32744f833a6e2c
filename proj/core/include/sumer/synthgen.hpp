#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sumer/dataset.hpp"

namespace sumer {

/// One multivariate normal component per class.
struct GaussianSpec {
  std::vector<std::vector<double>> means;                     // [class][d]
  std::vector<std::vector<std::vector<double>>> covariances;  // [class][d][d]
  std::vector<std::size_t> counts;                            // [class]
};

struct MoonsSpec {
  std::size_t n = 1000;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
};

struct SymmetricFlip {
  double rate = 0.0;
};
/// Forward flip rates: a fraction pi_y of true-class-y rows is flipped.
struct ClassConditionalFlip {
  double pi0 = 0.0;
  double pi1 = 0.0;
};

struct NoiseSpec {
  std::variant<SymmetricFlip, ClassConditionalFlip> kind = SymmetricFlip{};
  std::uint64_t seed = 0;
};

struct NoisyDataset {
  Dataset noisy;
  std::vector<InstanceId> flipped_ids;  // ascending
};

struct StreamPlan {
  std::size_t window_size = 0;
  std::vector<std::vector<InstanceId>> windows;
  std::uint64_t seed = 0;

  std::string to_json() const;
  static StreamPlan from_json(const std::string& text);
  bool operator==(const StreamPlan&) const = default;
};

/// Lower-triangular Cholesky factor; throws ValidationError unless the
/// matrix is symmetric positive definite.
std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& a);

Dataset gen_two_gaussians(const GaussianSpec& spec, std::uint64_t seed);

/// Interleaving half circles of unit radius: class 0 on (cos t, sin t),
/// class 1 on (1 - cos t, 0.5 - sin t), t ~ U[0, pi], plus isotropic
/// N(0, noise_std^2) jitter. Class 0 receives the extra point for odd n.
Dataset gen_two_moons(const MoonsSpec& spec);

/// Exact-count label flipping of Provided labels; truth is untouched.
NoisyDataset inject_noise(const Dataset& dataset, const NoiseSpec& spec);

/// Forward flip rates that leave the given-0 set with contamination pi0 and
/// the given-1 set with contamination pi1, for class sizes n0 and n1.
ClassConditionalFlip flip_rates_for_contamination(double pi0, double pi1, std::size_t n0, std::size_t n1);

/// Disjoint windows drawn without replacement from `source` in seeded order.
StreamPlan plan_stream(const Dataset& source, std::size_t window_size, std::size_t n_windows, std::uint64_t seed);

}  // namespace sumer
