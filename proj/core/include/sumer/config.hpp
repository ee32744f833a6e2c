#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sumer/dataset.hpp"
#include "sumer/learners.hpp"
#include "sumer/synthgen.hpp"

namespace sumer {

enum class Strategy { Static, StaticRemediated, SUM, SUMER, Oracle };

std::string_view to_string(Strategy s) noexcept;
Strategy strategy_from_string(std::string_view name);

struct MoonsSource {
  std::size_t n = 1000;
  double noise_std = 0.1;
};
struct GaussiansSource {
  GaussianSpec spec;
};
struct CsvSource {
  std::string path;
  std::string label_column = "label";
};
using DataSource = std::variant<MoonsSource, GaussiansSource, CsvSource>;

enum class SeedSelection { Random, NearestToAnchor };

struct SplitConfig {
  double labeled_fraction = 0.02;
  double holdout_fraction = 0.2;
  bool stratified = true;
  SeedSelection selection = SeedSelection::Random;
  std::vector<std::vector<double>> anchors;  // one per class, NearestToAnchor only
};

struct StreamConfig {
  std::size_t window_size = 100;
  std::size_t n_windows = 8;
};

struct CoverageSpec {
  std::size_t k = 5;
  double quantile = 0.9;
};

struct GateSpec {
  double tau = 0.8;
  std::optional<CoverageSpec> coverage;
  void validate() const;
};

enum class RemediationMethod { Auto, RankPrune, SpreadCorrect, None };

struct RemediationSpec {
  RemediationMethod method = RemediationMethod::Auto;
  std::size_t folds = 5;
  double alpha = 0.9;  // spread_correct clamp
  bool anti_coupling = true;
  double theta = 0.02;
  ClassifierSpec corrector = ClassifierSpec{ForestSpec{50, 32, 5, 0, 0}};
};

enum class RunMode { Stream, FractionSweep, SingleRound };

struct ExperimentConfig {
  int version = 1;
  std::string name = "experiment";
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Stream;
  std::vector<Strategy> strategies{Strategy::Static, Strategy::SUM, Strategy::Oracle};
  DataSource data = MoonsSource{};
  SplitConfig split;
  std::optional<NoiseSpec> seed_noise;
  StreamConfig stream;
  ClassifierSpec learner;
  GateSpec gate;
  RemediationSpec remediation;
  std::vector<double> fractions{0.05, 0.1, 0.25, 0.5, 0.9};  // FractionSweep only
  std::string output_dir;

  /// Checks everything that can be checked without loading data.
  void validate() const;
  /// Remediation method after resolving Auto against the learner.
  RemediationMethod resolved_remediation() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Unknown keys anywhere are rejected with ValidationError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig config_from_toml(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace sumer
