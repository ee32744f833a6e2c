#include "sumer/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "sumer/error.hpp"
#include "sumer/spec_json.hpp"
#include "sumer/toml_lite.hpp"

namespace sumer {

namespace {

using nlohmann::json;

const json& table(const json& j, const char* key, std::string_view ctx) {
  const auto& t = j.at(key);
  if (!t.is_object()) throw ValidationError(std::string(ctx) + "." + key + ": expected a table");
  return t;
}

template <class T>
T get_or(const json& j, const char* key, T fallback, std::string_view ctx) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  const auto bad = [&] { return ValidationError(std::string(ctx) + "." + key + ": invalid value " + v.dump()); };
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw bad();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw bad();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw bad();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) throw bad();
  } else {
    if (!v.is_number_integer()) throw bad();
  }
  return v.get<T>();
}

std::vector<double> real_vector(const json& v, std::string_view ctx) {
  if (!v.is_array()) throw ValidationError(std::string(ctx) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError(std::string(ctx) + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> real_matrix(const json& v, std::string_view ctx) {
  if (!v.is_array()) throw ValidationError(std::string(ctx) + ": expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (const auto& row : v) out.push_back(real_vector(row, ctx));
  return out;
}

std::string_view to_string(RemediationMethod m) {
  switch (m) {
    case RemediationMethod::Auto: return "auto";
    case RemediationMethod::RankPrune: return "rank_prune";
    case RemediationMethod::SpreadCorrect: return "spread_correct";
    case RemediationMethod::None: return "none";
  }
  return "auto";
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Static: return "Static";
    case Strategy::StaticRemediated: return "StaticRemediated";
    case Strategy::SUM: return "SUM";
    case Strategy::SUMER: return "SUMER";
    case Strategy::Oracle: return "Oracle";
  }
  return "Static";
}

Strategy strategy_from_string(std::string_view name) {
  for (auto s : {Strategy::Static, Strategy::StaticRemediated, Strategy::SUM, Strategy::SUMER, Strategy::Oracle})
    if (to_string(s) == name) return s;
  throw ValidationError("unknown strategy '" + std::string(name) + "'");
}

void GateSpec::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("gate tau must be in [0, 1]");
  if (coverage) {
    if (coverage->k < 1) throw ValidationError("coverage k must be >= 1");
    if (!(coverage->quantile > 0.0 && coverage->quantile < 1.0))
      throw ValidationError("coverage quantile must be in (0, 1)");
  }
}

RemediationMethod ExperimentConfig::resolved_remediation() const {
  if (remediation.method != RemediationMethod::Auto) return remediation.method;
  return learner.transductive() ? RemediationMethod::SpreadCorrect : RemediationMethod::RankPrune;
}

void ExperimentConfig::validate() const {
  if (version != 1) throw ValidationError("unsupported config version " + std::to_string(version));
  if (strategies.empty()) throw ValidationError("strategies must not be empty");
  std::set<Strategy> seen(strategies.begin(), strategies.end());
  if (seen.size() != strategies.size()) throw ValidationError("strategies must not repeat");

  if (const auto* m = std::get_if<MoonsSource>(&data)) {
    if (m->n < 2) throw ValidationError("data.n must be >= 2");
    if (!(m->noise_std >= 0.0)) throw ValidationError("data.noise_std must be >= 0");
  } else if (const auto* g = std::get_if<GaussiansSource>(&data)) {
    const auto C = g->spec.means.size();
    if (C < 2 || g->spec.covariances.size() != C || g->spec.counts.size() != C)
      throw ValidationError("data: means, covariances and counts need one entry per class (>= 2)");
  } else if (std::get<CsvSource>(data).path.empty()) {
    throw ValidationError("data.path must be set for csv data");
  }

  if (mode != RunMode::FractionSweep) SplitSpec{split.labeled_fraction, split.holdout_fraction, 0, split.stratified}.validate();
  if (!(split.holdout_fraction > 0.0 && split.holdout_fraction < 1.0))
    throw ValidationError("holdout_fraction must be in (0, 1)");
  if ((split.selection == SeedSelection::NearestToAnchor) != !split.anchors.empty())
    throw ValidationError("split.anchors are required by, and only allowed with, selection = \"nearest_to_anchor\"");

  if (stream.window_size < 1) throw ValidationError("stream.window_size must be >= 1");
  gate.validate();
  if (const auto* s = std::get_if<SpreadLearnerSpec>(&learner.kind)) s->spread.validate();
  if (remediation.folds < 2) throw ValidationError("remediation.folds must be >= 2");
  if (!(remediation.alpha > 0.0 && remediation.alpha <= 1.0))
    throw ValidationError("remediation.alpha must be in (0, 1]");
  if (!(remediation.theta >= 0.0 && remediation.theta <= 1.0))
    throw ValidationError("remediation.theta must be in [0, 1]");
  if (resolved_remediation() == RemediationMethod::SpreadCorrect && !learner.transductive())
    throw ValidationError("spread_correct remediation needs a label_spreading learner");

  if (mode == RunMode::FractionSweep) {
    if (fractions.empty()) throw ValidationError("sweep.fractions must not be empty");
    for (double f : fractions)
      if (!(f > 0.0 && f < 1.0)) throw ValidationError("sweep fractions must be in (0, 1)");
    for (auto s : strategies)
      if (s != Strategy::Static && s != Strategy::SUM && s != Strategy::Oracle)
        throw ValidationError("fraction sweeps support Static, SUM and Oracle only");
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json j;
  j["version"] = c.version;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["mode"] = c.mode == RunMode::Stream ? "stream" : c.mode == RunMode::FractionSweep ? "fraction_sweep" : "single_round";
  j["strategies"] = json::array();
  for (auto s : c.strategies) j["strategies"].push_back(std::string(to_string(s)));
  if (!c.output_dir.empty()) j["out"] = c.output_dir;

  json d;
  if (const auto* m = std::get_if<MoonsSource>(&c.data)) {
    d = {{"kind", "two_moons"}, {"n", m->n}, {"noise_std", m->noise_std}};
  } else if (const auto* g = std::get_if<GaussiansSource>(&c.data)) {
    d = {{"kind", "two_gaussians"},
         {"means", g->spec.means},
         {"covariances", g->spec.covariances},
         {"counts", g->spec.counts}};
  } else {
    const auto& csv = std::get<CsvSource>(c.data);
    d = {{"kind", "csv"}, {"path", csv.path}, {"label_column", csv.label_column}};
  }
  j["data"] = d;

  j["split"] = {{"labeled_fraction", c.split.labeled_fraction},
                {"holdout_fraction", c.split.holdout_fraction},
                {"stratified", c.split.stratified},
                {"selection", c.split.selection == SeedSelection::Random ? "random" : "nearest_to_anchor"}};
  if (!c.split.anchors.empty()) j["split"]["anchors"] = c.split.anchors;
  if (c.seed_noise) j["seed_noise"] = to_json(*c.seed_noise);
  j["stream"] = {{"window_size", c.stream.window_size}, {"n_windows", c.stream.n_windows}};
  j["learner"] = to_json(c.learner);
  j["gate"] = {{"tau", c.gate.tau}};
  if (c.gate.coverage) {
    j["gate"]["coverage_k"] = c.gate.coverage->k;
    j["gate"]["coverage_quantile"] = c.gate.coverage->quantile;
  }
  j["remediation"] = {{"method", std::string(to_string(c.remediation.method))},
                      {"folds", c.remediation.folds},
                      {"alpha", c.remediation.alpha},
                      {"anti_coupling", c.remediation.anti_coupling},
                      {"theta", c.remediation.theta},
                      {"corrector", to_json(c.remediation.corrector)}};
  if (c.mode == RunMode::FractionSweep) j["sweep"] = {{"fractions", c.fractions}};
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a table");
  reject_unknown_keys(j,
                      {"version", "name", "seed", "mode", "strategies", "out", "data", "split", "seed_noise",
                       "stream", "learner", "gate", "remediation", "sweep"},
                      "config");
  ExperimentConfig c;
  try {
    c.version = get_or<int>(j, "version", -1, "config");
    if (!j.contains("version")) throw ValidationError("config: missing 'version'");
    c.name = get_or<std::string>(j, "name", c.name, "config");
    c.seed = get_or<std::uint64_t>(j, "seed", 0, "config");
    c.output_dir = get_or<std::string>(j, "out", "", "config");
    const auto mode = get_or<std::string>(j, "mode", "stream", "config");
    if (mode == "stream")
      c.mode = RunMode::Stream;
    else if (mode == "fraction_sweep")
      c.mode = RunMode::FractionSweep;
    else if (mode == "single_round")
      c.mode = RunMode::SingleRound;
    else
      throw ValidationError("config.mode must be \"stream\", \"fraction_sweep\" or \"single_round\"");
    if (j.contains("strategies")) {
      if (!j["strategies"].is_array()) throw ValidationError("config.strategies: expected an array");
      c.strategies.clear();
      for (const auto& s : j["strategies"]) {
        if (!s.is_string()) throw ValidationError("config.strategies: expected strings");
        c.strategies.push_back(strategy_from_string(s.get<std::string>()));
      }
    }

    if (j.contains("data")) {
      const auto& d = table(j, "data", "config");
      const auto kind = get_or<std::string>(d, "kind", "two_moons", "data");
      if (kind == "two_moons") {
        reject_unknown_keys(d, {"kind", "n", "noise_std"}, "data");
        c.data = MoonsSource{get_or<std::size_t>(d, "n", 1000, "data"), get_or<double>(d, "noise_std", 0.1, "data")};
      } else if (kind == "two_gaussians") {
        reject_unknown_keys(d, {"kind", "means", "covariances", "counts"}, "data");
        GaussiansSource g;
        g.spec.means = real_matrix(d.at("means"), "data.means");
        if (!d.at("covariances").is_array()) throw ValidationError("data.covariances: expected an array");
        for (const auto& cov : d.at("covariances")) g.spec.covariances.push_back(real_matrix(cov, "data.covariances"));
        for (const auto& n : d.at("counts")) {
          if (!n.is_number_unsigned()) throw ValidationError("data.counts: expected non-negative integers");
          g.spec.counts.push_back(n.get<std::size_t>());
        }
        c.data = std::move(g);
      } else if (kind == "csv") {
        reject_unknown_keys(d, {"kind", "path", "label_column"}, "data");
        c.data = CsvSource{get_or<std::string>(d, "path", "", "data"),
                           get_or<std::string>(d, "label_column", "label", "data")};
      } else {
        throw ValidationError("data.kind must be two_moons, two_gaussians or csv");
      }
    }

    if (j.contains("split")) {
      const auto& s = table(j, "split", "config");
      reject_unknown_keys(s, {"labeled_fraction", "holdout_fraction", "stratified", "selection", "anchors"}, "split");
      c.split.labeled_fraction = get_or<double>(s, "labeled_fraction", c.split.labeled_fraction, "split");
      c.split.holdout_fraction = get_or<double>(s, "holdout_fraction", c.split.holdout_fraction, "split");
      c.split.stratified = get_or<bool>(s, "stratified", true, "split");
      const auto sel = get_or<std::string>(s, "selection", "random", "split");
      if (sel == "random")
        c.split.selection = SeedSelection::Random;
      else if (sel == "nearest_to_anchor")
        c.split.selection = SeedSelection::NearestToAnchor;
      else
        throw ValidationError("split.selection must be \"random\" or \"nearest_to_anchor\"");
      if (s.contains("anchors")) c.split.anchors = real_matrix(s["anchors"], "split.anchors");
    }

    if (j.contains("seed_noise")) c.seed_noise = noise_spec_from_json(table(j, "seed_noise", "config"));

    if (j.contains("stream")) {
      const auto& s = table(j, "stream", "config");
      reject_unknown_keys(s, {"window_size", "n_windows"}, "stream");
      c.stream.window_size = get_or<std::size_t>(s, "window_size", 100, "stream");
      c.stream.n_windows = get_or<std::size_t>(s, "n_windows", 8, "stream");
    }

    if (j.contains("learner")) c.learner = classifier_spec_from_json(table(j, "learner", "config"));

    if (j.contains("gate")) {
      const auto& g = table(j, "gate", "config");
      reject_unknown_keys(g, {"tau", "coverage_k", "coverage_quantile"}, "gate");
      c.gate.tau = get_or<double>(g, "tau", c.gate.tau, "gate");
      if (g.contains("coverage_k") || g.contains("coverage_quantile"))
        c.gate.coverage =
            CoverageSpec{get_or<std::size_t>(g, "coverage_k", 5, "gate"), get_or<double>(g, "coverage_quantile", 0.9, "gate")};
    }

    if (j.contains("remediation")) {
      const auto& r = table(j, "remediation", "config");
      reject_unknown_keys(r, {"method", "folds", "alpha", "anti_coupling", "theta", "corrector"}, "remediation");
      const auto m = get_or<std::string>(r, "method", "auto", "remediation");
      bool known = false;
      for (auto v : {RemediationMethod::Auto, RemediationMethod::RankPrune, RemediationMethod::SpreadCorrect,
                     RemediationMethod::None})
        if (to_string(v) == m) {
          c.remediation.method = v;
          known = true;
        }
      if (!known) throw ValidationError("remediation.method must be auto, rank_prune, spread_correct or none");
      c.remediation.folds = get_or<std::size_t>(r, "folds", 5, "remediation");
      c.remediation.alpha = get_or<double>(r, "alpha", 0.9, "remediation");
      c.remediation.anti_coupling = get_or<bool>(r, "anti_coupling", true, "remediation");
      c.remediation.theta = get_or<double>(r, "theta", 0.02, "remediation");
      if (r.contains("corrector")) c.remediation.corrector = classifier_spec_from_json(table(r, "corrector", "remediation"));
    }

    if (j.contains("sweep")) {
      const auto& s = table(j, "sweep", "config");
      reject_unknown_keys(s, {"fractions"}, "sweep");
      if (s.contains("fractions")) c.fractions = real_vector(s["fractions"], "sweep.fractions");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig config_from_toml(const std::string& text) { return config_from_json(parse_toml(text)); }

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("config: ") + e.what());
    }
    return config_from_json(j);
  }
  return config_from_toml(text);
}

}  // namespace sumer
