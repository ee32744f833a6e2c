#include "sumer/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "sumer/error.hpp"
#include "sumer/rng.hpp"

namespace sumer {

std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& a) {
  const std::size_t d = a.size();
  for (const auto& row : a)
    if (row.size() != d) throw ValidationError("covariance must be square");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(a[i][j] - a[j][i]) > 1e-12 * (1.0 + std::abs(a[i][j])))
        throw ValidationError("covariance must be symmetric");
  std::vector<std::vector<double>> l(d, std::vector<double>(d, 0.0));
  for (std::size_t j = 0; j < d; ++j) {
    double s = a[j][j];
    for (std::size_t k = 0; k < j; ++k) s -= l[j][k] * l[j][k];
    if (!(s > 0.0)) throw ValidationError("covariance is not positive definite");
    l[j][j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < d; ++i) {
      double t = a[i][j];
      for (std::size_t k = 0; k < j; ++k) t -= l[i][k] * l[j][k];
      l[i][j] = t / l[j][j];
    }
  }
  return l;
}

Dataset gen_two_gaussians(const GaussianSpec& spec, std::uint64_t seed) {
  const std::size_t C = spec.means.size();
  if (C < 2) throw ValidationError("need at least two Gaussian components");
  if (spec.covariances.size() != C || spec.counts.size() != C)
    throw ValidationError("means, covariances and counts must have one entry per class");
  const std::size_t d = spec.means.front().size();
  if (d == 0) throw ValidationError("mean vectors must be non-empty");
  std::vector<std::vector<std::vector<double>>> factors;
  for (std::size_t c = 0; c < C; ++c) {
    if (spec.means[c].size() != d || spec.covariances[c].size() != d)
      throw ValidationError("component " + std::to_string(c) + " has inconsistent dimension");
    if (spec.counts[c] == 0) throw ValidationError("component " + std::to_string(c) + " has zero count");
    factors.push_back(cholesky(spec.covariances[c]));
  }

  std::vector<Instance> inst;
  std::vector<LabelRecord> labs;
  for (std::size_t c = 0; c < C; ++c) {
    Rng rng = Rng(seed).split("gaussian").split(c);
    std::vector<double> z(d);
    for (std::size_t k = 0; k < spec.counts[c]; ++k) {
      for (auto& v : z) v = rng.normal();
      Instance x{inst.size(), spec.means[c]};
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) x.features[i] += factors[c][i][j] * z[j];
      inst.push_back(std::move(x));
      labs.push_back(LabelRecord::provided(static_cast<int>(c), static_cast<int>(c)));
    }
  }
  return Dataset(std::move(inst), std::move(labs), static_cast<int>(C));
}

Dataset gen_two_moons(const MoonsSpec& spec) {
  if (spec.n < 2) throw ValidationError("two-moons needs n >= 2");
  if (!(spec.noise_std >= 0.0)) throw ValidationError("noise_std must be non-negative");
  const std::size_t n0 = (spec.n + 1) / 2;
  Rng rng = Rng(spec.seed).split("moons");
  std::vector<Instance> inst;
  std::vector<LabelRecord> labs;
  inst.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int cls = i < n0 ? 0 : 1;
    const double t = rng.uniform(0.0, std::numbers::pi);
    double x = cls == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = cls == 0 ? std::sin(t) : 0.5 - std::sin(t);
    if (spec.noise_std > 0.0) {
      x += rng.normal(0.0, spec.noise_std);
      y += rng.normal(0.0, spec.noise_std);
    }
    inst.push_back(Instance{i, {x, y}});
    labs.push_back(LabelRecord::provided(cls, cls));
  }
  return Dataset(std::move(inst), std::move(labs), 2);
}

NoisyDataset inject_noise(const Dataset& dataset, const NoiseSpec& spec) {
  const int C = dataset.num_classes();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.label(i).state != LabelState::Provided)
      throw ValidationError("noise can only be injected into Provided labels (instance " +
                            std::to_string(dataset.instance(i).id) + ")");
    rows.push_back(i);
  }
  Rng rng = Rng(spec.seed).split("noise");
  auto labels = dataset.labels();
  std::vector<std::size_t> flip_rows;

  if (const auto* sym = std::get_if<SymmetricFlip>(&spec.kind)) {
    if (!(sym->rate >= 0.0 && sym->rate < 1.0)) throw ValidationError("flip rate must be in [0, 1)");
    const auto k = static_cast<std::size_t>(std::floor(sym->rate * static_cast<double>(rows.size()) + 1e-9));
    for (auto pos : rng.sample(rows.size(), k)) flip_rows.push_back(rows[pos]);
    for (auto r : flip_rows) {
      auto& l = labels[r];
      // Uniform over the other C-1 classes.
      auto offset = static_cast<int>(rng.below(static_cast<std::uint64_t>(C - 1))) + 1;
      l.cls = (l.cls + offset) % C;
    }
  } else {
    const auto& cc = std::get<ClassConditionalFlip>(spec.kind);
    if (C != 2) throw ValidationError("class-conditional noise is defined for binary problems only");
    if (!(cc.pi0 >= 0.0 && cc.pi0 < 1.0 && cc.pi1 >= 0.0 && cc.pi1 < 1.0))
      throw ValidationError("noise rates must be in [0, 1)");
    for (int y = 0; y < 2; ++y) {
      std::vector<std::size_t> stratum;
      for (auto r : rows)
        if (labels[r].cls == y) stratum.push_back(r);
      const double rate = y == 0 ? cc.pi0 : cc.pi1;
      const auto k = static_cast<std::size_t>(std::floor(rate * static_cast<double>(stratum.size()) + 1e-9));
      Rng sub = rng.split(static_cast<std::uint64_t>(y));
      for (auto pos : sub.sample(stratum.size(), k)) flip_rows.push_back(stratum[pos]);
    }
    for (auto r : flip_rows) labels[r].cls = 1 - labels[r].cls;
  }

  NoisyDataset out{dataset.with_labels(std::move(labels)), {}};
  for (auto r : flip_rows) out.flipped_ids.push_back(dataset.instance(r).id);
  std::sort(out.flipped_ids.begin(), out.flipped_ids.end());
  return out;
}

ClassConditionalFlip flip_rates_for_contamination(double pi0, double pi1, std::size_t n0, std::size_t n1) {
  // Flips f0 (true 0 -> 1) and f1 (true 1 -> 0) must satisfy
  //   f1 = pi0 * (n0 - f0 + f1),   f0 = pi1 * (n1 - f1 + f0).
  const double a = static_cast<double>(n0), b = static_cast<double>(n1);
  const double det = pi0 * pi1 - (1.0 - pi0) * (1.0 - pi1);
  if (std::abs(det) < 1e-12) throw ValidationError("contamination rates are not identifiable");
  const double f0 = (pi0 * pi1 * a - (1.0 - pi0) * pi1 * b) / det;
  const double f1 = (pi0 * pi1 * b - (1.0 - pi1) * pi0 * a) / det;
  if (f0 < 0.0 || f1 < 0.0 || f0 >= a || f1 >= b)
    throw ValidationError("contamination rates not reachable for these class sizes");
  return {f0 / a, f1 / b};
}

StreamPlan plan_stream(const Dataset& source, std::size_t window_size, std::size_t n_windows, std::uint64_t seed) {
  if (window_size == 0) throw ValidationError("window_size must be >= 1");
  if (window_size * n_windows > source.size())
    throw ValidationError("stream needs window_size * n_windows = " + std::to_string(window_size * n_windows) +
                          " instances but the pool has " + std::to_string(source.size()));
  Rng rng = Rng(seed).split("stream");
  const auto order = rng.permutation(source.size());
  StreamPlan plan{window_size, {}, seed};
  for (std::size_t w = 0; w < n_windows; ++w) {
    std::vector<InstanceId> ids;
    for (std::size_t k = 0; k < window_size; ++k) ids.push_back(source.instance(order[w * window_size + k]).id);
    plan.windows.push_back(std::move(ids));
  }
  return plan;
}

std::string StreamPlan::to_json() const {
  nlohmann::json j;
  j["window_size"] = window_size;
  j["seed"] = seed;
  j["windows"] = windows;
  return j.dump();
}

StreamPlan StreamPlan::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    StreamPlan p;
    p.window_size = j.at("window_size").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.windows = j.at("windows").get<std::vector<std::vector<InstanceId>>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed stream plan: ") + e.what());
  }
}

}  // namespace sumer
