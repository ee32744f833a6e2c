#include <algorithm>
#include <cmath>
#include <numeric>

#include "sumer/error.hpp"
#include "sumer/learners.hpp"

namespace sumer {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<std::size_t> knn_excluding(std::span<const std::vector<double>> pts, std::size_t i, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j)
    if (j != i) d.emplace_back(sq_dist(pts[i], pts[j]), j);
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t t = 0; t < k; ++t) out[t] = d[t].second;
  return out;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

void SpreadSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("spreading alpha must be in [0, 1]");
  if (!(propagation > 0.0 && propagation <= 1.0)) throw ValidationError("spreading propagation must be in (0, 1]");
  if (!(tolerance > 0.0)) throw ValidationError("spreading tolerance must be > 0");
  if (max_iter == 0) throw ValidationError("spreading max_iter must be >= 1");
  if (const auto* k = std::get_if<KnnGraphAffinity>(&affinity); k && k->k < 1)
    throw ValidationError("knn graph k must be >= 1");
}

double median_gamma(std::span<const std::vector<double>> points) {
  if (points.size() < 2) return 1.0;
  std::vector<double> d2;
  d2.reserve(points.size() * (points.size() - 1) / 2);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) d2.push_back(sq_dist(points[i], points[j]));
  const auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  const double med = *mid;
  const double dim = static_cast<double>(points.front().size());
  return med > 0.0 ? 1.0 / (dim * med) : 1.0;
}

Affinity normalized_affinity(std::span<const std::vector<double>> pts, const SpreadSpec& spec) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  Affinity a;
  if (const auto* rbf = std::get_if<RbfAffinity>(&spec.affinity)) {
    a.gamma = rbf->gamma > 0.0 ? rbf->gamma : median_gamma(pts);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double w = std::exp(-a.gamma * sq_dist(pts[i], pts[j]));
        if (w > 0.0) {
          adj[i].emplace_back(j, w);
          adj[j].emplace_back(i, w);
        }
      }
  } else {
    const auto k = std::get<KnnGraphAffinity>(spec.affinity).k;
    std::vector<std::vector<std::size_t>> nb(n);
    for (std::size_t i = 0; i < n; ++i) nb[i] = knn_excluding(pts, i, k);
    // Symmetric union: i~j if either lists the other.
    for (std::size_t i = 0; i < n; ++i)
      for (auto j : nb[i]) {
        adj[i].emplace_back(j, 1.0);
        adj[j].emplace_back(i, 1.0);
      }
    for (auto& row : adj) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end(),
                            [](const auto& x, const auto& y) { return x.first == y.first; }),
                row.end());
    }
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());

  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, w] : adj[i]) deg[i] += w;
  a.row_start.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : adj[i]) {
      a.col.push_back(j);
      a.value.push_back(w / std::sqrt(deg[i] * deg[j]));
    }
    a.row_start[i + 1] = a.col.size();
  }
  return a;
}

SpreadResult label_spread(const Dataset& data, const SpreadSpec& spec) {
  spec.validate();
  const std::size_t n = data.size();
  if (n < 2) throw ValidationError("label spreading needs at least 2 instances");
  const auto C = static_cast<std::size_t>(data.num_classes());

  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  for (const auto& inst : data.instances()) pts.push_back(inst.features);

  Matrix y0(n, C);
  std::vector<double> a(n);
  std::size_t n_visible = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (auto v = data.label(i).visible()) {
      y0(i, static_cast<std::size_t>(*v)) = 1.0;
      a[i] = spec.alpha;
      ++n_visible;
    } else {
      a[i] = spec.propagation;
    }
  }
  if (n_visible == 0) throw ValidationError("label spreading needs at least one visible label");

  const Affinity S = normalized_affinity(pts, spec);

  SpreadResult r;
  r.gamma = S.gamma;
  Matrix f = y0;
  Matrix next(n, C);
  for (r.iterations = 0; r.iterations < spec.max_iter;) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < C; ++c) {
        double sf = 0.0;
        for (std::size_t e = S.row_start[i]; e < S.row_start[i + 1]; ++e) sf += S.value[e] * f(S.col[e], c);
        const double v = a[i] * sf + (1.0 - a[i]) * y0(i, c);
        change = std::max(change, std::abs(v - f(i, c)));
        next(i, c) = v;
      }
    }
    std::swap(f, next);
    ++r.iterations;
    r.last_change = change;
    if (change < spec.tolerance) {
      r.converged = true;
      break;
    }
  }

  // Components without a visible label cannot be decided.
  DisjointSets ds(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = S.row_start[i]; e < S.row_start[i + 1]; ++e) ds.unite(i, S.col[e]);
  std::vector<bool> comp_has_label(n, false);
  for (std::size_t i = 0; i < n; ++i)
    if (data.label(i).visible()) comp_has_label[ds.find(i)] = true;

  r.raw = f;
  r.soft = Matrix(n, C);
  r.labels.assign(n, -1);
  r.undecidable.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t c = 0; c < C; ++c) total += std::max(0.0, f(i, c));
    if (!comp_has_label[ds.find(i)] || !(total > 0.0)) {
      r.undecidable[i] = true;
      continue;
    }
    for (std::size_t c = 0; c < C; ++c) r.soft(i, c) = std::max(0.0, f(i, c)) / total;
    r.labels[i] = argmax(r.soft.row(i));
  }
  return r;
}

SpreadModel fit_spread_model(const SpreadSpec& spec, const Dataset& train) {
  auto res = label_spread(train, spec);
  SpreadModel m;
  for (const auto& inst : train.instances()) m.points.push_back(inst.features);
  m.soft = std::move(res.soft);
  if (std::holds_alternative<RbfAffinity>(spec.affinity))
    m.gamma = res.gamma;
  else
    m.k = std::get<KnnGraphAffinity>(spec.affinity).k;
  return m;
}

/// Unnormalized class scores of a new point from the training nodes' F:
/// kernel-weighted sum for RBF, plain sum over the k nearest nodes for KNN
/// graphs.
void spread_model_scores(const SpreadModel& m, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t C = out.size();
  if (m.k > 0) {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(m.points.size());
    for (std::size_t j = 0; j < m.points.size(); ++j) d.emplace_back(sq_dist(m.points[j], x), j);
    const std::size_t k = std::min(m.k, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t c = 0; c < C; ++c) out[c] += m.soft(d[t].second, c);
  } else {
    for (std::size_t j = 0; j < m.points.size(); ++j) {
      const double w = std::exp(-m.gamma * sq_dist(m.points[j], x));
      for (std::size_t c = 0; c < C; ++c) out[c] += w * m.soft(j, c);
    }
  }
}

}  // namespace sumer
