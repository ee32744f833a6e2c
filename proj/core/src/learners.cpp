#include <algorithm>
#include <cmath>
#include <numeric>

#include "sumer/error.hpp"
#include "sumer/learners.hpp"
#include "sumer/rng.hpp"

namespace sumer {

// Defined in spreading.cpp.
SpreadModel fit_spread_model(const SpreadSpec& spec, const Dataset& train);
void spread_model_scores(const SpreadModel& m, std::span<const double> x, std::span<double> out);

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sq_dist(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Indices of the k nearest points; ties broken toward the lower index.
std::vector<std::size_t> nearest(std::span<const std::vector<double>> points, std::span<const double> x,
                                 std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) d.emplace_back(sq_dist(points[j], x), j);
  k = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

// ------------------------------------------------------------------ KNN

void knn_scores(const KnnModel& m, std::size_t k, std::span<const double> x, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto nn = nearest(m.points, x, k);
  double total = 0.0;
  for (auto j : nn) {
    out[static_cast<std::size_t>(m.labels[j])] += m.weights[j];
    total += m.weights[j];
  }
  if (total <= 0.0) {  // all neighbours weightless: plain vote
    for (auto j : nn) out[static_cast<std::size_t>(m.labels[j])] += 1.0;
  }
}

// ------------------------------------------------------------------ trees

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<int>& y;
  std::size_t num_classes;
  std::size_t max_depth;
  std::size_t min_leaf;
  std::size_t features_per_split;  // 0 = all
  Rng* rng;                        // feature subsampling, may be null
  TreeModel tree;

  struct Sample {
    std::size_t row;
    double w;
  };

  std::vector<double> distribution(const std::vector<Sample>& s) const {
    std::vector<double> dist(num_classes, 0.0);
    double total = 0.0;
    for (const auto& e : s) {
      dist[static_cast<std::size_t>(y[e.row])] += e.w;
      total += e.w;
    }
    if (total <= 0.0) {
      for (const auto& e : s) dist[static_cast<std::size_t>(y[e.row])] += 1.0;
      total = static_cast<double>(s.size());
    }
    for (auto& v : dist) v /= total;
    return dist;
  }

  int build(std::vector<Sample> samples, std::size_t depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, distribution(samples)});

    std::vector<double> class_w(num_classes, 0.0);
    double total = 0.0;
    for (const auto& s : samples) {
      class_w[static_cast<std::size_t>(y[s.row])] += s.w;
      total += s.w;
    }
    double sum_sq = 0.0;
    for (double v : class_w) sum_sq += v * v;
    const double parent_impurity = total > 0.0 ? total - sum_sq / total : 0.0;
    if (depth >= max_depth || samples.size() < 2 * min_leaf || total <= 0.0 || parent_impurity <= 1e-12)
      return id;

    const std::size_t d = x.front().size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (features_per_split > 0 && features_per_split < d && rng != nullptr) {
      auto pick = rng->sample(d, features_per_split);
      std::sort(pick.begin(), pick.end());
      features = std::move(pick);
    }

    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<Sample> sorted = samples;
    std::vector<double> left_w(num_classes);
    for (auto f : features) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](const Sample& a, const Sample& b) { return x[a.row][f] < x[b.row][f]; });
      std::fill(left_w.begin(), left_w.end(), 0.0);
      double wl = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const auto c = static_cast<std::size_t>(y[sorted[i].row]);
        left_w[c] += sorted[i].w;
        wl += sorted[i].w;
        const double xi = x[sorted[i].row][f];
        const double xn = x[sorted[i + 1].row][f];
        if (!(xi < xn)) continue;
        if (i + 1 < min_leaf || sorted.size() - (i + 1) < min_leaf) continue;
        const double wr = total - wl;
        double sl = 0.0, sr = 0.0;
        for (std::size_t k = 0; k < num_classes; ++k) {
          sl += left_w[k] * left_w[k];
          const double r = class_w[k] - left_w[k];
          sr += r * r;
        }
        const double child = (wl > 0.0 ? wl - sl / wl : 0.0) + (wr > 0.0 ? wr - sr / wr : 0.0);
        const double gain = parent_impurity - child;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (xi + xn);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<Sample> left, right;
    for (const auto& s : samples)
      (x[s.row][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(s);
    samples.clear();
    samples.shrink_to_fit();
    tree.nodes[static_cast<std::size_t>(id)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    const int l = build(std::move(left), depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    const int r = build(std::move(right), depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

struct Training {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  std::vector<double> w;
};

Training visible_rows(const Dataset& train, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != train.size())
    throw ValidationError("weights length does not match the training set");
  Training t;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto v = train.label(i).visible();
    if (!v) continue;
    const double w = weights.empty() ? train.label(i).weight : weights[i];
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("weights must be non-negative and finite");
    t.x.push_back(train.instance(i).features);
    t.y.push_back(*v);
    t.w.push_back(w);
  }
  if (t.x.empty()) throw ValidationError("training set has no visible labels");
  return t;
}

}  // namespace

std::span<const double> TreeModel::leaf(std::span<const double> x) const {
  std::size_t n = 0;
  while (nodes[n].feature >= 0)
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[n].feature)] <= nodes[n].threshold ? nodes[n].left
                                                                                                      : nodes[n].right);
  return nodes[n].dist;
}

std::string ClassifierSpec::name() const {
  return std::visit(overloaded{[](const KnnSpec&) { return std::string("knn"); },
                               [](const TreeSpec&) { return std::string("decision_tree"); },
                               [](const ForestSpec&) { return std::string("random_forest"); },
                               [](const SpreadLearnerSpec&) { return std::string("label_spreading"); }},
                    kind);
}

void ClassifierSpec::validate(std::size_t dim) const {
  std::visit(overloaded{[](const KnnSpec& s) {
                          if (s.k < 1) throw ValidationError("knn: k must be >= 1");
                        },
                        [](const TreeSpec& s) {
                          if (s.min_leaf < 1) throw ValidationError("decision_tree: min_leaf must be >= 1");
                        },
                        [dim](const ForestSpec& s) {
                          if (s.n_trees < 1) throw ValidationError("random_forest: n_trees must be >= 1");
                          if (s.min_leaf < 1) throw ValidationError("random_forest: min_leaf must be >= 1");
                          if (dim > 0 && s.features_per_split > dim)
                            throw ValidationError("random_forest: features_per_split exceeds dimension");
                        },
                        [](const SpreadLearnerSpec& s) { s.spread.validate(); }},
             kind);
}

const Matrix* FittedModel::training_soft_labels() const noexcept {
  if (const auto* s = std::get_if<SpreadModel>(&params_)) return &s->soft;
  return nullptr;
}

FittedModel fit(const ClassifierSpec& spec, const Dataset& train, std::span<const double> weights) {
  if (train.empty()) throw ValidationError("cannot fit on an empty dataset");
  const std::size_t d = train.dim();
  spec.validate(d);
  const int C = train.num_classes();
  const auto C_sz = static_cast<std::size_t>(C);

  if (const auto* sl = std::get_if<SpreadLearnerSpec>(&spec.kind))
    return FittedModel(spec, d, C, fit_spread_model(sl->spread, train));

  auto t = visible_rows(train, weights);
  return std::visit(
      overloaded{
          [&](const KnnSpec&) {
            return FittedModel(spec, d, C, KnnModel{std::move(t.x), std::move(t.y), std::move(t.w)});
          },
          [&](const TreeSpec& s) {
            TreeBuilder b{t.x, t.y, C_sz, s.max_depth, s.min_leaf, 0, nullptr, {}};
            std::vector<TreeBuilder::Sample> samples;
            for (std::size_t i = 0; i < t.x.size(); ++i) samples.push_back({i, t.w[i]});
            b.build(std::move(samples), 0);
            return FittedModel(spec, d, C, std::move(b.tree));
          },
          [&](const ForestSpec& s) {
            const std::size_t fps =
                s.features_per_split > 0
                    ? s.features_per_split
                    : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
            ForestModel forest;
            const Rng root = Rng(s.seed).split("forest");
            const std::size_t n = t.x.size();
            for (std::size_t tree_idx = 0; tree_idx < s.n_trees; ++tree_idx) {
              Rng rng = root.split(static_cast<std::uint64_t>(tree_idx));
              std::vector<std::size_t> mult(n, 0);
              for (std::size_t k = 0; k < n; ++k) ++mult[static_cast<std::size_t>(rng.below(n))];
              std::vector<TreeBuilder::Sample> samples;
              for (std::size_t i = 0; i < n; ++i)
                if (mult[i] > 0) samples.push_back({i, t.w[i] * static_cast<double>(mult[i])});
              TreeBuilder b{t.x, t.y, C_sz, s.max_depth, s.min_leaf, fps, &rng, {}};
              b.build(std::move(samples), 0);
              forest.trees.push_back(std::move(b.tree));
            }
            return FittedModel(spec, d, C, std::move(forest));
          },
          [&](const SpreadLearnerSpec&) -> FittedModel { throw RuntimeFailure("unreachable"); }},
      spec.kind);
}

Matrix predict_proba(const FittedModel& model, std::span<const std::vector<double>> points) {
  const auto C = static_cast<std::size_t>(model.num_classes());
  Matrix out(points.size(), C);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& x = points[i];
    if (x.size() != model.dim())
      throw ValidationError("dimension mismatch: model expects " + std::to_string(model.dim()) + ", got " +
                            std::to_string(x.size()));
    auto row = out.row(i);
    std::visit(overloaded{[&](const KnnModel& m) {
                            knn_scores(m, std::get<KnnSpec>(model.spec().kind).k, x, row);
                          },
                          [&](const TreeModel& m) {
                            const auto leaf = m.leaf(x);
                            std::copy(leaf.begin(), leaf.end(), row.begin());
                          },
                          [&](const ForestModel& m) {
                            for (const auto& tree : m.trees) {
                              const auto leaf = tree.leaf(x);
                              for (std::size_t c = 0; c < C; ++c) row[c] += leaf[c];
                            }
                          },
                          [&](const SpreadModel& m) { spread_model_scores(m, x, row); }},
               model.params());
    double total = 0.0;
    for (double v : row) total += v;
    if (total > 0.0) {
      for (auto& v : row) v /= total;
    } else {
      for (auto& v : row) v = 1.0 / static_cast<double>(C);
    }
  }
  return out;
}

Matrix predict_proba(const FittedModel& model, const Dataset& data) {
  std::vector<std::vector<double>> pts;
  pts.reserve(data.size());
  for (const auto& inst : data.instances()) pts.push_back(inst.features);
  return predict_proba(model, pts);
}

std::vector<int> predict(const FittedModel& model, const Dataset& data) {
  const auto C = static_cast<std::size_t>(model.num_classes());
  std::vector<int> out;
  out.reserve(data.size());
  std::vector<double> votes(C);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.features(i);
    if (x.size() != model.dim()) throw ValidationError("dimension mismatch");
    std::fill(votes.begin(), votes.end(), 0.0);
    std::visit(overloaded{[&](const KnnModel& m) {
                            knn_scores(m, std::get<KnnSpec>(model.spec().kind).k, x, votes);
                          },
                          [&](const TreeModel& m) {
                            const auto leaf = m.leaf(x);
                            std::copy(leaf.begin(), leaf.end(), votes.begin());
                          },
                          [&](const ForestModel& m) {
                            for (const auto& tree : m.trees) {
                              const auto leaf = tree.leaf(x);
                              for (std::size_t c = 0; c < C; ++c) votes[c] += leaf[c];
                            }
                          },
                          [&](const SpreadModel& m) { spread_model_scores(m, x, votes); }},
               model.params());
    out.push_back(argmax(votes));
  }
  return out;
}

double accuracy(const FittedModel& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  const auto pred = predict(model, data);
  std::size_t hit = 0, scored = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& t = data.label(i).truth;
    if (!t) continue;
    ++scored;
    if (pred[i] == *t) ++hit;
  }
  if (scored == 0) throw ValidationError("accuracy needs ground truth");
  return static_cast<double>(hit) / static_cast<double>(scored);
}

}  // namespace sumer
