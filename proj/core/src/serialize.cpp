#include <algorithm>

#include "sumer/error.hpp"
#include "sumer/spec_json.hpp"

namespace sumer {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("invalid value for '") + key + "'");
  }
}

json tree_to_json(const TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                     {"dist", n.dist}});
  return nodes;
}

TreeModel tree_from_json(const json& j) {
  TreeModel t;
  for (const auto& n : j)
    t.nodes.push_back(TreeNode{n.at("feature").get<int>(), n.at("threshold").get<double>(), n.at("left").get<int>(),
                               n.at("right").get<int>(), n.at("dist").get<std::vector<double>>()});
  if (t.nodes.empty()) throw ValidationError("tree without nodes");
  const auto count = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes)
    if (n.feature >= 0 && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count))
      throw ValidationError("tree node child index out of range");
  return t;
}

}  // namespace

void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view context) {
  if (!j.is_object()) throw ValidationError(std::string(context) + ": expected a table");
  for (const auto& [key, _] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ValidationError(std::string(context) + ": unknown key '" + key + "'");
}

json to_json(const SpreadSpec& s) {
  json j;
  if (const auto* rbf = std::get_if<RbfAffinity>(&s.affinity)) {
    j["affinity"] = "rbf";
    j["gamma"] = rbf->gamma;
  } else {
    j["affinity"] = "knn";
    j["k"] = std::get<KnnGraphAffinity>(s.affinity).k;
  }
  j["alpha"] = s.alpha;
  j["propagation"] = s.propagation;
  j["max_iter"] = s.max_iter;
  j["tolerance"] = s.tolerance;
  return j;
}

SpreadSpec spread_spec_from_json(const json& j) {
  reject_unknown_keys(j, {"kind", "affinity", "gamma", "k", "alpha", "propagation", "max_iter", "tolerance"},
                      "spreading");
  SpreadSpec s;
  const auto aff = get_or<std::string>(j, "affinity", "knn");
  if (aff == "rbf") {
    s.affinity = RbfAffinity{get_or<double>(j, "gamma", 0.0)};
  } else if (aff == "knn") {
    s.affinity = KnnGraphAffinity{get_or<std::size_t>(j, "k", 10)};
  } else {
    throw ValidationError("spreading: affinity must be 'rbf' or 'knn'");
  }
  s.alpha = get_or<double>(j, "alpha", 0.0);
  s.propagation = get_or<double>(j, "propagation", 0.99);
  s.max_iter = get_or<std::size_t>(j, "max_iter", 5000);
  s.tolerance = get_or<double>(j, "tolerance", 1e-6);
  s.validate();
  return s;
}

json to_json(const ClassifierSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, KnnSpec>) {
          return {{"kind", "knn"}, {"k", s.k}};
        } else if constexpr (std::is_same_v<T, TreeSpec>) {
          return {{"kind", "decision_tree"}, {"max_depth", s.max_depth}, {"min_leaf", s.min_leaf}};
        } else if constexpr (std::is_same_v<T, ForestSpec>) {
          return {{"kind", "random_forest"},   {"n_trees", s.n_trees},
                  {"max_depth", s.max_depth},  {"min_leaf", s.min_leaf},
                  {"features_per_split", s.features_per_split}, {"seed", s.seed}};
        } else {
          json j = to_json(s.spread);
          j["kind"] = "label_spreading";
          return j;
        }
      },
      spec.kind);
}

ClassifierSpec classifier_spec_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("learner: expected a table");
  const auto kind = get_or<std::string>(j, "kind", "");
  ClassifierSpec spec;
  if (kind == "knn") {
    reject_unknown_keys(j, {"kind", "k"}, "knn");
    spec.kind = KnnSpec{get_or<std::size_t>(j, "k", 5)};
  } else if (kind == "decision_tree") {
    reject_unknown_keys(j, {"kind", "max_depth", "min_leaf"}, "decision_tree");
    spec.kind = TreeSpec{get_or<std::size_t>(j, "max_depth", 32), get_or<std::size_t>(j, "min_leaf", 1)};
  } else if (kind == "random_forest") {
    reject_unknown_keys(j, {"kind", "n_trees", "max_depth", "min_leaf", "features_per_split", "seed"},
                        "random_forest");
    spec.kind = ForestSpec{get_or<std::size_t>(j, "n_trees", 50), get_or<std::size_t>(j, "max_depth", 32),
                           get_or<std::size_t>(j, "min_leaf", 1), get_or<std::size_t>(j, "features_per_split", 0),
                           get_or<std::uint64_t>(j, "seed", 0)};
  } else if (kind == "label_spreading") {
    spec.kind = SpreadLearnerSpec{spread_spec_from_json(j)};
  } else {
    throw ValidationError("learner: unknown kind '" + kind + "'");
  }
  spec.validate(0);
  return spec;
}

json to_json(const NoiseSpec& spec) {
  json j;
  if (const auto* s = std::get_if<SymmetricFlip>(&spec.kind)) {
    j["kind"] = "symmetric";
    j["rate"] = s->rate;
  } else {
    const auto& c = std::get<ClassConditionalFlip>(spec.kind);
    j["kind"] = "class_conditional";
    j["pi0"] = c.pi0;
    j["pi1"] = c.pi1;
  }
  j["seed"] = spec.seed;
  return j;
}

NoiseSpec noise_spec_from_json(const json& j) {
  reject_unknown_keys(j, {"kind", "rate", "pi0", "pi1", "seed"}, "noise");
  NoiseSpec s;
  const auto kind = get_or<std::string>(j, "kind", "symmetric");
  if (kind == "symmetric") {
    s.kind = SymmetricFlip{get_or<double>(j, "rate", 0.0)};
  } else if (kind == "class_conditional") {
    s.kind = ClassConditionalFlip{get_or<double>(j, "pi0", 0.0), get_or<double>(j, "pi1", 0.0)};
  } else {
    throw ValidationError("noise: kind must be 'symmetric' or 'class_conditional'");
  }
  s.seed = get_or<std::uint64_t>(j, "seed", 0);
  return s;
}

std::string model_to_json(const FittedModel& model) {
  json j;
  j["format"] = "sumer-model";
  j["version"] = kModelFormatVersion;
  j["spec"] = to_json(model.spec());
  j["dim"] = model.dim();
  j["num_classes"] = model.num_classes();
  j["params"] = std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          return {{"points", p.points}, {"labels", p.labels}, {"weights", p.weights}};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return {{"nodes", tree_to_json(p)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(tree_to_json(t));
          return {{"trees", trees}};
        } else {
          return {{"points", p.points},
                  {"soft", p.soft.data()},
                  {"classes", p.soft.cols()},
                  {"gamma", p.gamma},
                  {"k", p.k}};
        }
      },
      model.params());
  return j.dump();
}

FittedModel model_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    if (j.at("format").get<std::string>() != "sumer-model") throw ValidationError("not a sumer model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw ValidationError("unsupported model format version " + std::to_string(j.at("version").get<int>()));
    auto spec = classifier_spec_from_json(j.at("spec"));
    const auto dim = j.at("dim").get<std::size_t>();
    const auto C = j.at("num_classes").get<int>();
    const auto& p = j.at("params");
    FittedModel::Params params = std::visit(
        [&](const auto& s) -> FittedModel::Params {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, KnnSpec>) {
            return KnnModel{p.at("points").get<std::vector<std::vector<double>>>(), p.at("labels").get<std::vector<int>>(),
                            p.at("weights").get<std::vector<double>>()};
          } else if constexpr (std::is_same_v<T, TreeSpec>) {
            return tree_from_json(p.at("nodes"));
          } else if constexpr (std::is_same_v<T, ForestSpec>) {
            ForestModel f;
            for (const auto& t : p.at("trees")) f.trees.push_back(tree_from_json(t));
            return f;
          } else {
            SpreadModel m;
            m.points = p.at("points").get<std::vector<std::vector<double>>>();
            const auto flat = p.at("soft").get<std::vector<double>>();
            const auto classes = p.at("classes").get<std::size_t>();
            if (flat.size() != m.points.size() * classes) throw ValidationError("spread model size mismatch");
            m.soft = Matrix(m.points.size(), classes);
            for (std::size_t i = 0; i < m.points.size(); ++i)
              for (std::size_t c = 0; c < classes; ++c) m.soft(i, c) = flat[i * classes + c];
            m.gamma = p.at("gamma").get<double>();
            m.k = p.at("k").get<std::size_t>();
            return m;
          }
        },
        spec.kind);
    return FittedModel(std::move(spec), dim, C, std::move(params));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace sumer
