#include "sumer/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "sumer/csv.hpp"
#include "sumer/error.hpp"
#include "sumer/rng.hpp"
#include "sumer/spec_json.hpp"
#include "sumer/synthgen.hpp"

namespace sumer {

namespace {

double distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double mean_of_smallest(std::vector<double>& d, std::size_t k) {
  k = std::min(k, d.size());
  if (k == 0) return 0.0;
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  double s = 0.0;
  for (std::size_t t = 0; t < k; ++t) s += d[t];
  return s / static_cast<double>(k);
}

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Dataset empty_dataset(int num_classes) { return Dataset({}, {}, num_classes); }

std::vector<std::vector<double>> points_of(const Dataset& d) {
  std::vector<std::vector<double>> p;
  p.reserve(d.size());
  for (const auto& inst : d.instances()) p.push_back(inst.features);
  return p;
}

std::vector<int> visible_labels(const Dataset& d) {
  std::vector<int> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = *d.label(i).visible();
  return out;
}

Dataset as_unlabeled(const Dataset& d) {
  auto labs = d.labels();
  for (auto& l : labs) l = LabelRecord::unlabeled(l.truth);
  return d.with_labels(std::move(labs));
}

Dataset with_truth_provided(const Dataset& d) {
  auto labs = d.labels();
  for (auto& l : labs) {
    if (!l.truth) throw RuntimeFailure("oracle strategy needs ground truth on every stream row");
    l = LabelRecord::provided(*l.truth, l.truth);
  }
  return d.with_labels(std::move(labs));
}

ClassifierSpec seeded(ClassifierSpec spec, std::uint64_t run_seed, std::string_view tag) {
  if (auto* f = std::get_if<ForestSpec>(&spec.kind)) f->seed = Rng(run_seed).split(tag).split(f->seed).next();
  return spec;
}

const SpreadSpec& spread_of(const ClassifierSpec& spec) {
  const auto* s = std::get_if<SpreadLearnerSpec>(&spec.kind);
  if (!s) throw ValidationError("spread_correct remediation needs a label_spreading learner");
  return s->spread;
}

std::optional<double> precision_of(const Dataset& accepted) {
  std::size_t with_truth = 0, right = 0;
  for (const auto& l : accepted.labels()) {
    if (!l.truth) continue;
    ++with_truth;
    right += *l.truth == l.cls;
  }
  if (with_truth == 0) return std::nullopt;
  return static_cast<double>(right) / static_cast<double>(with_truth);
}

class StrategyRun {
 public:
  StrategyRun(Strategy strategy, const ExperimentConfig& cfg, const PreparedData& data, ClassifierSpec predictor,
              ClassifierSpec corrector, std::uint64_t cv_seed)
      : strategy_(strategy),
        cfg_(cfg),
        data_(data),
        predictor_(std::move(predictor)),
        corrector_(std::move(corrector)),
        cv_seed_(cv_seed),
        method_(cfg.resolved_remediation()),
        seed_(data.seed),
        selfset_(empty_dataset(data.seed.num_classes())),
        backlog_(empty_dataset(data.seed.num_classes())),
        truthful_(empty_dataset(data.seed.num_classes())) {}

  TraceRow initial() {
    TraceRow row = base_row(0);
    if (strategy_ == Strategy::StaticRemediated && method_ != RemediationMethod::None) {
      remediate(seed_, row);
    } else {
      fit_on(train_set(), {});
    }
    row.holdout_acc = score();
    row.train_size = seed_.size();
    return row;
  }

  TraceRow step(std::size_t r, const Dataset& window) {
    TraceRow row = base_row(r);
    switch (strategy_) {
      case Strategy::Static:
      case Strategy::StaticRemediated:
        row.rejected = window.size();
        row.holdout_acc = last_acc_;
        row.train_size = seed_.size();
        return row;
      case Strategy::Oracle:
        truthful_ = truthful_.concat(with_truth_provided(window));
        row.accepted = window.size();
        fit_on(train_set(), {});
        row.holdout_acc = score();
        row.train_size = seed_.size() + truthful_.size();
        return row;
      case Strategy::SUM:
      case Strategy::SUMER:
        break;
    }

    const Dataset candidates = backlog_.concat(window);
    const auto gated = gate(candidates, static_cast<int>(r));
    std::unordered_set<InstanceId> window_ids;
    for (const auto& inst : window.instances()) window_ids.insert(inst.id);
    std::vector<std::size_t> from_window;
    for (std::size_t i = 0; i < gated.accepted.size(); ++i)
      if (window_ids.contains(gated.accepted.instance(i).id)) from_window.push_back(i);
    row.accepted = from_window.size();
    row.rejected = window.size() - from_window.size();
    row.backlog_accepted = gated.accepted.size() - from_window.size();
    row.selflabel_precision = precision_of(gated.accepted.subset(from_window));

    selfset_ = selfset_.concat(gated.accepted);
    backlog_ = gated.rejected;
    row.backlog = backlog_.size();

    if (strategy_ == Strategy::SUMER && method_ != RemediationMethod::None) {
      remediate(gated.accepted, row);
    } else {
      fit_on(train_set(), {});
      row.train_size = seed_.size() + selfset_.size();
    }
    row.holdout_acc = score();
    return row;
  }

 private:
  TraceRow base_row(std::size_t r) const {
    TraceRow row;
    row.window = r;
    row.strategy = strategy_;
    row.seen = r * cfg_.stream.window_size;
    return row;
  }

  Dataset train_set() const { return seed_.concat(selfset_).concat(truthful_); }

  // Transductive learners also see the backlog as unlabeled graph nodes.
  void fit_on(const Dataset& labeled, std::vector<double> weights) {
    Dataset train = labeled;
    if (predictor_.transductive() && !backlog_.empty()) {
      train = labeled.concat(backlog_);
      if (!weights.empty()) weights.resize(train.size(), 1.0);
    }
    model_ = fit(predictor_, train, weights);
  }

  double score() {
    last_acc_ = accuracy(*model_, data_.holdout);
    return last_acc_;
  }

  SelfLabelResult gate(const Dataset& candidates, int round) const {
    const Dataset train = train_set();
    std::optional<CoverageIndex> coverage;
    if (cfg_.gate.coverage) {
      if (cfg_.gate.coverage->k > train.size())
        throw RuntimeFailure("coverage k exceeds the current training size");
      coverage.emplace(points_of(train), cfg_.gate.coverage->k, cfg_.gate.coverage->quantile);
    }
    const CoverageIndex* cov = coverage ? &*coverage : nullptr;
    if (!predictor_.transductive()) return self_label(*model_, candidates, cfg_.gate, round, cov);

    // Spread over the labeled rows plus every candidate, then read the
    // candidates' rows of F.
    const Dataset graph = train.concat(candidates);
    const auto m = fit(predictor_, graph);
    const Matrix* soft = m.training_soft_labels();
    Matrix probas(candidates.size(), soft->cols());
    for (std::size_t i = 0; i < candidates.size(); ++i)
      for (std::size_t c = 0; c < soft->cols(); ++c) probas(i, c) = (*soft)(train.size() + i, c);
    return self_label(probas, candidates, cfg_.gate, round, cov);
  }

  void remediate(const Dataset& fresh, TraceRow& row) {
    if (method_ == RemediationMethod::SpreadCorrect)
      remediate_spread(fresh, row);
    else
      remediate_prune(fresh, row);
  }

  // Pool = seed + every self-label. With anti-coupling the corrector only
  // learns from the seed and this round's fresh labels; older self-labels
  // are scored by it out-of-sample.
  void remediate_prune(const Dataset& fresh, TraceRow& row) {
    const bool static_only = strategy_ == Strategy::StaticRemediated;
    const Dataset pool = static_only ? seed_ : seed_.concat(selfset_);
    const auto given = visible_labels(pool);
    Matrix probas(pool.size(), static_cast<std::size_t>(pool.num_classes()));
    NoiseEstimate est;
    try {
      if (cfg_.remediation.anti_coupling && !static_only) {
        const Dataset cur = seed_.concat(fresh);
        const Matrix cur_p = cross_val_proba(corrector_, cur, cfg_.remediation.folds, cv_seed_);
        std::unordered_set<InstanceId> cur_ids;
        for (const auto& inst : cur.instances()) cur_ids.insert(inst.id);
        std::vector<std::size_t> prior_rows;
        for (std::size_t i = 0; i < pool.size(); ++i)
          if (!cur_ids.contains(pool.instance(i).id)) prior_rows.push_back(i);
        Matrix prior_p;
        if (!prior_rows.empty()) prior_p = predict_proba(fit(corrector_, cur), pool.subset(prior_rows));
        std::size_t next_prior = 0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          const auto id = pool.instance(i).id;
          for (std::size_t c = 0; c < probas.cols(); ++c)
            probas(i, c) = cur_ids.contains(id) ? cur_p(cur.index_of(id), c) : prior_p(next_prior, c);
          if (!cur_ids.contains(id)) ++next_prior;
        }
        est = estimate_noise_rates(cur_p, visible_labels(cur));
      } else {
        probas = cross_val_proba(corrector_, pool, cfg_.remediation.folds, cv_seed_);
        est = estimate_noise_rates(probas, given);
      }
    } catch (const ValidationError&) {
      // Too few rows or a missing class: nothing can be estimated this round.
      est = NoiseEstimate{};
      est.degenerate = true;
    }

    std::vector<int> corrected(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) corrected[i] = argmax(probas.row(i));
    row.estimate = est;
    row.coupling = coupling_report(given, corrected, est, cfg_.remediation.theta);

    if (est.degenerate) {
      fit_on(pool, {});
      row.train_size = pool.size();
      return;
    }
    const auto pr = rank_prune(pool, probas, est);
    std::vector<std::size_t> kept_rows;
    kept_rows.reserve(pr.kept.size());
    for (auto id : pr.kept) kept_rows.push_back(pool.index_of(id));
    fit_on(pool.subset(kept_rows), pr.weights);
    row.pruned = pr.removed.size();
    row.train_size = kept_rows.size();
  }

  // Spreading with movable labels over the pool; corrections persist.
  void remediate_spread(const Dataset& fresh, TraceRow& row) {
    const bool static_only = strategy_ == Strategy::StaticRemediated;
    SpreadSpec spec = spread_of(predictor_);
    spec.alpha = cfg_.remediation.alpha;

    Dataset prior = empty_dataset(seed_.num_classes());
    Dataset fresh_set = fresh;
    if (!static_only && cfg_.remediation.anti_coupling) {
      std::unordered_set<InstanceId> fresh_ids;
      for (const auto& inst : fresh.instances()) fresh_ids.insert(inst.id);
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < selfset_.size(); ++i)
        if (!fresh_ids.contains(selfset_.instance(i).id)) rows.push_back(i);
      prior = as_unlabeled(selfset_.subset(rows));
    } else if (!static_only) {
      fresh_set = selfset_;
    } else {
      fresh_set = empty_dataset(seed_.num_classes());
    }
    Dataset graph = seed_.concat(fresh_set).concat(prior);
    if (!static_only) graph = graph.concat(backlog_);
    const auto corr = spread_correct(graph, spec);

    // Apply corrections to the seed and self-label sets.
    std::vector<int> new_label(graph.size());
    for (std::size_t i = 0; i < graph.size(); ++i) new_label[i] = corr.labels[i];
    const auto relabel = [&](const Dataset& d, std::vector<int>& given, std::vector<int>& fixed) {
      auto labs = d.labels();
      for (std::size_t i = 0; i < d.size(); ++i) {
        const int was = labs[i].cls;
        const int now = new_label[graph.index_of(d.instance(i).id)];
        given.push_back(was);
        fixed.push_back(now < 0 ? was : now);
        labs[i].cls = fixed.back();
      }
      return d.with_labels(std::move(labs));
    };
    std::vector<int> given, fixed;
    seed_ = relabel(seed_, given, fixed);
    if (!static_only) selfset_ = relabel(selfset_, given, fixed);

    NoiseEstimate est;
    est.method = "spread_correct";
    std::size_t n[2] = {0, 0}, moved[2] = {0, 0};
    for (std::size_t i = 0; i < given.size(); ++i) {
      if (given[i] > 1) continue;
      ++n[given[i]];
      moved[given[i]] += given[i] != fixed[i];
      row.corrected += given[i] != fixed[i];
    }
    est.pi0 = n[0] ? static_cast<double>(moved[0]) / static_cast<double>(n[0]) : 0.0;
    est.pi1 = n[1] ? static_cast<double>(moved[1]) / static_cast<double>(n[1]) : 0.0;
    row.estimate = est;
    row.coupling = coupling_report(given, fixed, est, cfg_.remediation.theta);

    fit_on(train_set(), {});
    row.train_size = seed_.size() + selfset_.size();
  }

  Strategy strategy_;
  const ExperimentConfig& cfg_;
  const PreparedData& data_;
  ClassifierSpec predictor_;
  ClassifierSpec corrector_;
  std::uint64_t cv_seed_;
  RemediationMethod method_;

  Dataset seed_;
  Dataset selfset_;
  Dataset backlog_;
  Dataset truthful_;
  std::optional<FittedModel> model_;
  double last_acc_ = 0.0;
};

Dataset load_source(const ExperimentConfig& cfg) {
  const std::uint64_t data_seed = Rng(cfg.seed).split("data").next();
  return std::visit(
      [&](const auto& src) -> Dataset {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, MoonsSource>) {
          return gen_two_moons(MoonsSpec{src.n, src.noise_std, data_seed});
        } else if constexpr (std::is_same_v<T, GaussiansSource>) {
          return gen_two_gaussians(src.spec, data_seed);
        } else {
          CsvReadOptions opts;
          opts.label_column = src.label_column;
          return read_dataset_csv(std::filesystem::path(src.path), opts);
        }
      },
      cfg.data);
}

Dataset apply_seed_noise(const ExperimentConfig& cfg, const Dataset& seed, std::vector<InstanceId>* flipped) {
  if (!cfg.seed_noise) return seed;
  NoiseSpec spec = *cfg.seed_noise;
  spec.seed = Rng(cfg.seed).split("seed_noise").split(spec.seed).next();
  auto noisy = inject_noise(seed, spec);
  if (flipped) *flipped = std::move(noisy.flipped_ids);
  return std::move(noisy.noisy);
}

}  // namespace

// ---------------------------------------------------------------------------

CoverageIndex::CoverageIndex(std::vector<std::vector<double>> training, std::size_t k, double q)
    : points_(std::move(training)), k_(k) {
  if (points_.empty()) throw ValidationError("coverage needs a non-empty training set");
  if (k_ < 1 || k_ > points_.size()) throw ValidationError("coverage k must be in [1, training size]");
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("coverage quantile must be in (0, 1)");
  if (points_.size() < 2) return;
  std::vector<double> loo(points_.size());
  std::vector<double> d;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    d.clear();
    for (std::size_t j = 0; j < points_.size(); ++j)
      if (j != i) d.push_back(distance(points_[i], points_[j]));
    loo[i] = mean_of_smallest(d, k_);
  }
  reference_ = quantile(std::move(loo), q);
}

double CoverageIndex::mean_knn_distance(std::span<const double> x) const {
  if (x.size() != points_.front().size()) throw ValidationError("coverage: dimension mismatch");
  std::vector<double> d;
  d.reserve(points_.size());
  for (const auto& p : points_) d.push_back(distance(p, x));
  return mean_of_smallest(d, k_);
}

double CoverageIndex::score(std::span<const double> x) const {
  const double dk = mean_knn_distance(x);
  if (!(reference_ > 0.0)) return dk == 0.0 ? 1.0 : 0.0;
  return std::exp(-std::numbers::ln2 * dk / reference_);
}

double coverage_confidence(std::span<const double> x, std::span<const std::vector<double>> training, std::size_t k,
                           double q) {
  return CoverageIndex({training.begin(), training.end()}, k, q).score(x);
}

SelfLabelResult self_label(const Matrix& probas, const Dataset& window, const GateSpec& gate, int round,
                           const CoverageIndex* coverage) {
  gate.validate();
  if (round < 1) throw ValidationError("self-label round must be >= 1");
  if (probas.rows() != window.size()) throw ValidationError("probabilities and window differ in length");
  std::vector<std::size_t> acc_rows, rej_rows;
  std::vector<LabelRecord> acc_labels;
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (window.label(i).state != LabelState::Unlabeled) throw ValidationError("self-label window must be unlabeled");
    const auto row = probas.row(i);
    const int cls = argmax(row);
    double conf = row[static_cast<std::size_t>(cls)];
    if (coverage) conf *= coverage->score(window.features(i));
    conf = std::clamp(conf, 0.0, 1.0);
    if (conf >= gate.tau) {
      acc_rows.push_back(i);
      acc_labels.push_back(LabelRecord::self_labeled(cls, conf, round, window.label(i).truth));
    } else {
      rej_rows.push_back(i);
    }
  }
  return {window.subset(acc_rows).with_labels(std::move(acc_labels)), window.subset(rej_rows)};
}

SelfLabelResult self_label(const FittedModel& model, const Dataset& window, const GateSpec& gate, int round,
                           const CoverageIndex* coverage) {
  if (window.empty()) return {window, window};
  return self_label(predict_proba(model, window), window, gate, round, coverage);
}

const TraceRow& MetricsTrace::final_row(Strategy strategy) const {
  const TraceRow* out = nullptr;
  for (const auto& r : rows)
    if (r.strategy == strategy && (!out || r.window >= out->window)) out = &r;
  if (!out) throw ValidationError("trace has no rows for strategy " + std::string(to_string(strategy)));
  return *out;
}

Split select_seed_near_anchors(const Split& split, const std::vector<std::vector<double>>& anchors) {
  const int C = split.labeled.num_classes();
  if (anchors.size() != static_cast<std::size_t>(C)) throw ValidationError("need one anchor per class");
  const Dataset all = as_unlabeled(split.labeled).concat(split.unlabeled);
  for (const auto& a : anchors)
    if (a.size() != all.dim()) throw ValidationError("anchor dimension does not match the data");

  std::vector<std::size_t> want(static_cast<std::size_t>(C), 0);
  for (const auto& l : split.labeled.labels()) ++want.at(static_cast<std::size_t>(*l.truth));
  std::vector<bool> chosen(all.size(), false);
  for (int c = 0; c < C; ++c) {
    std::vector<std::tuple<double, InstanceId, std::size_t>> cand;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (all.label(i).truth == c)
        cand.emplace_back(distance(all.features(i), anchors[static_cast<std::size_t>(c)]), all.instance(i).id, i);
    const auto k = std::min(want[static_cast<std::size_t>(c)], cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t t = 0; t < k; ++t) chosen[std::get<2>(cand[t])] = true;
  }
  std::vector<std::size_t> lab_rows, rest_rows;
  for (std::size_t i = 0; i < all.size(); ++i) (chosen[i] ? lab_rows : rest_rows).push_back(i);
  Split out;
  Dataset lab = all.subset(lab_rows);
  auto labs = lab.labels();
  for (auto& l : labs) l = LabelRecord::provided(*l.truth, l.truth);
  out.labeled = lab.with_labels(std::move(labs));
  out.unlabeled = all.subset(rest_rows);
  out.holdout = split.holdout;
  return out;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset source = load_source(cfg);
  SplitSpec spec{cfg.split.labeled_fraction, cfg.split.holdout_fraction, Rng(cfg.seed).split("split").next(),
                 cfg.split.stratified};
  Split split = split_dataset(source, spec);
  if (cfg.split.selection == SeedSelection::NearestToAnchor) split = select_seed_near_anchors(split, cfg.split.anchors);
  PreparedData out;
  out.seed = apply_seed_noise(cfg, split.labeled, &out.flipped_ids);
  out.unlabeled = std::move(split.unlabeled);
  out.holdout = std::move(split.holdout);
  return out;
}

MetricsTrace run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, prepare_data(cfg)); }

MetricsTrace run_experiment(const ExperimentConfig& cfg, const PreparedData& data) {
  cfg.validate();
  if (cfg.mode != RunMode::Stream) throw ValidationError("run_experiment expects mode = \"stream\"");
  cfg.learner.validate(data.seed.dim());
  const auto method = cfg.resolved_remediation();
  if (method == RemediationMethod::SpreadCorrect) (void)spread_of(cfg.learner);
  if (method == RemediationMethod::RankPrune && data.seed.num_classes() != 2) {
    for (auto s : cfg.strategies)
      if (s == Strategy::SUMER || s == Strategy::StaticRemediated)
        throw ValidationError("rank pruning supports binary problems only");
  }

  // The plan is made before any training so size problems surface first.
  const auto plan = plan_stream(data.unlabeled, cfg.stream.window_size, cfg.stream.n_windows,
                                Rng(cfg.seed).split("stream").next());
  std::vector<Dataset> windows;
  for (const auto& ids : plan.windows) {
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (auto id : ids) rows.push_back(data.unlabeled.index_of(id));
    windows.push_back(data.unlabeled.subset(rows));
  }

  const auto predictor = seeded(cfg.learner, cfg.seed, "learner");
  const auto corrector = seeded(cfg.remediation.corrector, cfg.seed, "corrector");
  const auto cv_seed = Rng(cfg.seed).split("cv").next();

  std::vector<std::vector<TraceRow>> per_strategy;
  for (auto s : cfg.strategies) {
    StrategyRun run(s, cfg, data, predictor, corrector, cv_seed);
    std::vector<TraceRow> rows;
    rows.push_back(run.initial());
    for (std::size_t r = 0; r < windows.size(); ++r) rows.push_back(run.step(r + 1, windows[r]));
    per_strategy.push_back(std::move(rows));
  }

  MetricsTrace trace;
  trace.config = to_json(cfg);
  trace.seed = cfg.seed;
  for (std::size_t r = 0; r <= windows.size(); ++r)
    for (const auto& rows : per_strategy) trace.rows.push_back(rows[r]);
  return trace;
}

SingleRoundResult single_round_sum(const Dataset& data, const ClassifierSpec& spec) {
  SingleRoundResult out;
  auto labs = data.labels();
  if (const auto* s = std::get_if<SpreadLearnerSpec>(&spec.kind)) {
    const auto res = label_spread(data, s->spread);
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (labs[i].state != LabelState::Unlabeled || res.labels[i] < 0) continue;
      labs[i] = LabelRecord::self_labeled(res.labels[i], res.soft(i, static_cast<std::size_t>(res.labels[i])), 1,
                                          labs[i].truth);
      ++out.self_labeled;
    }
  } else {
    const auto model = fit(spec, data);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (labs[i].state == LabelState::Unlabeled) rows.push_back(i);
    if (!rows.empty()) {
      const auto res = self_label(model, data.subset(rows), GateSpec{0.0, std::nullopt}, 1);
      for (std::size_t t = 0; t < rows.size(); ++t) labs[rows[t]] = res.accepted.label(t);
      out.self_labeled = rows.size();
    }
  }
  out.labeled = data.with_labels(std::move(labs));
  std::size_t with_truth = 0, right = 0;
  for (const auto& l : out.labeled.labels()) {
    if (!l.truth) continue;
    ++with_truth;
    right += l.visible() == l.truth;
  }
  out.accuracy = with_truth ? static_cast<double>(right) / static_cast<double>(with_truth) : 0.0;
  return out;
}

SingleRoundReport run_single_round(const ExperimentConfig& cfg) { return run_single_round(cfg, prepare_data(cfg)); }

SingleRoundReport run_single_round(const ExperimentConfig& cfg, const PreparedData& data) {
  cfg.validate();
  cfg.learner.validate(data.seed.dim());
  const Dataset all = data.seed.concat(data.unlabeled).concat(data.holdout);
  const auto res = single_round_sum(all, seeded(cfg.learner, cfg.seed, "learner"));
  SingleRoundReport out;
  out.labeled = data.seed.size();
  out.self_labeled = res.self_labeled;
  out.overall_acc = res.accuracy;
  const std::size_t first = data.seed.size() + data.unlabeled.size();
  std::size_t right = 0;
  for (std::size_t i = first; i < all.size(); ++i) {
    const auto& l = res.labeled.label(i);
    right += l.truth && l.visible() == l.truth;
  }
  out.holdout_acc = data.holdout.empty() ? 0.0 : static_cast<double>(right) / static_cast<double>(data.holdout.size());
  return out;
}

std::vector<SweepRow> run_fraction_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.mode != RunMode::FractionSweep) throw ValidationError("run_fraction_sweep expects mode = \"fraction_sweep\"");
  const Dataset source = load_source(cfg);
  cfg.learner.validate(source.dim());
  const auto learner = seeded(cfg.learner, cfg.seed, "learner");
  const double h = cfg.split.holdout_fraction;

  std::vector<SweepRow> out;
  for (double f : cfg.fractions) {
    SplitSpec spec{f * (1.0 - h), h, Rng(cfg.seed).split("split").next(), cfg.split.stratified};
    const Split split = split_dataset(source, spec);
    const Dataset seed = apply_seed_noise(cfg, split.labeled, nullptr);
    for (auto s : cfg.strategies) {
      double acc = 0.0;
      if (s == Strategy::Static) {
        acc = accuracy(fit(learner, seed), split.holdout);
      } else if (s == Strategy::Oracle) {
        acc = accuracy(fit(learner, seed.concat(with_truth_provided(split.unlabeled))), split.holdout);
      } else {
        Dataset accepted, rejected;
        if (learner.transductive()) {
          const auto m = fit(learner, seed.concat(split.unlabeled));
          const Matrix* soft = m.training_soft_labels();
          Matrix p(split.unlabeled.size(), soft->cols());
          for (std::size_t i = 0; i < p.rows(); ++i)
            for (std::size_t c = 0; c < p.cols(); ++c) p(i, c) = (*soft)(seed.size() + i, c);
          auto g = self_label(p, split.unlabeled, cfg.gate, 1);
          accepted = std::move(g.accepted);
          rejected = std::move(g.rejected);
        } else {
          auto g = self_label(fit(learner, seed), split.unlabeled, cfg.gate, 1);
          accepted = std::move(g.accepted);
        }
        Dataset train = seed.concat(accepted);
        if (learner.transductive()) train = train.concat(rejected);
        acc = accuracy(fit(learner, train), split.holdout);
      }
      out.push_back({f, s, acc});
    }
  }
  return out;
}

}  // namespace sumer
