// sumer: generate data, ingest CSVs, run experiments and compare traces.
//
// Exit codes: 0 success, 1 runtime failure, 2 validation failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "sumer/config.hpp"
#include "sumer/csv.hpp"
#include "sumer/engine.hpp"
#include "sumer/error.hpp"
#include "sumer/synthgen.hpp"
#include "sumer/trace_io.hpp"

namespace fs = std::filesystem;
using namespace sumer;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kValidation = 2;

// Rethrows with the stage name prefixed, keeping the error category.
template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const RuntimeFailure& e) {
    throw RuntimeFailure(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw RuntimeFailure(std::string(name) + ": " + e.what());
  }
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": invalid number '" + cell + "'");
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << text;
  if (!out) throw RuntimeFailure("write failed for " + path.string());
}

void emit_dataset(const Dataset& d, const std::string& out_path) {
  std::ostringstream csv;
  write_dataset_csv(csv, d);
  if (out_path.empty() || out_path == "-") {
    std::cout << csv.str();
    std::cerr << format_summary(class_summary(d));
  } else {
    stage("output", [&] { write_text(out_path, csv.str()); });
    std::cout << format_summary(class_summary(d));
  }
}

struct GenOptions {
  std::size_t n = 1000;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
  std::vector<std::string> means{"-2,0", "2,0"};
  std::vector<std::string> covs{"1,0,0,1", "1,0,0,1"};
  std::vector<std::size_t> counts{500, 500};
  std::string out;
};

int cmd_gen_moons(const GenOptions& o) {
  const auto d = stage("generate", [&] { return gen_two_moons(MoonsSpec{o.n, o.noise_std, o.seed}); });
  emit_dataset(d, o.out);
  return kOk;
}

int cmd_gen_gaussians(const GenOptions& o) {
  const auto d = stage("generate", [&] {
    GaussianSpec spec;
    if (o.means.size() != o.covs.size() || o.means.size() != o.counts.size())
      throw ValidationError("--mean, --cov and --count need one entry per class");
    for (std::size_t c = 0; c < o.means.size(); ++c) {
      auto mean = parse_list(o.means[c], "--mean");
      const auto flat = parse_list(o.covs[c], "--cov");
      const auto dim = mean.size();
      if (flat.size() != dim * dim) throw ValidationError("--cov needs d*d values in row-major order");
      std::vector<std::vector<double>> cov(dim, std::vector<double>(dim));
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) cov[i][j] = flat[i * dim + j];
      spec.means.push_back(std::move(mean));
      spec.covariances.push_back(std::move(cov));
    }
    spec.counts = o.counts;
    return gen_two_gaussians(spec, o.seed);
  });
  emit_dataset(d, o.out);
  return kOk;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::string out_dir) {
  auto cfg = stage("config", [&] { return load_config(config_path); });
  if (seed) cfg.seed = *seed;
  if (out_dir.empty()) out_dir = cfg.output_dir.empty() ? "out/" + cfg.name : cfg.output_dir;
  const fs::path dir(out_dir);

  if (cfg.mode == RunMode::SingleRound) {
    const auto r = stage("experiment", [&] { return run_single_round(cfg); });
    nlohmann::json j = {{"format", "sumer-single-round"}, {"version", 1}, {"seed", cfg.seed}, {"config", to_json(cfg)},
                        {"labeled", r.labeled}, {"self_labeled", r.self_labeled}, {"holdout_acc", r.holdout_acc},
                        {"overall_acc", r.overall_acc}};
    stage("output", [&] {
      write_text(dir / "single_round.json", j.dump(2) + "\n");
      return 0;
    });
    std::cout << "labeled=" << r.labeled << " self_labeled=" << r.self_labeled
              << " holdout_acc=" << format_double(r.holdout_acc) << '\n';
    return kOk;
  }

  if (cfg.mode == RunMode::FractionSweep) {
    const auto rows = stage("experiment", [&] { return run_fraction_sweep(cfg); });
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    nlohmann::json j = {{"format", "sumer-sweep"}, {"version", 1}, {"seed", cfg.seed}, {"config", to_json(cfg)}};
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
      j["rows"].push_back({{"fraction", r.fraction}, {"strategy", std::string(to_string(r.strategy))},
                           {"holdout_acc", r.holdout_acc}});
    stage("output", [&] {
      write_text(dir / "sweep.csv", csv.str());
      write_text(dir / "sweep.json", j.dump(2) + "\n");
      return 0;
    });
    std::cout << csv.str();
    return kOk;
  }

  const auto trace = stage("experiment", [&] { return run_experiment(cfg); });
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  stage("output", [&] {
    write_text(dir / "trace.csv", csv.str());
    write_text(dir / "trace.json", trace_to_json(trace).dump(2) + "\n");
    return 0;
  });
  std::cout << format_summaries({summarize(trace.rows, (dir / "trace.csv").string())});
  return kOk;
}

std::vector<TraceRow> load_trace(const std::string& path) {
  if (fs::path(path).extension() == ".json") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("cannot read trace " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("trace " + path + ": " + e.what());
    }
    return trace_from_json(j).rows;
  }
  return read_trace_csv(fs::path(path));
}

int cmd_compare(const std::vector<std::string>& paths, bool json) {
  std::vector<TraceSummary> summaries;
  for (const auto& p : paths)
    summaries.push_back(stage("compare", [&] { return summarize(load_trace(p), p); }));
  if (json)
    std::cout << summaries_to_json(summaries).dump(2) << '\n';
  else
    std::cout << format_summaries(summaries);
  return kOk;
}

int cmd_ingest(const std::string& path, const std::string& label_column, const std::string& out, bool json) {
  const auto d = stage("ingest", [&] {
    CsvReadOptions opts;
    opts.label_column = label_column;
    return read_dataset_csv(fs::path(path), opts);
  });
  const auto s = class_summary(d);
  if (json) {
    nlohmann::json j = {{"rows", s.size}, {"dim", s.dim}, {"num_classes", s.num_classes}};
    for (int c = 0; c < s.num_classes; ++c)
      j["classes"]["class" + std::to_string(c)] = s.counts.provided[static_cast<std::size_t>(c)];
    j["unlabeled"] = s.size - std::accumulate(s.counts.provided.begin(), s.counts.provided.end(), std::size_t{0});
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << format_summary(s);
  }
  if (!out.empty()) {
    std::ostringstream csv;
    write_dataset_csv(csv, d);
    stage("output", [&] {
      write_text(out, csv.str());
      return 0;
    });
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-updating model experiments"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset CSV");
  gen->require_subcommand(1);
  GenOptions go;
  auto* moons = gen->add_subcommand("two-moons", "Two interleaving half circles");
  moons->add_option("--n", go.n, "Total rows")->capture_default_str();
  moons->add_option("--noise-std", go.noise_std, "Gaussian jitter")->capture_default_str();
  moons->add_option("--seed", go.seed, "Seed")->capture_default_str();
  moons->add_option("--out", go.out, "Output CSV (stdout if omitted)");
  auto* gauss = gen->add_subcommand("two-gaussians", "One multivariate normal per class");
  gauss->add_option("--mean", go.means, "Class mean, comma separated (repeat per class)")->capture_default_str();
  gauss->add_option("--cov", go.covs, "Class covariance, row-major comma separated (repeat per class)")
      ->capture_default_str();
  gauss->add_option("--count", go.counts, "Rows per class (repeat per class)")->capture_default_str();
  gauss->add_option("--seed", go.seed, "Seed")->capture_default_str();
  gauss->add_option("--out", go.out, "Output CSV (stdout if omitted)");

  auto* run = app.add_subcommand("run", "Run an experiment config");
  std::string config_path, run_out;
  std::optional<std::uint64_t> run_seed;
  run->add_option("config", config_path, "Config file (.toml or .json)")->required();
  run->add_option("--seed", run_seed, "Override the config seed");
  run->add_option("--out", run_out, "Output directory");

  auto* compare = app.add_subcommand("compare", "Summarize trace files");
  std::vector<std::string> traces;
  bool compare_json = false;
  compare->add_option("traces", traces, "Trace CSV or JSON files")->required();
  compare->add_flag("--json", compare_json, "Machine-readable output");

  auto* ingest = app.add_subcommand("ingest", "Validate a dataset CSV");
  std::string ingest_path, label_column = "label", ingest_out;
  bool ingest_json = false;
  ingest->add_option("csv", ingest_path, "Dataset CSV")->required();
  ingest->add_option("--label-column", label_column, "Label column name")->capture_default_str();
  ingest->add_option("--out", ingest_out, "Write a normalized copy");
  ingest->add_flag("--json", ingest_json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*moons) return cmd_gen_moons(go);
    if (*gauss) return cmd_gen_gaussians(go);
    if (*run) return cmd_run(config_path, run_seed, run_out);
    if (*compare) return cmd_compare(traces, compare_json);
    if (*ingest) return cmd_ingest(ingest_path, label_column, ingest_out, ingest_json);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
