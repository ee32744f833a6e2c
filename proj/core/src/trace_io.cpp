#include "sumer/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "sumer/csv.hpp"
#include "sumer/error.hpp"

namespace sumer {

namespace {

using nlohmann::json;

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_cell(const std::string& cell, std::size_t line, const char* column) {
  T v{};
  const auto* b = cell.data();
  const auto* e = cell.data() + cell.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (cell.empty() || ec != std::errc() || p != e)
    throw ValidationError("trace line " + std::to_string(line) + ": invalid " + column + " '" + cell + "'");
  return v;
}

std::optional<double> optional_cell(const std::string& cell, std::size_t line, const char* column) {
  if (cell.empty()) return std::nullopt;
  return parse_cell<double>(cell, line, column);
}

json estimate_json(const NoiseEstimate& e) {
  return {{"pi0", e.pi0},
          {"pi1", e.pi1},
          {"rho0", e.rho0},
          {"rho1", e.rho1},
          {"lower_bound", e.lower_bound},
          {"upper_bound", e.upper_bound},
          {"n00", e.n00},
          {"n01", e.n01},
          {"n10", e.n10},
          {"n11", e.n11},
          {"degenerate", e.degenerate},
          {"method", e.method}};
}

NoiseEstimate estimate_from(const json& j) {
  NoiseEstimate e;
  e.pi0 = j.at("pi0").get<double>();
  e.pi1 = j.at("pi1").get<double>();
  e.rho0 = j.value("rho0", 0.0);
  e.rho1 = j.value("rho1", 0.0);
  e.lower_bound = j.value("lower_bound", 0.0);
  e.upper_bound = j.value("upper_bound", 0.0);
  e.n00 = j.value("n00", std::size_t{0});
  e.n01 = j.value("n01", std::size_t{0});
  e.n10 = j.value("n10", std::size_t{0});
  e.n11 = j.value("n11", std::size_t{0});
  e.degenerate = j.value("degenerate", false);
  e.method = j.value("method", std::string("confident_counts"));
  return e;
}

}  // namespace

void write_trace_csv(std::ostream& out, const MetricsTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.window << ',' << to_string(r.strategy) << ',' << r.seen << ',' << format_double(r.holdout_acc) << ','
        << r.accepted << ',' << r.rejected << ',';
    if (r.selflabel_precision) out << format_double(*r.selflabel_precision);
    out << ',';
    if (r.estimate) out << format_double(r.estimate->pi0);
    out << ',';
    if (r.estimate) out << format_double(r.estimate->pi1);
    out << ',';
    if (r.coupling) out << format_double(r.coupling->agreement);
    out << ',';
    if (r.coupling) out << (r.coupling->coupled ? "true" : "false");
    out << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ValidationError("trace: unexpected header '" + line + "'");
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != 11)
      throw ValidationError("trace line " + std::to_string(lineno) + ": expected 11 cells, got " +
                            std::to_string(cells.size()));
    TraceRow r;
    r.window = parse_cell<std::size_t>(cells[0], lineno, "window");
    try {
      r.strategy = strategy_from_string(cells[1]);
    } catch (const ValidationError&) {
      throw ValidationError("trace line " + std::to_string(lineno) + ": unknown strategy '" + cells[1] + "'");
    }
    r.seen = parse_cell<std::size_t>(cells[2], lineno, "seen");
    r.holdout_acc = parse_cell<double>(cells[3], lineno, "holdout_acc");
    if (!(r.holdout_acc >= 0.0 && r.holdout_acc <= 1.0))
      throw ValidationError("trace line " + std::to_string(lineno) + ": holdout_acc out of [0, 1]");
    r.accepted = parse_cell<std::size_t>(cells[4], lineno, "accepted");
    r.rejected = parse_cell<std::size_t>(cells[5], lineno, "rejected");
    r.selflabel_precision = optional_cell(cells[6], lineno, "selflabel_precision");
    const auto pi0 = optional_cell(cells[7], lineno, "pi0_hat");
    const auto pi1 = optional_cell(cells[8], lineno, "pi1_hat");
    if (pi0.has_value() != pi1.has_value())
      throw ValidationError("trace line " + std::to_string(lineno) + ": pi0_hat and pi1_hat must both be set");
    if (pi0) {
      r.estimate = NoiseEstimate{};
      r.estimate->pi0 = *pi0;
      r.estimate->pi1 = *pi1;
    }
    const auto agreement = optional_cell(cells[9], lineno, "coupling_agreement");
    if (agreement.has_value() != !cells[10].empty())
      throw ValidationError("trace line " + std::to_string(lineno) + ": coupling cells must both be set");
    if (agreement) {
      if (cells[10] != "true" && cells[10] != "false")
        throw ValidationError("trace line " + std::to_string(lineno) + ": coupled must be true or false");
      r.coupling = CouplingReport{};
      r.coupling->agreement = *agreement;
      r.coupling->coupled = cells[10] == "true";
      if (r.estimate) {
        r.coupling->pi0 = r.estimate->pi0;
        r.coupling->pi1 = r.estimate->pi1;
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot read trace " + path.string());
  return read_trace_csv(in);
}

json trace_to_json(const MetricsTrace& trace) {
  json rows = json::array();
  for (const auto& r : trace.rows) {
    json row = {{"window", r.window},
                {"strategy", std::string(to_string(r.strategy))},
                {"seen", r.seen},
                {"holdout_acc", r.holdout_acc},
                {"accepted", r.accepted},
                {"rejected", r.rejected},
                {"backlog_accepted", r.backlog_accepted},
                {"backlog", r.backlog},
                {"train_size", r.train_size},
                {"pruned", r.pruned},
                {"corrected", r.corrected}};
    row["selflabel_precision"] = r.selflabel_precision ? json(*r.selflabel_precision) : json(nullptr);
    row["noise_estimate"] = r.estimate ? estimate_json(*r.estimate) : json(nullptr);
    row["coupling"] = r.coupling ? json{{"agreement", r.coupling->agreement},
                                        {"pi0", r.coupling->pi0},
                                        {"pi1", r.coupling->pi1},
                                        {"theta", r.coupling->theta},
                                        {"coupled", r.coupling->coupled}}
                                 : json(nullptr);
    rows.push_back(std::move(row));
  }
  return {{"format", "sumer-trace"}, {"version", 1}, {"seed", trace.seed}, {"config", trace.config}, {"rows", rows}};
}

MetricsTrace trace_from_json(const json& j) {
  try {
    if (j.at("format") != "sumer-trace" || j.at("version") != 1) throw ValidationError("not a version 1 trace");
    MetricsTrace t;
    t.seed = j.at("seed").get<std::uint64_t>();
    t.config = j.at("config");
    for (const auto& row : j.at("rows")) {
      TraceRow r;
      r.window = row.at("window").get<std::size_t>();
      r.strategy = strategy_from_string(row.at("strategy").get<std::string>());
      r.seen = row.at("seen").get<std::size_t>();
      r.holdout_acc = row.at("holdout_acc").get<double>();
      r.accepted = row.at("accepted").get<std::size_t>();
      r.rejected = row.at("rejected").get<std::size_t>();
      r.backlog_accepted = row.value("backlog_accepted", std::size_t{0});
      r.backlog = row.value("backlog", std::size_t{0});
      r.train_size = row.value("train_size", std::size_t{0});
      r.pruned = row.value("pruned", std::size_t{0});
      r.corrected = row.value("corrected", std::size_t{0});
      if (!row.at("selflabel_precision").is_null()) r.selflabel_precision = row["selflabel_precision"].get<double>();
      if (!row.at("noise_estimate").is_null()) r.estimate = estimate_from(row["noise_estimate"]);
      if (const auto& c = row.at("coupling"); !c.is_null())
        r.coupling = CouplingReport{c.at("agreement").get<double>(), c.at("pi0").get<double>(),
                                    c.at("pi1").get<double>(), c.at("theta").get<double>(), c.at("coupled").get<bool>()};
      t.rows.push_back(std::move(r));
    }
    return t;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("trace: ") + e.what());
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "fraction,strategy,holdout_acc\n";
  for (const auto& r : rows)
    out << format_double(r.fraction) << ',' << to_string(r.strategy) << ',' << format_double(r.holdout_acc) << '\n';
}

TraceSummary summarize(const std::vector<TraceRow>& rows, std::string source) {
  if (rows.empty()) throw ValidationError("trace " + source + " has no rows");
  std::vector<Strategy> order;
  std::map<Strategy, const TraceRow*> last;
  for (const auto& r : rows) {
    auto it = last.find(r.strategy);
    if (it == last.end()) {
      order.push_back(r.strategy);
      last[r.strategy] = &r;
    } else if (r.window >= it->second->window) {
      it->second = &r;
    }
  }
  TraceSummary s;
  s.source = std::move(source);
  const auto st = last.find(Strategy::Static);
  for (auto strat : order) {
    const auto* r = last[strat];
    StrategySummary x;
    x.strategy = strat;
    x.final_acc = r->holdout_acc;
    x.has_static = st != last.end();
    x.delta_vs_static = x.has_static ? r->holdout_acc - st->second->holdout_acc : 0.0;
    if (r->coupling) x.coupled = r->coupling->coupled;
    s.strategies.push_back(x);
  }
  return s;
}

std::string format_summaries(const std::vector<TraceSummary>& summaries) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  for (const auto& s : summaries) {
    out << s.source << '\n';
    out << "  " << std::left << std::setw(18) << "strategy" << std::right << std::setw(10) << "final" << std::setw(12)
        << "vs_static" << "  coupled\n";
    const StrategySummary* sum = nullptr;
    const StrategySummary* sumer = nullptr;
    for (const auto& x : s.strategies) {
      out << "  " << std::left << std::setw(18) << to_string(x.strategy) << std::right << std::setw(10)
          << x.final_acc << std::setw(12) << std::showpos << x.delta_vs_static << std::noshowpos << "  "
          << (x.coupled ? (*x.coupled ? "yes" : "no") : "-") << '\n';
      if (x.strategy == Strategy::SUM) sum = &x;
      if (x.strategy == Strategy::SUMER) sumer = &x;
    }
    if (sum && sumer) out << "  SUMER - SUM: " << std::showpos << sumer->final_acc - sum->final_acc << std::noshowpos << '\n';
  }
  return out.str();
}

json summaries_to_json(const std::vector<TraceSummary>& summaries) {
  json out = json::array();
  for (const auto& s : summaries) {
    json strategies = json::array();
    double sum = -1.0, sumer = -1.0;
    for (const auto& x : s.strategies) {
      strategies.push_back({{"strategy", std::string(to_string(x.strategy))},
                            {"final_acc", x.final_acc},
                            {"delta_vs_static", x.delta_vs_static},
                            {"coupled", x.coupled ? json(*x.coupled) : json(nullptr)}});
      if (x.strategy == Strategy::SUM) sum = x.final_acc;
      if (x.strategy == Strategy::SUMER) sumer = x.final_acc;
    }
    json entry = {{"trace", s.source}, {"strategies", strategies}};
    if (sum >= 0.0 && sumer >= 0.0) entry["sumer_minus_sum"] = sumer - sum;
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace sumer
