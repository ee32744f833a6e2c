#include <doctest.h>

#include <sstream>

#include "sumer/error.hpp"
#include "sumer/trace_io.hpp"

using namespace sumer;

namespace {

MetricsTrace sample() {
  MetricsTrace t;
  t.seed = 4;
  t.config = {{"name", "sample"}};
  for (std::size_t w = 0; w < 2; ++w) {
    TraceRow st{w, Strategy::Static, w * 100, 0.7, 0, w ? 100u : 0u};
    TraceRow su{w, Strategy::SUM, w * 100, 0.75 + 0.01 * static_cast<double>(w), w ? 90u : 0u, w ? 10u : 0u};
    if (w) su.selflabel_precision = 0.9;
    TraceRow se = su;
    se.strategy = Strategy::SUMER;
    se.holdout_acc = 0.8;
    if (w) {
      NoiseEstimate e;
      e.pi0 = 0.125;
      e.pi1 = 0.0625;
      se.estimate = e;
      se.coupling = CouplingReport{0.97, 0.125, 0.0625, 0.02, false};
      se.pruned = 7;
    }
    t.rows.push_back(st);
    t.rows.push_back(su);
    t.rows.push_back(se);
  }
  return t;
}

std::string csv(const MetricsTrace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

}  // namespace

TEST_CASE("trace csv layout") {
  const auto text = csv(sample());
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == kTraceHeader);
  std::getline(in, line);
  CHECK(line == "0,Static,0,0.7,0,0,,,,,");
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  CHECK(lines.back() == "1,SUMER,100,0.8,90,10,0.9,0.125,0.0625,0.97,false");
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("trace csv round trip") {
  const auto t = sample();
  std::istringstream in(csv(t));
  const auto rows = read_trace_csv(in);
  REQUIRE(rows.size() == t.rows.size());
  MetricsTrace back;
  back.rows = rows;
  CHECK(csv(back) == csv(t));
  CHECK(rows.back().coupling.has_value());
  CHECK_FALSE(rows.back().coupling->coupled);
  CHECK_FALSE(rows.front().selflabel_precision.has_value());
}

TEST_CASE("malformed trace csv is rejected") {
  const std::string header = std::string(kTraceHeader) + "\n";
  const char* bodies[] = {"0,Static,0,0.7,0,0,,,,\n", "0,Nope,0,0.7,0,0,,,,,\n", "0,Static,0,1.7,0,0,,,,,\n",
                          "0,Static,0,0.7,0,0,,,,,maybe\n", "x,Static,0,0.7,0,0,,,,,\n"};
  for (const char* body : bodies) {
    INFO(body);
    std::istringstream in(header + body);
    CHECK_THROWS_AS(read_trace_csv(in), ValidationError);
  }
  std::istringstream wrong("window,strategy\n");
  CHECK_THROWS_AS(read_trace_csv(wrong), ValidationError);
}

TEST_CASE("trace json round trip") {
  const auto t = sample();
  const auto j = trace_to_json(t);
  CHECK(j["format"] == "sumer-trace");
  CHECK(j["config"]["name"] == "sample");
  const auto back = trace_from_json(j);
  CHECK(back.seed == 4);
  CHECK(csv(back) == csv(t));
  CHECK(trace_to_json(back) == j);
  CHECK(back.rows.back().pruned == 7);
  CHECK_THROWS_AS(trace_from_json(nlohmann::json{{"format", "other"}}), ValidationError);
}

TEST_CASE("summaries") {
  const auto s = summarize(sample().rows, "a.csv");
  REQUIRE(s.strategies.size() == 3);
  CHECK(s.strategies[0].delta_vs_static == 0.0);
  CHECK(s.strategies[1].final_acc == doctest::Approx(0.76));
  CHECK(s.strategies[1].delta_vs_static == doctest::Approx(0.06));
  CHECK(s.strategies[2].coupled == false);
  const auto j = summaries_to_json({s});
  CHECK(j[0]["sumer_minus_sum"].get<double>() == doctest::Approx(0.04));
  CHECK(format_summaries({s}).find("SUMER - SUM") != std::string::npos);

  std::vector<TraceRow> only_static;
  for (const auto& r : sample().rows)
    if (r.strategy == Strategy::Static) only_static.push_back(r);
  const auto st = summarize(only_static, "s.csv");
  for (const auto& x : st.strategies) CHECK(x.delta_vs_static == 0.0);
}

TEST_CASE("sweep csv") {
  std::ostringstream os;
  write_sweep_csv(os, {{0.05, Strategy::Static, 0.5}, {0.05, Strategy::SUM, 0.625}});
  CHECK(os.str() == "fraction,strategy,holdout_acc\n0.05,Static,0.5\n0.05,SUM,0.625\n");
}
