#include <doctest.h>

#include <clocale>
#include <sstream>

#include "sumer/csv.hpp"
#include "sumer/error.hpp"
#include "sumer/synthgen.hpp"

using namespace sumer;

TEST_CASE("reads features and optional labels") {
  std::istringstream in("f0,f1,label\n1.5,-2,0\n3,4e-1,1\n0,0,\n");
  const auto d = read_dataset_csv(in);
  REQUIRE(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.features(1)[1] == doctest::Approx(0.4));
  CHECK(d.label(0).visible() == 0);
  CHECK(d.label(1).truth == 1);
  CHECK_FALSE(d.label(2).visible().has_value());
  CHECK(d.instance(2).id == 2);
}

TEST_CASE("label column may be named and placed anywhere") {
  std::istringstream in("y,f0,f1\n1,0.5,0.25\n");
  CsvReadOptions o;
  o.label_column = "y";
  const auto d = read_dataset_csv(in, o);
  CHECK(d.dim() == 2);
  CHECK(d.label(0).cls == 1);
}

TEST_CASE("non-finite values are rejected with the row number") {
  std::istringstream in("f0,f1,label\n1,2,0\n3,inf,1\n");
  try {
    read_dataset_csv(in);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  std::istringstream nan("f0,label\nnan,0\n");
  CHECK_THROWS_AS(read_dataset_csv(nan), ValidationError);
}

TEST_CASE("malformed csv is rejected") {
  std::istringstream ragged("f0,f1,label\n1,2\n");
  CHECK_THROWS_AS(read_dataset_csv(ragged), ValidationError);
  std::istringstream text("f0,label\nabc,0\n");
  CHECK_THROWS_AS(read_dataset_csv(text), ValidationError);
  std::istringstream neg("f0,label\n1,-1\n");
  CHECK_THROWS_AS(read_dataset_csv(neg), ValidationError);
}

TEST_CASE("write then read round-trips every value") {
  const auto d = gen_two_gaussians(GaussianSpec{{{-2.0, 0.0, 1.0}, {2.0, 0.0, -1.0}},
                                                {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{2, 0.5, 0}, {0.5, 1, 0}, {0, 0, 1}}},
                                                {40, 35}},
                                   11);
  std::ostringstream out;
  write_dataset_csv(out, d);
  std::istringstream in(out.str());
  const auto back = read_dataset_csv(in);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back.instance(i).features == d.instance(i).features);
    CHECK(back.label(i).truth == d.label(i).truth);
  }
  std::ostringstream again;
  write_dataset_csv(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("format_double is shortest round-trip and locale independent") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-7) == "-2.5e-07");
  const double v = 0.1 + 0.2;
  CHECK(std::stod(format_double(v)) == v);
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8")) {
    CHECK(format_double(0.5) == "0.5");
    std::setlocale(LC_NUMERIC, "C");
  }
}

TEST_CASE("columns other than f<i> and the label are rejected") {
  std::istringstream in("a,label\n1,0\n");
  CHECK_THROWS_AS(read_dataset_csv(in), ValidationError);
}
