#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "bilayer/error.hpp"
#include "bilayer/records.hpp"
#include "oracles.hpp"

using namespace bilayer;

namespace {

const std::vector<Column> kSchema = {{"x", ColumnType::real}, {"n", ColumnType::integer}, {"label", ColumnType::text},
                                     {"y", ColumnType::real}};

double random_real() {
  auto& g = oracle::rng();
  switch (g() % 5) {
    case 0: return 0.0;
    case 1: return -0.0;
    case 2: return std::ldexp(oracle::uniform(-1, 1), static_cast<int>(g() % 600) - 300);
    case 3: return std::numeric_limits<double>::denorm_min() * static_cast<double>(g() % 1000);
    default: return oracle::uniform(-1e6, 1e6);
  }
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::io;
}

}  // namespace

TEST_CASE("empty table writes the header only") {
  Table t{kSchema, {}};
  CHECK(to_csv(t) == "x,n,label,y\n");
  CHECK(parse_csv(to_csv(t), kSchema) == t);
}

TEST_CASE("csv round trip on random records") {
  Table t{kSchema, {}};
  for (int i = 0; i < 100; ++i) {
    const auto n = static_cast<std::int64_t>(oracle::rng()()) >> static_cast<int>(oracle::rng()() % 63);
    t.add({random_real(), n, "r" + std::to_string(i) + "-ok_" + std::to_string(oracle::rng()() % 97), random_real()});
  }
  const std::string text = to_csv(t);
  const Table back = parse_csv(text, kSchema);
  REQUIRE(back.rows.size() == 100);
  CHECK(back == t);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double a = std::get<double>(t.rows[r][0]), b = std::get<double>(back.rows[r][0]);
    REQUIRE(std::signbit(a) == std::signbit(b));
  }
  CHECK(to_csv(back) == text);
}

TEST_CASE("fixed formatting") {
  CHECK(format_real(1.0) == "1.0000000000000000e+00");
  CHECK(format_real(-0.1) == "-1.0000000000000001e-01");
  Table t{{{"v", ColumnType::real}}, {}};
  t.add({0.5});
  std::ostringstream out;
  write_csv(out, t);
  CHECK(out.str() == "v\n5.0000000000000000e-01\n");
}

TEST_CASE("rejections") {
  Table nan{kSchema, {}};
  nan.add({std::nan(""), std::int64_t{1}, std::string("a"), 1.0});
  CHECK(code_of([&] { (void)to_csv(nan); }) == Errc::non_finite);
  Table inf{kSchema, {}};
  inf.add({1.0, std::int64_t{1}, std::string("a"), -std::numeric_limits<double>::infinity()});
  CHECK(code_of([&] { (void)to_csv(inf); }) == Errc::non_finite);
  try {
    (void)to_csv(nan);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("column 'x'") != std::string::npos);
  }

  Table comma{kSchema, {}};
  comma.add({1.0, std::int64_t{1}, std::string("a,b"), 1.0});
  CHECK(code_of([&] { (void)to_csv(comma); }) == Errc::out_of_range);
  Table mismatch{kSchema, {}};
  mismatch.rows.push_back({std::int64_t{1}, std::int64_t{1}, std::string("a"), 1.0});
  CHECK(code_of([&] { (void)to_csv(mismatch); }) == Errc::out_of_range);
  Table t{kSchema, {}};
  CHECK_THROWS_AS(t.add({1.0}), Error);

  CHECK(code_of([] { (void)parse_csv("", kSchema); }) == Errc::io);
  CHECK(code_of([] { (void)parse_csv("x,n,label\n", kSchema); }) == Errc::io);
  CHECK(code_of([] { (void)parse_csv("x,n,label,z\n", kSchema); }) == Errc::io);
  CHECK(code_of([] { (void)parse_csv("x,n,label,y\n1.0,2,a\n", kSchema); }) == Errc::io);
  CHECK(code_of([] { (void)parse_csv("x,n,label,y\nfoo,2,a,1\n", kSchema); }) == Errc::io);
  CHECK(code_of([] { (void)parse_csv("x,n,label,y\n1,2.5,a,1\n", kSchema); }) == Errc::io);
}

TEST_CASE("table accessors") {
  Table t{kSchema, {}};
  t.add({2.5, std::int64_t{7}, std::string("a"), -1.0});
  CHECK(t.column_index("label") == 2);
  CHECK(t.real(0, "x") == 2.5);
  CHECK(t.real(0, "n") == 7.0);
  CHECK_THROWS_AS(t.real(0, "label"), Error);
  CHECK_THROWS_AS(t.column_index("nope"), Error);
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}
