#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "citepred/csv.hpp"
#include "citepred/features.hpp"
#include "citepred/random.hpp"
#include "oracles.hpp"

using namespace citepred;
using doctest::Approx;

TEST_CASE("arsinh spot values") {
  CHECK(arsinh(0.0) == 0.0);
  // ln(1 + √2) and ln(1000 + √(10⁶ + 1)), evaluated independently.
  CHECK(arsinh(1.0) == Approx(0.8813735870195429).epsilon(1e-15));
  CHECK(arsinh(1000.0) == Approx(7.600902709541988).epsilon(1e-15));
  CHECK(arsinh(1000.0) == Approx(std::log(2000.0)).epsilon(1e-7));
  CHECK_THROWS_AS(arsinh(INFINITY), DomainError);
  CHECK_THROWS_AS(arsinh(NAN), DomainError);
}

TEST_CASE("arsinh is odd and inverts sinh") {
  CounterRng rng(11, 0);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rng.uniform() * 2.0 - 1.0) * std::pow(10.0, rng.uniform() * 6.0);
    CHECK(arsinh(-x) == -arsinh(x));
    CHECK(std::sinh(arsinh(x)) == Approx(x).epsilon(1e-12));
  }
  Eigen::ArrayXd v(3);
  v << -2.0, 0.0, 5.0;
  const Eigen::ArrayXd t = arsinh(v);
  CHECK(t(0) == arsinh(-2.0));
  CHECK(t(2) == arsinh(5.0));
}

TEST_CASE("language rank") {
  CHECK(language_rank(std::vector<std::string>{"eng"}) == 1);
  CHECK(language_rank(std::vector<std::string>{"eng", "fre"}) == 2);
  CHECK(language_rank(std::vector<std::string>{"ger"}) == 3);
  CHECK(language_rank(std::vector<std::string>{"spa", "ger"}) == 3);
  CHECK_THROWS_AS(language_rank(std::vector<std::string>{}), ValidationError);
}

TEST_CASE("triangle classification") {
  CHECK(classify_triangle(1, 0, 0) == TriangleRegion::A);
  CHECK(classify_triangle(0, 1, 0) == TriangleRegion::C);
  CHECK(classify_triangle(0, 0, 1) == TriangleRegion::H);
  CHECK(classify_triangle(1.0 / 3, 1.0 / 3, 1.0 / 3) == TriangleRegion::ACH);
  CHECK(classify_triangle(0, 0, 0) == TriangleRegion::Outside);
  CHECK(classify_triangle(5e-10, 0, 0) == TriangleRegion::Outside);
  // Proportions not summing to one are normalized first.
  CHECK(classify_triangle(0.3, 0.1, 0.1) == TriangleRegion::A);
  // Boundary points: ACH before A before C before H.
  CHECK(classify_triangle(0.5, 0.25, 0.25) == TriangleRegion::ACH);
  CHECK(classify_triangle(0.5, 0.5, 0.0) == TriangleRegion::ACH);
  CHECK(classify_triangle(0.0, 0.5, 0.5) == TriangleRegion::ACH);
  CHECK_THROWS_AS(classify_triangle(-0.1, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(classify_triangle(0.6, 0.5, 0.1), ValidationError);
}

TEST_CASE("triangle classification is scale invariant") {
  CounterRng rng(5, 1);
  for (int i = 0; i < 5000; ++i) {
    double e[4];
    double s = 0;
    for (double& v : e) s += v = -std::log(1.0 - rng.uniform());
    const double a = e[0] / s, c = e[1] / s, h = e[2] / s;
    const double lambda = 0.01 + rng.uniform() * (1.0 / (a + c + h) - 0.01);
    CHECK(classify_triangle(lambda * a, lambda * c, lambda * h) == classify_triangle(a, c, h));
  }
}

TEST_CASE("numeric tier columns") {
  std::vector<PaperRecord> records{fixtures::record("1", 2000), fixtures::record("2", 2001),
                                   fixtures::record("3", 2002)};
  records[1].n_references = 40;
  records[2].mesh_count = 3;
  const auto dm = build_design_matrix(records, {ResponseKind::weighted_sjr, ModelTier::numeric, false});
  CHECK(dm.column_names == std::vector<std::string>{"Intercept", "H Score", "A Score", "C Score", "Title",
                                                    "References", "Age", "MeSH", "Length"});
  CHECK(dm.rows() == 3);
  CHECK(dm.x(1, 5) == Approx(std::asinh(40.0)));
  CHECK(dm.x(0, 1) == 0.4);
  CHECK(dm.y(0) == Approx(std::asinh(2.5)));
  check_design_matrix(dm);

  const auto raw = build_design_matrix(records, {ResponseKind::weighted_sjr, ModelTier::numeric, true});
  CHECK(raw.x(1, 5) == 40.0);
  CHECK(raw.y(0) == Approx(std::asinh(2.5)));
}

TEST_CASE("complete tier column count and dummy coding") {
  std::vector<PaperRecord> records;
  for (int i = 0; i < 24; ++i) {
    auto r = fixtures::record(std::to_string(i), 2000 + i % 4);
    r.languages = i % 3 == 0 ? std::vector<std::string>{"eng"}
                  : i % 3 == 1 ? std::vector<std::string>{"eng", "spa"}
                               : std::vector<std::string>{"ger"};
    r.pub_types = i % 2 ? std::vector<std::string>{"Journal Article", "Review"} : std::vector<std::string>{"Letter"};
    if (i % 4 == 0) {
      r.a_score = 0.9;
      r.c_score = r.h_score = 0.05;
    }
    if (i % 5 == 0) r.a_score = r.c_score = r.h_score = 0.0;
    records.push_back(r);
  }
  const auto dm = build_design_matrix(records, {ResponseKind::citation_count, ModelTier::complete, false});
  // intercept + 8 numeric + Clinical, Research + Triangle(4) + Access + Language(2) + 3 years + 3 pub types
  CHECK(dm.cols() == 1 + 8 + 2 + 4 + 1 + 2 + 3 + 3);
  CHECK(dm.find_column("Year 2000") == std::nullopt);
  CHECK(dm.find_column("Year 2003").has_value());
  CHECK(dm.find_column("Pub Review").has_value());
  check_design_matrix(dm);

  auto block_sum = [&](Eigen::Index row, std::initializer_list<const char*> names) {
    double s = 0;
    for (const char* n : names) s += dm.x(row, *dm.find_column(n));
    return s;
  };
  for (Eigen::Index i = 0; i < dm.rows(); ++i) {
    CHECK(block_sum(i, {"Triangle ACH", "Triangle C", "Triangle H", "Triangle Outside"}) <= 1.0);
    CHECK(block_sum(i, {"Language 2", "Language 3"}) <= 1.0);
    CHECK(block_sum(i, {"Year 2001", "Year 2002", "Year 2003"}) <= 1.0);
    for (Eigen::Index j = 1; j < dm.cols(); ++j) {
      const auto& name = dm.column_names[static_cast<std::size_t>(j)];
      if (name.rfind("Year", 0) == 0 || name.rfind("Pub", 0) == 0 || name.rfind("Triangle", 0) == 0) {
        CHECK((dm.x(i, j) == 0.0 || dm.x(i, j) == 1.0));
      }
    }
  }
  // Reference levels: A triangle, English only, earliest year.
  const Eigen::Index first = 12;  // year 2000, English only, A corner
  CHECK(block_sum(first, {"Triangle ACH", "Triangle C", "Triangle H", "Triangle Outside"}) == 0.0);
  CHECK(block_sum(first, {"Language 2", "Language 3"}) == 0.0);
  CHECK(block_sum(first, {"Year 2001", "Year 2002", "Year 2003"}) == 0.0);

  const auto again = build_design_matrix(records, {ResponseKind::citation_count, ModelTier::complete, false});
  CHECK(again.column_names == dm.column_names);
  CHECK(std::memcmp(again.x.data(), dm.x.data(), sizeof(double) * static_cast<std::size_t>(dm.x.size())) == 0);
}

TEST_CASE("count response and sjr exclusion") {
  auto r = fixtures::record("z", 2010, 0, std::nullopt);
  const auto dm = build_design_matrix(std::vector<PaperRecord>{r}, {ResponseKind::citation_count, ModelTier::numeric, false});
  CHECK(dm.y.size() == 1);
  CHECK(dm.y(0) == 0.0);

  std::vector<PaperRecord> mixed{fixtures::record("a", 2000), fixtures::record("b", 2000, 4, std::nullopt)};
  CHECK(build_design_matrix(mixed, {ResponseKind::weighted_sjr, ModelTier::numeric, false}).rows() == 1);
  CHECK(build_design_matrix(mixed, {ResponseKind::citation_count, ModelTier::numeric, false}).rows() == 2);
  CHECK_THROWS_AS(build_design_matrix(std::vector<PaperRecord>{r}, {ResponseKind::weighted_sjr, ModelTier::numeric, false}),
                  ConfigError);
}

TEST_CASE("encoding errors") {
  auto bad = fixtures::record("pm42", 2000);
  bad.a_score = 0.8;
  bad.c_score = 0.8;
  try {
    build_design_matrix(std::vector<PaperRecord>{bad}, {});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("pm42") != std::string::npos);
  }
  auto no_types = fixtures::record("x", 2000);
  no_types.pub_types.clear();
  CHECK_THROWS_AS(build_design_matrix(std::vector<PaperRecord>{no_types}, {ResponseKind::citation_count, ModelTier::complete, false}),
                  ConfigError);
  auto no_lang = fixtures::record("nolang", 2000);
  no_lang.languages.clear();
  CHECK_THROWS_AS(build_design_matrix(std::vector<PaperRecord>{no_lang}, {ResponseKind::citation_count, ModelTier::icite, false}),
                  ValidationError);
  CHECK_NOTHROW(build_design_matrix(std::vector<PaperRecord>{no_lang}, {ResponseKind::citation_count, ModelTier::numeric, false}));
  CHECK_THROWS_AS(build_design_matrix(std::vector<PaperRecord>{}, {}), ValidationError);
}

TEST_CASE("fixed layout encodes unseen levels as reference") {
  std::vector<PaperRecord> train{fixtures::record("a", 2000), fixtures::record("b", 2001)};
  const auto layout = derive_layout(train, {ResponseKind::citation_count, ModelTier::icite, false});
  auto late = fixtures::record("c", 2005);
  const auto dm = encode(std::vector<PaperRecord>{late}, layout);
  CHECK(dm.column_names == layout.column_names());
  CHECK(dm.x(0, *dm.find_column("Year 2001")) == 0.0);
}

TEST_CASE("select_columns keeps intercept and order") {
  std::vector<PaperRecord> records{fixtures::record("a", 2000), fixtures::record("b", 2001)};
  const auto dm = build_design_matrix(records, {ResponseKind::citation_count, ModelTier::numeric, false});
  const auto sub = select_columns(dm, std::vector<std::string>{"MeSH", "References"});
  CHECK(sub.column_names == std::vector<std::string>{"Intercept", "References", "MeSH"});
  CHECK_THROWS_AS(select_columns(dm, std::vector<std::string>{"Nope"}), ConfigError);
}

TEST_CASE("split examples") {
  std::vector<PaperRecord> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(fixtures::record(std::to_string(i), 2000));
  auto s = split_train_test(ten, 0.8, 1);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
  s = split_train_test(ten, 0.5, 1);
  CHECK(s.train.size() == 5);

  auto one = split_train_test(std::vector<PaperRecord>{fixtures::record("solo", 1999)}, 0.8, 3);
  CHECK(one.train.size() == 1);
  CHECK(one.test.empty());

  CHECK_THROWS_AS(split_train_test(ten, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(split_train_test(ten, 0.0, 1), ConfigError);
  CHECK(train_count(0.7, 10) == 7);
}

TEST_CASE("split partitions per year and is reproducible") {
  std::vector<PaperRecord> records;
  std::map<int, int> per_year;
  CounterRng rng(9, 0);
  for (int i = 0; i < 997; ++i) {
    const int year = 1998 + static_cast<int>(rng.below(7));
    ++per_year[year];
    records.push_back(fixtures::record("r" + std::to_string(i), year));
  }
  for (double f : {0.8, 0.5, 0.3}) {
    const auto a = split_train_test(records, f, 123);
    const auto b = split_train_test(records, f, 123);
    CHECK(a.train.size() + a.test.size() == records.size());
    std::vector<std::string> ids;
    for (const auto& r : a.train) ids.push_back(r.pmid);
    for (const auto& r : a.test) ids.push_back(r.pmid);
    std::sort(ids.begin(), ids.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    std::map<int, int> train_per_year;
    for (const auto& r : a.train) ++train_per_year[r.year];
    for (const auto& [year, count] : per_year) {
      CHECK(train_per_year[year] == static_cast<int>(std::ceil(f * count - 1e-9)));
    }
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].pmid == b.train[i].pmid);
  }
  const auto c = split_train_test(records, 0.8, 124);
  const auto a = split_train_test(records, 0.8, 123);
  bool differs = false;
  for (std::size_t i = 0; i < a.train.size(); ++i) differs = differs || a.train[i].pmid != c.train[i].pmid;
  CHECK(differs);
}

TEST_CASE("csv round trip and errors") {
  std::vector<PaperRecord> records{fixtures::record("1", 2000), fixtures::record("2", 2001, 0, std::nullopt)};
  records[0].languages = {"eng", "fre"};
  records[0].pub_types = {"Journal Article", "Review"};
  records[1].a_score = 0.1 + 0.2;
  std::stringstream ss;
  write_records(ss, records);
  const auto back = read_records(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].languages == records[0].languages);
  CHECK(back[0].pub_types == records[0].pub_types);
  CHECK(!back[1].sjr.has_value());
  CHECK(back[1].a_score == records[1].a_score);
  CHECK(*back[0].sjr == *records[0].sjr);

  std::stringstream bad_header("pmid,year\n1,2000\n");
  CHECK_THROWS_AS(read_records(bad_header), ValidationError);
  std::stringstream bad_row(std::string(kRecordHeader) + "\n1,20x0,3,,0,0,0,0,5,1,1,1,eng,0,0,0,\n");
  try {
    read_records(bad_row);
    FAIL("expected parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::stringstream bad_flag(std::string(kRecordHeader) + "\n1,2000,3,,0,0,0,0,5,1,1,1,eng,2,0,0,\n");
  CHECK_THROWS_AS(read_records(bad_flag), ValidationError);
  CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
}
