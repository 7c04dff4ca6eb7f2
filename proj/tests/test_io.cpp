#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spca/baselines.hpp"
#include "spca/errors.hpp"
#include "spca/io.hpp"

using namespace spca;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("spca_io_" + name))
      .string();
}

std::string write_file(const std::string& name, const std::string& text) {
  const std::string path = tmp_path(name);
  std::ofstream out(path);
  out << text;
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;  // did not throw
}

std::shared_ptr<Dataset> gap_dataset() {
  auto data = std::make_shared<Dataset>();
  data->gram = deflation_gap_instance(0.1, 0.1);
  data->vocabulary = {"north", "south", "east", "west"};
  return data;
}

RunSpec joint_sketched_spec(const std::shared_ptr<Dataset>& data) {
  RunSpec spec;
  spec.data = data;
  spec.algorithm = Algorithm::Joint;
  spec.k = 2;
  spec.s = 2;
  spec.eps = 0.9;
  SketchSpec sk;
  sk.method = SketchMethod::TruncatedSvd;
  sk.rank = 2;
  spec.sketch = sk;
  return spec;
}

}  // namespace

TEST_CASE("dense csv loads samples and header names") {
  const std::string path =
      write_file("dense.csv", "alpha,beta\n1,2\n3,4\n");
  const Dataset data = load_dense_csv(path, true);
  REQUIRE(data.samples.has_value());
  CHECK(data.samples->n == 2);
  CHECK(data.samples->d == 2);
  CHECK(data.samples->values(1, 0) == 3.0);
  CHECK(data.vocabulary == std::vector<std::string>{"alpha", "beta"});
  CHECK(data.feature_name(0) == "alpha");
  CHECK(data.feature_name(5) == "v5");
  std::remove(path.c_str());
}

TEST_CASE("dense csv parse failures point at the offending cell") {
  const std::string ragged = write_file("ragged.csv", "1,2\n3\n");
  try {
    load_dense_csv(ragged, false);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  std::remove(ragged.c_str());

  const std::string bad = write_file("bad.csv", "1,x\n");
  CHECK(code_of([&] { load_dense_csv(bad, false); }) == ErrorCode::ParseError);
  std::remove(bad.c_str());

  const std::string empty = write_file("empty.csv", "");
  CHECK(code_of([&] { load_dense_csv(empty, false); }) ==
        ErrorCode::ParseError);
  std::remove(empty.c_str());
}

TEST_CASE("gram csv must be square and symmetric") {
  const std::string rect = write_file("rect.csv", "1,2,3\n4,5,6\n");
  CHECK(code_of([&] { load_gram_csv(rect, false); }) == ErrorCode::ParseError);
  std::remove(rect.c_str());

  const std::string asym = write_file("asym.csv", "1,0.5\n0.4,1\n");
  CHECK(code_of([&] { load_gram_csv(asym, false); }) ==
        ErrorCode::InvalidInput);
  std::remove(asym.c_str());

  const std::string good = write_file("good.csv", "1,0.2\n0.2,1\n");
  const Dataset data = load_gram_csv(good, false);
  REQUIRE(data.gram.has_value());
  CHECK(data.gram->dim() == 2);
  CHECK((*data.gram)(0, 1) == 0.2);
  std::remove(good.c_str());
}

TEST_CASE("to_gram centers samples but refuses to center a gram matrix") {
  const std::string path = write_file("center.csv", "1,0\n3,0\n");
  const Dataset data = load_dense_csv(path, false);
  const PsdMatrix g = data.to_gram(true);
  CHECK(g(0, 0) == doctest::Approx(1.0));  // centered column (-1, 1), n = 2
  CHECK(g(0, 1) == doctest::Approx(0.0));
  CHECK(g(1, 1) == doctest::Approx(0.0));
  std::remove(path.c_str());

  auto gram_only = gap_dataset();
  CHECK(code_of([&] { gram_only->to_gram(true); }) == ErrorCode::InvalidInput);
  CHECK(gram_only->to_gram(false).dim() == 4);
}

TEST_CASE("uci bag-of-words round trip") {
  const std::string doc =
      write_file("bow.txt", "2\n3\n2\n1 1 4\n2 3 1\n");
  const std::string voc = write_file("vocab.txt", "apple\nbanana\ncherry\n");
  const Dataset data = load_uci_bow(doc, voc);
  REQUIRE(data.samples.has_value());
  CHECK(data.samples->n == 2);
  CHECK(data.samples->d == 3);
  CHECK(data.samples->values(0, 0) == 4.0);
  CHECK(data.samples->values(0, 1) == 0.0);
  CHECK(data.samples->values(1, 2) == 1.0);
  CHECK(data.vocabulary.size() == 3);
  CHECK(data.feature_name(2) == "cherry");
  std::remove(doc.c_str());
  std::remove(voc.c_str());
}

TEST_CASE("uci bag-of-words accumulates duplicate triplets") {
  const std::string doc =
      write_file("bow_dup.txt", "1\n2\n2\n1 1 2\n1 1 3\n");
  const Dataset data = load_uci_bow(doc, "");
  CHECK(data.samples->values(0, 0) == 5.0);
  CHECK(data.vocabulary.empty());
  std::remove(doc.c_str());
}

TEST_CASE("uci bag-of-words rejects malformed input") {
  const std::string missing =
      write_file("bow_missing.txt", "2\n3\n3\n1 1 4\n2 3 1\n");
  CHECK(code_of([&] { load_uci_bow(missing, ""); }) == ErrorCode::ParseError);
  std::remove(missing.c_str());

  const std::string badword =
      write_file("bow_badword.txt", "2\n3\n1\n1 4 2\n");
  CHECK(code_of([&] { load_uci_bow(badword, ""); }) == ErrorCode::ParseError);
  std::remove(badword.c_str());

  const std::string baddoc = write_file("bow_baddoc.txt", "2\n3\n1\n3 1 2\n");
  CHECK(code_of([&] { load_uci_bow(baddoc, ""); }) == ErrorCode::ParseError);
  std::remove(baddoc.c_str());

  const std::string trailing =
      write_file("bow_trail.txt", "2\n3\n1\n1 1 2 9\n");
  CHECK(code_of([&] { load_uci_bow(trailing, ""); }) == ErrorCode::ParseError);
  std::remove(trailing.c_str());

  const std::string doc = write_file("bow_ok.txt", "2\n3\n1\n1 1 2\n");
  const std::string shortvoc = write_file("vocab_short.txt", "apple\nbanana\n");
  CHECK(code_of([&] { load_uci_bow(doc, shortvoc); }) ==
        ErrorCode::ParseError);
  std::remove(doc.c_str());
  std::remove(shortvoc.c_str());
}

TEST_CASE("uci bag-of-words refuses a huge dense expansion") {
  const std::string doc = write_file("bow_huge.txt", "4000\n3000\n0\n");
  CHECK(code_of([&] { load_uci_bow(doc, ""); }) ==
        ErrorCode::CapacityExceeded);
  std::remove(doc.c_str());
}

TEST_CASE("joint run on the raw gram reaches the optimum") {
  auto data = gap_dataset();
  RunSpec spec;
  spec.data = data;
  spec.algorithm = Algorithm::Joint;
  spec.k = 2;
  spec.s = 2;
  spec.eps = 0.9;
  const RunReport r = run(spec);
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.guarantee_factor == doctest::Approx(0.1));
  CHECK(r.termination == Termination::Complete);
  CHECK(r.net_points_total == 117649);  // (343 reduced points)^2
  CHECK(r.net_points_examined == r.net_points_total);
  double sum = 0.0;
  for (double v : r.per_component) sum += v;
  CHECK(sum == doctest::Approx(r.objective).epsilon(1e-9));
  CHECK_FALSE(r.library_version.empty());
  CHECK_FALSE(r.sketch.has_value());
}

TEST_CASE("sketched joint run echoes the sketch and round-trips as json") {
  auto data = gap_dataset();
  const RunSpec spec = joint_sketched_spec(data);
  const RunReport r = run(spec);
  // The rank-2 sketch factor keeps only the {0,3} block, but candidates that
  // split those variables across groups still score 2.0 on the true matrix.
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.net_points_total == 49);
  REQUIRE(r.sketch.has_value());
  CHECK(r.sketch->rank == 2);
  CHECK(r.sketch->method == SketchMethod::TruncatedSvd);
  REQUIRE(r.sketch_error_lambda1.has_value());
  CHECK(*r.sketch_error_lambda1 == doctest::Approx(0.1).epsilon(1e-9));

  const std::string json = report_to_json(r);
  const RunReport back = report_from_json(json);
  CHECK(report_to_json(back) == json);
  CHECK(back.objective == r.objective);
  CHECK(back.components.supports() == r.components.supports());
  REQUIRE(back.sketch.has_value());
  CHECK(back.sketch->rank == 2);
}

TEST_CASE("report_from_json rejects garbage") {
  CHECK(code_of([] { report_from_json("not json at all"); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { report_from_json("{\"spec\": 3}"); }) ==
        ErrorCode::ParseError);
}

TEST_CASE("deflate and oracle guarantee factors") {
  auto data = gap_dataset();
  RunSpec spec;
  spec.data = data;
  spec.algorithm = Algorithm::DeflateExact;
  spec.k = 2;
  spec.s = 2;
  RunReport r = run(spec);
  CHECK(r.objective == doctest::Approx(1.2).epsilon(1e-9));
  CHECK(r.guarantee_factor == 0.0);
  CHECK(r.net_points_total == 0);

  spec.algorithm = Algorithm::Oracle;
  r = run(spec);
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.guarantee_factor == 1.0);
  CHECK(r.components.supports() == SupportSet{{0, 1}, {2, 3}});
}

TEST_CASE("output and topics files") {
  auto data = gap_dataset();
  RunSpec spec;
  spec.data = data;
  spec.algorithm = Algorithm::Oracle;
  spec.k = 2;
  spec.s = 2;
  spec.output_path = tmp_path("report.json");
  spec.topics_path = tmp_path("topics.csv");
  const RunReport r = run(spec);

  const std::string text = read_file(spec.output_path);
  REQUIRE_FALSE(text.empty());
  CHECK(text.back() == '\n');
  const RunReport back = report_from_json(text);
  CHECK(back.objective == r.objective);

  std::ifstream topics(spec.topics_path);
  std::string line;
  REQUIRE(std::getline(topics, line));
  CHECK(line == "topic,rank,word,value");
  std::size_t rows = 0;
  int prev_topic = -1;
  double prev_abs = 0.0;
  while (std::getline(topics, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream ss(line);
    std::string topic_s, rank_s, word, value_s;
    REQUIRE(std::getline(ss, topic_s, ','));
    REQUIRE(std::getline(ss, rank_s, ','));
    REQUIRE(std::getline(ss, word, ','));
    REQUIRE(std::getline(ss, value_s, ','));
    CHECK((word == "north" || word == "south" || word == "east" ||
           word == "west"));
    const int topic = std::stoi(topic_s);
    const double v = std::abs(std::stod(value_s));
    if (topic == prev_topic) CHECK(v <= prev_abs + 1e-12);
    prev_topic = topic;
    prev_abs = v;
  }
  CHECK(rows == 4);  // k * s
  std::remove(spec.output_path.c_str());
  std::remove(spec.topics_path.c_str());
}

TEST_CASE("csv report format") {
  auto data = gap_dataset();
  RunSpec spec;
  spec.data = data;
  spec.algorithm = Algorithm::Oracle;
  spec.k = 2;
  spec.s = 2;
  spec.format = OutputFormat::Csv;
  spec.output_path = tmp_path("report.csv");
  const RunReport r = run(spec);
  const std::string inline_csv = report_to_csv(r);
  CHECK(inline_csv.rfind("component,variance,cumulative_variance,support,values",
                         0) == 0);
  const std::string file_csv = read_file(spec.output_path);
  CHECK(file_csv == inline_csv);
  std::remove(spec.output_path.c_str());
}

TEST_CASE("workers never leak into reports") {
  auto data = gap_dataset();
  RunSpec one = joint_sketched_spec(data);
  one.workers = 1;
  RunSpec two = joint_sketched_spec(data);
  two.workers = 2;
  RunReport ra = run(one);
  RunReport rb = run(two);
  ra.elapsed_ms = 0.0;
  rb.elapsed_ms = 0.0;
  CHECK(report_to_json(ra) == report_to_json(rb));
}

TEST_CASE("compare runs several algorithms on one dataset") {
  auto data = gap_dataset();
  RunSpec a;
  a.data = data;
  a.algorithm = Algorithm::DeflateExact;
  a.k = 2;
  a.s = 2;
  RunSpec b = a;
  b.algorithm = Algorithm::Oracle;
  const CompareResult c = compare({a, b});
  REQUIRE(c.reports.size() == 2);
  CHECK(c.reports[0].objective <= c.reports[1].objective + 1e-12);
  CHECK(c.reports[1].guarantee_factor == 1.0);

  const std::string csv = compare_to_csv(c);
  CHECK(csv.rfind("algorithm,objective,guarantee_factor,net_points_total,"
                  "net_points_examined,termination,elapsed_ms",
                  0) == 0);
  CHECK(csv.find("oracle") != std::string::npos);
  CHECK(compare_to_json(c).find("\"runs\"") != std::string::npos);

  RunSpec other = b;
  other.k = 1;
  CHECK(code_of([&] { compare({a, other}); }) == ErrorCode::InvalidInput);
  RunSpec foreign = b;
  foreign.data = gap_dataset();  // distinct object, same contents
  CHECK(code_of([&] { compare({a, foreign}); }) == ErrorCode::InvalidInput);
  CHECK(code_of([&] { compare({}); }) == ErrorCode::InvalidInput);
}

TEST_CASE("algorithm names round-trip") {
  for (Algorithm a : {Algorithm::Joint, Algorithm::DeflateTPower,
                      Algorithm::DeflateExact, Algorithm::Oracle}) {
    CHECK(algorithm_from_name(algorithm_name(a)) == a);
  }
  CHECK(code_of([] { algorithm_from_name("pca"); }) == ErrorCode::ParseError);
}

TEST_CASE("run validations") {
  auto data = gap_dataset();
  RunSpec spec;
  spec.data = data;
  spec.algorithm = Algorithm::Joint;
  spec.k = 3;
  spec.s = 2;
  CHECK(code_of([&] { run(spec); }) == ErrorCode::InfeasibleSparsity);

  spec.k = 2;
  spec.eps = 0.0;
  CHECK(code_of([&] { run(spec); }) == ErrorCode::InvalidInput);

  spec.eps = 0.5;
  spec.algorithm = Algorithm::Oracle;
  spec.sketch = SketchSpec{};
  CHECK(code_of([&] { run(spec); }) == ErrorCode::InvalidInput);

  spec.sketch.reset();
  spec.algorithm = Algorithm::DeflateExact;
  spec.time_budget_ms = 50.0;
  CHECK(code_of([&] { run(spec); }) == ErrorCode::InvalidInput);

  RunSpec empty;
  CHECK(code_of([&] { run(empty); }) == ErrorCode::InvalidInput);
}
