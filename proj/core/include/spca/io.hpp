#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spca/baselines.hpp"
#include "spca/linalg.hpp"
#include "spca/sketch.hpp"
#include "spca/solver.hpp"

namespace spca {

// A loaded dataset: raw samples or a precomputed Gram matrix, plus optional
// feature names (word list for bag-of-words input).
struct Dataset {
  std::optional<DataMatrix> samples;
  std::optional<PsdMatrix> gram;
  std::vector<std::string> vocabulary;  // empty or size dim()
  bool center_default = false;

  std::size_t dim() const;
  // Gram matrix of the dataset. Centering raw samples is allowed; asking to
  // center a precomputed Gram matrix is an error.
  PsdMatrix to_gram(bool center) const;
  // vocabulary[j] when present, "v<j>" otherwise.
  std::string feature_name(std::size_t j) const;
};

// Numeric CSV, one sample per row. With has_header the first row supplies
// feature names. Parse failures throw ParseError with line/column positions.
Dataset load_dense_csv(const std::string& path, bool has_header);

// Numeric CSV holding a symmetric matrix.
Dataset load_gram_csv(const std::string& path, bool has_header);

// UCI sparse bag-of-words: three header lines (docs D, vocabulary size W,
// entry count NNZ) then "doc word count" triplets, 1-indexed. Duplicate
// triplets accumulate. vocab_path may be empty; when given it must supply at
// least W lines. Dense expansion is refused above 10^7 cells.
Dataset load_uci_bow(const std::string& docword_path,
                     const std::string& vocab_path);

enum class Algorithm { Joint, DeflateTPower, DeflateExact, Oracle };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);  // ParseError

struct SketchSpec {
  SketchMethod method = SketchMethod::TruncatedSvd;
  std::size_t rank = 4;
  std::uint64_t seed = 0;
};

enum class OutputFormat { Json, Csv };

// One solver invocation. `workers` affects scheduling only and is therefore
// not echoed into reports.
struct RunSpec {
  std::shared_ptr<const Dataset> data;
  Algorithm algorithm = Algorithm::Joint;
  std::size_t k = 1;
  std::size_t s = 1;
  double eps = 0.5;
  std::optional<SketchSpec> sketch;      // Joint only
  std::optional<double> time_budget_ms;  // Joint only
  std::uint64_t seed = 0;
  bool polish = true;
  bool center = false;
  unsigned workers = 1;
  std::string output_path;  // empty: do not write a file
  std::string topics_path;  // empty: no topics table
  OutputFormat format = OutputFormat::Json;
};

struct RunReport {
  Algorithm algorithm = Algorithm::Joint;
  std::size_t k = 0;
  std::size_t s = 0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  bool polish = false;
  bool center = false;
  std::optional<double> time_budget_ms;

  ComponentSet components;
  double objective = 0.0;
  std::vector<double> per_component;
  std::uint64_t net_points_total = 0;
  std::uint64_t net_points_examined = 0;
  double guarantee_factor = 0.0;
  double elapsed_ms = 0.0;
  Termination termination = Termination::Complete;

  std::optional<SketchSpec> sketch;
  std::optional<double> sketch_error_lambda1;  // bound echo, with sketch only

  std::string library_version;
};

// Executes the spec and writes any requested output files.
RunReport run(const RunSpec& spec);

std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);  // ParseError
std::string report_to_csv(const RunReport& r);

// Topics table: topic,rank,word,value with each topic's entries ordered by
// decreasing |value|.
std::string topics_csv(const RunReport& r, const Dataset& data);

struct CompareResult {
  std::vector<RunReport> reports;
};

// Runs several algorithms on one dataset. All specs must share the dataset,
// k, and s. Per-spec output files are honored as in run().
CompareResult compare(const std::vector<RunSpec>& specs);

std::string compare_to_json(const CompareResult& c);
std::string compare_to_csv(const CompareResult& c);

}  // namespace spca
