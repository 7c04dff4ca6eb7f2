#include "spca/io.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "spca/errors.hpp"
#include "spca/version.hpp"

namespace spca {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, path + ": cannot open");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_double_cell(const std::string& cell, const std::string& path,
                         std::size_t line_no, std::size_t col_no) {
  const std::string where = path + ":" + std::to_string(line_no) + ":" +
                            std::to_string(col_no);
  if (cell.empty()) fail(ErrorCode::ParseError, where + ": empty field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
    fail(ErrorCode::ParseError, where + ": bad number '" + cell + "'");
  return v;
}

// Numeric rows of a CSV file; header names (if any) go to *names.
Matrix parse_numeric_csv(const std::string& path, bool has_header,
                         std::vector<std::string>* names) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool header_pending = has_header;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::vector<std::string> cells = split_csv(lines[li]);
    if (header_pending) {
      header_pending = false;
      if (names) *names = cells;
      width = cells.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(li + 1) + ": expected " +
               std::to_string(width) + " fields, got " +
               std::to_string(cells.size()));
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c)
      row[c] = parse_double_cell(cells[c], path, li + 1, c + 1);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::ParseError, path + ": no data rows");
  Matrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
  return m;
}

std::uint64_t parse_uint_line(const std::string& line, const std::string& path,
                              std::size_t line_no) {
  const std::string cell = trim(line);
  const std::string where = path + ":" + std::to_string(line_no);
  if (cell.empty()) fail(ErrorCode::ParseError, where + ": empty line");
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(cell.c_str(), &end, 10);
  if (end != cell.c_str() + cell.size() || errno == ERANGE)
    fail(ErrorCode::ParseError, where + ": bad integer '" + cell + "'");
  return v;
}

const char* termination_name(Termination t) {
  return t == Termination::Complete ? "complete" : "time_budget";
}

Termination termination_from_name(const std::string& name) {
  if (name == "complete") return Termination::Complete;
  if (name == "time_budget") return Termination::TimeBudget;
  fail(ErrorCode::ParseError, "unknown termination '" + name + "'");
}

SketchMethod sketch_method_from_name(const std::string& name) {
  if (name == "svd") return SketchMethod::TruncatedSvd;
  if (name == "gauss") return SketchMethod::GaussianJl;
  fail(ErrorCode::ParseError, "unknown sketch method '" + name + "'");
}

void fill_from_components(RunReport& r, const PsdMatrix& a, ComponentSet x,
                          double guarantee) {
  r.per_component = per_component_variance(a, x);
  r.objective =
      std::accumulate(r.per_component.begin(), r.per_component.end(), 0.0);
  r.components = std::move(x);
  r.guarantee_factor = guarantee;
  r.termination = Termination::Complete;
}

ordered_json report_json(const RunReport& r) {
  ordered_json spec;
  spec["algorithm"] = algorithm_name(r.algorithm);
  spec["d"] = r.components.dim;
  spec["k"] = r.k;
  spec["s"] = r.s;
  spec["eps"] = r.eps;
  spec["seed"] = r.seed;
  spec["polish"] = r.polish;
  spec["center"] = r.center;
  spec["time_budget_ms"] =
      r.time_budget_ms ? ordered_json(*r.time_budget_ms) : ordered_json(nullptr);

  ordered_json j;
  j["spec"] = std::move(spec);
  j["objective"] = r.objective;
  j["per_component"] = r.per_component;
  ordered_json supports = ordered_json::array();
  ordered_json values = ordered_json::array();
  for (const SparseColumn& c : r.components.columns) {
    supports.push_back(c.support);
    values.push_back(c.values);
  }
  j["supports"] = std::move(supports);
  j["values"] = std::move(values);
  j["net_points_total"] = r.net_points_total;
  j["net_points_examined"] = r.net_points_examined;
  j["guarantee_factor"] = r.guarantee_factor;
  j["elapsed_ms"] = r.elapsed_ms;
  j["termination"] = termination_name(r.termination);
  if (r.sketch) {
    ordered_json sk;
    sk["method"] = sketch_method_name(r.sketch->method);
    sk["r"] = r.sketch->rank;
    sk["seed"] = r.sketch->seed;
    sk["error_lambda1_bound"] = r.sketch_error_lambda1
                                    ? ordered_json(*r.sketch_error_lambda1)
                                    : ordered_json(nullptr);
    j["sketch"] = std::move(sk);
  } else {
    j["sketch"] = nullptr;
  }
  j["library_version"] = r.library_version;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidInput, path + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorCode::InvalidInput, path + ": write failed");
}

void write_outputs(const RunReport& r, const RunSpec& spec) {
  if (!spec.output_path.empty()) {
    const std::string text = spec.format == OutputFormat::Json
                                 ? report_to_json(r) + "\n"
                                 : report_to_csv(r);
    write_text_file(spec.output_path, text);
  }
  if (!spec.topics_path.empty())
    write_text_file(spec.topics_path, topics_csv(r, *spec.data));
}

}  // namespace

std::size_t Dataset::dim() const {
  if (samples) return samples->d;
  if (gram) return gram->dim();
  return 0;
}

PsdMatrix Dataset::to_gram(bool center) const {
  if (gram) {
    if (center)
      fail(ErrorCode::InvalidInput, "cannot center a precomputed Gram matrix");
    return *gram;
  }
  if (!samples) fail(ErrorCode::InvalidInput, "empty dataset");
  return gram_from_data(*samples, center, true);
}

std::string Dataset::feature_name(std::size_t j) const {
  if (j < vocabulary.size()) return vocabulary[j];
  return "v" + std::to_string(j);
}

Dataset load_dense_csv(const std::string& path, bool has_header) {
  Dataset out;
  std::vector<std::string> names;
  Matrix m = parse_numeric_csv(path, has_header, &names);
  DataMatrix dm;
  dm.n = m.rows();
  dm.d = m.cols();
  dm.values = std::move(m);
  dm.centered = false;
  out.samples = std::move(dm);
  if (has_header) out.vocabulary = std::move(names);
  return out;
}

Dataset load_gram_csv(const std::string& path, bool has_header) {
  Dataset out;
  std::vector<std::string> names;
  Matrix m = parse_numeric_csv(path, has_header, &names);
  if (m.rows() != m.cols())
    fail(ErrorCode::ParseError,
         path + ": Gram matrix must be square, got " +
             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  out.gram = PsdMatrix::from_dense(std::move(m), 1e-9);
  if (has_header) out.vocabulary = std::move(names);
  return out;
}

Dataset load_uci_bow(const std::string& docword_path,
                     const std::string& vocab_path) {
  const std::vector<std::string> lines = read_lines(docword_path);
  if (lines.size() < 3)
    fail(ErrorCode::ParseError, docword_path + ": missing header lines");
  const std::uint64_t docs = parse_uint_line(lines[0], docword_path, 1);
  const std::uint64_t words = parse_uint_line(lines[1], docword_path, 2);
  const std::uint64_t nnz = parse_uint_line(lines[2], docword_path, 3);
  if (docs == 0 || words == 0)
    fail(ErrorCode::ParseError, docword_path + ": zero-sized corpus");
  if (docs * words > 10'000'000ull)
    fail(ErrorCode::CapacityExceeded,
         docword_path + ": dense expansion of " + std::to_string(docs) + "x" +
             std::to_string(words) + " is above the 1e7 cell limit");

  Matrix counts(docs, words);
  std::uint64_t seen = 0;
  for (std::size_t li = 3; li < lines.size(); ++li) {
    const std::string line = trim(lines[li]);
    if (line.empty()) continue;
    const std::string where = docword_path + ":" + std::to_string(li + 1);
    if (seen == nnz)
      fail(ErrorCode::ParseError, where + ": more triplets than declared");
    std::istringstream ss(line);
    std::uint64_t doc = 0, word = 0;
    double count = 0.0;
    if (!(ss >> doc >> word >> count))
      fail(ErrorCode::ParseError, where + ": expected 'doc word count'");
    std::string extra;
    if (ss >> extra)
      fail(ErrorCode::ParseError, where + ": trailing data '" + extra + "'");
    if (doc < 1 || doc > docs)
      fail(ErrorCode::ParseError, where + ": document id out of range");
    if (word < 1 || word > words)
      fail(ErrorCode::ParseError, where + ": word id out of range");
    if (!std::isfinite(count))
      fail(ErrorCode::ParseError, where + ": bad count");
    counts(doc - 1, word - 1) += count;
    ++seen;
  }
  if (seen != nnz)
    fail(ErrorCode::ParseError,
         docword_path + ": declared " + std::to_string(nnz) +
             " triplets, found " + std::to_string(seen));

  Dataset out;
  DataMatrix dm;
  dm.n = docs;
  dm.d = words;
  dm.values = std::move(counts);
  dm.centered = false;
  out.samples = std::move(dm);

  if (!vocab_path.empty()) {
    const std::vector<std::string> vocab_lines = read_lines(vocab_path);
    for (const std::string& l : vocab_lines) {
      if (out.vocabulary.size() == words) break;
      out.vocabulary.push_back(trim(l));
    }
    if (out.vocabulary.size() < words)
      fail(ErrorCode::ParseError,
           vocab_path + ": expected " + std::to_string(words) + " entries");
  }
  return out;
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Joint:
      return "joint";
    case Algorithm::DeflateTPower:
      return "deflate-tpower";
    case Algorithm::DeflateExact:
      return "deflate-exact";
    case Algorithm::Oracle:
      return "oracle";
  }
  return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "joint") return Algorithm::Joint;
  if (name == "deflate-tpower") return Algorithm::DeflateTPower;
  if (name == "deflate-exact") return Algorithm::DeflateExact;
  if (name == "oracle") return Algorithm::Oracle;
  fail(ErrorCode::ParseError, "unknown algorithm '" + name + "'");
}

RunReport run(const RunSpec& spec) {
  if (!spec.data) fail(ErrorCode::InvalidInput, "run: no dataset");
  const std::size_t d = spec.data->dim();
  if (d == 0) fail(ErrorCode::InvalidInput, "run: empty dataset");
  if (spec.k == 0 || spec.s == 0)
    fail(ErrorCode::InvalidInput, "run: k and s must be >= 1");
  if (spec.k * spec.s > d)
    fail(ErrorCode::InfeasibleSparsity,
         "run: k * s = " + std::to_string(spec.k * spec.s) +
             " exceeds dimension " + std::to_string(d));
  if (spec.algorithm == Algorithm::Joint && !(spec.eps > 0.0 && spec.eps <= 1.0))
    fail(ErrorCode::InvalidInput, "run: eps must be in (0, 1]");
  if (spec.sketch && spec.algorithm != Algorithm::Joint)
    fail(ErrorCode::InvalidInput, "run: sketching applies to the joint solver");
  if (spec.time_budget_ms && spec.algorithm != Algorithm::Joint)
    fail(ErrorCode::InvalidInput, "run: time budget applies to the joint solver");

  const auto t0 = std::chrono::steady_clock::now();
  const PsdMatrix a = spec.data->to_gram(spec.center);

  RunReport r;
  r.algorithm = spec.algorithm;
  r.k = spec.k;
  r.s = spec.s;
  r.eps = spec.eps;
  r.seed = spec.seed;
  r.polish = spec.polish;
  r.center = spec.center;
  r.time_budget_ms = spec.time_budget_ms;
  r.sketch = spec.sketch;
  r.library_version = kVersion;

  switch (spec.algorithm) {
    case Algorithm::Joint: {
      EigFactor factor;
      if (spec.sketch) {
        SketchResult sk =
            spec.sketch->method == SketchMethod::TruncatedSvd
                ? svd_sketch(a, spec.sketch->rank)
                : gaussian_sketch(a, spec.sketch->rank, spec.sketch->seed);
        factor = std::move(sk.factor);
        r.sketch_error_lambda1 = sk.error_lambda1;
      } else {
        factor = sym_eig_truncated(a);
      }
      SolverConfig cfg;
      cfg.k = spec.k;
      cfg.s = spec.s;
      cfg.eps = spec.eps;
      cfg.polish = spec.polish;
      cfg.seed = spec.seed;
      cfg.time_budget_ms = spec.time_budget_ms;
      cfg.workers = spec.workers;
      SolveReport sr = solve_multi_spca(factor, a, cfg);
      r.components = std::move(sr.best);
      r.objective = sr.objective;
      r.per_component = std::move(sr.per_component);
      r.net_points_total = sr.net_points_total;
      r.net_points_examined = sr.net_points_examined;
      r.guarantee_factor = sr.guarantee_factor;
      r.termination = sr.termination;
      break;
    }
    case Algorithm::DeflateTPower:
    case Algorithm::DeflateExact: {
      const SingleSolver single = spec.algorithm == Algorithm::DeflateExact
                                      ? exact_single_solver()
                                      : tpower_solver({.seed = spec.seed});
      ComponentSet x = deflate_greedy(a, spec.k, spec.s, single);
      if (spec.polish) x = polish(a, x.supports());
      fill_from_components(r, a, std::move(x), 0.0);
      break;
    }
    case Algorithm::Oracle: {
      const OracleResult o = brute_force_opt(a, spec.k, spec.s);
      fill_from_components(r, a, polish(a, o.opt_supports), 1.0);
      break;
    }
  }

  r.elapsed_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t0)
                     .count();
  write_outputs(r, spec);
  return r;
}

std::string report_to_json(const RunReport& r) { return report_json(r).dump(2); }

RunReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::ParseError, std::string("report JSON: ") + e.what());
  }
  try {
    RunReport r;
    const ordered_json& spec = j.at("spec");
    r.algorithm = algorithm_from_name(spec.at("algorithm").get<std::string>());
    const std::size_t d = spec.at("d").get<std::size_t>();
    r.k = spec.at("k").get<std::size_t>();
    r.s = spec.at("s").get<std::size_t>();
    r.eps = spec.at("eps").get<double>();
    r.seed = spec.at("seed").get<std::uint64_t>();
    r.polish = spec.at("polish").get<bool>();
    r.center = spec.at("center").get<bool>();
    if (!spec.at("time_budget_ms").is_null())
      r.time_budget_ms = spec.at("time_budget_ms").get<double>();

    r.objective = j.at("objective").get<double>();
    r.per_component = j.at("per_component").get<std::vector<double>>();
    const auto supports = j.at("supports").get<std::vector<std::vector<int>>>();
    const auto values =
        j.at("values").get<std::vector<std::vector<double>>>();
    if (supports.size() != values.size())
      fail(ErrorCode::ParseError, "supports/values length mismatch");
    r.components.dim = d;
    r.components.count = supports.size();
    r.components.sparsity = r.s;
    for (std::size_t i = 0; i < supports.size(); ++i) {
      if (supports[i].size() != values[i].size())
        fail(ErrorCode::ParseError, "support/value column length mismatch");
      r.components.columns.push_back({supports[i], values[i]});
    }
    r.net_points_total = j.at("net_points_total").get<std::uint64_t>();
    r.net_points_examined = j.at("net_points_examined").get<std::uint64_t>();
    r.guarantee_factor = j.at("guarantee_factor").get<double>();
    r.elapsed_ms = j.at("elapsed_ms").get<double>();
    r.termination =
        termination_from_name(j.at("termination").get<std::string>());
    if (!j.at("sketch").is_null()) {
      const ordered_json& sk = j.at("sketch");
      SketchSpec ss;
      ss.method = sketch_method_from_name(sk.at("method").get<std::string>());
      ss.rank = sk.at("r").get<std::size_t>();
      ss.seed = sk.at("seed").get<std::uint64_t>();
      r.sketch = ss;
      if (!sk.at("error_lambda1_bound").is_null())
        r.sketch_error_lambda1 = sk.at("error_lambda1_bound").get<double>();
    }
    r.library_version = j.at("library_version").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("report JSON: ") + e.what());
  }
}

std::string report_to_csv(const RunReport& r) {
  std::string out = "component,variance,cumulative_variance,support,values\n";
  double cum = 0.0;
  for (std::size_t i = 0; i < r.components.columns.size(); ++i) {
    const SparseColumn& c = r.components.columns[i];
    const double v = i < r.per_component.size() ? r.per_component[i] : 0.0;
    cum += v;
    out += std::to_string(i + 1) + "," + fmt17(v) + "," + fmt17(cum) + ",";
    for (std::size_t t = 0; t < c.support.size(); ++t) {
      if (t) out += " ";
      out += std::to_string(c.support[t]);
    }
    out += ",";
    for (std::size_t t = 0; t < c.values.size(); ++t) {
      if (t) out += " ";
      out += fmt17(c.values[t]);
    }
    out += "\n";
  }
  return out;
}

std::string topics_csv(const RunReport& r, const Dataset& data) {
  std::string out = "topic,rank,word,value\n";
  for (std::size_t t = 0; t < r.components.columns.size(); ++t) {
    const SparseColumn& c = r.components.columns[t];
    std::vector<std::size_t> order(c.support.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t p, std::size_t q) {
                       return std::abs(c.values[p]) > std::abs(c.values[q]);
                     });
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const std::size_t p = order[rank];
      out += std::to_string(t + 1) + "," + std::to_string(rank + 1) + "," +
             data.feature_name(static_cast<std::size_t>(c.support[p])) + "," +
             fmt17(c.values[p]) + "\n";
    }
  }
  return out;
}

CompareResult compare(const std::vector<RunSpec>& specs) {
  if (specs.empty()) fail(ErrorCode::InvalidInput, "compare: no runs requested");
  for (const RunSpec& s : specs) {
    if (!s.data) fail(ErrorCode::InvalidInput, "compare: missing dataset");
    if (s.data != specs.front().data)
      fail(ErrorCode::InvalidInput, "compare: all runs must share one dataset");
    if (s.k != specs.front().k || s.s != specs.front().s)
      fail(ErrorCode::InvalidInput, "compare: all runs must share k and s");
  }
  CompareResult out;
  out.reports.reserve(specs.size());
  for (const RunSpec& s : specs) out.reports.push_back(run(s));
  return out;
}

std::string compare_to_json(const CompareResult& c) {
  ordered_json j;
  ordered_json runs = ordered_json::array();
  for (const RunReport& r : c.reports) runs.push_back(report_json(r));
  j["runs"] = std::move(runs);
  return j.dump(2);
}

std::string compare_to_csv(const CompareResult& c) {
  std::string out =
      "algorithm,objective,guarantee_factor,net_points_total,"
      "net_points_examined,termination,elapsed_ms\n";
  for (const RunReport& r : c.reports) {
    out += std::string(algorithm_name(r.algorithm)) + "," + fmt17(r.objective) +
           "," + fmt17(r.guarantee_factor) + "," +
           std::to_string(r.net_points_total) + "," +
           std::to_string(r.net_points_examined) + "," +
           termination_name(r.termination) + "," + fmt17(r.elapsed_ms) + "\n";
  }
  return out;
}

}  // namespace spca
