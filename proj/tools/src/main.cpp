#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spca/errors.hpp"
#include "spca/io.hpp"
#include "spca/sphere_net.hpp"
#include "spca/version.hpp"

namespace {

using spca::Algorithm;
using spca::ErrorCode;

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::CapacityExceeded:
      return 3;
    case ErrorCode::InternalInvariantViolation:
      return 4;
    default:
      return 2;  // bad input of one kind or another
  }
}

unsigned default_workers() {
  const char* env = std::getenv("SPCA_WORKERS");
  if (!env) return 1;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (end == env || *end != '\0' || v == 0 || v > 1024) return 1;
  return static_cast<unsigned>(v);
}

struct DatasetArgs {
  std::string input, gram, bow, vocab;
  bool header = false;
};

void add_dataset_args(CLI::App* cmd, DatasetArgs& d) {
  auto* in =
      cmd->add_option("--input", d.input, "Dense CSV, one sample per row");
  auto* gr =
      cmd->add_option("--gram", d.gram, "CSV holding a precomputed Gram matrix");
  auto* bw = cmd->add_option("--bow", d.bow, "UCI bag-of-words docword file");
  cmd->add_option("--vocab", d.vocab, "Word list for --bow, one word per line");
  cmd->add_flag("--header", d.header, "First CSV row holds feature names");
  in->excludes(gr);
  in->excludes(bw);
  gr->excludes(bw);
}

std::shared_ptr<spca::Dataset> load_dataset(const DatasetArgs& d) {
  const int given =
      (!d.input.empty()) + (!d.gram.empty()) + (!d.bow.empty());
  if (given != 1)
    spca::fail(ErrorCode::InvalidInput,
               "exactly one of --input, --gram, --bow is required");
  if (!d.input.empty())
    return std::make_shared<spca::Dataset>(
        spca::load_dense_csv(d.input, d.header));
  if (!d.gram.empty())
    return std::make_shared<spca::Dataset>(
        spca::load_gram_csv(d.gram, d.header));
  return std::make_shared<spca::Dataset>(spca::load_uci_bow(d.bow, d.vocab));
}

struct SolverArgs {
  std::size_t k = 1;
  std::size_t s = 1;
  double eps = 0.5;
  std::uint64_t seed = 0;
  bool polish = true;
  bool center = false;
  unsigned workers = 1;
  std::string sketch = "svd";
  std::size_t rank = 4;
  double time_budget_ms = 0.0;
  CLI::Option* budget_opt = nullptr;
  CLI::Option* sketch_opt = nullptr;
  std::string output, topics, format = "json";
};

void add_solver_args(CLI::App* cmd, SolverArgs& a, bool joint_options) {
  cmd->add_option("-k,--k", a.k, "Number of components")->capture_default_str();
  cmd->add_option("-s,--s", a.s, "Support size per component")
      ->capture_default_str();
  cmd->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
  cmd->add_flag("--polish,!--no-polish", a.polish,
                "Replace each column by the exact restricted eigenvector");
  cmd->add_flag("--center,!--no-center", a.center, "Mean-center raw samples");
  cmd->add_option("--workers", a.workers,
                  "Scan threads (default: SPCA_WORKERS or 1)");
  cmd->add_option("--output", a.output, "Write the report to this file");
  cmd->add_option("--topics", a.topics, "Write a topic table to this file");
  cmd->add_option("--format", a.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  if (joint_options) {
    cmd->add_option("--eps", a.eps, "Accuracy parameter in (0, 1]")
        ->capture_default_str();
    a.sketch_opt = cmd->add_option("--sketch", a.sketch,
                                   "Low-rank sketch before the scan")
                       ->check(CLI::IsMember({"svd", "gauss", "none"}))
                       ->capture_default_str();
    cmd->add_option("--rank", a.rank, "Sketch rank")->capture_default_str();
    a.budget_opt = cmd->add_option("--time-budget-ms", a.time_budget_ms,
                                   "Stop the scan after this many milliseconds");
  }
}

spca::RunSpec make_spec(std::shared_ptr<const spca::Dataset> data,
                        const SolverArgs& a, Algorithm alg) {
  spca::RunSpec spec;
  spec.data = std::move(data);
  spec.algorithm = alg;
  spec.k = a.k;
  spec.s = a.s;
  spec.eps = a.eps;
  spec.seed = a.seed;
  spec.polish = a.polish;
  spec.center = a.center;
  spec.workers = a.workers;
  spec.output_path = a.output;
  spec.topics_path = a.topics;
  spec.format =
      a.format == "csv" ? spca::OutputFormat::Csv : spca::OutputFormat::Json;
  if (alg == Algorithm::Joint) {
    if (a.sketch != "none") {
      spca::SketchSpec sk;
      sk.method = a.sketch == "gauss" ? spca::SketchMethod::GaussianJl
                                      : spca::SketchMethod::TruncatedSvd;
      sk.rank = a.rank;
      sk.seed = a.seed;
      spec.sketch = sk;
    }
    if (a.budget_opt && a.budget_opt->count() > 0)
      spec.time_budget_ms = a.time_budget_ms;
  }
  return spec;
}

void print_report(const spca::RunReport& rep, const std::string& format) {
  if (format == "csv")
    std::cout << spca::report_to_csv(rep);
  else
    std::cout << spca::report_to_json(rep) << "\n";
}

void write_file_or_die(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) spca::fail(ErrorCode::InvalidInput, path + ": cannot open");
  out << text;
  out.flush();
  if (!out) spca::fail(ErrorCode::InvalidInput, path + ": write failed");
}

std::vector<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) spca::fail(ErrorCode::ParseError, path + ": cannot open");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    words.push_back(line);
  }
  return words;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse PCA with disjoint supports"};
  app.set_version_flag("--version", std::string(spca::kVersion));
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Run one algorithm on a dataset");
  DatasetArgs solve_data;
  SolverArgs solve_args;
  solve_args.workers = default_workers();
  std::string solve_algorithm = "joint";
  add_dataset_args(solve, solve_data);
  add_solver_args(solve, solve_args, true);
  solve->add_option("--algorithm", solve_algorithm, "Algorithm to run")
      ->check(CLI::IsMember(
          {"joint", "deflate-tpower", "deflate-exact", "oracle"}))
      ->capture_default_str();

  // compare
  auto* cmp = app.add_subcommand("compare",
                                 "Run several algorithms on one dataset");
  DatasetArgs cmp_data;
  SolverArgs cmp_args;
  cmp_args.workers = default_workers();
  std::string cmp_algorithms = "joint,deflate-tpower,deflate-exact";
  add_dataset_args(cmp, cmp_data);
  add_solver_args(cmp, cmp_args, true);
  cmp->add_option("--algorithms", cmp_algorithms,
                  "Comma-separated list of algorithms")
      ->capture_default_str();

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum");
  DatasetArgs oracle_data;
  SolverArgs oracle_args;
  oracle_args.workers = default_workers();
  add_dataset_args(oracle, oracle_data);
  add_solver_args(oracle, oracle_args, false);

  // netinfo
  auto* netinfo = app.add_subcommand("netinfo", "Sphere net statistics");
  std::size_t net_r = 2;
  double net_eps = 0.5;
  std::string net_construction = "angular";
  std::uint64_t net_seed = 0;
  bool net_antipodal = false;
  std::string net_dump;
  std::size_t net_trials = 0;
  netinfo->add_option("--r", net_r, "Sphere dimension")->capture_default_str();
  netinfo->add_option("--eps", net_eps, "Net resolution in (0, 1]")
      ->capture_default_str();
  netinfo->add_option("--construction", net_construction, "Net construction")
      ->check(CLI::IsMember({"angular", "greedy"}))
      ->capture_default_str();
  netinfo->add_option("--seed", net_seed, "Seed for greedy construction")
      ->capture_default_str();
  netinfo->add_flag("--antipodal", net_antipodal,
                    "Collapse each antipodal pair to one point");
  netinfo->add_option("--dump", net_dump, "Write net points to this file");
  netinfo->add_option("--trials", net_trials,
                      "Random covering-check trials (0: skip)");

  // topics
  auto* topics = app.add_subcommand("topics", "Topic table from a saved report");
  std::string topics_report, topics_vocab, topics_output;
  topics->add_option("--report", topics_report, "Report JSON file")->required();
  topics->add_option("--vocab", topics_vocab, "Word list, one word per line");
  topics->add_option("--output", topics_output, "Write the table here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const auto data = load_dataset(solve_data);
      const spca::RunSpec spec =
          make_spec(data, solve_args, spca::algorithm_from_name(solve_algorithm));
      print_report(spca::run(spec), solve_args.format);
    } else if (cmp->parsed()) {
      const auto data = load_dataset(cmp_data);
      std::vector<spca::RunSpec> specs;
      for (const std::string& name : split_list(cmp_algorithms)) {
        spca::RunSpec spec =
            make_spec(data, cmp_args, spca::algorithm_from_name(name));
        spec.output_path.clear();
        spec.topics_path.clear();
        specs.push_back(std::move(spec));
      }
      const spca::CompareResult res = spca::compare(specs);
      const std::string text = cmp_args.format == "csv"
                                   ? spca::compare_to_csv(res)
                                   : spca::compare_to_json(res) + "\n";
      std::cout << text;
      if (!cmp_args.output.empty()) write_file_or_die(cmp_args.output, text);
    } else if (oracle->parsed()) {
      const auto data = load_dataset(oracle_data);
      const spca::RunSpec spec =
          make_spec(data, oracle_args, Algorithm::Oracle);
      print_report(spca::run(spec), oracle_args.format);
    } else if (netinfo->parsed()) {
      spca::SphereNet net = spca::build_sphere_net(
          net_r, net_eps,
          net_construction == "greedy" ? spca::NetConstruction::GreedyCover
                                       : spca::NetConstruction::AngularGrid,
          net_seed);
      if (net_antipodal) net = spca::antipodal_reduce(net);
      if (!net_dump.empty()) {
        std::ofstream out(net_dump, std::ios::binary);
        if (!out) spca::fail(ErrorCode::InvalidInput, net_dump + ": cannot open");
        spca::dump_net(net, out);
      }
      nlohmann::ordered_json j;
      j["r"] = net.dim;
      j["eps"] = net.eps;
      j["construction"] = net_construction;
      j["antipodal"] = net.antipodal_reduced;
      j["points"] = net.points.size();
      j["card_constant"] = net.card_constant;
      if (net_trials > 0) {
        const spca::CoveringReport rep =
            spca::covering_check(net, net_trials, net_seed);
        nlohmann::ordered_json c;
        c["trials"] = rep.trials;
        c["violations"] = rep.violations;
        c["max_gap"] = rep.max_gap;
        j["covering"] = std::move(c);
      }
      std::cout << j.dump(2) << "\n";
    } else if (topics->parsed()) {
      std::ifstream in(topics_report, std::ios::binary);
      if (!in)
        spca::fail(ErrorCode::ParseError, topics_report + ": cannot open");
      std::stringstream buf;
      buf << in.rdbuf();
      const spca::RunReport rep = spca::report_from_json(buf.str());
      spca::Dataset names;
      if (!topics_vocab.empty()) names.vocabulary = read_word_list(topics_vocab);
      const std::string table = spca::topics_csv(rep, names);
      if (topics_output.empty())
        std::cout << table;
      else
        write_file_or_die(topics_output, table);
    }
  } catch (const spca::Error& e) {
    std::cerr << "error (" << spca::error_code_name(e.code()) << "): "
              << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
