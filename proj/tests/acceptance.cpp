// Acceptance harness: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "spca/baselines.hpp"
#include "spca/io.hpp"
#include "spca/linalg.hpp"
#include "spca/matching.hpp"
#include "spca/rng.hpp"
#include "spca/sketch.hpp"
#include "spca/solver.hpp"
#include "spca/sphere_net.hpp"

using namespace spca;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PsdMatrix random_low_rank(std::size_t d, std::size_t rank, Rng& rng) {
  Matrix b(d, rank);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < rank; ++j) b(i, j) = rng.normal();
  return PsdMatrix::from_dense(matmul(b, transpose(b)));
}

std::shared_ptr<Dataset> gap_dataset() {
  auto data = std::make_shared<Dataset>();
  data->gram = deflation_gap_instance(0.1, 0.1);
  return data;
}

RunSpec criterion1_joint_spec(std::shared_ptr<const Dataset> data) {
  RunSpec spec;
  spec.data = std::move(data);
  spec.algorithm = Algorithm::Joint;
  spec.k = 2;
  spec.s = 2;
  spec.eps = 0.9;
  SketchSpec sk;
  sk.method = SketchMethod::TruncatedSvd;
  sk.rank = 4;
  spec.sketch = sk;
  spec.polish = true;
  spec.workers = 1;
  return spec;
}

// Sum of squared weights over each column's selected support, the quantity
// the matching maximizes.
double restricted_mass(const Matrix& w, const ComponentSet& x) {
  double out = 0.0;
  for (std::size_t g = 0; g < x.columns.size(); ++g)
    for (int i : x.columns[g].support) {
      const double v = w(static_cast<std::size_t>(i), g);
      out += v * v;
    }
  return out;
}

// Reference optimum over all disjoint support assignments.
double exhaustive_mass(const Matrix& w, std::size_t k, std::size_t s) {
  const std::size_t d = w.rows();
  std::vector<std::size_t> load(k, 0);
  double best = -std::numeric_limits<double>::infinity();
  auto rec = [&](auto&& self, std::size_t var, double acc) -> void {
    std::size_t deficit = 0;
    for (std::size_t g = 0; g < k; ++g) deficit += s - load[g];
    if (d - var < deficit) return;  // not enough variables left
    if (var == d) {
      if (deficit == 0) best = std::max(best, acc);
      return;
    }
    self(self, var + 1, acc);
    for (std::size_t g = 0; g < k; ++g) {
      if (load[g] == s) continue;
      load[g] += 1;
      const double v = w(var, g);
      self(self, var + 1, acc + v * v);
      load[g] -= 1;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return std::string(buf);
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, bool ok, const std::string& msg) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", n,
                msg.c_str());
    if (!ok) ++failures;
  };

  // 1. Deflation gap: deflate 1.2, oracle 2.0, joint >= 1.99 within 60 s.
  try {
    const auto t0 = Clock::now();
    auto data = gap_dataset();
    RunSpec base;
    base.data = data;
    base.k = 2;
    base.s = 2;
    RunSpec dspec = base;
    dspec.algorithm = Algorithm::DeflateExact;
    const double deflate = run(dspec).objective;
    RunSpec ospec = base;
    ospec.algorithm = Algorithm::Oracle;
    const double oracle = run(ospec).objective;
    const double joint = run(criterion1_joint_spec(data)).objective;
    const double secs = seconds_since(t0);
    const bool ok = std::abs(deflate - 1.2) <= 1e-9 &&
                    std::abs(oracle - 2.0) <= 1e-9 && joint >= 1.99 &&
                    secs < 60.0;
    report(1, ok,
           fmt("deflate %.9f, oracle %.9f, joint %.9f in %.1f s", deflate,
               oracle, joint, secs));
  } catch (const std::exception& e) {
    report(1, false, fmt("exception: %s", e.what()));
  }

  // 2. Scan guarantee on 200 seeded low-rank instances.
  try {
    const auto t0 = Clock::now();
    int violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 200; ++i) {
      Rng rng(2000 + static_cast<std::uint64_t>(i));
      const std::size_t d = 4 + static_cast<std::size_t>(i % 5);
      const std::size_t rank = 1 + static_cast<std::size_t>(i % 3);
      const std::size_t k = 1 + static_cast<std::size_t>((i / 2) % 2);
      const std::size_t s = 1 + static_cast<std::size_t>((i / 3) % 2);
      const double eps = (i % 2) ? 0.6 : 0.3;
      const PsdMatrix a = random_low_rank(d, rank, rng);
      SolverConfig cfg;
      cfg.k = k;
      cfg.s = s;
      cfg.eps = eps;
      const SolveReport rep = solve_multi_spca(sym_eig_truncated(a), a, cfg);
      const double opt = brute_force_opt(a, k, s).opt_value;
      const double margin = rep.objective - (1.0 - eps) * opt;
      worst_margin = std::min(worst_margin, margin);
      if (rep.termination != Termination::Complete || margin < -1e-9)
        ++violations;
    }
    const double secs = seconds_since(t0);
    report(2, violations == 0 && secs < 600.0,
           fmt("%d/200 violations, worst margin %.2e, %.1f s", violations,
               worst_margin, secs));
  } catch (const std::exception& e) {
    report(2, false, fmt("exception: %s", e.what()));
  }

  // 3. Candidate solutions match the matching weight and brute force.
  try {
    int bad = 0;
    for (int i = 0; i < 500; ++i) {
      Rng rng(3000 + static_cast<std::uint64_t>(i));
      const std::size_t d = 2 + static_cast<std::size_t>(i % 6);
      const std::size_t cap = std::min<std::size_t>(5, d);
      const std::size_t k =
          1 + static_cast<std::size_t>(i) % std::min<std::size_t>(3, cap);
      const std::size_t s = 1 + static_cast<std::size_t>(i / 7) % (cap / k);
      Matrix w(d, k);
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < k; ++c) w(r, c) = rng.normal();
      if (i % 10 == 0) {
        const std::size_t dead = static_cast<std::size_t>(i) % k;
        for (std::size_t r = 0; r < d; ++r) w(r, dead) = 0.0;
      }
      const ComponentSet x = candidate_solution(w, s);
      const double mass = restricted_mass(w, x);
      const double match =
          max_weight_perfect_matching(gen_bigraph(w, s)).total_weight;
      const double brute = exhaustive_mass(w, k, s);
      if (std::abs(mass - match) > 1e-9 || std::abs(mass - brute) > 1e-9)
        ++bad;
    }
    report(3, bad == 0, fmt("%d/500 mismatches", bad));
  } catch (const std::exception& e) {
    report(3, false, fmt("exception: %s", e.what()));
  }

  // 4. k = 1 degeneracy: supports are the s largest squared entries.
  try {
    int bad = 0;
    for (int i = 0; i < 100; ++i) {
      Rng rng(4000 + static_cast<std::uint64_t>(i));
      const std::size_t d = 3 + static_cast<std::size_t>(i % 8);
      const std::size_t s = 1 + static_cast<std::size_t>(i % 3);
      Matrix w(d, 1);
      for (std::size_t r = 0; r < d; ++r) {
        w(r, 0) = rng.normal();
        if (i % 2) w(r, 0) = std::round(w(r, 0) * 10.0) / 10.0;  // force ties
      }
      const ComponentSet x = candidate_solution(w, s);
      std::vector<int> idx(d);
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int p, int q) {
        return w(p, 0) * w(p, 0) > w(q, 0) * w(q, 0);
      });
      idx.resize(s);
      std::sort(idx.begin(), idx.end());
      if (x.columns[0].support != idx) ++bad;
    }
    report(4, bad == 0, fmt("%d/100 mismatches", bad));
  } catch (const std::exception& e) {
    report(4, false, fmt("exception: %s", e.what()));
  }

  // 5. Net covering at 1e5 samples per configuration.
  try {
    const std::vector<std::pair<std::size_t, double>> cases = {
        {2, 0.6}, {3, 0.8}, {4, 0.9}};
    bool ok = true;
    double worst_ratio = 0.0;
    std::size_t total_violations = 0;
    for (const auto& [r, eps] : cases) {
      const SphereNet net = build_sphere_net(r, eps);
      const CoveringReport rep = covering_check(net, 100000, 99);
      total_violations += rep.violations;
      worst_ratio = std::max(worst_ratio, rep.max_gap / (eps / 2.0));
      if (rep.violations != 0 || rep.max_gap > eps / 2.0) ok = false;
    }
    report(5, ok,
           fmt("%zu violations over 3 nets, worst gap at %.0f%% of eps/2",
               total_violations, 100.0 * worst_ratio));
  } catch (const std::exception& e) {
    report(5, false, fmt("exception: %s", e.what()));
  }

  // 6. Sketched scan clears the lambda_1 relaxation bound.
  try {
    int violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
      Rng rng(6000 + static_cast<std::uint64_t>(i));
      const std::size_t d = 4 + static_cast<std::size_t>(i % 5);
      const std::size_t k = 1 + static_cast<std::size_t>(i % 2);
      const std::size_t s = 1 + static_cast<std::size_t>((i / 2) % 2);
      const std::size_t r = 1 + static_cast<std::size_t>((i / 5) % 2);
      const double eps = ((i / 3) % 2) ? 0.6 : 0.3;
      Matrix m(d, d);
      for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = 0; q < d; ++q) m(p, q) = rng.normal();
      Matrix g = matmul(m, transpose(m));
      for (std::size_t p = 0; p < d; ++p) g(p, p) += 0.1;  // full rank
      const PsdMatrix a = PsdMatrix::from_dense(std::move(g));
      const SketchResult sk = svd_sketch(a, r);
      SolverConfig cfg;
      cfg.k = k;
      cfg.s = s;
      cfg.eps = eps;
      const SolveReport rep = solve_multi_spca(sk.factor, a, cfg);
      const double opt = brute_force_opt(a, k, s).opt_value;
      const double margin =
          rep.objective - ((1.0 - eps) * opt - sketch_error_term(sk, k));
      worst_margin = std::min(worst_margin, margin);
      if (rep.termination != Termination::Complete || margin < -1e-9)
        ++violations;
    }
    report(6, violations == 0,
           fmt("%d/50 violations, worst margin %.2e", violations,
               worst_margin));
  } catch (const std::exception& e) {
    report(6, false, fmt("exception: %s", e.what()));
  }

  // 7. Gaussian sketch at the JL rank keeps entries within eps.
  try {
    Rng inst(7000);
    const std::size_t d = 16;
    Matrix v(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      const std::vector<double> u = inst.unit_vector(d);
      const double scale = 0.5 + 0.4 * inst.uniform();
      for (std::size_t j = 0; j < d; ++j) v(i, j) = scale * u[j];
    }
    const PsdMatrix a = PsdMatrix::from_dense(matmul(v, transpose(v)));
    const std::size_t r = 45;  // ceil(4 * 0.5^-2 * ln 16)
    int good = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const SketchResult sk = gaussian_sketch(a, r, seed);
      double dev = 0.0;
      for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = 0; q < d; ++q)
          dev = std::max(dev, std::abs(sk.a_bar(p, q) - a(p, q)));
      worst = std::max(worst, dev);
      if (dev <= 0.5) ++good;
    }
    report(7, good >= 95,
           fmt("%d/100 trials within 0.5 (worst deviation %.3f)", good,
               worst));
  } catch (const std::exception& e) {
    report(7, false, fmt("exception: %s", e.what()));
  }

  // 8. Worker count never changes the report payload.
  try {
    auto data = gap_dataset();
    RunSpec one = criterion1_joint_spec(data);
    one.workers = 1;
    RunSpec four = criterion1_joint_spec(data);
    four.workers = 4;
    RunReport ra = run(one);
    RunReport rb = run(four);
    ra.elapsed_ms = 0.0;
    rb.elapsed_ms = 0.0;
    const bool ok = report_to_json(ra) == report_to_json(rb);
    report(8, ok,
           ok ? "workers 1 and 4 produce byte-identical reports"
              : "reports differ between worker counts");
  } catch (const std::exception& e) {
    report(8, false, fmt("exception: %s", e.what()));
  }

  // 9. Synthetic corpus: joint beats the scaled deflation value and the topic
  // table is ordered by |value|.
  try {
    Rng rng(777);
    const std::size_t n = 200, d = 50;
    Matrix counts(n, d);
    for (std::size_t doc = 0; doc < n; ++doc) {
      for (std::size_t word = 0; word < d; ++word) {
        double c = std::floor(rng.uniform() * 3.0);
        const bool topic_a = doc < 100 && word < 5;
        const bool topic_b = doc >= 100 && word >= 5 && word < 10;
        if (topic_a || topic_b) c += std::floor(rng.uniform() * 15.0);
        counts(doc, word) = c;
      }
    }
    auto data = std::make_shared<Dataset>();
    DataMatrix dm;
    dm.n = n;
    dm.d = d;
    dm.values = std::move(counts);
    data->samples = std::move(dm);
    for (std::size_t j = 0; j < d; ++j)
      data->vocabulary.push_back(fmt("w%02zu", j));

    const std::string topics_path =
        (std::filesystem::temp_directory_path() / "spca_acceptance_topics.csv")
            .string();
    RunSpec joint;
    joint.data = data;
    joint.algorithm = Algorithm::Joint;
    joint.k = 2;
    joint.s = 3;
    joint.eps = 0.9;
    SketchSpec sk;
    sk.method = SketchMethod::TruncatedSvd;
    sk.rank = 4;
    joint.sketch = sk;
    joint.topics_path = topics_path;
    RunSpec deflate = joint;
    deflate.algorithm = Algorithm::DeflateExact;
    deflate.sketch.reset();
    deflate.topics_path.clear();
    const CompareResult cmp = compare({joint, deflate});
    const RunReport& jr = cmp.reports[0];
    const RunReport& dr = cmp.reports[1];

    bool ordered = true;
    std::size_t rows = 0;
    {
      std::ifstream in(topics_path);
      std::string line;
      std::getline(in, line);  // header
      if (line != "topic,rank,word,value") ordered = false;
      int prev_topic = -1;
      double prev_abs = 0.0;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        std::istringstream ss(line);
        std::string topic_s, rank_s, word, value_s;
        std::getline(ss, topic_s, ',');
        std::getline(ss, rank_s, ',');
        std::getline(ss, word, ',');
        std::getline(ss, value_s, ',');
        const int topic = std::stoi(topic_s);
        const double v = std::abs(std::stod(value_s));
        if (topic == prev_topic && v > prev_abs + 1e-12) ordered = false;
        prev_topic = topic;
        prev_abs = v;
      }
    }
    std::remove(topics_path.c_str());

    const bool ok = jr.termination == Termination::Complete &&
                    jr.objective >= (1.0 - joint.eps) * dr.objective - 1e-9 &&
                    ordered && rows == joint.k * joint.s;
    report(9, ok,
           fmt("joint %.4f vs deflate %.4f, %zu topic rows %s", jr.objective,
               dr.objective, rows, ordered ? "ordered" : "OUT OF ORDER"));
  } catch (const std::exception& e) {
    report(9, false, fmt("exception: %s", e.what()));
  }

  return failures == 0 ? 0 : 1;
}
