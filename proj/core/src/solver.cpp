#include "spca/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "spca/errors.hpp"
#include "spca/matching.hpp"

namespace spca {
namespace {

using Clock = std::chrono::steady_clock;

void canonicalize_column_sign(SparseColumn& col) {
  std::size_t arg = 0;
  double best = std::fabs(col.values[0]);
  for (std::size_t p = 1; p < col.values.size(); ++p) {
    const double m = std::fabs(col.values[p]);
    if (m > best) {
      best = m;
      arg = p;
    }
  }
  if (col.values[arg] < 0.0) {
    for (double& v : col.values) v = -v;
  }
}

struct BestCandidate {
  double objective = -std::numeric_limits<double>::infinity();
  std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
  ComponentSet x;

  bool beats(double obj, std::uint64_t idx) const {
    return obj > objective || (obj == objective && idx < index);
  }
};

}  // namespace

ComponentSet candidate_solution(const Matrix& w, std::size_t s) {
  const WeightedBipartiteGraph g = gen_bigraph(w, s);
  const MatchingResult m = max_weight_perfect_matching(g);
  const SupportSet supports = supports_from_matching(m, g.k, g.s);

  ComponentSet x;
  x.dim = g.d;
  x.count = g.k;
  x.sparsity = s;
  x.columns.reserve(g.k);
  for (std::size_t j = 0; j < g.k; ++j) {
    SparseColumn col;
    col.support = supports[j];
    col.values.resize(s);
    double ss = 0.0;
    for (std::size_t p = 0; p < s; ++p) {
      const double v = w(col.support[p], j);
      col.values[p] = v;
      ss += v * v;
    }
    if (ss > 0.0) {
      const double inv = 1.0 / std::sqrt(ss);
      for (double& v : col.values) v *= inv;
    } else {
      // Weight vanished on this support; park the column on a canonical
      // unit vector so it still satisfies the norm invariant.
      std::fill(col.values.begin(), col.values.end(), 0.0);
      col.values[0] = 1.0;
    }
    canonicalize_column_sign(col);
    x.columns.push_back(std::move(col));
  }

  // The attained inner products must reproduce the matching weight.
  double obj = 0.0;
  for (std::size_t j = 0; j < g.k; ++j) {
    const auto& col = x.columns[j];
    double ip = 0.0;
    for (std::size_t p = 0; p < s; ++p) ip += col.values[p] * w(col.support[p], j);
    obj += ip * ip;
  }
  require_invariant(
      std::fabs(obj - m.total_weight) <= 1e-9 * std::max(1.0, m.total_weight),
      "candidate_solution: objective does not match the matching weight");
  return x;
}

ComponentSet polish(const PsdMatrix& a, const SupportSet& supports) {
  ComponentSet x;
  x.dim = a.dim();
  x.count = supports.size();
  x.sparsity = supports.empty() ? 0 : supports.front().size();
  for (const auto& sup : supports) {
    const SubmatrixEig e = principal_submatrix_lambda_max(a, sup);
    SparseColumn col;
    col.support = sup;
    col.values.reserve(sup.size());
    for (int i : sup) col.values.push_back(e.vector[i]);
    x.columns.push_back(std::move(col));
  }
  return x;
}

SolveReport solve_multi_spca(const EigFactor& f, const PsdMatrix& a_eval,
                             const SolverConfig& cfg) {
  if (f.dim != a_eval.dim()) {
    fail(ErrorCode::InvalidInput,
         "solve: factor dimension does not match evaluation matrix");
  }
  if (cfg.k == 0 || cfg.s == 0) {
    fail(ErrorCode::InvalidInput, "solve: k and s must be >= 1");
  }
  if (cfg.s * cfg.k > f.dim) {
    fail(ErrorCode::InfeasibleSparsity,
         "solve: s*k exceeds the number of variables");
  }

  const auto t0 = Clock::now();
  SphereNet net = build_sphere_net(f.rank, cfg.eps, cfg.net_construction, cfg.seed);
  if (cfg.antipodal_reduce) net = antipodal_reduce(net);
  const CandidateStream stream(net, cfg.k);
  const Matrix basis = f.scaled_basis();  // d x r
  const std::uint64_t total = stream.total();

  std::optional<Clock::time_point> deadline;
  if (cfg.time_budget_ms) {
    deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                        std::chrono::duration<double, std::milli>(*cfg.time_budget_ms));
  }

  const std::size_t d = f.dim;
  const std::size_t r = f.rank;
  const std::size_t k = cfg.k;

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> examined{0};
  const std::uint64_t chunk =
      std::clamp<std::uint64_t>(total / (std::uint64_t{cfg.workers} * 32 + 1),
                                16, 4096);

  BestCandidate global;
  std::mutex merge_mu;

  auto scan = [&]() {
    Matrix c(r, k);
    Matrix w(d, k);
    BestCandidate local;
    std::uint64_t local_examined = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      const std::uint64_t begin = next.fetch_add(chunk);
      if (begin >= total) break;
      const std::uint64_t end = std::min(begin + chunk, total);
      for (std::uint64_t t = begin; t < end; ++t) {
        stream.basis_at(t, c);
        for (std::size_t i = 0; i < d; ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < r; ++l) acc += basis(i, l) * c(l, j);
            w(i, j) = acc;
          }
        }
        ComponentSet x = candidate_solution(w, cfg.s);
        const double obj = explained_variance(a_eval, x);
        ++local_examined;
        if (local.beats(obj, t)) {
          local.objective = obj;
          local.index = t;
          local.x = std::move(x);
        }
        if (deadline && (t - begin) % 64 == 63 && Clock::now() >= *deadline) {
          stop.store(true, std::memory_order_relaxed);
          break;
        }
      }
      if (deadline && Clock::now() >= *deadline) {
        stop.store(true, std::memory_order_relaxed);
      }
    }
    examined.fetch_add(local_examined);
    std::lock_guard<std::mutex> lock(merge_mu);
    if (local.index != std::numeric_limits<std::uint64_t>::max() &&
        global.beats(local.objective, local.index)) {
      global = std::move(local);
    }
  };

  // Candidate 0 is always scored, budget or not, so the report never comes
  // back empty.
  {
    Matrix c(r, k);
    stream.basis_at(0, c);
    Matrix w(d, k);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < r; ++l) acc += basis(i, l) * c(l, j);
        w(i, j) = acc;
      }
    }
    ComponentSet x = candidate_solution(w, cfg.s);
    global.objective = explained_variance(a_eval, x);
    global.index = 0;
    global.x = std::move(x);
    next.store(1);
    examined.store(1);
  }

  const unsigned workers = std::max(1u, cfg.workers);
  if (workers == 1 || total <= 2) {
    scan();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(scan);
    for (auto& th : pool) th.join();
  }

  SolveReport rep;
  rep.net_points_total = total;
  rep.net_points_examined = std::min<std::uint64_t>(examined.load(), total);
  rep.termination = rep.net_points_examined == total ? Termination::Complete
                                                     : Termination::TimeBudget;
  rep.guarantee_factor =
      rep.termination == Termination::Complete ? 1.0 - cfg.eps : 0.0;

  const double pre_polish = global.objective;
  if (cfg.polish) {
    global.x = polish(a_eval, global.x.supports());
  }
  validate_components(global.x);
  rep.per_component = per_component_variance(a_eval, global.x);
  rep.objective = 0.0;
  for (double v : rep.per_component) rep.objective += v;
  require_invariant(rep.objective >= pre_polish - 1e-12,
                    "solve: polish decreased the objective");
  rep.best = std::move(global.x);
  rep.elapsed_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return rep;
}

}  // namespace spca
