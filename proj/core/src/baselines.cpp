#include "spca/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spca/errors.hpp"
#include "spca/rng.hpp"

namespace spca {

namespace {

double binom(std::size_t n, std::size_t r) {
  if (r > n) return 0.0;
  r = std::min(r, n - r);
  double out = 1.0;
  for (std::size_t i = 0; i < r; ++i)
    out = out * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return out;
}

double quad_form(const PsdMatrix& a, const std::vector<double>& x) {
  const std::size_t d = a.dim();
  double out = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (x[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += a(i, j) * x[j];
    out += x[i] * row;
  }
  return out;
}

struct BruteForce {
  const PsdMatrix& a;
  std::size_t k, s, d;
  std::vector<char> used;
  std::vector<std::vector<int>> blocks;
  std::vector<double> block_vals;
  double best = -std::numeric_limits<double>::infinity();
  SupportSet best_supports;
  std::uint64_t count = 0;

  BruteForce(const PsdMatrix& a_in, std::size_t k_in, std::size_t s_in)
      : a(a_in), k(k_in), s(s_in), d(a_in.dim()), used(d, 0) {
    blocks.assign(k, {});
    block_vals.assign(k, 0.0);
  }

  void run() { next_element(0, 0, 0); }

  // Extend block b (currently `depth` elements) with indices >= from.
  void next_element(std::size_t b, std::size_t from, std::size_t depth) {
    if (depth == s) {
      finish_block(b);
      return;
    }
    for (std::size_t i = from; i < d; ++i) {
      if (used[i]) continue;
      used[i] = 1;
      blocks[b].push_back(static_cast<int>(i));
      next_element(b, i + 1, depth + 1);
      blocks[b].pop_back();
      used[i] = 0;
    }
  }

  void finish_block(std::size_t b) {
    block_vals[b] =
        principal_submatrix_lambda_max(a, std::span<const int>(blocks[b]))
            .lambda;
    if (b + 1 < k) {
      // Canonical order: the next block's smallest element must be larger.
      next_element(b + 1, static_cast<std::size_t>(blocks[b][0]) + 1, 0);
    } else {
      ++count;
      const double total =
          std::accumulate(block_vals.begin(), block_vals.end(), 0.0);
      if (total > best) {
        best = total;
        best_supports = blocks;
      }
    }
  }
};

// Keep the s entries of largest magnitude (lowest index on ties), zero the
// rest, renormalize. Returns the chosen indices in ascending order.
std::vector<int> truncate_normalize(std::vector<double>& x, std::size_t s) {
  const std::size_t d = x.size();
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int p, int q) {
    return std::abs(x[p]) > std::abs(x[q]);
  });
  idx.resize(s);
  std::sort(idx.begin(), idx.end());
  std::vector<double> kept(d, 0.0);
  double ss = 0.0;
  for (int i : idx) {
    kept[i] = x[i];
    ss += x[i] * x[i];
  }
  if (ss > 0.0) {
    const double inv = 1.0 / std::sqrt(ss);
    for (int i : idx) kept[i] *= inv;
  } else {
    kept[idx[0]] = 1.0;
  }
  x = std::move(kept);
  return idx;
}

void check_single_params(const PsdMatrix& a, std::size_t s) {
  if (a.dim() == 0) fail(ErrorCode::InvalidInput, "empty matrix");
  if (s == 0 || s > a.dim())
    fail(ErrorCode::InvalidInput, "sparsity out of range");
}

}  // namespace

OracleResult brute_force_opt(const PsdMatrix& a, std::size_t k, std::size_t s,
                             std::uint64_t max_instances) {
  const std::size_t d = a.dim();
  if (d == 0) fail(ErrorCode::InvalidInput, "brute_force_opt: empty matrix");
  if (k == 0 || s == 0)
    fail(ErrorCode::InvalidInput, "brute_force_opt: k and s must be >= 1");
  if (s * k > d)
    fail(ErrorCode::InfeasibleSparsity,
         "brute_force_opt: s * k exceeds the dimension");

  double expected = 1.0;
  for (std::size_t j = 0; j < k; ++j) expected *= binom(d - j * s, s);
  for (std::size_t j = 2; j <= k; ++j) expected /= static_cast<double>(j);
  if (expected > static_cast<double>(max_instances))
    fail(ErrorCode::CapacityExceeded,
         "brute_force_opt: " + std::to_string(expected) +
             " support tuples exceed the enumeration budget");

  BruteForce bf(a, k, s);
  bf.run();
  return {bf.best, bf.best_supports, bf.count};
}

SparseColumn tpower_single(const PsdMatrix& a, std::size_t s,
                           const TPowerOptions& opt,
                           std::vector<double>* trajectory) {
  check_single_params(a, s);
  if (opt.iters == 0 || opt.restarts == 0)
    fail(ErrorCode::InvalidInput, "tpower: iters and restarts must be >= 1");
  const std::size_t d = a.dim();

  double best_obj = -std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  std::vector<int> best_support;
  std::vector<double> best_traj;

  std::vector<double> traj;
  for (std::size_t rest = 0; rest < opt.restarts; ++rest) {
    Rng rng(opt.seed + rest);
    std::vector<double> x = rng.unit_vector(d);
    std::vector<int> support = truncate_normalize(x, s);
    traj.clear();
    double obj = quad_form(a, x);
    traj.push_back(obj);
    for (std::size_t it = 0; it < opt.iters; ++it) {
      std::vector<double> y(d, 0.0);
      double ymax = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j : support) acc += a(i, j) * x[j];
        y[i] = acc;
        ymax = std::max(ymax, std::abs(acc));
      }
      if (ymax == 0.0) break;  // stuck in the null space
      support = truncate_normalize(y, s);
      x = std::move(y);
      const double next = quad_form(a, x);
      traj.push_back(next);
      if (next - obj <= 1e-13 * std::max(1.0, std::abs(next))) {
        obj = std::max(obj, next);
        break;
      }
      obj = next;
    }
    if (obj > best_obj) {
      best_obj = obj;
      best_x = x;
      best_support = support;
      best_traj = traj;
    }
  }

  if (trajectory) *trajectory = best_traj;
  SparseColumn out;
  out.support = best_support;
  out.values.reserve(s);
  for (int i : out.support) out.values.push_back(best_x[i]);
  return out;
}

SingleSolver exact_single_solver(std::uint64_t max_instances) {
  return [max_instances](const PsdMatrix& a, std::size_t s) {
    check_single_params(a, s);
    const std::size_t d = a.dim();
    if (binom(d, s) > static_cast<double>(max_instances))
      fail(ErrorCode::CapacityExceeded,
           "exact_single_solver: too many supports to enumerate");

    double best = -std::numeric_limits<double>::infinity();
    SubmatrixEig best_eig;
    std::vector<int> best_support, current;
    current.reserve(s);
    // Lexicographic scan over all size-s subsets.
    auto rec = [&](auto&& self, std::size_t from, std::size_t depth) -> void {
      if (depth == s) {
        SubmatrixEig e =
            principal_submatrix_lambda_max(a, std::span<const int>(current));
        if (e.lambda > best) {
          best = e.lambda;
          best_eig = std::move(e);
          best_support = current;
        }
        return;
      }
      for (std::size_t i = from; i + (s - depth) <= d; ++i) {
        current.push_back(static_cast<int>(i));
        self(self, i + 1, depth + 1);
        current.pop_back();
      }
    };
    rec(rec, 0, 0);

    SparseColumn out;
    out.support = best_support;
    out.values.reserve(s);
    for (int i : out.support) out.values.push_back(best_eig.vector[i]);
    return out;
  };
}

SingleSolver tpower_solver(TPowerOptions opt) {
  return [opt](const PsdMatrix& a, std::size_t s) {
    return tpower_single(a, s, opt);
  };
}

ComponentSet deflate_greedy(const PsdMatrix& a, std::size_t k, std::size_t s,
                            const SingleSolver& single) {
  const std::size_t d = a.dim();
  if (d == 0) fail(ErrorCode::InvalidInput, "deflate_greedy: empty matrix");
  if (k == 0 || s == 0)
    fail(ErrorCode::InvalidInput, "deflate_greedy: k and s must be >= 1");
  if (s * k > d)
    fail(ErrorCode::InfeasibleSparsity,
         "deflate_greedy: s * k exceeds the dimension");

  std::vector<int> alive(d);
  std::iota(alive.begin(), alive.end(), 0);

  ComponentSet out;
  out.dim = d;
  out.count = k;
  out.sparsity = s;
  for (std::size_t round = 0; round < k; ++round) {
    const std::size_t m = alive.size();
    Matrix sub(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        sub(i, j) = a(static_cast<std::size_t>(alive[i]),
                      static_cast<std::size_t>(alive[j]));
    const SparseColumn local = single(PsdMatrix::from_dense(sub), s);
    require_invariant(local.support.size() == s &&
                          local.values.size() == s,
                      "deflate_greedy: single solver returned a malformed column");

    SparseColumn mapped;
    mapped.support.reserve(s);
    mapped.values = local.values;
    for (int t : local.support) {
      require_invariant(t >= 0 && static_cast<std::size_t>(t) < m,
                        "deflate_greedy: support index out of range");
      mapped.support.push_back(alive[static_cast<std::size_t>(t)]);
    }
    out.columns.push_back(std::move(mapped));

    std::vector<int> next;
    next.reserve(m - s);
    std::size_t cursor = 0;
    for (int v : alive) {
      if (cursor < s && v == out.columns.back().support[cursor]) {
        ++cursor;
        continue;
      }
      next.push_back(v);
    }
    alive = std::move(next);
  }
  validate_components(out);
  return out;
}

PsdMatrix deflation_gap_instance(double eps, double delta) {
  if (!(eps >= 0.0 && eps <= 1.0) || !(delta >= 0.0))
    fail(ErrorCode::InvalidInput,
         "deflation_gap_instance: need 0 <= eps <= 1 and delta >= 0");
  Matrix a(4, 4);
  a(0, 0) = a(3, 3) = 1.0;
  a(0, 3) = a(3, 0) = eps;
  a(1, 1) = a(2, 2) = delta;
  return PsdMatrix::from_dense(std::move(a));
}

}  // namespace spca
