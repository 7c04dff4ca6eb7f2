#include "spca/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "spca/errors.hpp"

namespace spca {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The matching is a small transportation problem: ship s units into every
// group from distinct variables, maximizing weight. We run successive
// shortest augmenting paths with node potentials (negated weights as costs).
// The terminal potentials double as an optimal dual solution, which is what
// the tie canonicalization below feeds on.
struct SspState {
  std::vector<int> assign;  // var -> group, -1 unassigned
  std::vector<double> pi_g;
  std::vector<double> pi_v;
  double pi_t = 0.0;
};

SspState run_ssp(const WeightedBipartiteGraph& g) {
  const int k = static_cast<int>(g.k);
  const int d = static_cast<int>(g.d);
  const int s = static_cast<int>(g.s);
  const auto& w = g.w;

  SspState st;
  st.assign.assign(d, -1);
  st.pi_g.assign(k, 0.0);
  st.pi_v.assign(d, 0.0);

  // Initial potentials keeping every residual arc nonnegative:
  // rc(j->i) = -w + pi_g - pi_v needs pi_v[i] <= -max_j w(j,i), and the
  // var->sink arcs need pi_t <= min_i pi_v[i].
  double min_pv = 0.0;
  for (int i = 0; i < d; ++i) {
    double m = 0.0;
    for (int j = 0; j < k; ++j) m = std::max(m, w(j, i));
    st.pi_v[i] = -m;
    min_pv = std::min(min_pv, -m);
  }
  st.pi_t = min_pv;

  const int tnode = k + d;  // groups [0,k), vars [k,k+d), sink k+d
  std::vector<int> count(k, 0);
  std::vector<double> dist(k + d + 1);
  std::vector<char> popped(k + d + 1);
  std::vector<int> parent_v(d);
  std::vector<int> parent_g(k);
  using Item = std::pair<double, int>;

  for (int round = 0; round < s * k; ++round) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(popped.begin(), popped.end(), 0);
    std::fill(parent_v.begin(), parent_v.end(), -1);
    std::fill(parent_g.begin(), parent_g.end(), -1);
    int parent_of_t = -1;
    double dstar = kInf;

    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (int j = 0; j < k; ++j) {
      if (count[j] < s) {
        dist[j] = 0.0;
        pq.push({0.0, j});
      }
    }
    while (!pq.empty()) {
      const auto [du, u] = pq.top();
      pq.pop();
      if (popped[u] || du > dist[u]) continue;
      popped[u] = 1;
      if (u == tnode) {
        dstar = du;
        break;
      }
      if (u < k) {
        const int j = u;
        for (int i = 0; i < d; ++i) {
          if (st.assign[i] == j) continue;
          double rc = -w(j, i) + st.pi_g[j] - st.pi_v[i];
          if (rc < 0.0) rc = 0.0;  // clip roundoff drift
          const double nd = du + rc;
          if (nd < dist[k + i]) {
            dist[k + i] = nd;
            parent_v[i] = j;
            pq.push({nd, k + i});
          }
        }
      } else {
        const int i = u - k;
        const int j0 = st.assign[i];
        if (j0 >= 0) {
          double rc = w(j0, i) + st.pi_v[i] - st.pi_g[j0];
          if (rc < 0.0) rc = 0.0;
          const double nd = du + rc;
          if (nd < dist[j0]) {
            dist[j0] = nd;
            parent_g[j0] = i;
            pq.push({nd, j0});
          }
        } else {
          double rc = st.pi_v[i] - st.pi_t;
          if (rc < 0.0) rc = 0.0;
          const double nd = du + rc;
          if (nd < dist[tnode]) {
            dist[tnode] = nd;
            parent_of_t = i;
            pq.push({nd, tnode});
          }
        }
      }
    }
    require_invariant(parent_of_t >= 0 && dstar < kInf,
                      "matching: no augmenting path (infeasible instance)");

    for (int j = 0; j < k; ++j) st.pi_g[j] += std::min(dist[j], dstar);
    for (int i = 0; i < d; ++i) st.pi_v[i] += std::min(dist[k + i], dstar);
    st.pi_t += dstar;

    int i = parent_of_t;
    while (true) {
      const int j = parent_v[i];
      require_invariant(j >= 0, "matching: broken augmenting path");
      const int prev = parent_g[j];
      st.assign[i] = j;
      if (prev < 0) {
        ++count[j];
        break;
      }
      i = prev;
    }
  }
  return st;
}

// Complementary slackness classification. With the terminal duals, an
// optimal assignment is exactly: all forced edges, any completion over free
// edges, banned variables never assigned, required variables always assigned.
enum : std::uint8_t { kForbidden = 0, kFree = 1, kForced = 2 };
enum : std::uint8_t { kVarBanned = 0, kVarFree = 1, kVarRequired = 2 };

struct EdgeClasses {
  std::vector<std::uint8_t> edge;  // k*d
  std::vector<std::uint8_t> var;   // d
};

EdgeClasses classify(const WeightedBipartiteGraph& g, const SspState& st,
                     double tol) {
  const int k = static_cast<int>(g.k);
  const int d = static_cast<int>(g.d);
  EdgeClasses c;
  c.edge.assign(static_cast<std::size_t>(k) * d, kForbidden);
  c.var.assign(d, kVarFree);

  for (int i = 0; i < d; ++i) {
    const double diff = st.pi_v[i] - st.pi_t;
    if (st.assign[i] >= 0) {
      if (diff < -tol) c.var[i] = kVarRequired;
    } else {
      if (diff > tol) c.var[i] = kVarBanned;
    }
  }
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < d; ++i) {
      if (c.var[i] == kVarBanned) continue;  // never assignable
      if (st.assign[i] == j) {
        const double rc_b = g.w(j, i) + st.pi_v[i] - st.pi_g[j];
        c.edge[j * d + i] = rc_b > tol ? kForced : kFree;
      } else {
        const double rc_f = -g.w(j, i) + st.pi_g[j] - st.pi_v[i];
        if (rc_f <= tol) c.edge[j * d + i] = kFree;
      }
    }
  }
  return c;
}

// Does any other optimal assignment exist? Alternatives correspond to
// alternating cycles of free edges, or alternating paths from a free
// unassigned variable to a droppable assigned one. Encode both in a digraph:
// arcs group->var over free matched edges (the group may release the
// variable) and var->group over free unmatched edges (the variable may move).
bool has_alternative(const WeightedBipartiteGraph& g, const SspState& st,
                     const EdgeClasses& c) {
  const int k = static_cast<int>(g.k);
  const int d = static_cast<int>(g.d);

  std::vector<std::vector<int>> var_out(d);   // var -> groups
  std::vector<std::vector<int>> group_out(k); // group -> vars
  bool any_arc = false;
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < d; ++i) {
      if (c.edge[j * d + i] != kFree) continue;
      if (st.assign[i] == j) {
        group_out[j].push_back(i);
        any_arc = true;
      } else {
        var_out[i].push_back(j);
        any_arc = true;
      }
    }
  }
  if (!any_arc) return false;

  // Path case: free unassigned var reaching a droppable assigned var.
  {
    std::vector<char> seen_g(k, 0), seen_v(d, 0);
    std::vector<int> stack;
    for (int i = 0; i < d; ++i) {
      if (st.assign[i] < 0 && c.var[i] == kVarFree && !var_out[i].empty()) {
        seen_v[i] = 1;
        stack.push_back(i);
      }
    }
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j : var_out[i]) {
        if (seen_g[j]) continue;
        seen_g[j] = 1;
        for (int i2 : group_out[j]) {
          if (seen_v[i2]) continue;
          if (c.var[i2] == kVarFree) return true;  // droppable endpoint
          seen_v[i2] = 1;
          stack.push_back(i2);
        }
      }
    }
  }

  // Cycle case: iterative DFS with gray/black coloring over group nodes.
  {
    std::vector<std::uint8_t> color_g(k, 0), color_v(d, 0);
    struct Frame {
      bool is_group;
      int id;
      std::size_t next = 0;
    };
    for (int j0 = 0; j0 < k; ++j0) {
      if (color_g[j0]) continue;
      std::vector<Frame> stack{{true, j0, 0}};
      color_g[j0] = 1;
      while (!stack.empty()) {
        Frame& f = stack.back();
        const auto& out = f.is_group ? group_out[f.id] : var_out[f.id];
        if (f.next >= out.size()) {
          (f.is_group ? color_g[f.id] : color_v[f.id]) = 2;
          stack.pop_back();
          continue;
        }
        const int nxt = out[f.next++];
        auto& color = f.is_group ? color_v : color_g;
        if (color[nxt] == 1) return true;
        if (color[nxt] == 0) {
          color[nxt] = 1;
          stack.push_back({!f.is_group, nxt, 0});
        }
      }
    }
  }
  return false;
}

// Unit-augmentation max flow used by the tie canonicalization to answer
// "can the remaining groups still be filled". Small graphs only.
class CompletionChecker {
 public:
  CompletionChecker(const WeightedBipartiteGraph& g, const EdgeClasses& c)
      : g_(g), c_(c), k_(static_cast<int>(g.k)), d_(static_cast<int>(g.d)) {}

  // fixed[i]: -2 undecided, -1 unassigned, >=0 group. Checks whether the
  // variables after `frontier` can fill every group to capacity while
  // covering all required ones.
  bool feasible(const std::vector<int>& fixed, int frontier,
                const std::vector<int>& cap) {
    cur_.assign(d_, -1);
    used_.assign(k_, 0);
    avail_.assign(d_, 0);
    int need = 0;
    for (int j = 0; j < k_; ++j) need += cap[j];
    for (int i = frontier + 1; i < d_; ++i) {
      if (fixed[i] == -2 && c_.var[i] != kVarBanned) avail_[i] = 1;
    }
    // Required variables first: every one of them must land somewhere.
    for (int i = frontier + 1; i < d_; ++i) {
      if (!avail_[i] || c_.var[i] != kVarRequired) continue;
      visited_.assign(d_, 0);
      if (!augment_var(i, cap)) return false;
    }
    int flow = 0;
    for (int i = 0; i < d_; ++i) flow += cur_[i] >= 0 ? 1 : 0;
    for (int i = frontier + 1; i < d_ && flow < need; ++i) {
      if (!avail_[i] || cur_[i] >= 0) continue;
      visited_.assign(d_, 0);
      if (augment_var(i, cap)) ++flow;
    }
    return flow == need;
  }

 private:
  bool augment_var(int i, const std::vector<int>& cap) {
    for (int j = 0; j < k_; ++j) {
      if (c_.edge[j * d_ + i] != kFree) continue;
      if (used_[j] < cap[j]) {
        cur_[i] = j;
        ++used_[j];
        return true;
      }
    }
    for (int j = 0; j < k_; ++j) {
      if (c_.edge[j * d_ + i] != kFree) continue;
      for (int i2 = 0; i2 < d_; ++i2) {
        if (cur_[i2] != j || visited_[i2]) continue;
        visited_[i2] = 1;
        if (augment_var2(i2, cap)) {
          cur_[i] = j;  // i2 moved elsewhere, take the freed slot
          ++used_[j];
          return true;
        }
      }
    }
    return false;
  }

  // Re-augment an already placed variable to another slot.
  bool augment_var2(int i, const std::vector<int>& cap) {
    const int old = cur_[i];
    for (int j = 0; j < k_; ++j) {
      if (j == old || c_.edge[j * d_ + i] != kFree) continue;
      if (used_[j] < cap[j]) {
        cur_[i] = j;
        ++used_[j];
        --used_[old];
        return true;
      }
    }
    for (int j = 0; j < k_; ++j) {
      if (j == old || c_.edge[j * d_ + i] != kFree) continue;
      for (int i2 = 0; i2 < d_; ++i2) {
        if (cur_[i2] != j || visited_[i2]) continue;
        visited_[i2] = 1;
        if (augment_var2(i2, cap)) {
          cur_[i] = j;
          ++used_[j];
          --used_[old];
          return true;
        }
      }
    }
    return false;
  }

  const WeightedBipartiteGraph& g_;
  const EdgeClasses& c_;
  int k_, d_;
  std::vector<int> cur_;
  std::vector<int> used_;
  std::vector<char> avail_;
  std::vector<char> visited_;
};

// Greedy lexicographic fixing over the free/forced edge structure. Each
// prefix is kept completable, so the result is the lexicographically smallest
// member of the optimal set.
std::vector<int> canonicalize(const WeightedBipartiteGraph& g,
                              const SspState& st, const EdgeClasses& c) {
  const int k = static_cast<int>(g.k);
  const int d = static_cast<int>(g.d);
  std::vector<int> fixed(d, -2);
  std::vector<int> cap(k, static_cast<int>(g.s));

  for (int i = 0; i < d; ++i) {
    const int j = st.assign[i];
    if (j >= 0 && c.edge[j * d + i] == kForced) {
      fixed[i] = j;
      --cap[j];
    }
  }

  CompletionChecker checker(g, c);
  for (int i = 0; i < d; ++i) {
    if (fixed[i] != -2) continue;
    if (c.var[i] == kVarBanned) {
      fixed[i] = -1;
      continue;
    }
    bool placed = false;
    for (int j = 0; j < k && !placed; ++j) {
      if (cap[j] == 0 || c.edge[j * d + i] != kFree) continue;
      --cap[j];
      if (checker.feasible(fixed, i, cap)) {
        fixed[i] = j;
        placed = true;
      } else {
        ++cap[j];
      }
    }
    if (!placed) {
      require_invariant(c.var[i] != kVarRequired,
                        "matching: required variable could not be placed");
      fixed[i] = -1;
    }
  }
  for (int j = 0; j < k; ++j) {
    require_invariant(cap[j] == 0, "matching: canonical assignment left a group short");
  }
  return fixed;
}

}  // namespace

WeightedBipartiteGraph gen_bigraph(const Matrix& w_cols, std::size_t s) {
  const std::size_t d = w_cols.rows();
  const std::size_t k = w_cols.cols();
  if (d == 0 || k == 0) {
    fail(ErrorCode::InvalidInput, "gen_bigraph: W must be non-empty");
  }
  if (s == 0) fail(ErrorCode::InvalidInput, "gen_bigraph: s must be >= 1");
  if (!w_cols.all_finite()) {
    fail(ErrorCode::InvalidInput, "gen_bigraph: W has non-finite entries");
  }
  if (s * k > d) {
    fail(ErrorCode::InfeasibleSparsity,
         "gen_bigraph: s*k = " + std::to_string(s * k) + " exceeds d = " +
             std::to_string(d));
  }
  WeightedBipartiteGraph g;
  g.k = k;
  g.s = s;
  g.d = d;
  g.w = Matrix(k, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double x = w_cols(i, j);
      g.w(j, i) = x * x;
    }
  }
  return g;
}

MatchingResult max_weight_perfect_matching(const WeightedBipartiteGraph& g) {
  if (g.k == 0 || g.d == 0 || g.w.rows() != g.k || g.w.cols() != g.d) {
    fail(ErrorCode::InvalidInput, "matching: malformed graph");
  }
  if (g.s == 0 || g.s * g.k > g.d) {
    fail(ErrorCode::InfeasibleSparsity, "matching: s*k exceeds d");
  }
  double maxw = 0.0;
  for (std::size_t j = 0; j < g.k; ++j) {
    for (std::size_t i = 0; i < g.d; ++i) {
      const double x = g.w(j, i);
      if (!(x >= 0.0) || !std::isfinite(x)) {
        fail(ErrorCode::InvalidInput, "matching: weights must be finite and >= 0");
      }
      maxw = std::max(maxw, x);
    }
  }

  SspState st = run_ssp(g);

  const double tol = 1e-10 * std::max(1.0, maxw);
  const EdgeClasses classes = classify(g, st, tol);
  if (has_alternative(g, st, classes)) {
    st.assign = canonicalize(g, st, classes);
  }

  MatchingResult out;
  out.group_of_var = st.assign;
  out.total_weight = 0.0;
  for (std::size_t i = 0; i < g.d; ++i) {
    if (st.assign[i] >= 0) out.total_weight += g.w(st.assign[i], i);
  }
  return out;
}

SupportSet supports_from_matching(const MatchingResult& m, std::size_t k,
                                  std::size_t s) {
  SupportSet sets(k);
  for (std::size_t i = 0; i < m.group_of_var.size(); ++i) {
    const int j = m.group_of_var[i];
    if (j < 0) continue;
    require_invariant(static_cast<std::size_t>(j) < k,
                      "supports_from_matching: group index out of range");
    sets[j].push_back(static_cast<int>(i));
  }
  for (const auto& set : sets) {
    require_invariant(set.size() == s,
                      "supports_from_matching: group does not hold exactly s variables");
  }
  return sets;
}

}  // namespace spca
