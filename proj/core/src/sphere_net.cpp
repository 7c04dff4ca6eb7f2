#include "spca/sphere_net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "spca/errors.hpp"
#include "spca/rng.hpp"

namespace spca {
namespace {

constexpr double kPairTol = 1e-9;

void check_net_params(std::size_t r, double eps) {
  if (r == 0) fail(ErrorCode::InvalidInput, "sphere net: dimension must be >= 1");
  if (!(eps > 0.0) || eps > 1.0) {
    fail(ErrorCode::InvalidInput, "sphere net: eps must lie in (0, 1]");
  }
}

double card_constant_for(std::size_t r, double eps, std::size_t n) {
  return static_cast<double>(n) * std::pow(eps / 4.0, static_cast<double>(r));
}

// Point on S^{r-1} from generalized spherical coordinates. phi has r-1
// entries; the first r-2 are polar in [0, pi], the last is azimuthal.
std::vector<double> from_angles(const std::vector<double>& phi) {
  const std::size_t r = phi.size() + 1;
  std::vector<double> x(r);
  double sines = 1.0;
  for (std::size_t i = 0; i + 1 < r; ++i) {
    x[i] = sines * std::cos(phi[i]);
    sines *= std::sin(phi[i]);
  }
  x[r - 1] = sines;
  return x;
}

SphereNet build_angular_grid(std::size_t r, double eps) {
  SphereNet net;
  net.dim = r;
  net.eps = eps;
  net.construction = NetConstruction::AngularGrid;

  if (r == 1) {
    net.points = {{1.0}, {-1.0}};
    net.card_constant = card_constant_for(r, eps, net.points.size());
    return net;
  }

  // Step so that a full angular cell has chordal diameter at most eps/2.
  // Each angle is then within theta/2 of a grid value and the chordal
  // distance is bounded by sqrt(r-1) * theta/2, which stays under eps/2 for
  // the r <= 4 range the grid is used in.
  const double theta = 2.0 * std::asin(eps / 4.0);

  const std::size_t polar_axes = r - 2;
  const std::size_t m_polar =
      static_cast<std::size_t>(std::ceil(M_PI / theta));
  std::size_t m_az = static_cast<std::size_t>(std::ceil(2.0 * M_PI / theta));
  // An even azimuthal count keeps the grid closed under negation, which is
  // what makes antipodal reduction remove exactly half the points.
  if (m_az % 2 == 1) ++m_az;

  std::vector<double> polar_vals(m_polar);
  for (std::size_t i = 0; i < m_polar; ++i) {
    polar_vals[i] = (static_cast<double>(i) + 0.5) * M_PI /
                    static_cast<double>(m_polar);
  }
  std::vector<double> az_vals(m_az);
  for (std::size_t j = 0; j < m_az; ++j) {
    az_vals[j] = static_cast<double>(j) * 2.0 * M_PI / static_cast<double>(m_az);
  }

  std::size_t total = m_az;
  for (std::size_t a = 0; a < polar_axes; ++a) total *= m_polar;
  net.points.assign(total, {});

  // Negating a point mirrors every polar index and advances the azimuth by a
  // half turn, so each grid tuple has a distinct partner tuple (the azimuth
  // shift is never zero). Filling the partner slot with the exact negation
  // makes the net closed under negation bitwise, not just up to roundoff,
  // which is what lets antipodal reduction remove exactly half the points.
  std::vector<double> phi(r - 1, 0.0);
  std::vector<std::size_t> idx(r - 1, 0);
  for (std::size_t t = 0; t < total; ++t) {
    std::size_t partner = 0;
    for (std::size_t a = 0; a + 1 < r; ++a) {
      const bool az = (a == r - 2);
      const std::size_t limit = az ? m_az : m_polar;
      const std::size_t digit = az ? (idx[a] + m_az / 2) % m_az
                                   : m_polar - 1 - idx[a];
      partner = partner * limit + digit;
    }
    if (t < partner) {
      for (std::size_t a = 0; a < polar_axes; ++a) phi[a] = polar_vals[idx[a]];
      phi[r - 2] = az_vals[idx[r - 2]];
      net.points[t] = from_angles(phi);
      std::vector<double> neg = net.points[t];
      for (double& x : neg) x = -x;
      net.points[partner] = std::move(neg);
    }

    // Odometer increment, last axis fastest.
    std::size_t a = r - 1;
    while (a > 0) {
      --a;
      const std::size_t limit = (a == r - 2) ? m_az : m_polar;
      if (++idx[a] < limit) break;
      idx[a] = 0;
    }
  }
  net.card_constant = card_constant_for(r, eps, net.points.size());
  return net;
}

SphereNet build_greedy_cover(std::size_t r, double eps, std::uint64_t seed) {
  SphereNet net;
  net.dim = r;
  net.eps = eps;
  net.construction = NetConstruction::GreedyCover;
  net.seed = seed;

  const std::size_t pool_size = 100000;
  Rng rng(seed);
  std::vector<std::vector<double>> pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(rng.unit_vector(r));

  // Farthest-point insertion until the pool is covered with some slack; the
  // slack absorbs the gap between the finite pool and the whole sphere.
  const double target = 0.95 * eps / 2.0;
  const double target2 = target * target;

  std::vector<double> d2(pool_size, std::numeric_limits<double>::infinity());
  std::size_t next = 0;  // start from the first sampled point
  while (true) {
    net.points.push_back(pool[next]);
    const auto& p = net.points.back();
    double worst = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < pool_size; ++i) {
      double dd = 0.0;
      for (std::size_t c = 0; c < r; ++c) {
        const double t = pool[i][c] - p[c];
        dd += t * t;
      }
      if (dd < d2[i]) d2[i] = dd;
      if (d2[i] > worst) {
        worst = d2[i];
        arg = i;
      }
    }
    if (worst <= target2) break;
    if (net.points.size() >= 1000000) {
      fail(ErrorCode::CapacityExceeded,
           "GreedyCover: net exceeded 1e6 points before covering the pool");
    }
    next = arg;
  }
  net.card_constant = card_constant_for(r, eps, net.points.size());
  return net;
}

int first_nonzero_sign(const std::vector<double>& p) {
  for (double x : p) {
    if (std::fabs(x) > kPairTol) return x > 0.0 ? 1 : -1;
  }
  return 0;
}

}  // namespace

SphereNet build_sphere_net(std::size_t r, double eps,
                           NetConstruction construction, std::uint64_t seed) {
  check_net_params(r, eps);
  if (construction == NetConstruction::AngularGrid) {
    return build_angular_grid(r, eps);
  }
  return build_greedy_cover(r, eps, seed);
}

SphereNet antipodal_reduce(const SphereNet& net) {
  const std::size_t n = net.points.size();
  const std::size_t r = net.dim;

  struct Entry {
    std::vector<double> canonical;
    std::size_t original;
    bool flipped;
  };
  std::vector<Entry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Entry e{net.points[i], i, false};
    if (first_nonzero_sign(e.canonical) < 0) {
      for (double& x : e.canonical) x = -x;
      e.flipped = true;
    }
    entries.push_back(std::move(e));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].canonical < entries[b].canonical;
  });

  // Antipodal partners canonicalize to the same point up to roundoff, and
  // distinct net points are far apart, so pairs are adjacent after sorting.
  auto close = [&](const Entry& a, const Entry& b) {
    double dd = 0.0;
    for (std::size_t c = 0; c < r; ++c) {
      const double t = a.canonical[c] - b.canonical[c];
      dd += t * t;
    }
    return dd <= kPairTol * kPairTol;
  };

  std::vector<std::size_t> keep;
  std::size_t i = 0;
  while (i < n) {
    if (i + 1 < n && close(entries[order[i]], entries[order[i + 1]])) {
      const Entry& a = entries[order[i]];
      const Entry& b = entries[order[i + 1]];
      // Keep the representative whose first nonzero coordinate was positive.
      const Entry& chosen = a.flipped && !b.flipped ? b
                            : b.flipped && !a.flipped ? a
                            : (a.original < b.original ? a : b);
      keep.push_back(chosen.original);
      i += 2;
    } else {
      keep.push_back(entries[order[i]].original);
      ++i;
    }
  }
  std::sort(keep.begin(), keep.end());

  SphereNet out;
  out.dim = net.dim;
  out.eps = net.eps;
  out.construction = net.construction;
  out.seed = net.seed;
  out.antipodal_reduced = true;
  out.points.reserve(keep.size());
  for (std::size_t k : keep) out.points.push_back(net.points[k]);
  out.card_constant = card_constant_for(r, net.eps, out.points.size());
  return out;
}

CoveringReport covering_check(const SphereNet& net, std::size_t trials,
                              std::uint64_t seed) {
  if (net.points.empty()) {
    fail(ErrorCode::InvalidInput, "covering_check: empty net");
  }
  Rng rng(seed);
  CoveringReport rep;
  rep.trials = trials;
  const double radius = net.eps / 2.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto x = rng.unit_vector(net.dim);
    double best_dot = -1.0;
    for (const auto& p : net.points) {
      double dp = 0.0;
      for (std::size_t c = 0; c < net.dim; ++c) dp += x[c] * p[c];
      // A reduced net keeps one point per antipodal pair; it covers up to
      // sign, so measure against the closer of p and -p.
      if (net.antipodal_reduced) dp = std::abs(dp);
      if (dp > best_dot) best_dot = dp;
    }
    const double d2 = std::max(0.0, 2.0 - 2.0 * best_dot);
    const double d = std::sqrt(d2);
    if (d > rep.max_gap) rep.max_gap = d;
    if (d > radius + 1e-12) ++rep.violations;
  }
  return rep;
}

void dump_net(const SphereNet& net, std::ostream& os) {
  char buf[64];
  for (const auto& p : net.points) {
    for (std::size_t c = 0; c < p.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", p[c]);
      if (c) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

CandidateStream::CandidateStream(const SphereNet& net, std::size_t k)
    : net_(&net), k_(k) {
  if (k == 0) fail(ErrorCode::InvalidInput, "candidate stream: k must be >= 1");
  if (net.points.empty()) {
    fail(ErrorCode::InvalidInput, "candidate stream: empty net");
  }
  const std::uint64_t n = net.points.size();
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < k; ++j) {
    if (total > std::numeric_limits<std::uint64_t>::max() / n) {
      const double approx =
          std::pow(static_cast<double>(n), static_cast<double>(k));
      fail(ErrorCode::CapacityExceeded,
           "candidate stream: |net|^k = " + std::to_string(n) + "^" +
               std::to_string(k) + " ~= " + std::to_string(approx) +
               " exceeds the 64-bit index space");
    }
    total *= n;
  }
  total_ = total;
}

void CandidateStream::basis_at(std::uint64_t t, Matrix& c) const {
  require_invariant(t < total_, "candidate stream: index out of range");
  const std::uint64_t n = net_->points.size();
  const std::size_t r = net_->dim;
  if (c.rows() != r || c.cols() != k_) c = Matrix(r, k_);
  // Decode digits base |net|, last column fastest.
  std::uint64_t rest = t;
  for (std::size_t j = k_; j-- > 0;) {
    const std::uint64_t digit = rest % n;
    rest /= n;
    const auto& p = net_->points[digit];
    for (std::size_t i = 0; i < r; ++i) c(i, j) = p[i];
  }
}

}  // namespace spca
