#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spca/dense.hpp"

namespace spca {

enum class NetConstruction {
  // Deterministic grid over generalized spherical coordinates. The covering
  // guarantee is verified for r <= 4; above that the grid grows steeply.
  AngularGrid,
  // Seeded farthest-point selection from a uniform sample pool. Coverage is
  // probabilistic; callers should confirm it with covering_check.
  GreedyCover,
};

// A finite eps/2-covering of the unit sphere S^{r-1}.
struct SphereNet {
  std::size_t dim = 0;    // r
  double eps = 0.0;
  std::vector<std::vector<double>> points;
  NetConstruction construction = NetConstruction::AngularGrid;
  bool antipodal_reduced = false;
  std::uint64_t seed = 0;  // only meaningful for GreedyCover
  // |net| * (eps/4)^r, reported so cardinality can be compared against the
  // (4/eps)^r baseline.
  double card_constant = 0.0;
};

SphereNet build_sphere_net(std::size_t r, double eps,
                           NetConstruction construction = NetConstruction::AngularGrid,
                           std::uint64_t seed = 0);

// Keeps one representative of every antipodal pair {p, -p} (the one whose
// first nonzero coordinate is positive). Valid whenever downstream use is
// sign-invariant, which holds for the squared-weight objective.
SphereNet antipodal_reduce(const SphereNet& net);

struct CoveringReport {
  std::size_t trials = 0;
  std::size_t violations = 0;  // sampled points farther than eps/2 from the net
  double max_gap = 0.0;        // largest sampled distance to the net
};

// Monte-Carlo covering check with `trials` uniform sphere samples
// (Gaussian-normalize method, seeded).
CoveringReport covering_check(const SphereNet& net, std::size_t trials,
                              std::uint64_t seed);

// One point per line, space-separated coordinates, 17 significant digits.
void dump_net(const SphereNet& net, std::ostream& os);

// The k-fold cartesian power of a net, enumerated lexicographically by net
// index: for |net|=2, k=2 the order is (0,0), (0,1), (1,0), (1,1). Candidates
// are addressed by a linear index so ranges can be scanned in chunks.
class CandidateStream {
 public:
  CandidateStream(const SphereNet& net, std::size_t k);

  std::uint64_t total() const { return total_; }
  std::size_t k() const { return k_; }
  std::size_t dim() const { return net_->dim; }

  // Writes the candidate with linear index t into the r x k matrix c.
  void basis_at(std::uint64_t t, Matrix& c) const;

 private:
  const SphereNet* net_;
  std::size_t k_;
  std::uint64_t total_;
};

}  // namespace spca
