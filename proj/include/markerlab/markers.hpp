#pragma once

// Ground markers: non-overlap and covering checks, coverage of a
// configuration, and the grid measure of independently drawn markers.

#include "markerlab/exact.hpp"
#include "markerlab/robinson.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace markerlab {

class MarkerSet {
 public:
  MarkerSet() = default;
  /// All patterns must be total ell x ell patches; throws otherwise.
  MarkerSet(std::vector<Patch> patterns, Rational tau);

  int ell() const { return ell_; }
  const Rational& tau() const { return tau_; }
  const std::vector<Patch>& patterns() const { return patterns_; }
  std::size_t size() const { return patterns_.size(); }
  /// Covering window side: (2 + tau) * ell - 1 rounded up.
  int window() const;

  /// Checks every pattern against the tileset's local rules.
  bool admissible_in(const Tileset& tileset) const;

 private:
  int ell_ = 0;
  Rational tau_;
  std::vector<Patch> patterns_;
};

/// The four n-macro-tiles with margin factor 6 / l_n, so that the covering
/// window is 2 l_n + 5.
MarkerSet macro_marker_set(const Tileset& robinson, int n);

nlohmann::json marker_set_to_json(const MarkerSet& q);
MarkerSet marker_set_from_json(const nlohmann::json& j);

struct OverlapWitness {
  std::size_t u = 0;
  std::size_t v = 0;
  Coord shift;  // v translated by `shift` agrees with u on a nonempty overlap
  friend bool operator==(const OverlapWitness&, const OverlapWitness&) = default;
};

/// First (u, v, shift) in (u, v, dy, dx) order violating non-overlap, if any.
std::optional<OverlapWitness> verify_nonoverlap(const MarkerSet& q);

enum class CoveringStatus : std::uint8_t { Covered, Witness, BudgetExceeded };

struct CoveringResult {
  CoveringStatus status = CoveringStatus::Covered;
  std::optional<Patch> witness;  // lexicographically smallest in row-major order
  std::uint64_t nodes = 0;
};

/// Searches for a locally admissible m x m patch with no occurrence of a
/// marker. The search is split by the tile at (0, 0); each branch gets an
/// equal share of the node budget and the smallest branch holding a witness
/// wins, so the outcome does not depend on the number of threads.
CoveringResult search_covering_counterexample(const Tileset& tileset, const MarkerSet& q, std::uint64_t budget);

namespace serial {
CoveringResult search_covering_counterexample(const Tileset& tileset, const MarkerSet& q, std::uint64_t budget);
}  // namespace serial

/// Fraction of the cells at distance >= ell from the border that lie in an
/// occurrence of some marker. Throws if that interior is empty.
double marker_coverage(const Patch& config, const MarkerSet& q);

/// Grid of abutting markers drawn independently from `weights`, shifted by a
/// uniform offset in {0..ell-1}^2.
class StationaryGridMeasure {
 public:
  StationaryGridMeasure(MarkerSet q, std::vector<Rational> weights);

  const MarkerSet& marker_set() const { return q_; }
  const std::vector<Rational>& weights() const { return weights_; }

  /// Probability of the cylinder fixed by the non-hole cells of `pattern`,
  /// placed at its origin.
  Rational probability(const Patch& pattern) const;

  /// Entropy per site in bits.
  double entropy_per_site() const;

 private:
  MarkerSet q_;
  std::vector<Rational> weights_;
};

/// Throws std::invalid_argument unless weights are non-negative, one per
/// pattern and sum to exactly 1.
StationaryGridMeasure grid_measure(const MarkerSet& q, const std::vector<Rational>& weights);
StationaryGridMeasure grid_measure(const MarkerSet& q);

}  // namespace markerlab
