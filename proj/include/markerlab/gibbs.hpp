#pragma once

// Finite-volume Gibbs distributions of pattern-counting potentials on an
// N x N torus: exact enumeration, Metropolis sampling and coverage sweeps.

#include "markerlab/markers.hpp"
#include "markerlab/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace markerlab {

struct WeightedPattern {
  std::vector<PatternCell> cells;
  Rational weight;
};

/// Every occurrence of a pattern is charged to each site it covers, so one
/// occurrence adds weight * |support| to the total energy. Weights are kept
/// as integers over a common denominator.
class Potential {
 public:
  Potential() = default;
  explicit Potential(std::vector<WeightedPattern> patterns);

  /// Weight-w pattern for every horizontally or vertically mismatched pair.
  static Potential from_tileset(const Tileset& tileset, const Rational& weight = 1);

  const std::vector<WeightedPattern>& patterns() const { return patterns_; }
  /// Largest offset between two cells of one pattern.
  int range() const { return range_; }
  const Integer& denominator() const { return denominator_; }
  /// Energy units charged per occurrence of pattern i.
  std::int64_t units(std::size_t i) const { return units_[i]; }
  Rational to_energy(std::int64_t units) const;
  /// (pattern, cell) pairs whose cell holds `tile`.
  const std::vector<std::pair<std::size_t, std::size_t>>& holding(TileId tile) const;

 private:
  std::vector<WeightedPattern> patterns_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> holding_;
  std::vector<std::int64_t> units_;
  Integer denominator_{1};
  int range_ = 0;
};

nlohmann::json potential_to_json(const Potential& p);
Potential potential_from_json(const nlohmann::json& j);

class TorusConfig {
 public:
  /// Throws if a pattern does not fit on the torus (range >= N).
  TorusConfig(int n, std::vector<TileId> cells, const Potential& potential, std::size_t tiles);

  int side() const { return n_; }
  TileId at(int x, int y) const { return cells_[index(x, y)]; }
  const std::vector<TileId>& cells() const { return cells_; }
  std::int64_t energy_units() const { return energy_; }
  Rational energy() const { return potential_->to_energy(energy_); }

  /// Energy change, in units, of writing `tile` at (x, y).
  std::int64_t delta(int x, int y, TileId tile) const;
  void set(int x, int y, TileId tile);
  std::int64_t recompute() const;
  Patch as_patch() const;

 private:
  std::size_t index(int x, int y) const;
  std::int64_t touching(int x, int y) const;
  bool occurs(const WeightedPattern& p, int x0, int y0) const;

  int n_;
  std::vector<TileId> cells_;
  const Potential* potential_;
  std::int64_t energy_ = 0;
};

/// Total energy of `cells` (row-major, y upward) on the N x N torus.
Rational total_energy(int n, const std::vector<TileId>& cells, const Potential& potential, std::size_t tiles);

struct BoltzmannTable {
  int n = 0;
  std::size_t tiles = 0;
  std::vector<std::int64_t> energy;      // per configuration, in units
  std::vector<long double> probability;  // per configuration
  long double normaliser_error = 0;      // |sum - 1| after normalisation
};

/// Configuration index c encodes cell i as digit i of c in base |tiles|.
std::vector<TileId> decode_configuration(std::uint64_t c, int n, std::size_t tiles);
std::uint64_t encode_configuration(const std::vector<TileId>& cells, std::size_t tiles);

/// Exact enumeration; throws std::length_error when |tiles|^(N^2) exceeds `max_configs`.
BoltzmannTable boltzmann_exact(std::size_t tiles, const Potential& potential, int n, double beta,
                               std::uint64_t max_configs = 1u << 22);

namespace serial {
BoltzmannTable boltzmann_exact(std::size_t tiles, const Potential& potential, int n, double beta,
                               std::uint64_t max_configs = 1u << 22);
}  // namespace serial

struct DetailedBalanceReport {
  std::uint64_t pairs = 0;
  std::uint64_t mismatches = 0;
  bool stationary = false;  // inflow equals outflow at every state
};

/// Flows pi(w) P(w -> w') over every single-site move, compared exactly as
/// (exponent, multiplicity) records.
DetailedBalanceReport detailed_balance(std::size_t tiles, const Potential& potential, int n);

struct MetropolisOptions {
  std::uint64_t steps = 1000;
  std::uint64_t burn_in = 0;
  std::uint64_t cadence = 1;         // record every `cadence` steps
  const MarkerSet* markers = nullptr;
  bool histogram = false;            // visit counts per configuration after burn-in
  std::optional<std::vector<TileId>> initial;
  std::uint64_t stream = 0;
};

struct MetropolisResult {
  std::vector<std::uint64_t> step;
  std::vector<Rational> energy;
  std::vector<double> coverage;
  std::vector<std::uint64_t> histogram;
  std::vector<std::uint64_t> site_counts;  // per tile, over all cells after burn-in
  std::uint64_t accepted = 0;
  std::vector<TileId> final_cells;
  Rational final_energy;  // incrementally maintained cache at the end
  std::uint64_t seed = 0;
};

/// Single-site Metropolis chain with a uniform site and a uniform tile per
/// proposal. Deterministic given the seed and stream.
MetropolisResult metropolis(std::size_t tiles, const Potential& potential, int n, double beta, std::uint64_t seed,
                            const MetropolisOptions& options);

/// Marker coverage on the torus, reading occurrences across the seam.
double torus_coverage(const TorusConfig& config, const MarkerSet& q);
double torus_coverage(int n, const std::vector<TileId>& cells, const MarkerSet& q);

struct CoverageRow {
  double beta = 0;
  double mean = 0;
  double stderr_ = 0;
  std::size_t replicas = 0;
};

/// Mean final-half coverage over independent chains, one stream per replica.
std::vector<CoverageRow> coverage_sweep(std::size_t tiles, const Potential& potential, const MarkerSet& markers, int n,
                                        const std::vector<double>& betas, std::uint64_t steps, std::size_t replicas,
                                        std::uint64_t seed);

namespace serial {
std::vector<CoverageRow> coverage_sweep(std::size_t tiles, const Potential& potential, const MarkerSet& markers, int n,
                                        const std::vector<double>& betas, std::uint64_t steps, std::size_t replicas,
                                        std::uint64_t seed);
}  // namespace serial

/// Total-variation distance between an empirical histogram and a table.
double total_variation(const std::vector<std::uint64_t>& histogram, const std::vector<long double>& probability);

/// Spearman rank correlation.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace markerlab
