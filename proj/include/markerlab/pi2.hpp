#pragma once

// Dyadic measures, computable sequences of them, connectification and
// finite-horizon accumulation sets.

#include "markerlab/measures.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace markerlab {

/// Word measure whose weights all have power-of-two denominators.
class DyadicMeasure {
 public:
  DyadicMeasure() = default;
  explicit DyadicMeasure(WordMeasure m);

  const WordMeasure& measure() const { return m_; }
  int depth() const { return m_.depth(); }
  /// Largest binary exponent among the denominators.
  unsigned long precision() const;

  friend bool operator==(const DyadicMeasure&, const DyadicMeasure&) = default;

 private:
  WordMeasure m_;
};

bool is_dyadic(const Rational& q);

/// (1 - s) a + s b for a dyadic s in [0, 1].
DyadicMeasure interpolate(const DyadicMeasure& a, const DyadicMeasure& b, const Rational& s);

/// A total, deterministic program n -> x_n (n >= 0).
struct ComputableSequence {
  std::string name;
  int depth = 1;
  std::function<DyadicMeasure(std::uint64_t)> at;
};

namespace sequences {
ComputableSequence constant(const DyadicMeasure& m);
/// a, b, a, b, ...
ComputableSequence alternating(const DyadicMeasure& a, const DyadicMeasure& b);
/// x_0 = a, x_1 = b, and for n = 2^j + s (0 <= s < 2^j) the point at
/// parameter (2s + 1) / 2^(j+1) of the segment [a, b].
ComputableSequence dyadic_sweep(const DyadicMeasure& a, const DyadicMeasure& b);
/// prefix, then the cycle repeated forever.
ComputableSequence eventually_periodic(std::vector<DyadicMeasure> prefix, std::vector<DyadicMeasure> cycle);
}  // namespace sequences

/// {"kind": "constant" | "alternating" | "sweep" | "periodic", ...}; measures
/// use the word-measure JSON form.
ComputableSequence sequence_from_json(const nlohmann::json& j);

/// Block j fills indices [2^j - 1, 2^(j+1) - 1) with the 2^j points
/// x_j + (s / 2^j)(x_(j+1) - x_j). Every x_j appears at index 2^j - 1.
ComputableSequence connectify(const ComputableSequence& seq);

/// Index of x_j in the connectified sequence.
std::uint64_t connectify_index(std::uint64_t j);

/// Bound on d(y_n, y_(n+1)) for the connectified sequence: 2^-floor(log2(n + 1)).
Rational connectify_envelope(std::uint64_t n);

struct AccumulationSet {
  std::uint64_t horizon = 0;
  Rational resolution;
  std::vector<DyadicMeasure> representatives;
  std::vector<std::size_t> members;
  Rational hausdorff;  // every tail point lies within this of a representative
  bool connected = false;
};

/// Resolution net of the tail {x_n : N/2 <= n <= N}. Evaluation is parallel
/// over n.
AccumulationSet finite_accumulation(const ComputableSequence& seq, std::uint64_t N, const Rational& resolution);

/// Hausdorff distance between two finite point sets at depth L.
Rational hausdorff_distance(const std::vector<DyadicMeasure>& a, const std::vector<DyadicMeasure>& b, int L);

nlohmann::json accumulation_set_to_json(const AccumulationSet& a);

}  // namespace markerlab
