#pragma once

// Marker-level model of the phase layers: blockable scales, the density
// odometer, frozen-cell frequencies and the bit words stored in frozen areas.

#include "markerlab/exact.hpp"
#include "markerlab/measures.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace markerlab {

/// k when n == 3^k, nothing otherwise.
std::optional<int> blockable(std::uint64_t n);

/// Robinson scale carrying the markers of index k: 2 * 3^k + 1.
std::uint64_t marker_scale(int k);

enum class Phase : std::uint8_t { Hot, Blocking, Frozen };

struct Seed {
  std::string x;  // k symbols over {0,1}
  std::string y;  // k symbols over {0,1,#}, blanks only at the end
};

struct PhasedMarker {
  int k = 0;
  Phase phase = Phase::Hot;
  std::map<int, Bit> frozen_bits;  // scale -> bit
  std::optional<Seed> seed;

  /// Throws std::invalid_argument when a Blocking marker lacks a well-formed seed.
  void validate() const;
};

struct ChildProfile {
  Rational blocking;   // 1 / t_k
  Rational hot;        // (t_k - 1) / t_k
  Rational frozen;     // blocking * 1/4
  Rational recursing;  // hot + blocking * 3/4
};

/// Children of a Hot marker of index k + 1, in terms of Q_k markers.
/// Throws for non-Hot markers and for k + 1 == 0.
ChildProfile decompose(const PhasedMarker& marker, const OdometerSchedule& t);

/// Frozen and still-active fractions after expanding `levels` generations
/// below a Hot marker of index `top`.
struct PhaseMass {
  Rational frozen;
  Rational active;
};
PhaseMass expand(int top, int levels, const OdometerSchedule& t);

/// 1 - freq_k = (1 - freq0) prod_{j<k} (1 - 1/(4 t_j)), evaluated exactly.
Rational freq_frozen(int k, const OdometerSchedule& t, const Rational& freq0 = 0);

/// freq_0 .. freq_kmax in extended floating point.
std::vector<long double> freq_frozen_table(int kmax, const OdometerSchedule& t, long double freq0 = 0);

/// "k,t_k,freq_k" rows for k = 0..kmax.
std::string freq_frozen_csv(int kmax, const OdometerSchedule& t);

/// Smallest k <= kmax with freq_k >= threshold, by exact comparison.
std::optional<int> freq_crossing(const Rational& threshold, const OdometerSchedule& t, int kmax,
                                 const Rational& freq0 = 0);

class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-scale bits of a chain of frozen markers, scale 1 first. Throws
/// ConsistencyError on conflicting bits or a gap in the scales, and
/// std::invalid_argument when a marker is not Frozen.
std::vector<Bit> gamma_word(const std::vector<PhasedMarker>& chain);

/// Distribution over frozen-bit assignments of scales 1..depth.
struct FrozenDistribution {
  int depth = 0;
  std::vector<std::pair<std::map<int, Bit>, Rational>> atoms;
};

WordMeasure gamma_pushforward(const FrozenDistribution& dist);
FrozenDistribution gamma_pullback(const WordMeasure& m);

}  // namespace markerlab
