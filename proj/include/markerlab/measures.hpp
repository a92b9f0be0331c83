#pragma once

// Exact measures on binary words, the conditional-measure recursion driven
// by an odometer schedule, and tools for reading off accumulation points.

#include "markerlab/exact.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace markerlab {

enum class Bit : std::uint8_t { Up = 0, Down = 1 };

/// Words are written with 'u' for an up arrow and 'd' for a down arrow.
char bit_char(Bit b);
std::vector<Bit> parse_word(std::string_view text);
std::string word_string(const std::vector<Bit>& word);

/// Probability vector over {u,d}^depth. Word w is stored at the index whose
/// binary expansion reads w with the first letter as the most significant bit
/// and u = 0.
class WordMeasure {
 public:
  WordMeasure() = default;
  /// Throws unless weights.size() == 2^depth, weights >= 0, sum == 1.
  WordMeasure(int depth, std::vector<Rational> weights);

  static WordMeasure point_mass(const std::vector<Bit>& word);
  static WordMeasure uniform(int depth);
  /// Bernoulli product measure with P(u) = p at each letter.
  static WordMeasure bernoulli(int depth, const Rational& p);

  int depth() const { return depth_; }
  const std::vector<Rational>& weights() const { return weights_; }
  const Rational& operator[](std::size_t index) const { return weights_[index]; }
  Rational probability(const std::vector<Bit>& word) const;

  /// Restriction to the first `depth` letters.
  WordMeasure marginal(int depth) const;

  friend bool operator==(const WordMeasure&, const WordMeasure&) = default;

 private:
  int depth_ = 0;
  std::vector<Rational> weights_{Rational(1)};
};

/// Convex combination sum_i c_i mu_i of measures of one depth. Coefficients
/// must be non-negative and sum to 1.
WordMeasure mixture(const std::vector<std::pair<Rational, WordMeasure>>& parts);

nlohmann::json measure_to_json(const WordMeasure& m);
WordMeasure measure_from_json(const nlohmann::json& j);
/// Rows "word,weight" with exact weights.
std::string measure_to_csv(const WordMeasure& m);

/// sum_{l=1..L} 2^-l max_w |mu[w] - nu[w]| over depth-l marginals. Both
/// measures need depth >= L.
Rational weak_star_distance(const WordMeasure& mu, const WordMeasure& nu, int L);

/// Odometer schedule k -> t_k >= 2.
class OdometerSchedule {
 public:
  /// t_k = max(2, ceil(log2(k + 2))).
  static OdometerSchedule logarithmic();
  static OdometerSchedule constant(int t);
  explicit OdometerSchedule(std::function<int(int)> t, std::string name = "custom");

  int operator()(int k) const;
  const std::string& name() const { return name_; }

 private:
  std::function<int(int)> t_;
  std::string name_;
};

/// ceil(log2(x)) for x >= 1, exact on integers.
int ceil_log2(std::uint64_t x);
/// floor(log2(x)) for x >= 1.
int floor_log2(std::uint64_t x);

/// A family j -> m_j of word measures together with the schedule t.
/// Scales below `first` contribute nothing.
struct MeasureFlow {
  std::function<WordMeasure(int)> measure;
  OdometerSchedule t = OdometerSchedule::logarithmic();
  int first = 0;
};

struct ConditionalMeasure {
  int k = 0;
  int l = 0;
  std::vector<Rational> raw;   // sum_j (1/4t_j) m_j^l prod_{i>j} (1 - 1/4t_i)
  Rational residual;           // prod_{i} (1 - 1/4t_i) over the same range
  WordMeasure renormalized;    // raw / (1 - residual)
  bool defined = false;        // false when no scale contributed
};

/// Incremental evaluation; throws std::invalid_argument if l > k or if some
/// contributing m_j has depth < l.
ConditionalMeasure conditional_grid_measure(int k, int l, const MeasureFlow& flow);

namespace serial {
/// Direct double sum, used to check the incremental form.
ConditionalMeasure conditional_grid_measure(int k, int l, const MeasureFlow& flow);
}  // namespace serial

/// Steps the recursion one scale at a time.
class ConditionalRecursion {
 public:
  ConditionalRecursion(int l, const MeasureFlow& flow);
  /// Advances to the next scale and returns the state there.
  const ConditionalMeasure& advance();
  const ConditionalMeasure& current() const { return state_; }

 private:
  const MeasureFlow& flow_;
  ConditionalMeasure state_;
  int next_;
};

/// d_k = weak_star_distance(renormalized flow at k, target) for k = l..K.
/// Undefined scales report distance 1.
std::vector<Rational> flow_limit_check(const MeasureFlow& flow, const WordMeasure& target, int l, int K);

/// j -> base(floor(log2 j)), with j = 0 mapped to base(0).
std::function<WordMeasure(int)> repetition_schedule(std::function<WordMeasure(int)> base);
int repetition_index(int j);

// ---------------------------------------------------------------------------
// Clustering of tail points

struct NetReport {
  std::vector<std::size_t> representatives;  // indices into the input
  std::vector<std::size_t> members;          // points assigned to each representative
  Rational radius;                           // max distance from a point to its representative
  bool connected = false;                    // representatives linked by steps <= 2 * resolution
};

/// Greedy resolution-net in input order under weak_star_distance at depth L.
NetReport epsilon_net(const std::vector<WordMeasure>& points, const Rational& resolution, int L);

}  // namespace markerlab
