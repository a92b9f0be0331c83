#pragma once

// Selector rules, the perturbed potential phi_X + eps psi_Y at the level of
// seed domains, and the predicted marginal flows for both regimes.

#include "markerlab/measures.hpp"
#include "markerlab/turing.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace markerlab {

/// Raised when a machine cannot supply a word measure at some scale.
class FlowRefusal : public std::runtime_error {
 public:
  enum class Kind : std::uint8_t { NonConforming, BadOutput, BudgetExceeded };
  FlowRefusal(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Forces y = 1^i #^(k-i) on every computation scale k >= i.
struct SelectorRule {
  std::size_t i = 0;
  int diameter = 0;  // r_i: the run 1^i with both delimiters

  int threshold() const { return static_cast<int>(i); }
  /// |{(x, 1^i #^(k-i)) : x in {0,1}^k}|, zero below the threshold.
  std::uint64_t domain_size(int k) const;
};

SelectorRule make_selector(std::size_t i, const Enumeration& enumeration);

/// 2^k (2^(k+1) - 1): every x with every well-formed y.
std::uint64_t unrestricted_domain_size(int k);

/// Counts the seed domain at scale k by listing every (x, y), optionally
/// filtered by a selector.
std::uint64_t enumerate_seed_domain(int k, const SelectorRule* rule = nullptr);

/// Extra interpreter steps to turn y_i into <M_i>: one pass over the
/// serialisation. Constant per enumeration entry.
std::uint64_t translation_overhead(const Enumeration& enumeration, std::size_t i);

struct PerturbedPotential {
  SelectorRule selector;
  Rational epsilon;
  /// Zero-energy seeds at scale k. Depends on epsilon only through eps > 0.
  std::uint64_t admissible_seeds(int k) const;
};

/// Depth-l marginals k -> m_k of one machine. Exact up to `seed_cap`; beyond
/// it the marginal at the cap is reused if the last three enumerated scales
/// agree, otherwise FlowRefusal(BudgetExceeded) is thrown.
class MachineWordSource {
 public:
  MachineWordSource(Machine m, int l, int seed_cap = 16, std::uint64_t desk_cap = 10'000'000);

  const Machine& machine() const { return machine_; }
  int depth() const { return l_; }
  WordMeasure at(int k) const;

 private:
  Machine machine_;
  int l_;
  int seed_cap_;
  std::uint64_t desk_cap_;
  mutable std::mutex mutex_;
  mutable std::map<int, WordMeasure> cache_;
};

struct PerturbationConfig {
  int l = 1;
  int K = 48;
  int window = 16;
  Rational resolution{1, 256};
  double dwell = 0.1;
  int seed_cap = 16;
  std::uint64_t desk_cap = 10'000'000;
};

struct FlowRow {
  int k = 0;
  bool defined = false;
  WordMeasure measure;  // renormalised conditional measure at depth l
  Rational to_x;        // weak-* distance to the X target
  Rational to_y;
};

struct AccumulationReport {
  int window = 0;
  Rational resolution;
  std::vector<WordMeasure> representatives;  // clusters holding >= dwell of the tail
  std::vector<std::size_t> weights;          // tail points per retained cluster
  std::vector<WordMeasure> net;              // every net point, retained or not
  Rational radius;
  bool connected = false;
  bool stable = false;  // one retained cluster
};

struct PerturbationReport {
  Rational epsilon;
  std::size_t index = 0;
  bool selector_active = false;
  int first = 0;
  int diameter = 0;
  std::vector<std::size_t> fallback_indices;  // entries replaced by M_X
  WordMeasure target_x;
  WordMeasure target_y;
  std::vector<FlowRow> rows;
  AccumulationReport accumulation;
};

/// Mixture flow with M_Y installed as entry `index`: the default M_X keeps
/// 1 - k/(2^(k+1) - 1) of the mass, each selectable machine i <= k gets
/// 1/(2^(k+1) - 1).
MeasureFlow unperturbed_flow(const MachineWordSource& x, const std::vector<const MachineWordSource*>& entries,
                             int first);

/// eps = 0 runs the mixture flow; eps > 0 runs M_Y alone from scale max(l, index).
PerturbationReport perturbed_flow(const Machine& mx, const Machine& my, std::size_t index, const Rational& epsilon,
                                  const PerturbationConfig& config, const Enumeration& enumeration = enumeration_v1());

/// Clusters tail points with a resolution net; clusters holding fewer than
/// `dwell` of the points are transit and dropped from the representatives.
AccumulationReport accumulation_report(const std::vector<WordMeasure>& tail, const Rational& resolution, int L,
                                       double dwell = 0.1);
/// Tail {flow(k) : K - window <= k <= K} of the renormalised conditional measures.
AccumulationReport accumulation_report(const MeasureFlow& flow, int l, int K, int window, const Rational& resolution,
                                       double dwell = 0.1);

nlohmann::json accumulation_to_json(const AccumulationReport& a);
/// Everything but epsilon.
nlohmann::json report_body_json(const PerturbationReport& r);
nlohmann::json report_to_json(const PerturbationReport& r);

}  // namespace markerlab
