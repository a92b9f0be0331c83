#pragma once

// One-tape Turing machines that stall once they halt, an instrumented
// universal interpreter, and the word measures obtained by running a
// machine on every seed.

#include "markerlab/measures.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace markerlab {

struct Rule {
  std::string state;
  char read = '#';
  std::string next;
  char write = '#';
  int move = 1;  // -1 left, +1 right
};

struct Transition {
  int next = 0;
  char write = '#';
  int move = 1;
};

/// Tape symbols are single characters. The transition function is total;
/// entries left out for halting states are filled with stalling self-loops.
class Machine {
 public:
  Machine() = default;
  /// Throws std::invalid_argument on any inconsistency, naming the culprit.
  Machine(std::string name, std::vector<std::string> states, std::string initial, std::vector<std::string> final_states,
          std::string input_alphabet, std::string tape_alphabet, char blank, const std::vector<Rule>& rules);

  const std::string& name() const { return name_; }
  int state_count() const { return static_cast<int>(states_.size()); }
  const std::string& state_name(int q) const { return states_.at(static_cast<std::size_t>(q)); }
  int initial() const { return initial_; }
  bool is_final(int q) const { return final_[static_cast<std::size_t>(q)] != 0; }
  const std::string& input_alphabet() const { return input_; }
  const std::string& tape_alphabet() const { return tape_; }
  char blank() const { return blank_; }
  bool in_tape_alphabet(char c) const { return tape_.find(c) != std::string::npos; }
  const Transition& delta(int q, char symbol) const;

  /// State-name independent canonical text; equal machines up to state
  /// renaming in declaration order serialise identically.
  std::string serialize() const;
  static std::optional<Machine> deserialize(const std::string& text);

  friend bool operator==(const Machine& a, const Machine& b) { return a.serialize() == b.serialize(); }

 private:
  std::string name_;
  std::vector<std::string> states_;
  int initial_ = 0;
  std::vector<char> final_;
  std::string input_;
  std::string tape_;
  char blank_ = '#';
  std::vector<Transition> delta_;  // state * |tape| + symbol position
};

nlohmann::json machine_to_json(const Machine& m);
Machine machine_from_json(const nlohmann::json& j);

struct MachineConfig {
  int state = 0;
  std::string tape;  // explicit prefix; blanks beyond
  std::size_t head = 0;
  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

struct Trace {
  MachineConfig final;
  bool halted = false;
  std::uint64_t steps = 0;
  std::vector<MachineConfig> history;  // filled when recording
};

/// Runs until a halting state or `budget` transitions. Moving left from cell
/// 0 keeps the head at 0. Throws std::invalid_argument on symbols outside the
/// tape alphabet.
Trace run(const Machine& m, const std::string& input, std::uint64_t budget, bool record = false);

/// Advances a configuration by one step; halted configurations are returned unchanged.
MachineConfig step(const Machine& m, const MachineConfig& c);

/// Tape with trailing blanks removed.
std::string tape_content(const Machine& m, const MachineConfig& c);

nlohmann::json trace_to_json(const Machine& m, const Trace& t);

// ---------------------------------------------------------------------------
// Universal interpretation

enum class RunStatus : std::uint8_t { Completed, BudgetExceeded };

struct UniversalTrace {
  RunStatus status = RunStatus::Completed;
  Trace simulated;           // the simulated machine's trace
  std::uint64_t u_steps = 0; // head moves of the interpreter
  bool malformed = false;    // encoding rejected; ran the immediate-halt machine
};

/// Interprets the serialised machine on a single tape holding the encoding
/// to the left of the simulated tape. Each simulated transition costs a
/// round trip from the simulated head to the encoding, a scan of the
/// encoding and one write: 3E + 2h + 1 moves for encoding length E and head
/// position h. Stops with BudgetExceeded before a step that would overrun.
UniversalTrace simulate_universal(const std::string& encoded, const std::string& input, std::uint64_t budget);

// ---------------------------------------------------------------------------
// Word measures

/// max(1, floor(log2(max(k, 2)))).
int b_read(int k);

/// min(2^(3^k), desk_cap).
std::uint64_t scale_budget(int k, std::uint64_t desk_cap = 10'000'000);

enum class MeasureStatus : std::uint8_t { Ok, NonConforming, BadOutput };

struct WordMeasureResult {
  MeasureStatus status = MeasureStatus::Ok;
  WordMeasure measure;
  std::uint64_t max_steps = 0;
  std::uint64_t budget = 0;
  std::string detail;
};

/// m_k(w) = |{s in {0,1}^k : M(s) reads w on its first b cells}| / 2^k, with
/// 'u'/'d' cells read as letters. Seeds are enumerated most significant
/// symbol first. Parallel over seeds.
WordMeasureResult word_measure(const Machine& m, int k, int b, std::uint64_t desk_cap = 10'000'000);

namespace serial {
WordMeasureResult word_measure(const Machine& m, int k, int b, std::uint64_t desk_cap = 10'000'000);
}  // namespace serial

// ---------------------------------------------------------------------------
// Corpus and enumeration

namespace corpus {
Machine constant_up();
Machine constant_down();
Machine copier();          // 0 -> u, 1 -> d on every cell
Machine parity();          // first cell gets the parity of the seed, the rest u
Machine incrementer();     // binary +1, most significant bit first
Machine immediate_halt();
Machine always_left();     // never halts
std::vector<Machine> all();
}  // namespace corpus

/// Fixed, versioned machine list in length-lexicographic order of
/// serialisations. Index i refers to element i - 1.
struct Enumeration {
  std::string version;
  std::vector<Machine> machines;
  std::size_t size() const { return machines.size(); }
  const Machine* at(std::size_t i) const { return i >= 1 && i <= machines.size() ? &machines[i - 1] : nullptr; }
};

Enumeration enumeration_v1();

enum class DispatchStatus : std::uint8_t { Ok, Invalid, BudgetExceeded };

struct DispatchResult {
  DispatchStatus status = DispatchStatus::Ok;
  std::size_t branch = 0;  // 0 for the default machine
  bool fallback = false;   // index beyond the enumeration; ran the default machine
  std::uint64_t scan_steps = 0;
  UniversalTrace trace;
  std::string reason;
};

/// Checks y in ({0,1}^j #^(k-j)) with one left-to-right scan, then runs the
/// default machine unless y = 1^i #^(k-i) with i >= 1, in which case machine
/// i of the enumeration runs on x.
DispatchResult selector_dispatch(const Machine& default_machine, const Enumeration& enumeration, const std::string& x,
                                 const std::string& y, int k, std::uint64_t budget);

/// Fraction of selector words y of length <= k that leave the default branch,
/// counted by enumerating every y.
Rational nondefault_dispatch_fraction(int k);

}  // namespace markerlab
