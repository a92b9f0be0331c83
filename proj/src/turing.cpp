#include "markerlab/turing.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

namespace markerlab {

namespace {

int find_state(const std::vector<std::string>& states, const std::string& s, const std::string& where) {
  const auto it = std::find(states.begin(), states.end(), s);
  if (it == states.end()) throw std::invalid_argument(where + ": unknown state '" + s + "'");
  return static_cast<int>(it - states.begin());
}

}  // namespace

Machine::Machine(std::string name, std::vector<std::string> states, std::string initial,
                 std::vector<std::string> final_states, std::string input_alphabet, std::string tape_alphabet,
                 char blank, const std::vector<Rule>& rules)
    : name_(std::move(name)), states_(std::move(states)), input_(std::move(input_alphabet)),
      tape_(std::move(tape_alphabet)), blank_(blank) {
  if (states_.empty()) throw std::invalid_argument("machine has no states");
  for (std::size_t i = 0; i < states_.size(); ++i)
    for (std::size_t j = i + 1; j < states_.size(); ++j)
      if (states_[i] == states_[j]) throw std::invalid_argument("duplicate state '" + states_[i] + "'");
  for (std::size_t i = 0; i < tape_.size(); ++i)
    if (tape_.find(tape_[i], i + 1) != std::string::npos)
      throw std::invalid_argument(std::string("duplicate tape symbol '") + tape_[i] + "'");
  if (tape_.find(';') != std::string::npos) throw std::invalid_argument("';' cannot be a tape symbol");
  if (!in_tape_alphabet(blank_)) throw std::invalid_argument("blank is not a tape symbol");
  for (char c : input_) {
    if (c == blank_) throw std::invalid_argument("blank belongs to the input alphabet");
    if (!in_tape_alphabet(c)) throw std::invalid_argument(std::string("input symbol '") + c + "' is not a tape symbol");
  }
  initial_ = find_state(states_, initial, "initial");
  final_.assign(states_.size(), 0);
  for (const auto& f : final_states) final_[static_cast<std::size_t>(find_state(states_, f, "final"))] = 1;

  const std::size_t G = tape_.size();
  std::vector<char> set(states_.size() * G, 0);
  delta_.assign(states_.size() * G, Transition{});
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    const std::string where = "delta[" + std::to_string(i) + "]";
    const int q = find_state(states_, r.state, where);
    const int n = find_state(states_, r.next, where);
    const auto s = tape_.find(r.read);
    if (s == std::string::npos) throw std::invalid_argument(where + ": read symbol not in tape alphabet");
    if (!in_tape_alphabet(r.write)) throw std::invalid_argument(where + ": write symbol not in tape alphabet");
    if (r.move != -1 && r.move != 1) throw std::invalid_argument(where + ": move must be -1 or +1");
    const std::size_t cell = static_cast<std::size_t>(q) * G + s;
    if (set[cell]) throw std::invalid_argument(where + ": duplicate transition");
    set[cell] = 1;
    delta_[cell] = {n, r.write, r.move};
  }
  for (std::size_t q = 0; q < states_.size(); ++q) {
    for (std::size_t s = 0; s < G; ++s) {
      const std::size_t cell = q * G + s;
      if (set[cell]) continue;
      if (!final_[q])
        throw std::invalid_argument("transition missing for state '" + states_[q] + "' reading '" + tape_[s] + "'");
      delta_[cell] = {static_cast<int>(q), tape_[s], 1};
    }
  }
}

const Transition& Machine::delta(int q, char symbol) const {
  const auto s = tape_.find(symbol);
  if (s == std::string::npos) throw std::invalid_argument(std::string("symbol '") + symbol + "' not in tape alphabet");
  return delta_[static_cast<std::size_t>(q) * tape_.size() + s];
}

std::string Machine::serialize() const {
  std::ostringstream out;
  out << "TM1;S=" << states_.size() << ";I=" << initial_ << ";F=";
  bool first = true;
  for (std::size_t q = 0; q < states_.size(); ++q)
    if (final_[q]) {
      out << (first ? "" : ",") << q;
      first = false;
    }
  out << ";G=" << tape_ << ";A=" << input_ << ";B=" << blank_ << ";D=";
  for (std::size_t q = 0; q < states_.size(); ++q) {
    if (final_[q]) continue;
    for (std::size_t s = 0; s < tape_.size(); ++s) {
      const auto& t = delta_[q * tape_.size() + s];
      out << t.next << ':' << tape_.find(t.write) << (t.move < 0 ? 'L' : 'R');
    }
    out << '|';
  }
  return out.str();
}

std::optional<Machine> Machine::deserialize(const std::string& text) {
  try {
    std::map<std::string, std::string> fields;
    std::size_t pos = 0;
    if (text.rfind("TM1;", 0) != 0) return std::nullopt;
    pos = 4;
    while (pos < text.size()) {
      const auto eq = text.find('=', pos);
      if (eq == std::string::npos) return std::nullopt;
      const std::string key = text.substr(pos, eq - pos);
      const std::size_t end = key == "D" ? text.size() : text.find(';', eq + 1);
      if (end == std::string::npos) return std::nullopt;
      fields[key] = text.substr(eq + 1, end - eq - 1);
      pos = end + 1;
    }
    for (const char* k : {"S", "I", "F", "G", "A", "B", "D"})
      if (!fields.contains(k)) return std::nullopt;
    const int S = std::stoi(fields["S"]);
    const int I = std::stoi(fields["I"]);
    if (S < 1 || S > 4096 || I < 0 || I >= S || fields["B"].size() != 1) return std::nullopt;
    std::vector<std::string> states;
    for (int q = 0; q < S; ++q) states.push_back("q" + std::to_string(q));
    std::vector<std::string> finals;
    std::vector<char> is_final(static_cast<std::size_t>(S), 0);
    if (!fields["F"].empty()) {
      std::stringstream ss(fields["F"]);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const int f = std::stoi(item);
        if (f < 0 || f >= S) return std::nullopt;
        finals.push_back(states[static_cast<std::size_t>(f)]);
        is_final[static_cast<std::size_t>(f)] = 1;
      }
    }
    const std::string& G = fields["G"];
    const std::string& D = fields["D"];
    std::vector<Rule> rules;
    std::size_t p = 0;
    for (int q = 0; q < S; ++q) {
      if (is_final[static_cast<std::size_t>(q)]) continue;
      for (char read : G) {
        auto number = [&](int& value) {
          const std::size_t from = p;
          while (p < D.size() && std::isdigit(static_cast<unsigned char>(D[p]))) ++p;
          if (p == from || p - from > 6) return false;
          value = std::stoi(D.substr(from, p - from));
          return true;
        };
        int next = 0, write = 0;
        if (!number(next) || p >= D.size() || D[p++] != ':' || !number(write) || p >= D.size()) return std::nullopt;
        if (next < 0 || next >= S || write < 0 || static_cast<std::size_t>(write) >= G.size()) return std::nullopt;
        const char mv = D[p++];
        if (mv != 'L' && mv != 'R') return std::nullopt;
        rules.push_back({states[static_cast<std::size_t>(q)], read, states[static_cast<std::size_t>(next)],
                         G[static_cast<std::size_t>(write)], mv == 'L' ? -1 : 1});
      }
      if (p >= D.size() || D[p] != '|') return std::nullopt;
      ++p;
    }
    if (p != D.size()) return std::nullopt;
    return Machine("decoded", states, states[static_cast<std::size_t>(I)], finals, fields["A"], G, fields["B"][0], rules);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

nlohmann::json machine_to_json(const Machine& m) {
  using nlohmann::json;
  json states = json::array(), finals = json::array(), delta = json::array();
  for (int q = 0; q < m.state_count(); ++q) {
    states.push_back(m.state_name(q));
    if (m.is_final(q)) finals.push_back(m.state_name(q));
  }
  auto chars = [](const std::string& s) {
    json a = json::array();
    for (char c : s) a.push_back(std::string(1, c));
    return a;
  };
  for (int q = 0; q < m.state_count(); ++q) {
    if (m.is_final(q)) continue;
    for (char s : m.tape_alphabet()) {
      const auto& t = m.delta(q, s);
      delta.push_back({{"state", m.state_name(q)},
                       {"read", std::string(1, s)},
                       {"next", m.state_name(t.next)},
                       {"write", std::string(1, t.write)},
                       {"move", t.move < 0 ? "L" : "R"}});
    }
  }
  return {{"name", m.name()},
          {"states", std::move(states)},
          {"initial", m.state_name(m.initial())},
          {"final", std::move(finals)},
          {"input_alphabet", chars(m.input_alphabet())},
          {"tape_alphabet", chars(m.tape_alphabet())},
          {"blank", std::string(1, m.blank())},
          {"delta", std::move(delta)}};
}

Machine machine_from_json(const nlohmann::json& j) {
  auto symbol = [](const nlohmann::json& v, const std::string& where) {
    if (!v.is_string() || v.get<std::string>().size() != 1)
      throw std::invalid_argument(where + ": symbols are one-character strings");
    return v.get<std::string>()[0];
  };
  auto symbols = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array()) throw std::invalid_argument(std::string("machine: missing '") + key + "'");
    std::string s;
    for (const auto& v : j[key]) s += symbol(v, key);
    return s;
  };
  for (const char* key : {"states", "initial", "final", "blank", "delta"})
    if (!j.contains(key)) throw std::invalid_argument(std::string("machine: missing '") + key + "'");
  std::vector<Rule> rules;
  for (std::size_t i = 0; i < j["delta"].size(); ++i) {
    const auto& d = j["delta"][i];
    const std::string where = "delta[" + std::to_string(i) + "]";
    Rule r;
    r.state = d.at("state").get<std::string>();
    r.read = symbol(d.at("read"), where + ".read");
    r.next = d.at("next").get<std::string>();
    r.write = symbol(d.at("write"), where + ".write");
    const auto& mv = d.at("move");
    if (mv.is_string()) {
      const auto s = mv.get<std::string>();
      if (s == "L") r.move = -1;
      else if (s == "R") r.move = 1;
      else throw std::invalid_argument(where + ".move: expected L or R");
    } else {
      r.move = mv.get<int>();
    }
    rules.push_back(std::move(r));
  }
  return Machine(j.value("name", "machine"), j["states"].get<std::vector<std::string>>(),
                 j["initial"].get<std::string>(), j["final"].get<std::vector<std::string>>(), symbols("input_alphabet"),
                 symbols("tape_alphabet"), symbol(j["blank"], "blank"), rules);
}

MachineConfig step(const Machine& m, const MachineConfig& c) {
  if (m.is_final(c.state)) return c;
  MachineConfig n = c;
  if (n.head >= n.tape.size()) n.tape.resize(n.head + 1, m.blank());
  const Transition& t = m.delta(c.state, n.tape[n.head]);
  n.tape[n.head] = t.write;
  n.state = t.next;
  if (t.move < 0) {
    if (n.head > 0) --n.head;
  } else {
    ++n.head;
  }
  return n;
}

Trace run(const Machine& m, const std::string& input, std::uint64_t budget, bool record) {
  for (char c : input)
    if (!m.in_tape_alphabet(c)) throw std::invalid_argument(std::string("input symbol '") + c + "' outside the tape alphabet");
  Trace tr;
  tr.final = {m.initial(), input, 0};
  if (record) tr.history.push_back(tr.final);
  while (!m.is_final(tr.final.state) && tr.steps < budget) {
    tr.final = step(m, tr.final);
    ++tr.steps;
    if (record) tr.history.push_back(tr.final);
  }
  tr.halted = m.is_final(tr.final.state);
  return tr;
}

std::string tape_content(const Machine& m, const MachineConfig& c) {
  std::string s = c.tape;
  while (!s.empty() && s.back() == m.blank()) s.pop_back();
  return s;
}

nlohmann::json trace_to_json(const Machine& m, const Trace& t) {
  nlohmann::json steps = nlohmann::json::array();
  const auto& hist = t.history.empty() ? std::vector<MachineConfig>{t.final} : t.history;
  for (std::size_t i = 0; i < hist.size(); ++i)
    steps.push_back({{"step", t.history.empty() ? t.steps : i},
                     {"state", m.state_name(hist[i].state)},
                     {"head", hist[i].head},
                     {"tape", tape_content(m, hist[i])}});
  return {{"halted", t.halted}, {"steps", t.steps}, {"trace", std::move(steps)}};
}

// ---------------------------------------------------------------------------

UniversalTrace simulate_universal(const std::string& encoded, const std::string& input, std::uint64_t budget) {
  UniversalTrace u;
  auto decoded = Machine::deserialize(encoded);
  if (!decoded) {
    u.malformed = true;
    u.simulated.final = {0, input, 0};
    u.simulated.halted = true;
    return u;
  }
  const Machine& m = *decoded;
  for (char c : input)
    if (!m.in_tape_alphabet(c)) throw std::invalid_argument(std::string("input symbol '") + c + "' outside the tape alphabet");
  const std::uint64_t E = encoded.size();
  u.simulated.final = {m.initial(), input, 0};
  while (!m.is_final(u.simulated.final.state)) {
    const std::uint64_t cost = 3 * E + 2 * u.simulated.final.head + 1;
    if (u.u_steps + cost > budget) {
      u.status = RunStatus::BudgetExceeded;
      break;
    }
    u.u_steps += cost;
    u.simulated.final = step(m, u.simulated.final);
    ++u.simulated.steps;
  }
  u.simulated.halted = m.is_final(u.simulated.final.state);
  return u;
}

// ---------------------------------------------------------------------------

int b_read(int k) { return std::max(1, floor_log2(static_cast<std::uint64_t>(std::max(k, 2)))); }

std::uint64_t scale_budget(int k, std::uint64_t desk_cap) {
  std::uint64_t e = 1;
  for (int i = 0; i < k; ++i) {
    e *= 3;
    if (e >= 63) return desk_cap;
  }
  return std::min<std::uint64_t>(std::uint64_t{1} << e, desk_cap);
}

namespace {

struct SeedOutcome {
  bool ok = true;
  bool bad_output = false;
  std::size_t word = 0;
  std::uint64_t steps = 0;
};

SeedOutcome run_seed(const Machine& m, int k, int b, std::uint64_t seed, std::uint64_t budget) {
  std::string input(static_cast<std::size_t>(k), '0');
  for (int i = 0; i < k; ++i)
    if ((seed >> (k - 1 - i)) & 1) input[static_cast<std::size_t>(i)] = '1';
  const Trace t = run(m, input, budget);
  SeedOutcome o;
  o.steps = t.steps;
  if (!t.halted) {
    o.ok = false;
    return o;
  }
  for (int i = 0; i < b; ++i) {
    const char c = static_cast<std::size_t>(i) < t.final.tape.size() ? t.final.tape[static_cast<std::size_t>(i)] : m.blank();
    if (c == 'u') o.word = o.word << 1;
    else if (c == 'd') o.word = (o.word << 1) | 1;
    else {
      o.bad_output = true;
      return o;
    }
  }
  return o;
}

WordMeasureResult measure_seeds(const Machine& m, int k, int b, std::uint64_t desk_cap, bool parallel) {
  if (k < 0 || k > 30) throw std::invalid_argument("seed length must be in 0..30");
  if (b < 0 || b > 20) throw std::invalid_argument("output length must be in 0..20");
  if (m.input_alphabet().find('0') == std::string::npos || m.input_alphabet().find('1') == std::string::npos)
    throw std::invalid_argument("machine input alphabet must contain 0 and 1");
  WordMeasureResult r;
  r.budget = scale_budget(k, desk_cap);
  const std::uint64_t seeds = std::uint64_t{1} << k;
  const std::size_t words = std::size_t{1} << b;
  const int threads = parallel ? omp_get_max_threads() : 1;
  std::vector<std::vector<std::uint64_t>> counts(static_cast<std::size_t>(threads), std::vector<std::uint64_t>(words, 0));
  std::vector<std::uint64_t> max_steps(static_cast<std::size_t>(threads), 0);
  std::vector<std::uint64_t> first_bad(static_cast<std::size_t>(threads), seeds);
  std::vector<std::uint64_t> first_slow(static_cast<std::size_t>(threads), seeds);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long long s = 0; s < static_cast<long long>(seeds); ++s) {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    const SeedOutcome o = run_seed(m, k, b, static_cast<std::uint64_t>(s), r.budget);
    max_steps[tid] = std::max(max_steps[tid], o.steps);
    if (!o.ok) first_slow[tid] = std::min<std::uint64_t>(first_slow[tid], static_cast<std::uint64_t>(s));
    else if (o.bad_output) first_bad[tid] = std::min<std::uint64_t>(first_bad[tid], static_cast<std::uint64_t>(s));
    else ++counts[tid][o.word];
  }
  std::vector<std::uint64_t> total(words, 0);
  std::uint64_t slow = seeds, bad = seeds;
  for (int t = 0; t < threads; ++t) {
    const auto i = static_cast<std::size_t>(t);
    for (std::size_t w = 0; w < words; ++w) total[w] += counts[i][w];
    r.max_steps = std::max(r.max_steps, max_steps[i]);
    slow = std::min(slow, first_slow[i]);
    bad = std::min(bad, first_bad[i]);
  }
  if (slow < seeds) {
    r.status = MeasureStatus::NonConforming;
    r.detail = "seed " + std::to_string(slow) + " exceeds " + std::to_string(r.budget) + " steps";
    r.measure = WordMeasure::uniform(b);
    return r;
  }
  if (bad < seeds) {
    r.status = MeasureStatus::BadOutput;
    r.detail = "seed " + std::to_string(bad) + " leaves a non-arrow symbol in the first " + std::to_string(b) + " cells";
    r.measure = WordMeasure::uniform(b);
    return r;
  }
  std::vector<Rational> w(words);
  for (std::size_t i = 0; i < words; ++i) {
    w[i] = Rational(Integer(static_cast<unsigned long>(total[i])), pow2(static_cast<unsigned long>(k)));
    w[i].canonicalize();
  }
  r.measure = WordMeasure(b, std::move(w));
  return r;
}

}  // namespace

WordMeasureResult word_measure(const Machine& m, int k, int b, std::uint64_t desk_cap) {
  return measure_seeds(m, k, b, desk_cap, true);
}

namespace serial {
WordMeasureResult word_measure(const Machine& m, int k, int b, std::uint64_t desk_cap) {
  return measure_seeds(m, k, b, desk_cap, false);
}
}  // namespace serial

// ---------------------------------------------------------------------------

namespace corpus {

namespace {

constexpr const char* kArrowTape = "#01ud";

// Writes `zero` over 0 and `one` over 1, halting on the first blank.
Machine rewriter(std::string name, char zero, char one) {
  std::vector<Rule> rules{{"scan", '0', "scan", zero, 1}, {"scan", '1', "scan", one, 1},
                          {"scan", '#', "halt", '#', -1}, {"scan", 'u', "scan", 'u', 1},
                          {"scan", 'd', "scan", 'd', 1}};
  return Machine(std::move(name), {"scan", "halt"}, "scan", {"halt"}, "01", kArrowTape, '#', rules);
}

}  // namespace

Machine constant_up() { return rewriter("constant-up", 'u', 'u'); }
Machine constant_down() { return rewriter("constant-down", 'd', 'd'); }
Machine copier() { return rewriter("copier", 'u', 'd'); }

Machine parity() {
  const std::string tape = "#01uda";
  std::vector<Rule> rules;
  auto add = [&](const char* q, char r, const char* n, char w, int mv) { rules.push_back({q, r, n, w, mv}); };
  add("start", '0', "even", 'a', 1);
  add("start", '1', "odd", 'a', 1);
  add("start", '#', "halt", 'u', 1);
  add("even", '0', "even", 'u', 1);
  add("even", '1', "odd", 'u', 1);
  add("even", '#', "back_even", '#', -1);
  add("odd", '0', "odd", 'u', 1);
  add("odd", '1', "even", 'u', 1);
  add("odd", '#', "back_odd", '#', -1);
  add("back_even", 'u', "back_even", 'u', -1);
  add("back_even", 'a', "halt", 'u', 1);
  add("back_odd", 'u', "back_odd", 'u', -1);
  add("back_odd", 'a', "halt", 'd', 1);
  // Unreachable symbol/state pairs stall in place.
  for (const char* q : {"start", "even", "odd", "back_even", "back_odd"})
    for (char s : tape) {
      const bool present = std::any_of(rules.begin(), rules.end(), [&](const Rule& r) { return r.state == q && r.read == s; });
      if (!present) add(q, s, q, s, 1);
    }
  return Machine("parity", {"start", "even", "odd", "back_even", "back_odd", "halt"}, "start", {"halt"}, "01", tape, '#',
                 rules);
}

Machine incrementer() {
  std::vector<Rule> rules{{"seek", '0', "seek", '0', 1},   {"seek", '1', "seek", '1', 1},
                          {"seek", '#', "carry", '#', -1}, {"carry", '1', "carry", '0', -1},
                          {"carry", '0', "done", '1', 1},  {"carry", '#', "done", '1', 1}};
  return Machine("incrementer", {"seek", "carry", "done"}, "seek", {"done"}, "01", "#01", '#', rules);
}

Machine immediate_halt() { return Machine("immediate-halt", {"halt"}, "halt", {"halt"}, "01", kArrowTape, '#', {}); }

Machine always_left() {
  std::vector<Rule> rules;
  for (char s : std::string(kArrowTape)) rules.push_back({"left", s, "left", s, -1});
  return Machine("always-left", {"left"}, "left", {}, "01", kArrowTape, '#', rules);
}

std::vector<Machine> all() {
  return {constant_up(), constant_down(), copier(), parity(), incrementer(), immediate_halt()};
}

}  // namespace corpus

Enumeration enumeration_v1() {
  Enumeration e;
  e.version = "v1";
  e.machines = corpus::all();
  std::stable_sort(e.machines.begin(), e.machines.end(), [](const Machine& a, const Machine& b) {
    const auto sa = a.serialize(), sb = b.serialize();
    return sa.size() != sb.size() ? sa.size() < sb.size() : sa < sb;
  });
  return e;
}

DispatchResult selector_dispatch(const Machine& default_machine, const Enumeration& enumeration, const std::string& x,
                                 const std::string& y, int k, std::uint64_t budget) {
  DispatchResult d;
  if (static_cast<int>(x.size()) != k) throw std::invalid_argument("seed x must have length k");
  for (char c : x)
    if (c != '0' && c != '1') throw std::invalid_argument("seed x must be binary");
  // One pass: letters, then blanks only; count the leading ones.
  bool blank = false, all_ones = true;
  std::size_t ones = 0;
  for (char c : y) {
    ++d.scan_steps;
    if (c == '#') {
      blank = true;
      continue;
    }
    if ((c != '0' && c != '1') || blank) {
      d.status = DispatchStatus::Invalid;
      d.reason = "selector word is not a binary word followed by blanks";
      return d;
    }
    if (c == '1' && all_ones) ++ones;
    else all_ones = false;
  }
  if (static_cast<int>(y.size()) != k) {
    d.status = DispatchStatus::Invalid;
    d.reason = "selector word must have length k";
    return d;
  }
  const Machine* target = &default_machine;
  if (all_ones && ones >= 1) {
    d.branch = ones;
    if (const Machine* mi = enumeration.at(ones)) target = mi;
    else d.fallback = true;
  }
  d.trace = simulate_universal(target->serialize(), x, budget);
  if (d.trace.status == RunStatus::BudgetExceeded) d.status = DispatchStatus::BudgetExceeded;
  return d;
}

Rational nondefault_dispatch_fraction(int k) {
  if (k < 0 || k > 24) throw std::invalid_argument("k must be in 0..24");
  std::uint64_t total = 0, hits = 0;
  for (int len = 0; len <= k; ++len) {
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << len); ++w) {
      ++total;
      if (len >= 1 && w == (std::uint64_t{1} << len) - 1) ++hits;
    }
  }
  Rational r(Integer(static_cast<unsigned long>(hits)), Integer(static_cast<unsigned long>(total)));
  r.canonicalize();
  return r;
}

}  // namespace markerlab
