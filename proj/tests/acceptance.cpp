// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "markerlab/gibbs.hpp"
#include "markerlab/layers.hpp"
#include "markerlab/markers.hpp"
#include "markerlab/perturbation.hpp"
#include "markerlab/pi2.hpp"
#include "markerlab/thermo.hpp"
#include "markerlab/turing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace markerlab;

namespace {

class Criterion {
 public:
  Criterion(int id, std::string title, double limit_s) : id_(id), title_(std::move(title)), limit_(limit_s) {}

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ok_ = false;
      failures_.push_back(what);
    }
  }
  void note(const std::string& text) { notes_.push_back(text); }

  bool finish() {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (elapsed >= limit_) {
      ok_ = false;
      failures_.push_back("runtime " + std::to_string(elapsed) + " s over the " + std::to_string(limit_) + " s limit");
    }
    std::cout << (ok_ ? "PASS" : "FAIL") << "  [" << id_ << "] " << title_ << "  (" << std::fixed;
    std::cout.precision(2);
    std::cout << elapsed << " s)\n";
    std::cout.unsetf(std::ios::floatfield);
    for (const auto& n : notes_) std::cout << "        " << n << "\n";
    for (const auto& f : failures_) std::cout << "        failed: " << f << "\n";
    return ok_;
  }

 private:
  int id_;
  std::string title_;
  double limit_;
  bool ok_ = true;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

template <class F>
void guarded(Criterion& c, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
}

const Tileset& robinson() {
  static const Tileset ts = build_tileset();
  return ts;
}

// ---------------------------------------------------------------------------

bool hierarchy() {
  Criterion c(1, "Robinson hierarchy n = 1..8: side, local rules, corner quadrants", 10.0);
  guarded(c, [&] {
    const int quadrant[2][2] = {{0, 3}, {1, 2}};
    std::map<std::pair<int, int>, Patch> built;
    for (int n = 1; n <= 8; ++n)
      for (int o = 0; o < 4; ++o) built[{n, o}] = build_macro_tile(robinson(), n, o).patch;
    for (int n = 1; n <= 8; ++n)
      for (int o = 0; o < 4; ++o) {
        const Patch& p = built[{n, o}];
        const std::string tag = "n=" + std::to_string(n) + " o=" + std::to_string(o);
        c.expect(p.width() == (1 << n) - 1 && p.height() == (1 << n) - 1, tag + " side");
        c.expect(p.total(), tag + " has holes");
        c.expect(check_patch(robinson(), p).empty(), tag + " violates a local rule");
        if (n == 1) continue;
        const int h = (1 << (n - 1)) - 1;
        for (int qx = 0; qx < 2; ++qx)
          for (int qy = 0; qy < 2; ++qy)
            c.expect(p.sub(qx * (h + 1), qy * (h + 1), h, h) == built[{n - 1, quadrant[qx][qy]}],
                     tag + " quadrant (" + std::to_string(qx) + "," + std::to_string(qy) + ")");
      }
    c.note("largest macro-tile side 255");
  });
  return c.finish();
}

// Paints u on a canvas and looks for a placement of v at a nonzero offset that agrees everywhere.
std::optional<OverlapWitness> overlap_oracle(const MarkerSet& q) {
  const int l = q.ell();
  const auto& ps = q.patterns();
  for (std::size_t u = 0; u < ps.size(); ++u)
    for (std::size_t v = 0; v < ps.size(); ++v)
      for (int dy = 1 - l; dy < l; ++dy)
        for (int dx = 1 - l; dx < l; ++dx) {
          if (dx == 0 && dy == 0) continue;
          bool clash = false;
          for (int y = 0; y < l && !clash; ++y)
            for (int x = 0; x < l && !clash; ++x) {
              const int cx = x + dx, cy = y + dy;
              if (cx >= 0 && cx < l && cy >= 0 && cy < l && ps[u].at(cx, cy) != ps[v].at(x, y)) clash = true;
            }
          if (!clash) return OverlapWitness{u, v, {dx, dy}};
        }
  return std::nullopt;
}

bool marker_axioms() {
  Criterion c(2, "marker non-overlap n = 1..4 and oracle agreement on 50 random sets", 60.0);
  guarded(c, [&] {
    for (int n = 1; n <= 4; ++n) {
      const auto q = macro_marker_set(robinson(), n);
      c.expect(!verify_nonoverlap(q).has_value(), "macro marker set n=" + std::to_string(n) + " overlaps");
      c.expect(!overlap_oracle(q).has_value(), "oracle finds an overlap at n=" + std::to_string(n));
    }
    std::mt19937_64 rng(50);
    int witnesses = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const int l = 1 + static_cast<int>(rng() % 3);
      const int alphabet = 2 + static_cast<int>(rng() % 3);
      const int count = 1 + static_cast<int>(rng() % 3);
      std::vector<Patch> ps;
      for (int i = 0; i < count; ++i) {
        Patch p(l, l);
        for (int y = 0; y < l; ++y)
          for (int x = 0; x < l; ++x) p.set(x, y, static_cast<TileId>(rng() % alphabet));
        ps.push_back(p);
      }
      const MarkerSet q(ps, Rational(1));
      const auto a = verify_nonoverlap(q), b = overlap_oracle(q);
      c.expect(a == b, "random set " + std::to_string(trial) + " disagrees with the oracle");
      witnesses += a.has_value();
    }
    c.note("random sets with an overlap witness: " + std::to_string(witnesses) + " / 50");
  });
  return c.finish();
}

bool frozen_frequency() {
  Criterion c(3, "frozen-frequency law: monotone, product identity, 0.99 crossing", 5.0);
  guarded(c, [&] {
    const auto t = OdometerSchedule::logarithmic();
    const int kmax = 1'000'000;
    const auto table = freq_frozen_table(kmax, t);
    c.expect(table.size() == static_cast<std::size_t>(kmax) + 1, "table size");
    c.expect(std::is_sorted(table.begin(), table.end()), "freq_k is not monotone");

    // straight loop: one factor per scale
    Rational keep = 1;
    std::optional<int> oracle_crossing;
    const Rational threshold(99, 100);
    for (int k = 0; k <= 3000; ++k) {
      if (k > 0) {
        keep *= make_rational(4L * t(k - 1) - 1, 4L * t(k - 1));
      }
      const Rational freq = 1 - keep;
      c.expect(freq_frozen(k, t) == freq, "product identity at k=" + std::to_string(k));
      if (!oracle_crossing && freq >= threshold) oracle_crossing = k;
    }
    const auto crossing = freq_crossing(threshold, t, kmax);
    c.expect(crossing.has_value() && oracle_crossing.has_value() && *crossing == *oracle_crossing,
             "crossing differs from the straight-loop oracle");
    c.note("crossing of 0.99 at k = " + (crossing ? std::to_string(*crossing) : std::string("none")) +
           " (oracle " + (oracle_crossing ? std::to_string(*oracle_crossing) : std::string("none")) + ")");

    // identity at the top of the range: equal factors counted, then raised in integers
    std::map<unsigned long, unsigned long> runs;
    for (int j = 0; j < kmax; ++j) ++runs[static_cast<unsigned long>(t(j))];
    Integer num = 1, den = 1;
    for (const auto& [tj, count] : runs) {
      Integer f;
      mpz_ui_pow_ui(f.get_mpz_t(), 4 * tj - 1, count);
      num *= f;
      mpz_ui_pow_ui(f.get_mpz_t(), 4 * tj, count);
      den *= f;
    }
    Rational top(num, den);
    top.canonicalize();
    const Rational freq_top = 1 - top;
    c.expect(freq_frozen(kmax, t) == freq_top, "product identity at k = 10^6");
    c.expect(std::fabs(static_cast<double>(table[kmax]) - freq_top.get_d()) < 1e-12, "table at k = 10^6");
  });
  return c.finish();
}

WordMeasure random_measure(std::mt19937_64& rng, int depth) {
  std::vector<long> raw(std::size_t{1} << depth);
  long total = 0;
  for (auto& r : raw) total += (r = static_cast<long>(rng() % 5));
  if (total == 0) {
    raw[0] = 1;
    total = 1;
  }
  std::vector<Rational> w;
  for (long r : raw) w.push_back(make_rational(r, total));
  return WordMeasure(depth, w);
}

bool conditional_calculus() {
  Criterion c(4, "conditional recursion: telescoping mass, forward-run horizon", 30.0);
  guarded(c, [&] {
    std::mt19937_64 rng(100);
    for (int trial = 0; trial < 100; ++trial) {
      const int l = 1 + static_cast<int>(rng() % 3);
      const int K = l + 5 + static_cast<int>(rng() % 40);
      std::vector<int> ts;
      std::vector<WordMeasure> ms;
      for (int j = 0; j <= K; ++j) {
        ts.push_back(2 + static_cast<int>(rng() % 6));
        ms.push_back(random_measure(rng, l + static_cast<int>(rng() % 2)));
      }
      MeasureFlow flow;
      flow.t = OdometerSchedule([ts](int j) { return ts.at(static_cast<std::size_t>(j)); });
      flow.measure = [ms](int j) { return ms.at(static_cast<std::size_t>(j)); };
      flow.first = static_cast<int>(rng() % 4);

      // raw_k - keep_k raw_(k-1) = f_k m_k and mass + residual = 1 at every k
      std::vector<Rational> prev(std::size_t{1} << l, Rational(0));
      ConditionalRecursion rec(l, flow);
      bool ok = true;
      for (int k = l; k <= K; ++k) {
        const auto& s = rec.advance();
        Rational mass = s.residual;
        for (const auto& r : s.raw) mass += r;
        ok = ok && mass == 1;
        const bool contributes = k >= flow.first;
        const Rational keep = contributes ? make_rational(4L * ts[k] - 1, 4L * ts[k]) : Rational(1);
        const Rational f = contributes ? make_rational(1, 4L * ts[k]) : Rational(0);
        const auto mk = ms[static_cast<std::size_t>(k)].marginal(l);
        for (std::size_t w = 0; w < prev.size(); ++w) {
          ok = ok && s.raw[w] - keep * prev[w] == f * mk[w];
          prev[w] = s.raw[w];
        }
      }
      const auto direct = serial::conditional_grid_measure(K, l, flow);
      ok = ok && direct.raw == rec.current().raw && direct.residual == rec.current().residual;
      c.expect(ok, "telescoping identity on random schedule " + std::to_string(trial));
    }

    // m_j = a before j0, b afterwards
    const int l = 2;
    const int j0 = 20;
    const auto a = WordMeasure::point_mass(parse_word("ud"));
    const auto b = WordMeasure::bernoulli(2, Rational(1, 4));
    const auto t = OdometerSchedule::logarithmic();
    MeasureFlow flow;
    flow.t = t;
    flow.measure = [&](int j) { return j < j0 ? a : b; };
    const Rational eps(1, 1024);
    // forward run of the pre-switch weight alone: d_k = alpha_k d(a, b)
    const Rational dab = weak_star_distance(a, b, l);
    Rational pre = 0, keep_all = 1;
    int predicted = -1;
    for (int k = l; k <= 5000 && predicted < 0; ++k) {
      const Rational keep = make_rational(4L * t(k) - 1, 4L * t(k));
      pre *= keep;
      if (k < j0) pre += make_rational(1, 4L * t(k));
      keep_all *= keep;
      if (k >= j0 && pre / (1 - keep_all) * dab < eps) predicted = k;
    }
    c.expect(predicted > 0, "forward run never reached 2^-10");
    const auto d = flow_limit_check(flow, b, l, predicted);
    c.expect(d.back() < eps, "distance at the predicted horizon is not below 2^-10");
    c.expect(d[d.size() - 2] >= eps, "distance drops below 2^-10 before the predicted horizon");
    c.note("switch at j0 = 20, 2^-10 reached at K = " + std::to_string(predicted));
  });
  return c.finish();
}

std::string seed_string(std::uint64_t s, int k) {
  std::string x(static_cast<std::size_t>(k), '0');
  for (int i = 0; i < k; ++i)
    if ((s >> (k - 1 - i)) & 1) x[static_cast<std::size_t>(i)] = '1';
  return x;
}

bool word_measures() {
  Criterion c(5, "word measures equal the exhaustive-seed oracle for k <= 16; universal overhead", 60.0);
  guarded(c, [&] {
    for (const auto& m : {corpus::constant_up(), corpus::constant_down(), corpus::copier(), corpus::parity()}) {
      for (int k = 1; k <= 16; ++k) {
        const int b = std::min(b_read(k), k);
        const auto r = word_measure(m, k, b);
        c.expect(r.status == MeasureStatus::Ok, m.name() + " status at k=" + std::to_string(k));
        // every seed run to its halt, the first b cells read directly
        std::vector<std::uint64_t> counts(std::size_t{1} << b, 0);
        bool readable = true;
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) {
          const auto tr = run(m, seed_string(s, k), scale_budget(k));
          std::string tape = tr.final.tape;
          tape.resize(std::max<std::size_t>(tape.size(), static_cast<std::size_t>(b)), m.blank());
          std::size_t idx = 0;
          for (int i = 0; i < b; ++i) {
            const char ch = tape[static_cast<std::size_t>(i)];
            readable = readable && (ch == 'u' || ch == 'd') && tr.halted;
            idx = (idx << 1) | (ch == 'd');
          }
          ++counts[idx];
        }
        std::vector<Rational> w;
        for (auto n : counts) {
          Rational q(Integer(static_cast<unsigned long>(n)), pow2(static_cast<unsigned long>(k)));
          q.canonicalize();
          w.push_back(q);
        }
        c.expect(readable, m.name() + " left a non-arrow cell at k=" + std::to_string(k));
        c.expect(r.measure == WordMeasure(b, w), m.name() + " differs from the oracle at k=" + std::to_string(k));
      }
    }

    std::mt19937_64 rng(5);
    double worst = 0;
    std::uint64_t c_bound = 0;
    for (const auto& m : corpus::all()) {
      const std::string enc = m.serialize();
      const std::uint64_t cm = 3 * enc.size() + 3;
      c_bound = std::max(c_bound, cm);
      for (int trial = 0; trial < 20; ++trial) {
        const std::string x = seed_string(rng(), 1 + static_cast<int>(rng() % 12));
        const auto direct = run(m, x, 10'000);
        const auto u = simulate_universal(enc, x, 1'000'000'000);
        const bool same = u.status == RunStatus::Completed && !u.malformed && u.simulated.halted == direct.halted &&
                          u.simulated.steps == direct.steps &&
                          tape_content(m, u.simulated.final) == tape_content(m, direct.final);
        c.expect(same, "universal run of " + m.name() + " on " + x + " differs");
        if (direct.steps > 0) {
          const double ratio = static_cast<double>(u.u_steps) / (static_cast<double>(direct.steps) * direct.steps);
          worst = std::max(worst, ratio);
          c.expect(u.u_steps <= cm * direct.steps * direct.steps, "overhead above c steps^2 for " + m.name());
        } else {
          c.expect(u.u_steps == 0, "interpreter moved on a zero-step run of " + m.name());
        }
      }
    }
    std::ostringstream s;
    s << "recorded c = 3E + 3 <= " << c_bound << ", worst measured u_steps / steps^2 = " << worst;
    c.note(s.str());
  });
  return c.finish();
}

bool windows() {
  Criterion c(6, "temperature windows: monotone bounds, overlap past the threshold, additive constants", 5.0);
  guarded(c, [&] {
    const LogReal tol("1e-80");
    for (int k = 1; k < 12; ++k) {
      const auto a = temperature_window(k), b = temperature_window(k + 1);
      c.expect(b.log2_beta_lo > a.log2_beta_lo, "log2 beta_lo not increasing at k=" + std::to_string(k));
      c.expect(b.log2_beta_hi > a.log2_beta_hi, "log2 beta_hi not increasing at k=" + std::to_string(k));
    }
    const auto rows = overlap_check(1, 12);
    const auto k0 = overlap_threshold(rows);
    c.expect(k0.has_value(), "no overlap threshold");
    if (k0) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].k < *k0) continue;
        c.expect(rows[i].log_ratio > 0, "ratio not positive at k=" + std::to_string(rows[i].k));
        if (i + 1 < rows.size())
          c.expect(rows[i + 1].log_ratio > rows[i].log_ratio, "ratio not increasing at k=" + std::to_string(rows[i].k));
      }
      c.note("overlap threshold k0 = " + std::to_string(*k0));
    }
    for (const auto& [C, Cp] : std::vector<std::pair<LogReal, LogReal>>{{10, 10}, {LogReal(1) / 8, LogReal(1) / 8},
                                                                         {1000, 1000}, {LogReal(1) / 8, 3}}) {
      const auto scaled = overlap_check(1, 12, C, Cp);
      const bool common = C == Cp;
      if (common) c.expect(overlap_threshold(scaled) == k0, "threshold moved under a common scaling");
      const LogReal shift = log2_of(Cp) - log2_of(C);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (common) c.expect(scaled[i].overlap == rows[i].overlap, "verdict changed under a common scaling");
        c.expect(abs(scaled[i].log_ratio - rows[i].log_ratio - shift) <= tol * (1 + abs(rows[i].log_ratio)),
                 "ratio shift is not log2(C'/C)");
      }
      for (int k = 1; k <= 12; ++k) {
        const auto w = temperature_window(k), s = temperature_window(k, C, Cp);
        c.expect(abs(s.log2_beta_lo - w.log2_beta_lo - log2_of(C)) <= tol * (1 + abs(w.log2_beta_lo)),
                 "beta_lo shift at k=" + std::to_string(k));
        c.expect(abs(s.log2_beta_hi - w.log2_beta_hi - log2_of(Cp)) <= tol * (1 + abs(w.log2_beta_hi)),
                 "beta_hi shift at k=" + std::to_string(k));
      }
    }
  });
  return c.finish();
}

bool gibbs_oracle() {
  Criterion c(7, "Metropolis vs exact Boltzmann on 2 tiles, N = 2; detailed balance; beta = 0 marginals", 120.0);
  guarded(c, [&] {
    const Potential p({{{{0, 0, 0}, {1, 0, 1}}, Rational(1)}});
    const double beta = 0.8;
    const auto exact = boltzmann_exact(2, p, 2, beta);

    // pilot: double the budget until an independent pilot chain sits at half the tolerance
    std::uint64_t steps = 25'000;
    double pilot_tv = 1;
    MetropolisOptions o;
    o.histogram = true;
    o.burn_in = 10'000;
    while (steps <= 64'000'000) {
      o.steps = steps;
      o.cadence = steps;
      pilot_tv = total_variation(metropolis(2, p, 2, beta, 777, o).histogram, exact.probability);
      if (pilot_tv < 0.005) break;
      steps *= 2;
    }
    const std::uint64_t budget = 2 * steps;
    o.steps = budget;
    o.cadence = budget;
    double worst = 0;
    for (std::uint64_t seed : {2024u, 2025u, 2026u}) {
      const double tv = total_variation(metropolis(2, p, 2, beta, seed, o).histogram, exact.probability);
      worst = std::max(worst, tv);
    }
    c.expect(worst < 0.01, "TV " + std::to_string(worst) + " at the pilot budget");
    std::ostringstream s;
    s << "pilot TV " << pilot_tv << " at " << steps << " steps; budget " << budget << " steps, worst TV " << worst;
    c.note(s.str());

    for (int n : {2, 3}) {
      const auto db = detailed_balance(2, p, n);
      c.expect(db.mismatches == 0 && db.stationary, "detailed balance on N=" + std::to_string(n));
    }

    const std::size_t tiles = 2;
    std::vector<std::uint64_t> counts(tiles, 0);
    std::uint64_t samples = 0;
    for (std::uint64_t stream = 0; stream < 4000; ++stream) {
      MetropolisOptions z;
      z.steps = 200;
      z.cadence = 200;
      z.stream = stream;
      z.initial = std::vector<TileId>(4, 0);
      const auto r = metropolis(tiles, p, 2, 0.0, 9, z);
      for (TileId t : r.final_cells) ++counts[static_cast<std::size_t>(t)];
      samples += r.final_cells.size();
    }
    const double pr = 1.0 / tiles;
    const double sigma = std::sqrt(static_cast<double>(samples) * pr * (1 - pr));
    for (auto n : counts)
      c.expect(std::fabs(static_cast<double>(n) - static_cast<double>(samples) * pr) < 3 * sigma,
               "beta = 0 marginal outside 3 sigma");
  });
  return c.finish();
}

std::size_t index_of(const Enumeration& e, const std::string& name) {
  for (std::size_t i = 1; i <= e.size(); ++i)
    if (e.at(i)->name() == name) return i;
  throw std::runtime_error("machine " + name + " is not enumerated");
}

bool perturbation() {
  Criterion c(8, "perturbation: epsilon-free reports, M_Y target, M_X invariance, epsilon = 0 pipeline", 60.0);
  guarded(c, [&] {
    const auto e = enumeration_v1();
    const std::size_t i = index_of(e, "copier");
    PerturbationConfig cfg;
    cfg.l = 1;
    cfg.K = 48;
    cfg.window = 16;
    cfg.seed_cap = 12;
    std::vector<std::string> dumps;
    for (const auto& eps : {make_rational(1, 100), make_rational(1, 2), Rational(1)})
      dumps.push_back(report_body_json(perturbed_flow(corpus::constant_up(), corpus::copier(), i, eps, cfg)).dump());
    c.expect(dumps[0] == dumps[1] && dumps[1] == dumps[2], "reports differ across epsilon");

    const auto r = perturbed_flow(corpus::constant_up(), corpus::copier(), i, Rational(1, 2), cfg);
    c.expect(r.selector_active, "selector inactive at epsilon > 0");
    c.expect(!r.accumulation.representatives.empty(), "no accumulation representatives");
    Rational worst = 0;
    for (const auto& rep : r.accumulation.representatives)
      worst = std::max(worst, weak_star_distance(rep, r.target_y, cfg.l));
    c.expect(worst <= Rational(1, 256), "representative farther than 2^-8 from the M_Y target");
    c.note("max distance of a representative to the M_Y target: " + to_string(worst));

    const auto swapped = perturbed_flow(corpus::constant_down(), corpus::copier(), i, Rational(1, 2), cfg);
    bool same = swapped.rows.size() == r.rows.size() &&
                accumulation_to_json(swapped.accumulation) == accumulation_to_json(r.accumulation);
    for (std::size_t j = 0; same && j < r.rows.size(); ++j)
      same = swapped.rows[j].measure == r.rows[j].measure && swapped.rows[j].to_y == r.rows[j].to_y &&
             swapped.rows[j].defined == r.rows[j].defined;
    c.expect(same, "table changes when M_X is replaced");

    // epsilon = 0 against the mixture assembled here from word sources
    const auto z = perturbed_flow(corpus::constant_up(), corpus::copier(), i, Rational(0), cfg);
    c.expect(!z.selector_active, "selector active at epsilon = 0");
    const MachineWordSource x(corpus::constant_up(), cfg.l, cfg.seed_cap);
    std::vector<std::unique_ptr<MachineWordSource>> owned;
    std::vector<const MachineWordSource*> entries;
    for (std::size_t j = 1; j <= e.size(); ++j) {
      const Machine& m = j == i ? corpus::copier() : *e.at(j);
      if (word_measure(m, 3, cfg.l).status != MeasureStatus::Ok) {
        entries.push_back(nullptr);
        continue;
      }
      owned.push_back(std::make_unique<MachineWordSource>(m, cfg.l, cfg.seed_cap));
      entries.push_back(owned.back().get());
    }
    const auto flow = unperturbed_flow(x, entries, cfg.l);
    ConditionalRecursion rec(cfg.l, flow);
    bool match = true;
    std::size_t row = 0;
    for (int k = cfg.l; k <= cfg.K; ++k) {
      const auto& s = rec.advance();
      if (row < z.rows.size() && z.rows[row].k == k) {
        match = match && z.rows[row].defined == s.defined && (!s.defined || z.rows[row].measure == s.renormalized);
        ++row;
      }
    }
    c.expect(match && row == z.rows.size(), "epsilon = 0 report differs from the unperturbed pipeline");
    const auto acc = accumulation_report(flow, cfg.l, cfg.K, cfg.window, cfg.resolution, cfg.dwell);
    c.expect(accumulation_to_json(acc) == accumulation_to_json(z.accumulation), "epsilon = 0 accumulation differs");
  });
  return c.finish();
}

bool dichotomy() {
  Criterion c(9, "stable vs chaotic flows: one cluster, two dwell clusters, connected sweep", 30.0);
  guarded(c, [&] {
    const int l = 1;
    const Rational res(1, 256);
    const auto a = WordMeasure::point_mass(parse_word("u"));
    const auto b = WordMeasure::bernoulli(1, Rational(1, 4));

    MeasureFlow settle;
    settle.measure = [&](int j) { return j < 10 ? a : b; };
    const auto one = accumulation_report(settle, l, 512, 128, res);
    c.expect(one.representatives.size() == 1, "eventually constant flow has " +
                                                  std::to_string(one.representatives.size()) + " clusters");
    c.expect(one.radius < res, "cluster radius not below 2^-8");
    if (!one.representatives.empty())
      c.expect(weak_star_distance(one.representatives[0], b, l) < res, "cluster is not at the constant target");

    MeasureFlow rep;
    rep.measure = repetition_schedule([&](int n) { return n % 2 == 0 ? a : b; });
    const int K = 4096;
    const auto two = accumulation_report(rep, l, K, 3 * K / 4, res);
    c.expect(two.representatives.size() == 2,
             "dyadic repetition gives " + std::to_string(two.representatives.size()) + " dwell clusters");
    if (two.representatives.size() == 2) {
      const Rational da = std::min(weak_star_distance(two.representatives[0], a, l),
                                   weak_star_distance(two.representatives[1], a, l));
      const Rational db = std::min(weak_star_distance(two.representatives[0], b, l),
                                   weak_star_distance(two.representatives[1], b, l));
      c.expect(da <= res && db <= res, "dwell clusters are not at the two targets");
    }

    // segment sweep: flow driven by the connectified alternation of a and b
    const auto seg = connectify(sequences::alternating(DyadicMeasure(a), DyadicMeasure(WordMeasure::point_mass(
                                                                            parse_word("d")))));
    MeasureFlow sweep;
    sweep.measure = [&](int j) { return seg.at(static_cast<std::uint64_t>(j)).measure(); };
    const auto net = accumulation_report(sweep, l, 2048, 1024, Rational(1, 64));
    c.expect(net.connected, "segment-sweep flow net is disconnected");
    const auto direct = finite_accumulation(seg, 1u << 12, Rational(1, 64));
    c.expect(direct.connected, "connectified sequence net is disconnected");
    c.note("sweep flow net size " + std::to_string(net.net.size()) + ", sequence net size " +
           std::to_string(direct.representatives.size()));
  });
  return c.finish();
}

}  // namespace

int main() {
  const std::vector<std::function<bool()>> criteria{hierarchy,   marker_axioms, frozen_frequency,
                                                    conditional_calculus, word_measures, windows,
                                                    gibbs_oracle, perturbation,  dichotomy};
  int failed = 0;
  for (const auto& run_one : criteria) failed += run_one() ? 0 : 1;
  std::cout << "\n" << (criteria.size() - static_cast<std::size_t>(failed)) << " / " << criteria.size()
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
