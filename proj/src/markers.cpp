#include "markerlab/markers.hpp"

#include "markerlab/robinson_io.hpp"

#include <omp.h>

#include <cmath>
#include <map>
#include <stdexcept>

namespace markerlab {

MarkerSet::MarkerSet(std::vector<Patch> patterns, Rational tau) : tau_(std::move(tau)), patterns_(std::move(patterns)) {
  if (patterns_.empty()) throw std::invalid_argument("marker set is empty");
  if (tau_ < 0) throw std::invalid_argument("margin factor must be non-negative");
  ell_ = patterns_[0].width();
  for (const auto& p : patterns_) {
    if (p.width() != ell_ || p.height() != ell_) throw std::invalid_argument("markers must share one square side");
    if (!p.total()) throw std::invalid_argument("markers must be total patches");
  }
  if (ell_ < 1) throw std::invalid_argument("marker side must be positive");
}

int MarkerSet::window() const {
  Rational m = (Rational(2) + tau_) * ell_ - 1;
  Integer c;
  mpz_cdiv_q(c.get_mpz_t(), m.get_num_mpz_t(), m.get_den_mpz_t());
  return static_cast<int>(c.get_si());
}

bool MarkerSet::admissible_in(const Tileset& tileset) const {
  for (const auto& p : patterns_)
    if (!check_patch(tileset, p).empty()) return false;
  return true;
}

MarkerSet macro_marker_set(const Tileset& robinson, int n) {
  std::vector<Patch> patterns;
  for (int o = 0; o < 4; ++o) patterns.push_back(build_macro_tile(robinson, n, o).patch);
  return MarkerSet(std::move(patterns), make_rational(6, macro_side(n)));
}

nlohmann::json marker_set_to_json(const MarkerSet& q) {
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& p : q.patterns()) patterns.push_back(patch_to_json(p));
  return {{"ell", q.ell()}, {"tau", to_string(q.tau())}, {"patterns", std::move(patterns)}};
}

MarkerSet marker_set_from_json(const nlohmann::json& j) {
  if (!j.contains("patterns") || !j["patterns"].is_array())
    throw std::invalid_argument("marker set: missing 'patterns' array");
  std::vector<Patch> patterns;
  for (const auto& jp : j["patterns"]) patterns.push_back(patch_from_json(jp));
  Rational tau = j.contains("tau") ? parse_rational(j["tau"].get<std::string>()) : Rational(0);
  return MarkerSet(std::move(patterns), tau);
}

std::optional<OverlapWitness> verify_nonoverlap(const MarkerSet& q) {
  const int l = q.ell();
  const auto& ps = q.patterns();
  for (std::size_t u = 0; u < ps.size(); ++u) {
    for (std::size_t v = 0; v < ps.size(); ++v) {
      for (int dy = -(l - 1); dy <= l - 1; ++dy) {
        for (int dx = -(l - 1); dx <= l - 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          bool agree = true;
          for (int y = std::max(0, dy); y < std::min(l, l + dy) && agree; ++y)
            for (int x = std::max(0, dx); x < std::min(l, l + dx); ++x)
              if (ps[u].at(x, y) != ps[v].at(x - dx, y - dy)) { agree = false; break; }
          if (agree) return OverlapWitness{u, v, {dx, dy}};
        }
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Covering search

namespace {

class Bits {
 public:
  Bits() = default;
  explicit Bits(std::size_t words) : w_(words, 0) {}
  void set(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  std::vector<std::uint64_t>& words() { return w_; }
  const std::vector<std::uint64_t>& words() const { return w_; }

 private:
  std::vector<std::uint64_t> w_;
};

struct AvoidPattern {
  std::vector<PatternCell> cells;  // offsets normalised to start at 0
  int width = 0;
  int height = 0;
};

class CoveringSearch {
 public:
  CoveringSearch(const Tileset& ts, const MarkerSet& q) : ts_(ts), m_(q.window()) {
    T_ = ts.size();
    W_ = (T_ + 63) / 64;
    compat_.assign(4, std::vector<std::uint64_t>(T_ * W_, 0));
    for (std::size_t a = 0; a < T_; ++a) {
      for (std::size_t b = 0; b < T_; ++b) {
        const auto A = static_cast<TileId>(a), B = static_cast<TileId>(b);
        if (ts.horizontal_ok(A, B)) {
          bit(Dir::East, a, b);  // b may be east of a
          bit(Dir::West, b, a);
        }
        if (ts.vertical_ok(A, B)) {
          bit(Dir::North, a, b);
          bit(Dir::South, b, a);
        }
      }
    }
    for (const auto& p : q.patterns()) {
      AvoidPattern ap{{}, p.width(), p.height()};
      for (int y = 0; y < p.height(); ++y)
        for (int x = 0; x < p.width(); ++x) ap.cells.push_back({x, y, p.at(x, y)});
      avoid_.push_back(std::move(ap));
    }
    for (const auto& f : ts.forbidden()) {
      AvoidPattern ap{{}, f.width(), f.height()};
      for (const auto& c : f.cells) ap.cells.push_back({c.dx - f.min_dx(), c.dy - f.min_dy(), c.tile});
      avoid_.push_back(std::move(ap));
    }
  }

  int side() const { return m_; }
  std::size_t cells() const { return static_cast<std::size_t>(m_) * m_; }

  using State = std::vector<std::uint64_t>;  // cells * W words

  State initial() const {
    State s(cells() * W_, 0);
    for (std::size_t c = 0; c < cells(); ++c)
      for (std::size_t t = 0; t < T_; ++t) s[c * W_ + (t >> 6)] |= std::uint64_t{1} << (t & 63);
    return s;
  }

  std::vector<TileId> values(const State& s, std::size_t cell) const {
    std::vector<TileId> out;
    for (std::size_t t = 0; t < T_; ++t)
      if ((s[cell * W_ + (t >> 6)] >> (t & 63)) & 1) out.push_back(static_cast<TileId>(t));
    return out;
  }

  void assign(State& s, std::size_t cell, TileId t) const {
    for (std::size_t w = 0; w < W_; ++w) s[cell * W_ + w] = 0;
    s[cell * W_ + (static_cast<std::size_t>(t) >> 6)] |= std::uint64_t{1} << (t & 63);
  }

  // Arc consistency plus pattern pruning to a fixpoint; false on a wipe-out.
  bool propagate(State& s) const {
    for (;;) {
      if (!arc_consistency(s)) return false;
      bool changed = false;
      if (!prune_patterns(s, changed)) return false;
      if (!changed) return true;
    }
  }

  enum class Outcome { Exhausted, Found, Budget };

  Outcome dfs(State& s, std::size_t cell, std::uint64_t& nodes, std::uint64_t budget, Patch& out) const {
    if (cell == cells()) {
      out = Patch(m_, m_);
      for (std::size_t c = 0; c < cells(); ++c)
        out.set(static_cast<int>(c % m_), static_cast<int>(c / m_), values(s, c).front());
      return Outcome::Found;
    }
    for (TileId t : values(s, cell)) {
      if (nodes >= budget) return Outcome::Budget;
      ++nodes;
      State next = s;
      assign(next, cell, t);
      if (!propagate(next)) continue;
      const Outcome o = dfs(next, cell + 1, nodes, budget, out);
      if (o != Outcome::Exhausted) return o;
    }
    return Outcome::Exhausted;
  }

 private:
  void bit(Dir d, std::size_t a, std::size_t b) {
    compat_[index(d)][a * W_ + (b >> 6)] |= std::uint64_t{1} << (b & 63);
  }

  bool empty(const State& s, std::size_t c) const {
    for (std::size_t w = 0; w < W_; ++w)
      if (s[c * W_ + w]) return false;
    return true;
  }

  // Restricts cell a to tiles supported by some tile of neighbour b, where b
  // lies in direction d from a.
  bool revise(State& s, std::size_t a, std::size_t b, Dir d) const {
    std::vector<std::uint64_t> support(W_, 0);
    const auto& table = compat_[index(opposite(d))];
    for (std::size_t w = 0; w < W_; ++w) {
      std::uint64_t word = s[b * W_ + w];
      while (word) {
        const std::size_t t = w * 64 + static_cast<std::size_t>(__builtin_ctzll(word));
        word &= word - 1;
        for (std::size_t k = 0; k < W_; ++k) support[k] |= table[t * W_ + k];
      }
    }
    bool changed = false;
    for (std::size_t w = 0; w < W_; ++w) {
      const std::uint64_t before = s[a * W_ + w];
      const std::uint64_t after = before & support[w];
      if (after != before) {
        s[a * W_ + w] = after;
        changed = true;
      }
    }
    return changed;
  }

  bool arc_consistency(State& s) const {
    const int m = m_;
    std::vector<char> queued(cells(), 1);
    std::vector<std::size_t> queue(cells());
    for (std::size_t c = 0; c < cells(); ++c) queue[c] = c;
    std::size_t head = 0;
    while (head < queue.size()) {
      const std::size_t b = queue[head++];
      queued[b] = 0;
      const int x = static_cast<int>(b % m), y = static_cast<int>(b / m);
      const struct { int dx, dy; Dir from_a; } nbrs[] = {
          {1, 0, Dir::West}, {-1, 0, Dir::East}, {0, 1, Dir::South}, {0, -1, Dir::North}};
      for (const auto& nb : nbrs) {
        const int ax = x + nb.dx, ay = y + nb.dy;
        if (ax < 0 || ay < 0 || ax >= m || ay >= m) continue;
        const std::size_t a = static_cast<std::size_t>(ay) * m + ax;
        // b lies in direction from_a as seen from a.
        if (revise(s, a, b, nb.from_a)) {
          if (empty(s, a)) return false;
          if (!queued[a]) {
            queued[a] = 1;
            queue.push_back(a);
          }
        }
      }
    }
    return true;
  }

  bool prune_patterns(State& s, bool& changed) const {
    const int m = m_;
    for (const auto& p : avoid_) {
      for (int y0 = 0; y0 + p.height <= m; ++y0) {
        for (int x0 = 0; x0 + p.width <= m; ++x0) {
          int open = -1;
          bool blocked = false;
          for (std::size_t i = 0; i < p.cells.size() && !blocked; ++i) {
            const auto& c = p.cells[i];
            const std::size_t cell = static_cast<std::size_t>(y0 + c.dy) * m + (x0 + c.dx);
            const auto t = static_cast<std::size_t>(c.tile);
            if (!((s[cell * W_ + (t >> 6)] >> (t & 63)) & 1)) {
              blocked = true;
              break;
            }
            bool single = true;
            for (std::size_t w = 0; w < W_; ++w) {
              const std::uint64_t want = w == (t >> 6) ? (std::uint64_t{1} << (t & 63)) : 0;
              if (s[cell * W_ + w] != want) { single = false; break; }
            }
            if (!single) {
              if (open >= 0) blocked = true;
              else open = static_cast<int>(i);
            }
          }
          if (blocked) continue;
          if (open < 0) return false;
          const auto& c = p.cells[static_cast<std::size_t>(open)];
          const std::size_t cell = static_cast<std::size_t>(y0 + c.dy) * m + (x0 + c.dx);
          const auto t = static_cast<std::size_t>(c.tile);
          s[cell * W_ + (t >> 6)] &= ~(std::uint64_t{1} << (t & 63));
          if (empty(s, cell)) return false;
          changed = true;
        }
      }
    }
    return true;
  }

  const Tileset& ts_;
  int m_;
  std::size_t T_ = 0;
  std::size_t W_ = 0;
  std::vector<std::vector<std::uint64_t>> compat_;  // per Dir: tiles allowed on that side of t
  std::vector<AvoidPattern> avoid_;
};

CoveringResult run_covering(const Tileset& ts, const MarkerSet& q, std::uint64_t budget, bool parallel) {
  if (q.size() == 0) throw std::invalid_argument("marker set is empty");
  const CoveringSearch search(ts, q);
  CoveringResult result;
  auto root = search.initial();
  if (search.side() < 1 || !search.propagate(root)) return result;
  const auto first = search.values(root, 0);
  const std::uint64_t share = std::max<std::uint64_t>(1, budget / std::max<std::size_t>(1, first.size()));

  using Outcome = CoveringSearch::Outcome;
  std::vector<Outcome> outcomes(first.size(), Outcome::Exhausted);
  std::vector<Patch> witnesses(first.size());
  std::vector<std::uint64_t> nodes(first.size(), 0);
  const auto count = static_cast<long>(first.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (long i = 0; i < count; ++i) {
    auto s = root;
    nodes[i] = 1;
    search.assign(s, 0, first[i]);
    if (!search.propagate(s)) continue;
    outcomes[i] = search.dfs(s, 1, nodes[i], share, witnesses[i]);
  }
  bool exceeded = false;
  for (std::size_t i = 0; i < first.size(); ++i) {
    result.nodes += nodes[i];
    if (outcomes[i] == Outcome::Budget) exceeded = true;
    if (outcomes[i] == Outcome::Found && !result.witness) {
      result.witness = std::move(witnesses[i]);
      result.status = CoveringStatus::Witness;
    }
  }
  if (!result.witness && exceeded) result.status = CoveringStatus::BudgetExceeded;
  return result;
}

}  // namespace

CoveringResult search_covering_counterexample(const Tileset& tileset, const MarkerSet& q, std::uint64_t budget) {
  return run_covering(tileset, q, budget, true);
}

namespace serial {
CoveringResult search_covering_counterexample(const Tileset& tileset, const MarkerSet& q, std::uint64_t budget) {
  return run_covering(tileset, q, budget, false);
}
}  // namespace serial

// ---------------------------------------------------------------------------
// Coverage and grid measures

double marker_coverage(const Patch& config, const MarkerSet& q) {
  const int l = q.ell();
  const int w = config.width(), h = config.height();
  if (w < l || h < l) throw std::invalid_argument("configuration smaller than a marker");
  if (w <= 2 * l || h <= 2 * l) throw std::invalid_argument("configuration has no cell at distance >= ell from the border");
  std::vector<char> covered(static_cast<std::size_t>(w) * h, 0);
  for (int y0 = 0; y0 + l <= h; ++y0) {
    for (int x0 = 0; x0 + l <= w; ++x0) {
      for (const auto& p : q.patterns()) {
        bool hit = true;
        for (int y = 0; y < l && hit; ++y)
          for (int x = 0; x < l; ++x)
            if (config.at(x0 + x, y0 + y) != p.at(x, y)) { hit = false; break; }
        if (!hit) continue;
        for (int y = 0; y < l; ++y)
          for (int x = 0; x < l; ++x) covered[static_cast<std::size_t>(y0 + y) * w + x0 + x] = 1;
        break;
      }
    }
  }
  std::size_t inside = 0, hits = 0;
  for (int y = l; y < h - l; ++y)
    for (int x = l; x < w - l; ++x) {
      ++inside;
      hits += covered[static_cast<std::size_t>(y) * w + x];
    }
  return static_cast<double>(hits) / static_cast<double>(inside);
}

StationaryGridMeasure::StationaryGridMeasure(MarkerSet q, std::vector<Rational> weights)
    : q_(std::move(q)), weights_(std::move(weights)) {
  if (weights_.size() != q_.size()) throw std::invalid_argument("one weight per marker required");
  Rational total = 0;
  for (const auto& w : weights_) {
    if (w < 0) throw std::invalid_argument("negative marker weight");
    total += w;
  }
  if (total != 1) throw std::invalid_argument("marker weights sum to " + to_string(total) + ", not 1");
}

namespace {
int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
}  // namespace

Rational StationaryGridMeasure::probability(const Patch& pattern) const {
  const int l = q_.ell();
  const Coord o = pattern.origin();
  Rational total = 0;
  for (int b = 0; b < l; ++b) {
    for (int a = 0; a < l; ++a) {
      std::map<std::pair<int, int>, std::vector<PatternCell>> blocks;
      for (int y = 0; y < pattern.height(); ++y)
        for (int x = 0; x < pattern.width(); ++x) {
          const TileId t = pattern.at(x, y);
          if (t == kHole) continue;
          const int X = o.x + x - a, Y = o.y + y - b;
          const int bx = floor_div(X, l), by = floor_div(Y, l);
          blocks[{bx, by}].push_back({X - bx * l, Y - by * l, t});
        }
      Rational prod = 1;
      for (const auto& [key, cells] : blocks) {
        Rational block = 0;
        for (std::size_t i = 0; i < q_.size(); ++i) {
          bool match = true;
          for (const auto& c : cells)
            if (q_.patterns()[i].at(c.dx, c.dy) != c.tile) { match = false; break; }
          if (match) block += weights_[i];
        }
        prod *= block;
        if (prod == 0) break;
      }
      total += prod;
    }
  }
  total /= l * l;
  return total;
}

double StationaryGridMeasure::entropy_per_site() const {
  // Identical markers are merged so that the entropy is that of the grid.
  std::map<std::vector<TileId>, Rational> merged;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    const auto cells = q_.patterns()[i].cells();
    merged[std::vector<TileId>(cells.begin(), cells.end())] += weights_[i];
  }
  double h = 0;
  for (const auto& [key, w] : merged) {
    const double p = w.get_d();
    if (p > 0) h -= p * std::log2(p);
  }
  return h / (q_.ell() * q_.ell());
}

StationaryGridMeasure grid_measure(const MarkerSet& q, const std::vector<Rational>& weights) {
  return StationaryGridMeasure(q, weights);
}

StationaryGridMeasure grid_measure(const MarkerSet& q) {
  return StationaryGridMeasure(q, std::vector<Rational>(q.size(), make_rational(1, static_cast<long>(q.size()))));
}

}  // namespace markerlab
