#include "markerlab/layers.hpp"

#include <cmath>
#include <sstream>

namespace markerlab {

std::optional<int> blockable(std::uint64_t n) {
  if (n == 0) return std::nullopt;
  int k = 0;
  while (n % 3 == 0) {
    n /= 3;
    ++k;
  }
  if (n != 1) return std::nullopt;
  return k;
}

std::uint64_t marker_scale(int k) {
  if (k < 0 || k > 38) throw std::out_of_range("marker index out of range");
  std::uint64_t p = 1;
  for (int i = 0; i < k; ++i) p *= 3;
  return 2 * p + 1;
}

void PhasedMarker::validate() const {
  if (phase != Phase::Blocking) return;
  if (!seed) throw std::invalid_argument("blocking marker without a seed");
  if (static_cast<int>(seed->x.size()) != k) throw std::invalid_argument("seed x must have length k");
  for (char c : seed->x)
    if (c != '0' && c != '1') throw std::invalid_argument("seed x must be binary");
  if (static_cast<int>(seed->y.size()) != k) throw std::invalid_argument("seed y must have length k");
  bool blank = false;
  for (char c : seed->y) {
    if (c == '#') blank = true;
    else if ((c != '0' && c != '1') || blank) throw std::invalid_argument("seed y must be a binary word followed by blanks");
  }
}

ChildProfile decompose(const PhasedMarker& marker, const OdometerSchedule& t) {
  if (marker.phase != Phase::Hot) throw std::invalid_argument("only Hot markers decompose");
  if (marker.k < 1) throw std::invalid_argument("markers of index 0 have no children");
  const int tk = t(marker.k - 1);
  ChildProfile c;
  c.blocking = Rational(1, tk);
  c.hot = Rational(tk - 1, tk);
  c.frozen = c.blocking / 4;
  c.recursing = c.hot + c.blocking * Rational(3, 4);
  return c;
}

PhaseMass expand(int top, int levels, const OdometerSchedule& t) {
  if (levels < 0 || levels > top) throw std::invalid_argument("cannot expand below index 0");
  PhaseMass m{0, 1};
  PhasedMarker hot{top, Phase::Hot, {}, std::nullopt};
  for (int i = 0; i < levels; ++i) {
    const ChildProfile c = decompose(hot, t);
    m.frozen += m.active * c.frozen;
    m.active *= c.recursing;
    --hot.k;
  }
  return m;
}

Rational freq_frozen(int k, const OdometerSchedule& t, const Rational& freq0) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  if (freq0 < 0 || freq0 > 1) throw std::invalid_argument("freq0 must lie in [0, 1]");
  // Runs of equal t_j collapse into one power.
  Integer num = 1, den = 1, p;
  int j = 0;
  while (j < k) {
    const int tj = t(j);
    int run = 0;
    while (j < k && t(j) == tj) {
      ++run;
      ++j;
    }
    mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(4 * tj - 1), static_cast<unsigned long>(run));
    num *= p;
    mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(4 * tj), static_cast<unsigned long>(run));
    den *= p;
  }
  Rational keep(num, den);
  keep.canonicalize();
  return 1 - (1 - freq0) * keep;
}

std::vector<long double> freq_frozen_table(int kmax, const OdometerSchedule& t, long double freq0) {
  std::vector<long double> out;
  out.reserve(static_cast<std::size_t>(kmax) + 1);
  long double keep = 1 - freq0;
  out.push_back(1 - keep);
  for (int j = 0; j < kmax; ++j) {
    keep *= 1.0L - 1.0L / (4.0L * t(j));
    out.push_back(1 - keep);
  }
  return out;
}

std::string freq_frozen_csv(int kmax, const OdometerSchedule& t) {
  const auto table = freq_frozen_table(kmax, t);
  std::ostringstream out;
  out << "k,t_k,freq_k\n";
  out.precision(18);
  for (int k = 0; k <= kmax; ++k) out << k << ',' << t(k) << ',' << table[static_cast<std::size_t>(k)] << '\n';
  return out.str();
}

std::optional<int> freq_crossing(const Rational& threshold, const OdometerSchedule& t, int kmax, const Rational& freq0) {
  // freq_k >= threshold  <=>  (1 - freq0) num_k <= (1 - threshold) den_k.
  const Rational a = 1 - freq0;
  const Rational b = 1 - threshold;
  Integer num = 1, den = 1;
  for (int k = 0; k <= kmax; ++k) {
    if (a * num <= b * den) return k;
    const int tk = t(k);
    num *= 4 * tk - 1;
    den *= 4 * tk;
  }
  return std::nullopt;
}

std::vector<Bit> gamma_word(const std::vector<PhasedMarker>& chain) {
  std::map<int, Bit> bits;
  for (const auto& m : chain) {
    if (m.phase != Phase::Frozen) throw std::invalid_argument("gamma_word reads frozen markers only");
    for (const auto& [scale, bit] : m.frozen_bits) {
      auto [it, inserted] = bits.emplace(scale, bit);
      if (!inserted && it->second != bit)
        throw ConsistencyError("conflicting frozen bits at scale " + std::to_string(scale));
    }
  }
  std::vector<Bit> word;
  int expected = 1;
  for (const auto& [scale, bit] : bits) {
    if (scale != expected) throw ConsistencyError("frozen scales are not contiguous from 1");
    word.push_back(bit);
    ++expected;
  }
  return word;
}

WordMeasure gamma_pushforward(const FrozenDistribution& dist) {
  std::vector<Rational> w(std::size_t{1} << dist.depth, Rational(0));
  for (const auto& [assignment, p] : dist.atoms) {
    PhasedMarker m{dist.depth, Phase::Frozen, assignment, std::nullopt};
    const auto word = gamma_word({m});
    if (static_cast<int>(word.size()) != dist.depth) throw ConsistencyError("assignment does not cover every scale");
    std::size_t idx = 0;
    for (Bit b : word) idx = (idx << 1) | static_cast<std::size_t>(b);
    w[idx] += p;
  }
  return WordMeasure(dist.depth, std::move(w));
}

FrozenDistribution gamma_pullback(const WordMeasure& m) {
  FrozenDistribution d;
  d.depth = m.depth();
  for (std::size_t i = 0; i < m.weights().size(); ++i) {
    if (m[i] == 0) continue;
    std::map<int, Bit> bits;
    for (int s = 1; s <= m.depth(); ++s) bits[s] = ((i >> (m.depth() - s)) & 1) ? Bit::Down : Bit::Up;
    d.atoms.emplace_back(std::move(bits), m[i]);
  }
  return d;
}

}  // namespace markerlab
