#include "markerlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace markerlab {

char bit_char(Bit b) { return b == Bit::Up ? 'u' : 'd'; }

std::vector<Bit> parse_word(std::string_view text) {
  std::vector<Bit> out;
  for (char c : text) {
    if (c == 'u') out.push_back(Bit::Up);
    else if (c == 'd') out.push_back(Bit::Down);
    else throw std::invalid_argument("word letters are 'u' and 'd', got '" + std::string(1, c) + "'");
  }
  return out;
}

std::string word_string(const std::vector<Bit>& word) {
  std::string s;
  for (Bit b : word) s += bit_char(b);
  return s;
}

namespace {

std::size_t word_index(const std::vector<Bit>& word) {
  std::size_t i = 0;
  for (Bit b : word) i = (i << 1) | static_cast<std::size_t>(b);
  return i;
}

std::string index_word(std::size_t index, int depth) {
  std::string s(static_cast<std::size_t>(depth), 'u');
  for (int p = depth - 1; p >= 0; --p, index >>= 1) s[static_cast<std::size_t>(p)] = (index & 1) ? 'd' : 'u';
  return s;
}

}  // namespace

WordMeasure::WordMeasure(int depth, std::vector<Rational> weights) : depth_(depth), weights_(std::move(weights)) {
  if (depth < 0 || depth > 24) throw std::invalid_argument("word depth must be in 0..24");
  if (weights_.size() != (std::size_t{1} << depth)) throw std::invalid_argument("expected 2^depth weights");
  Rational total = 0;
  for (auto& w : weights_) {
    w.canonicalize();
    if (w < 0) throw std::invalid_argument("negative word weight");
    total += w;
  }
  if (total != 1) throw std::invalid_argument("word weights sum to " + to_string(total) + ", not 1");
}

WordMeasure WordMeasure::point_mass(const std::vector<Bit>& word) {
  std::vector<Rational> w(std::size_t{1} << word.size(), Rational(0));
  w[word_index(word)] = 1;
  return WordMeasure(static_cast<int>(word.size()), std::move(w));
}

WordMeasure WordMeasure::uniform(int depth) {
  const std::size_t n = std::size_t{1} << depth;
  return WordMeasure(depth, std::vector<Rational>(n, Rational(1, static_cast<unsigned long>(n))));
}

WordMeasure WordMeasure::bernoulli(int depth, const Rational& p) {
  if (p < 0 || p > 1) throw std::invalid_argument("Bernoulli parameter outside [0, 1]");
  const std::size_t n = std::size_t{1} << depth;
  std::vector<Rational> w(n);
  const Rational q = 1 - p;
  for (std::size_t i = 0; i < n; ++i) {
    Rational x = 1;
    for (int b = 0; b < depth; ++b) x *= ((i >> b) & 1) ? q : p;
    w[i] = x;
  }
  return WordMeasure(depth, std::move(w));
}

Rational WordMeasure::probability(const std::vector<Bit>& word) const {
  if (static_cast<int>(word.size()) > depth_) throw std::invalid_argument("word longer than measure depth");
  return marginal(static_cast<int>(word.size())).weights_[word_index(word)];
}

WordMeasure WordMeasure::marginal(int depth) const {
  if (depth < 0 || depth > depth_) throw std::invalid_argument("marginal depth exceeds measure depth");
  if (depth == depth_) return *this;
  std::vector<Rational> w(std::size_t{1} << depth, Rational(0));
  const int shift = depth_ - depth;
  for (std::size_t i = 0; i < weights_.size(); ++i) w[i >> shift] += weights_[i];
  WordMeasure out;
  out.depth_ = depth;
  out.weights_ = std::move(w);
  return out;
}

WordMeasure mixture(const std::vector<std::pair<Rational, WordMeasure>>& parts) {
  if (parts.empty()) throw std::invalid_argument("empty mixture");
  const int depth = parts.front().second.depth();
  std::vector<Rational> w(std::size_t{1} << depth, Rational(0));
  for (const auto& [c, m] : parts) {
    if (m.depth() != depth) throw std::invalid_argument("mixture parts differ in depth");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += c * m[i];
  }
  return WordMeasure(depth, std::move(w));
}

nlohmann::json measure_to_json(const WordMeasure& m) {
  nlohmann::json weights = nlohmann::json::object();
  for (std::size_t i = 0; i < m.weights().size(); ++i)
    if (m[i] != 0) weights[index_word(i, m.depth())] = to_string(m[i]);
  return {{"depth", m.depth()}, {"weights", std::move(weights)}};
}

WordMeasure measure_from_json(const nlohmann::json& j) {
  if (!j.contains("depth") || !j["depth"].is_number_integer()) throw std::invalid_argument("measure: missing 'depth'");
  const int depth = j["depth"].get<int>();
  if (depth < 0 || depth > 24) throw std::invalid_argument("measure: depth must be in 0..24");
  std::vector<Rational> w(std::size_t{1} << depth, Rational(0));
  for (const auto& [word, value] : j.at("weights").items()) {
    const auto bits = parse_word(word);
    if (static_cast<int>(bits.size()) != depth) throw std::invalid_argument("measure: word '" + word + "' has wrong length");
    w[word_index(bits)] = value.is_string() ? parse_rational(value.get<std::string>()) : Rational(value.get<long>());
  }
  return WordMeasure(depth, std::move(w));
}

std::string measure_to_csv(const WordMeasure& m) {
  std::ostringstream out;
  out << "word,weight\n";
  for (std::size_t i = 0; i < m.weights().size(); ++i) out << index_word(i, m.depth()) << ',' << to_string(m[i]) << '\n';
  return out.str();
}

Rational weak_star_distance(const WordMeasure& mu, const WordMeasure& nu, int L) {
  if (L < 0 || mu.depth() < L || nu.depth() < L) throw std::invalid_argument("weak-* distance needs both depths >= L");
  Rational total = 0;
  WordMeasure a = mu.marginal(L), b = nu.marginal(L);
  std::vector<Rational> diff(a.weights().size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - b[i];
  // Coarsen level by level: pairs of siblings sum to their parent.
  for (int l = L; l >= 1; --l) {
    Rational worst = 0;
    for (const auto& d : diff) worst = std::max(worst, abs(d));
    Rational term = worst;
    mpq_div_2exp(term.get_mpq_t(), worst.get_mpq_t(), static_cast<mp_bitcnt_t>(l));
    total += term;
    std::vector<Rational> up(diff.size() / 2);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = diff[2 * i] + diff[2 * i + 1];
    diff = std::move(up);
  }
  return total;
}

int ceil_log2(std::uint64_t x) {
  if (x == 0) throw std::invalid_argument("log2 of zero");
  int r = 0;
  while ((std::uint64_t{1} << r) < x) ++r;
  return r;
}

int floor_log2(std::uint64_t x) {
  if (x == 0) throw std::invalid_argument("log2 of zero");
  return 63 - __builtin_clzll(x);
}

OdometerSchedule::OdometerSchedule(std::function<int(int)> t, std::string name) : t_(std::move(t)), name_(std::move(name)) {}

OdometerSchedule OdometerSchedule::logarithmic() {
  return OdometerSchedule([](int k) { return std::max(2, ceil_log2(static_cast<std::uint64_t>(k) + 2)); }, "log2");
}

OdometerSchedule OdometerSchedule::constant(int t) {
  if (t < 2) throw std::invalid_argument("odometer period must be >= 2");
  return OdometerSchedule([t](int) { return t; }, "constant:" + std::to_string(t));
}

int OdometerSchedule::operator()(int k) const {
  const int t = t_(k);
  if (t < 2) throw std::invalid_argument("odometer schedule produced t < 2 at k = " + std::to_string(k));
  return t;
}

// ---------------------------------------------------------------------------
// Conditional measures

namespace {

WordMeasure scale_measure(const MeasureFlow& flow, int j, int l) {
  WordMeasure m = flow.measure(j);
  if (m.depth() < l)
    throw std::invalid_argument("flow measure at scale " + std::to_string(j) + " has depth " + std::to_string(m.depth()) +
                                " < " + std::to_string(l));
  return m.marginal(l);
}

void finish(ConditionalMeasure& c) {
  const Rational mass = 1 - c.residual;
  c.defined = mass != 0;
  if (!c.defined) {
    c.renormalized = WordMeasure::uniform(c.l);
    return;
  }
  std::vector<Rational> w(c.raw.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = c.raw[i] / mass;
  c.renormalized = WordMeasure(c.l, std::move(w));
}

}  // namespace

ConditionalRecursion::ConditionalRecursion(int l, const MeasureFlow& flow) : flow_(flow), next_(l) {
  if (l < 0) throw std::invalid_argument("depth must be non-negative");
  state_.k = l - 1;
  state_.l = l;
  state_.raw.assign(std::size_t{1} << l, Rational(0));
  state_.residual = 1;
  finish(state_);
}

const ConditionalMeasure& ConditionalRecursion::advance() {
  const int j = next_++;
  state_.k = j;
  if (j >= flow_.first) {
    const Rational f(1, 4 * static_cast<unsigned long>(flow_.t(j)));
    const Rational keep = 1 - f;
    const WordMeasure m = scale_measure(flow_, j, state_.l);
    for (std::size_t i = 0; i < state_.raw.size(); ++i) state_.raw[i] = state_.raw[i] * keep + f * m[i];
    state_.residual *= keep;
  }
  finish(state_);
  return state_;
}

ConditionalMeasure conditional_grid_measure(int k, int l, const MeasureFlow& flow) {
  if (l > k) throw std::invalid_argument("conditional measure needs l <= k");
  ConditionalRecursion rec(l, flow);
  for (int j = l; j <= k; ++j) rec.advance();
  return rec.current();
}

namespace serial {
ConditionalMeasure conditional_grid_measure(int k, int l, const MeasureFlow& flow) {
  if (l > k) throw std::invalid_argument("conditional measure needs l <= k");
  ConditionalMeasure c;
  c.k = k;
  c.l = l;
  c.raw.assign(std::size_t{1} << l, Rational(0));
  c.residual = 1;
  const int lo = std::max(l, flow.first);
  for (int j = lo; j <= k; ++j) {
    Rational coef(1, 4 * static_cast<unsigned long>(flow.t(j)));
    for (int i = j + 1; i <= k; ++i) coef *= Rational(4 * flow.t(i) - 1, 4 * flow.t(i));
    const WordMeasure m = scale_measure(flow, j, l);
    for (std::size_t w = 0; w < c.raw.size(); ++w) c.raw[w] += coef * m[w];
    c.residual *= Rational(4 * flow.t(j) - 1, 4 * flow.t(j));
  }
  for (auto& w : c.raw) w.canonicalize();
  c.residual.canonicalize();
  finish(c);
  return c;
}
}  // namespace serial

std::vector<Rational> flow_limit_check(const MeasureFlow& flow, const WordMeasure& target, int l, int K) {
  std::vector<Rational> out;
  ConditionalRecursion rec(l, flow);
  for (int k = l; k <= K; ++k) {
    const auto& c = rec.advance();
    out.push_back(c.defined ? weak_star_distance(c.renormalized, target, l) : Rational(1));
  }
  return out;
}

int repetition_index(int j) { return j <= 0 ? 0 : floor_log2(static_cast<std::uint64_t>(j)); }

std::function<WordMeasure(int)> repetition_schedule(std::function<WordMeasure(int)> base) {
  return [base = std::move(base)](int j) { return base(repetition_index(j)); };
}

// ---------------------------------------------------------------------------

namespace {

// Depth-L marginal weights rounded to doubles.
std::vector<double> approximate(const WordMeasure& m, int L) {
  const WordMeasure a = m.marginal(L);
  std::vector<double> out;
  out.reserve(a.weights().size());
  for (const auto& w : a.weights()) out.push_back(w.get_d());
  return out;
}

double approximate_distance(const std::vector<double>& a, const std::vector<double>& b, int L) {
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - b[i];
  double total = 0;
  for (int l = L; l >= 1; --l) {
    double worst = 0;
    for (double d : diff) worst = std::max(worst, std::fabs(d));
    total += std::ldexp(worst, -l);
    for (std::size_t i = 0; i < diff.size() / 2; ++i) diff[i] = diff[2 * i] + diff[2 * i + 1];
    diff.resize(diff.size() / 2);
  }
  return total;
}

// Exact comparison of d(a, b) with `bound`, skipped when the rounded distance
// is decisively on one side.
class NetMetric {
 public:
  NetMetric(const std::vector<WordMeasure>& points, int L) : points_(points), L_(L) {
    approx_.reserve(points.size());
    for (const auto& p : points) approx_.push_back(approximate(p, L));
    // weights lie in [0, 1]; rounding and 2^L-term sums stay far below this
    slack_ = std::ldexp(1.0, L) * 1e-13 + 1e-13;
  }

  std::optional<Rational> within(std::size_t a, std::size_t b, const Rational& bound, double bound_d) const {
    const double d = approximate_distance(approx_[a], approx_[b], L_);
    if (d > bound_d + slack_) return std::nullopt;
    Rational exact = weak_star_distance(points_[a], points_[b], L_);
    if (exact <= bound) return exact;
    return std::nullopt;
  }

 private:
  const std::vector<WordMeasure>& points_;
  int L_;
  std::vector<std::vector<double>> approx_;
  double slack_ = 0;
};

}  // namespace

NetReport epsilon_net(const std::vector<WordMeasure>& points, const Rational& resolution, int L) {
  NetReport net;
  net.radius = 0;
  const NetMetric metric(points, L);
  const double res_d = resolution.get_d();
  for (std::size_t p = 0; p < points.size(); ++p) {
    bool placed = false;
    for (std::size_t r = 0; r < net.representatives.size(); ++r) {
      if (const auto d = metric.within(p, net.representatives[r], resolution, res_d)) {
        ++net.members[r];
        net.radius = std::max(net.radius, *d);
        placed = true;
        break;
      }
    }
    if (!placed) {
      net.representatives.push_back(p);
      net.members.push_back(1);
    }
  }
  const std::size_t n = net.representatives.size();
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack;
  if (n > 0) {
    stack.push_back(0);
    seen[0] = 1;
  }
  const Rational link = 2 * resolution;
  while (!stack.empty()) {
    const std::size_t a = stack.back();
    stack.pop_back();
    for (std::size_t b = 0; b < n; ++b) {
      if (seen[b]) continue;
      if (metric.within(net.representatives[a], net.representatives[b], link, link.get_d())) {
        seen[b] = 1;
        stack.push_back(b);
      }
    }
  }
  net.connected = std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  return net;
}

}  // namespace markerlab
