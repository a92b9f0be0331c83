#include "markerlab/gibbs.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace markerlab {

Potential::Potential(std::vector<WeightedPattern> patterns) : patterns_(std::move(patterns)) {
  for (auto& p : patterns_) {
    if (p.cells.empty()) throw std::invalid_argument("potential pattern with empty support");
    if (p.weight < 0) throw std::invalid_argument("negative potential weight");
    int mx = p.cells[0].dx, my = p.cells[0].dy;
    for (const auto& c : p.cells) {
      mx = std::min(mx, c.dx);
      my = std::min(my, c.dy);
      if (c.tile < 0) throw std::invalid_argument("potential pattern refers to a negative tile id");
    }
    for (auto& c : p.cells) {
      c.dx -= mx;
      c.dy -= my;
      range_ = std::max({range_, c.dx, c.dy});
    }
    std::sort(p.cells.begin(), p.cells.end(),
              [](const PatternCell& a, const PatternCell& b) { return std::tie(a.dy, a.dx) < std::tie(b.dy, b.dx); });
    for (std::size_t i = 1; i < p.cells.size(); ++i)
      if (p.cells[i].dx == p.cells[i - 1].dx && p.cells[i].dy == p.cells[i - 1].dy)
        throw std::invalid_argument("potential pattern repeats a cell");
  }
  for (const auto& p : patterns_) mpz_lcm(denominator_.get_mpz_t(), denominator_.get_mpz_t(), p.weight.get_den_mpz_t());
  for (const auto& p : patterns_) {
    Integer u = p.weight.get_num() * (denominator_ / p.weight.get_den()) * static_cast<unsigned long>(p.cells.size());
    if (!u.fits_slong_p() || u.get_si() > (std::numeric_limits<std::int64_t>::max() >> 20))
      throw std::overflow_error("potential weights need more than 43 bits over the common denominator");
    units_.push_back(u.get_si());
  }
  for (std::size_t i = 0; i < patterns_.size(); ++i)
    for (std::size_t j = 0; j < patterns_[i].cells.size(); ++j) {
      const auto t = static_cast<std::size_t>(patterns_[i].cells[j].tile);
      if (holding_.size() <= t) holding_.resize(t + 1);
      holding_[t].emplace_back(i, j);
    }
}

const std::vector<std::pair<std::size_t, std::size_t>>& Potential::holding(TileId tile) const {
  static const std::vector<std::pair<std::size_t, std::size_t>> none;
  const auto t = static_cast<std::size_t>(tile);
  return t < holding_.size() ? holding_[t] : none;
}

Potential Potential::from_tileset(const Tileset& tileset, const Rational& weight) {
  std::vector<WeightedPattern> patterns;
  const auto n = static_cast<TileId>(tileset.size());
  for (TileId a = 0; a < n; ++a)
    for (TileId b = 0; b < n; ++b) {
      if (!tileset.horizontal_ok(a, b)) patterns.push_back({{{0, 0, a}, {1, 0, b}}, weight});
      if (!tileset.vertical_ok(a, b)) patterns.push_back({{{0, 0, a}, {0, 1, b}}, weight});
    }
  for (const auto& f : tileset.forbidden()) patterns.push_back({f.cells, weight});
  return Potential(std::move(patterns));
}

Rational Potential::to_energy(std::int64_t units) const {
  Rational r(Integer(static_cast<long>(units)), denominator_);
  r.canonicalize();
  return r;
}

nlohmann::json potential_to_json(const Potential& p) {
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& wp : p.patterns()) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : wp.cells) cells.push_back({{"dx", c.dx}, {"dy", c.dy}, {"tile", c.tile}});
    patterns.push_back({{"cells", std::move(cells)}, {"weight", to_string(wp.weight)}});
  }
  return {{"patterns", std::move(patterns)}};
}

Potential potential_from_json(const nlohmann::json& j) {
  if (!j.contains("patterns") || !j["patterns"].is_array()) throw std::invalid_argument("potential: missing 'patterns'");
  std::vector<WeightedPattern> patterns;
  for (std::size_t i = 0; i < j["patterns"].size(); ++i) {
    const auto& jp = j["patterns"][i];
    const std::string where = "patterns[" + std::to_string(i) + "]";
    if (!jp.contains("cells") || !jp["cells"].is_array()) throw std::invalid_argument(where + ": missing 'cells'");
    WeightedPattern wp;
    for (const auto& c : jp["cells"]) wp.cells.push_back({c.at("dx").get<int>(), c.at("dy").get<int>(), c.at("tile").get<TileId>()});
    const auto& w = jp.value("weight", nlohmann::json("1"));
    wp.weight = w.is_string() ? parse_rational(w.get<std::string>()) : Rational(w.get<long>());
    patterns.push_back(std::move(wp));
  }
  return Potential(std::move(patterns));
}

// ---------------------------------------------------------------------------

TorusConfig::TorusConfig(int n, std::vector<TileId> cells, const Potential& potential, std::size_t tiles)
    : n_(n), cells_(std::move(cells)), potential_(&potential) {
  if (n < 1) throw std::invalid_argument("torus side must be >= 1");
  if (cells_.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("expected N^2 cells");
  if (potential.range() >= n) throw std::invalid_argument("potential range must be below the torus side");
  for (TileId t : cells_)
    if (t < 0 || static_cast<std::size_t>(t) >= tiles) throw std::invalid_argument("cell holds an unknown tile");
  energy_ = recompute();
}

std::size_t TorusConfig::index(int x, int y) const {
  x %= n_;
  y %= n_;
  if (x < 0) x += n_;
  if (y < 0) y += n_;
  return static_cast<std::size_t>(y) * n_ + x;
}

bool TorusConfig::occurs(const WeightedPattern& p, int x0, int y0) const {
  for (const auto& c : p.cells)
    if (cells_[index(x0 + c.dx, y0 + c.dy)] != c.tile) return false;
  return true;
}

std::int64_t TorusConfig::touching(int x, int y) const {
  std::int64_t e = 0;
  const auto& ps = potential_->patterns();
  for (const auto& [i, j] : potential_->holding(at(x, y))) {
    const auto& c = ps[i].cells[j];
    if (occurs(ps[i], x - c.dx, y - c.dy)) e += potential_->units(i);
  }
  return e;
}

std::int64_t TorusConfig::delta(int x, int y, TileId tile) const {
  const TileId old = at(x, y);
  if (old == tile) return 0;
  auto& self = const_cast<TorusConfig&>(*this);
  const std::int64_t before = touching(x, y);
  self.cells_[index(x, y)] = tile;
  const std::int64_t after = touching(x, y);
  self.cells_[index(x, y)] = old;
  return after - before;
}

void TorusConfig::set(int x, int y, TileId tile) {
  energy_ += delta(x, y, tile);
  cells_[index(x, y)] = tile;
}

std::int64_t TorusConfig::recompute() const {
  std::int64_t e = 0;
  const auto& ps = potential_->patterns();
  for (int y = 0; y < n_; ++y)
    for (int x = 0; x < n_; ++x)
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (occurs(ps[i], x, y)) e += potential_->units(i);
  return e;
}

Patch TorusConfig::as_patch() const {
  Patch p(n_, n_);
  for (int y = 0; y < n_; ++y)
    for (int x = 0; x < n_; ++x) p.set(x, y, at(x, y));
  return p;
}


Rational total_energy(int n, const std::vector<TileId>& cells, const Potential& potential, std::size_t tiles) {
  return TorusConfig(n, cells, potential, tiles).energy();
}

// ---------------------------------------------------------------------------

std::vector<TileId> decode_configuration(std::uint64_t c, int n, std::size_t tiles) {
  std::vector<TileId> cells(static_cast<std::size_t>(n) * n);
  for (auto& t : cells) {
    t = static_cast<TileId>(c % tiles);
    c /= tiles;
  }
  return cells;
}

std::uint64_t encode_configuration(const std::vector<TileId>& cells, std::size_t tiles) {
  std::uint64_t c = 0;
  for (std::size_t i = cells.size(); i-- > 0;) c = c * tiles + static_cast<std::uint64_t>(cells[i]);
  return c;
}

namespace {

std::uint64_t configuration_count(std::size_t tiles, int n, std::uint64_t max_configs) {
  if (tiles == 0 || n < 1) throw std::invalid_argument("need at least one tile and N >= 1");
  std::uint64_t count = 1;
  for (int i = 0; i < n * n; ++i) {
    if (count > max_configs / tiles) throw std::length_error("configuration space exceeds the enumeration budget");
    count *= tiles;
  }
  return count;
}

BoltzmannTable boltzmann(std::size_t tiles, const Potential& potential, int n, double beta, std::uint64_t max_configs,
                         bool parallel) {
  BoltzmannTable t;
  t.n = n;
  t.tiles = tiles;
  const std::uint64_t count = configuration_count(tiles, n, max_configs);
  t.energy.resize(count);
#pragma omp parallel for schedule(static) if (parallel)
  for (long long c = 0; c < static_cast<long long>(count); ++c)
    t.energy[static_cast<std::size_t>(c)] =
        TorusConfig(n, decode_configuration(static_cast<std::uint64_t>(c), n, tiles), potential, tiles).energy_units();

  std::map<std::int64_t, std::uint64_t> levels;
  for (auto e : t.energy) ++levels[e];
  const long double scale = static_cast<long double>(beta) / potential.denominator().get_d();
  const std::int64_t ground = levels.begin()->first;
  std::map<std::int64_t, long double> weight;
  long double z = 0;
  for (const auto& [e, multiplicity] : levels) {
    weight[e] = std::exp(-scale * static_cast<long double>(e - ground));
    z += weight[e] * static_cast<long double>(multiplicity);
  }
  t.probability.resize(count);
  for (std::uint64_t c = 0; c < count; ++c) t.probability[c] = weight[t.energy[c]] / z;
  long double sum = 0, comp = 0;
  for (auto p : t.probability) {
    const long double y = p - comp;
    const long double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  t.normaliser_error = std::fabs(sum - 1);
  return t;
}

}  // namespace

BoltzmannTable boltzmann_exact(std::size_t tiles, const Potential& potential, int n, double beta,
                               std::uint64_t max_configs) {
  return boltzmann(tiles, potential, n, beta, max_configs, true);
}

namespace serial {
BoltzmannTable boltzmann_exact(std::size_t tiles, const Potential& potential, int n, double beta,
                               std::uint64_t max_configs) {
  return boltzmann(tiles, potential, n, beta, max_configs, false);
}
}  // namespace serial

DetailedBalanceReport detailed_balance(std::size_t tiles, const Potential& potential, int n) {
  const std::uint64_t count = configuration_count(tiles, n, 1u << 20);
  std::vector<std::int64_t> energy(count);
  for (std::uint64_t c = 0; c < count; ++c)
    energy[c] = TorusConfig(n, decode_configuration(c, n, tiles), potential, tiles).energy_units();

  // pi(w) P(w -> w') = exp(-beta [E + max(0, E' - E)]) / (Z N^2 |tiles|); the
  // bracket is the exact exponent compared below.
  auto flow = [&](std::uint64_t from, std::uint64_t to) {
    return energy[from] + std::max<std::int64_t>(0, energy[to] - energy[from]);
  };
  DetailedBalanceReport r;
  std::vector<std::vector<std::int64_t>> in(count), out(count);
  std::uint64_t place = 1;
  const auto cells = static_cast<std::size_t>(n) * n;
  std::vector<std::uint64_t> powers(cells);
  for (std::size_t i = 0; i < cells; ++i, place *= tiles) powers[i] = place;
  for (std::uint64_t c = 0; c < count; ++c) {
    for (std::size_t i = 0; i < cells; ++i) {
      const std::uint64_t digit = (c / powers[i]) % tiles;
      for (std::uint64_t t = 0; t < tiles; ++t) {
        if (t == digit) continue;
        const std::uint64_t d = c - digit * powers[i] + t * powers[i];
        ++r.pairs;
        if (flow(c, d) != flow(d, c)) ++r.mismatches;
        out[c].push_back(flow(c, d));
        in[d].push_back(flow(c, d));
      }
    }
  }
  r.stationary = true;
  for (std::uint64_t c = 0; c < count; ++c) {
    std::sort(in[c].begin(), in[c].end());
    std::sort(out[c].begin(), out[c].end());
    if (in[c] != out[c]) r.stationary = false;
  }
  return r;
}

// ---------------------------------------------------------------------------

double torus_coverage(const TorusConfig& config, const MarkerSet& q) {
  const int n = config.side();
  const int l = q.ell();
  if (l > n) throw std::invalid_argument("marker larger than the torus");
  std::vector<char> covered(static_cast<std::size_t>(n) * n, 0);
  for (int y0 = 0; y0 < n; ++y0)
    for (int x0 = 0; x0 < n; ++x0)
      for (const auto& p : q.patterns()) {
        bool hit = true;
        for (int y = 0; y < l && hit; ++y)
          for (int x = 0; x < l; ++x)
            if (config.at(x0 + x, y0 + y) != p.at(x, y)) { hit = false; break; }
        if (!hit) continue;
        for (int y = 0; y < l; ++y)
          for (int x = 0; x < l; ++x) covered[static_cast<std::size_t>((y0 + y) % n) * n + (x0 + x) % n] = 1;
        break;
      }
  return static_cast<double>(std::count(covered.begin(), covered.end(), 1)) / static_cast<double>(covered.size());
}

double torus_coverage(int n, const std::vector<TileId>& cells, const MarkerSet& q) {
  const Potential none;
  std::size_t tiles = 0;
  for (TileId t : cells) tiles = std::max(tiles, static_cast<std::size_t>(t) + 1);
  return torus_coverage(TorusConfig(n, cells, none, tiles), q);
}

MetropolisResult metropolis(std::size_t tiles, const Potential& potential, int n, double beta, std::uint64_t seed,
                            const MetropolisOptions& options) {
  if (options.steps < 1) throw std::invalid_argument("Metropolis needs at least one step");
  if (tiles == 0) throw std::invalid_argument("no tiles");
  CounterRng rng(seed, options.stream);
  MetropolisResult res;
  res.seed = seed;
  std::vector<TileId> init;
  if (options.initial) {
    init = *options.initial;
  } else {
    init.resize(static_cast<std::size_t>(n) * n);
    for (auto& t : init) t = static_cast<TileId>(rng.below(tiles));
  }
  TorusConfig config(n, std::move(init), potential, tiles);
  if (options.histogram) res.histogram.assign(configuration_count(tiles, n, 1u << 24), 0);
  res.site_counts.assign(tiles, 0);
  const double scale = beta / potential.denominator().get_d();
  const std::uint64_t cadence = std::max<std::uint64_t>(1, options.cadence);
  const auto cells = static_cast<std::uint64_t>(n) * n;
  for (std::uint64_t s = 1; s <= options.steps; ++s) {
    const auto site = rng.below(cells);
    const auto tile = static_cast<TileId>(rng.below(tiles));
    const int x = static_cast<int>(site % n), y = static_cast<int>(site / n);
    const std::int64_t d = config.delta(x, y, tile);
    const double u = rng.uniform();
    if (d <= 0 || u < std::exp(-scale * static_cast<double>(d))) {
      config.set(x, y, tile);
      ++res.accepted;
    }
    if (s > options.burn_in) {
      if (options.histogram) ++res.histogram[encode_configuration(config.cells(), tiles)];
      for (TileId t : config.cells()) ++res.site_counts[static_cast<std::size_t>(t)];
    }
    if (s % cadence == 0) {
      res.step.push_back(s);
      res.energy.push_back(config.energy());
      if (options.markers) res.coverage.push_back(torus_coverage(config, *options.markers));
    }
  }
  res.final_cells = config.cells();
  res.final_energy = config.energy();
  return res;
}

namespace {

std::vector<CoverageRow> sweep(std::size_t tiles, const Potential& potential, const MarkerSet& markers, int n,
                               const std::vector<double>& betas, std::uint64_t steps, std::size_t replicas,
                               std::uint64_t seed, bool parallel) {
  if (replicas == 0) throw std::invalid_argument("need at least one replica");
  const std::size_t tasks = betas.size() * replicas;
  std::vector<double> value(tasks, 0);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (long long task = 0; task < static_cast<long long>(tasks); ++task) {
    const auto t = static_cast<std::size_t>(task);
    MetropolisOptions o;
    o.steps = steps;
    o.cadence = std::max<std::uint64_t>(1, steps / 100);
    o.markers = &markers;
    o.stream = t;
    const auto r = metropolis(tiles, potential, n, betas[t / replicas], seed, o);
    const std::size_t half = r.coverage.size() / 2;
    double sum = 0;
    for (std::size_t i = half; i < r.coverage.size(); ++i) sum += r.coverage[i];
    value[t] = r.coverage.size() > half ? sum / static_cast<double>(r.coverage.size() - half) : 0.0;
  }
  std::vector<CoverageRow> rows;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    CoverageRow row;
    row.beta = betas[b];
    row.replicas = replicas;
    double sum = 0, sq = 0;
    for (std::size_t r = 0; r < replicas; ++r) sum += value[b * replicas + r];
    row.mean = sum / static_cast<double>(replicas);
    for (std::size_t r = 0; r < replicas; ++r) sq += std::pow(value[b * replicas + r] - row.mean, 2);
    row.stderr_ = replicas > 1 ? std::sqrt(sq / static_cast<double>(replicas - 1) / static_cast<double>(replicas)) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<CoverageRow> coverage_sweep(std::size_t tiles, const Potential& potential, const MarkerSet& markers, int n,
                                        const std::vector<double>& betas, std::uint64_t steps, std::size_t replicas,
                                        std::uint64_t seed) {
  return sweep(tiles, potential, markers, n, betas, steps, replicas, seed, true);
}

namespace serial {
std::vector<CoverageRow> coverage_sweep(std::size_t tiles, const Potential& potential, const MarkerSet& markers, int n,
                                        const std::vector<double>& betas, std::uint64_t steps, std::size_t replicas,
                                        std::uint64_t seed) {
  return sweep(tiles, potential, markers, n, betas, steps, replicas, seed, false);
}
}  // namespace serial

double total_variation(const std::vector<std::uint64_t>& histogram, const std::vector<long double>& probability) {
  if (histogram.size() != probability.size()) throw std::invalid_argument("histogram and table differ in size");
  const long double total = std::accumulate(histogram.begin(), histogram.end(), 0.0L);
  if (total == 0) throw std::invalid_argument("empty histogram");
  long double tv = 0;
  for (std::size_t i = 0; i < histogram.size(); ++i)
    tv += std::fabs(static_cast<long double>(histogram[i]) / total - probability[i]);
  return static_cast<double>(tv / 2);
}

namespace {
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2 + 1;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman needs two equal samples of size >= 2");
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0 || vb == 0) return 0;
  return cov / std::sqrt(va * vb);
}

}  // namespace markerlab
