#include "markerlab/perturbation.hpp"

#include <algorithm>
#include <cmath>

namespace markerlab {

std::uint64_t SelectorRule::domain_size(int k) const {
  if (k < 0 || k > 62) throw std::out_of_range("scale out of range");
  return k >= threshold() ? std::uint64_t{1} << k : 0;
}

SelectorRule make_selector(std::size_t i, const Enumeration& enumeration) {
  if (i < 1 || i > enumeration.size())
    throw std::invalid_argument("selector index " + std::to_string(i) + " outside 1.." +
                                std::to_string(enumeration.size()));
  return {i, static_cast<int>(i) + 2};
}

std::uint64_t unrestricted_domain_size(int k) {
  if (k < 0 || k > 30) throw std::out_of_range("scale out of range");
  return (std::uint64_t{1} << k) * ((std::uint64_t{1} << (k + 1)) - 1);
}

std::uint64_t enumerate_seed_domain(int k, const SelectorRule* rule) {
  if (k < 0 || k > 24) throw std::out_of_range("scale out of range");
  std::uint64_t count = 0;
  std::string y(static_cast<std::size_t>(k), '#');
  for (int j = 0; j <= k; ++j)
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << j); ++bits) {
      for (int c = 0; c < k; ++c) y[c] = c < j ? ((bits >> (j - 1 - c)) & 1 ? '1' : '0') : '#';
      if (rule) {
        const std::string forced = std::string(rule->i, '1') + std::string(k - std::min<int>(k, rule->i), '#');
        if (static_cast<int>(rule->i) > k || y != forced) continue;
      }
      count += std::uint64_t{1} << k;
    }
  return count;
}

std::uint64_t translation_overhead(const Enumeration& enumeration, std::size_t i) {
  const Machine* m = enumeration.at(i);
  if (!m) throw std::invalid_argument("no enumeration entry " + std::to_string(i));
  return m->serialize().size() + 1;
}

std::uint64_t PerturbedPotential::admissible_seeds(int k) const {
  if (epsilon < 0) throw std::invalid_argument("epsilon must be non-negative");
  return epsilon > 0 ? selector.domain_size(k) : unrestricted_domain_size(k);
}

// ---------------------------------------------------------------------------

MachineWordSource::MachineWordSource(Machine m, int l, int seed_cap, std::uint64_t desk_cap)
    : machine_(std::move(m)), l_(l), seed_cap_(seed_cap), desk_cap_(desk_cap) {
  if (l < 1) throw std::invalid_argument("depth must be >= 1");
  if (seed_cap < l + 2) throw std::invalid_argument("seed cap must exceed the depth by two");
}

WordMeasure MachineWordSource::at(int k) const {
  if (k < l_) throw std::invalid_argument("scale below the read depth");
  if (k > seed_cap_) {
    const WordMeasure a = at(seed_cap_), b = at(seed_cap_ - 1), c = at(seed_cap_ - 2);
    if (a == b && b == c) return a;
    throw FlowRefusal(FlowRefusal::Kind::BudgetExceeded,
                      machine_.name() + ": marginals still move at the seed cap " + std::to_string(seed_cap_));
  }
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(k); it != cache_.end()) return it->second;
  }
  const auto r = word_measure(machine_, k, std::max(l_, b_read(k)), desk_cap_);
  if (r.status == MeasureStatus::NonConforming)
    throw FlowRefusal(FlowRefusal::Kind::NonConforming, machine_.name() + ": " + r.detail);
  if (r.status == MeasureStatus::BadOutput) throw FlowRefusal(FlowRefusal::Kind::BadOutput, machine_.name() + ": " + r.detail);
  WordMeasure m = r.measure.marginal(l_);
  std::lock_guard lock(mutex_);
  return cache_.emplace(k, std::move(m)).first->second;
}

MeasureFlow unperturbed_flow(const MachineWordSource& x, const std::vector<const MachineWordSource*>& entries,
                             int first) {
  MeasureFlow flow;
  flow.first = first;
  flow.measure = [&x, entries](int k) {
    const Rational share(Integer(1), pow2(static_cast<unsigned long>(k) + 1) - 1);
    const std::size_t selectable = std::min<std::size_t>(static_cast<std::size_t>(k), entries.size());
    std::vector<std::pair<Rational, WordMeasure>> parts;
    Rational rest = 1 - share * static_cast<unsigned long>(k);
    for (std::size_t i = 0; i < selectable; ++i) {
      if (entries[i]) parts.emplace_back(share, entries[i]->at(k));
      else rest += share;
    }
    // indices past the enumeration run the default machine
    rest += share * static_cast<unsigned long>(static_cast<std::size_t>(k) - selectable);
    parts.emplace_back(rest, x.at(k));
    return mixture(parts);
  };
  return flow;
}

namespace {

bool conforms(const MachineWordSource& s, int lo, int hi) {
  try {
    for (int k = lo; k <= hi; ++k) s.at(k);
    return true;
  } catch (const FlowRefusal&) {
    return false;
  }
}

}  // namespace

PerturbationReport perturbed_flow(const Machine& mx, const Machine& my, std::size_t index, const Rational& epsilon,
                                  const PerturbationConfig& config, const Enumeration& enumeration) {
  if (epsilon < 0) throw std::invalid_argument("epsilon must be non-negative");
  const SelectorRule rule = make_selector(index, enumeration);
  const int l = config.l;
  if (config.K < l) throw std::invalid_argument("horizon K must be at least the depth");
  if (config.window < 0 || config.window > config.K - l) throw std::invalid_argument("window must fit in [l, K]");

  PerturbationReport rep;
  rep.epsilon = epsilon;
  rep.index = index;
  rep.selector_active = epsilon > 0;
  rep.diameter = rule.diameter;

  const MachineWordSource x(mx, l, config.seed_cap, config.desk_cap);
  const MachineWordSource y(my, l, config.seed_cap, config.desk_cap);
  rep.target_x = x.at(config.K);
  rep.target_y = y.at(config.K);

  std::vector<std::unique_ptr<MachineWordSource>> owned;
  std::vector<const MachineWordSource*> entries;
  MeasureFlow flow;
  if (rep.selector_active) {
    rep.first = std::max(l, rule.threshold());
    flow.first = rep.first;
    flow.measure = [&y](int k) { return y.at(k); };
  } else {
    rep.first = l;
    for (std::size_t i = 1; i <= enumeration.size(); ++i) {
      if (i == index) {
        entries.push_back(&y);
        continue;
      }
      owned.push_back(std::make_unique<MachineWordSource>(*enumeration.at(i), l, config.seed_cap, config.desk_cap));
      if (conforms(*owned.back(), l, config.seed_cap)) {
        entries.push_back(owned.back().get());
      } else {
        entries.push_back(nullptr);
        rep.fallback_indices.push_back(i);
      }
    }
    flow = unperturbed_flow(x, entries, rep.first);
  }

  ConditionalRecursion rec(l, flow);
  for (int k = l; k <= config.K; ++k) {
    const auto& c = rec.advance();
    FlowRow row;
    row.k = k;
    row.defined = c.defined;
    row.measure = c.renormalized;
    rep.rows.push_back(std::move(row));
  }
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(rep.rows.size()); ++i) {
    auto& row = rep.rows[static_cast<std::size_t>(i)];
    row.to_x = row.defined ? weak_star_distance(row.measure, rep.target_x, l) : Rational(1);
    row.to_y = row.defined ? weak_star_distance(row.measure, rep.target_y, l) : Rational(1);
  }
  std::vector<WordMeasure> tail;
  for (const auto& row : rep.rows)
    if (row.k >= config.K - config.window && row.defined) tail.push_back(row.measure);
  rep.accumulation = accumulation_report(tail, config.resolution, l, config.dwell);
  rep.accumulation.window = config.window;
  return rep;
}

// ---------------------------------------------------------------------------

AccumulationReport accumulation_report(const std::vector<WordMeasure>& tail, const Rational& resolution, int L,
                                       double dwell) {
  if (dwell < 0 || dwell > 1) throw std::invalid_argument("dwell fraction must lie in [0, 1]");
  AccumulationReport a;
  a.resolution = resolution;
  a.window = static_cast<int>(tail.size()) - 1;
  if (tail.empty()) return a;
  const NetReport net = epsilon_net(tail, resolution, L);
  const auto threshold =
      static_cast<std::size_t>(std::max(1.0, std::ceil(dwell * static_cast<double>(tail.size()))));
  for (std::size_t r = 0; r < net.representatives.size(); ++r) {
    a.net.push_back(tail[net.representatives[r]]);
    if (net.members[r] >= threshold) {
      a.representatives.push_back(tail[net.representatives[r]]);
      a.weights.push_back(net.members[r]);
    }
  }
  a.radius = net.radius;
  a.connected = net.connected;
  a.stable = a.representatives.size() == 1;
  return a;
}

AccumulationReport accumulation_report(const MeasureFlow& flow, int l, int K, int window, const Rational& resolution,
                                       double dwell) {
  if (K < window || K - window < l) throw std::invalid_argument("need l <= K - window");
  ConditionalRecursion rec(l, flow);
  std::vector<WordMeasure> tail;
  for (int k = l; k <= K; ++k) {
    const auto& c = rec.advance();
    if (k >= K - window && c.defined) tail.push_back(c.renormalized);
  }
  auto a = accumulation_report(tail, resolution, l, dwell);
  a.window = window;
  return a;
}

nlohmann::json accumulation_to_json(const AccumulationReport& a) {
  nlohmann::json reps = nlohmann::json::array(), net = nlohmann::json::array();
  for (std::size_t i = 0; i < a.representatives.size(); ++i)
    reps.push_back({{"measure", measure_to_json(a.representatives[i])}, {"tail_points", a.weights[i]}});
  for (const auto& m : a.net) net.push_back(measure_to_json(m));
  return {{"window", a.window},
          {"resolution", to_string(a.resolution)},
          {"representatives", std::move(reps)},
          {"net", std::move(net)},
          {"radius", to_string(a.radius)},
          {"connected", a.connected},
          {"verdict", a.stable ? "stabilized" : "oscillating"}};
}

nlohmann::json report_body_json(const PerturbationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json w = nlohmann::json::array();
    for (const auto& q : row.measure.weights()) w.push_back(to_string(q));
    rows.push_back({{"k", row.k},
                    {"defined", row.defined},
                    {"weights", std::move(w)},
                    {"distance_x", to_string(row.to_x)},
                    {"distance_y", to_string(row.to_y)}});
  }
  return {{"index", r.index},
          {"selector_active", r.selector_active},
          {"first_scale", r.first},
          {"rule_diameter", r.diameter},
          {"fallback_indices", r.fallback_indices},
          {"target_x", measure_to_json(r.target_x)},
          {"target_y", measure_to_json(r.target_y)},
          {"rows", std::move(rows)},
          {"accumulation", accumulation_to_json(r.accumulation)}};
}

nlohmann::json report_to_json(const PerturbationReport& r) {
  return {{"epsilon", to_string(r.epsilon)}, {"body", report_body_json(r)}};
}

}  // namespace markerlab
