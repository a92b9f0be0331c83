#include "markerlab/pi2.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace markerlab {

bool is_dyadic(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  const Integer& d = c.get_den();
  return mpz_popcount(d.get_mpz_t()) == 1;
}

DyadicMeasure::DyadicMeasure(WordMeasure m) : m_(std::move(m)) {
  for (const auto& w : m_.weights())
    if (!is_dyadic(w)) throw std::invalid_argument("weight " + to_string(w) + " is not dyadic");
}

unsigned long DyadicMeasure::precision() const {
  unsigned long p = 0;
  for (const auto& w : m_.weights()) p = std::max<unsigned long>(p, mpz_sizeinbase(w.get_den_mpz_t(), 2) - 1);
  return p;
}

DyadicMeasure interpolate(const DyadicMeasure& a, const DyadicMeasure& b, const Rational& s) {
  if (s < 0 || s > 1 || !is_dyadic(s)) throw std::invalid_argument("interpolation parameter must be dyadic in [0, 1]");
  if (s == 0) return a;
  if (s == 1) return b;
  return DyadicMeasure(mixture({{1 - s, a.measure()}, {s, b.measure()}}));
}

namespace sequences {

ComputableSequence constant(const DyadicMeasure& m) {
  return {"constant", m.depth(), [m](std::uint64_t) { return m; }};
}

ComputableSequence alternating(const DyadicMeasure& a, const DyadicMeasure& b) {
  if (a.depth() != b.depth()) throw std::invalid_argument("alternating points need one depth");
  return {"alternating", a.depth(), [a, b](std::uint64_t n) { return n % 2 == 0 ? a : b; }};
}

ComputableSequence dyadic_sweep(const DyadicMeasure& a, const DyadicMeasure& b) {
  if (a.depth() != b.depth()) throw std::invalid_argument("sweep endpoints need one depth");
  return {"sweep", a.depth(), [a, b](std::uint64_t n) {
            if (n == 0) return a;
            if (n == 1) return b;
            const int j = floor_log2(n);
            const std::uint64_t s = n - (std::uint64_t{1} << j);
            return interpolate(a, b, Rational(Integer(static_cast<unsigned long>(2 * s + 1)), pow2(j + 1)));
          }};
}

ComputableSequence eventually_periodic(std::vector<DyadicMeasure> prefix, std::vector<DyadicMeasure> cycle) {
  if (cycle.empty()) throw std::invalid_argument("cycle must be non-empty");
  const int depth = cycle.front().depth();
  for (const auto& m : prefix)
    if (m.depth() != depth) throw std::invalid_argument("periodic points need one depth");
  for (const auto& m : cycle)
    if (m.depth() != depth) throw std::invalid_argument("periodic points need one depth");
  return {"periodic", depth, [prefix = std::move(prefix), cycle = std::move(cycle)](std::uint64_t n) {
            if (n < prefix.size()) return prefix[n];
            return cycle[(n - prefix.size()) % cycle.size()];
          }};
}

}  // namespace sequences

namespace {

DyadicMeasure field_measure(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("sequence: missing '") + key + "'");
  try {
    return DyadicMeasure(measure_from_json(j[key]));
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("sequence.") + key + ": " + e.what());
  }
}

std::vector<DyadicMeasure> field_list(const nlohmann::json& j, const char* key, bool required) {
  std::vector<DyadicMeasure> out;
  if (!j.contains(key)) {
    if (required) throw std::invalid_argument(std::string("sequence: missing '") + key + "'");
    return out;
  }
  if (!j[key].is_array()) throw std::invalid_argument(std::string("sequence.") + key + ": expected an array");
  for (std::size_t i = 0; i < j[key].size(); ++i) {
    try {
      out.emplace_back(measure_from_json(j[key][i]));
    } catch (const std::exception& e) {
      throw std::invalid_argument(std::string("sequence.") + key + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

}  // namespace

ComputableSequence sequence_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw std::invalid_argument("sequence: missing string field 'kind'");
  const auto kind = j["kind"].get<std::string>();
  if (kind == "constant") return sequences::constant(field_measure(j, "measure"));
  if (kind == "alternating") return sequences::alternating(field_measure(j, "a"), field_measure(j, "b"));
  if (kind == "sweep") return sequences::dyadic_sweep(field_measure(j, "a"), field_measure(j, "b"));
  if (kind == "periodic") return sequences::eventually_periodic(field_list(j, "prefix", false), field_list(j, "cycle", true));
  throw std::invalid_argument("sequence.kind: unknown kind '" + kind + "'");
}

std::uint64_t connectify_index(std::uint64_t j) {
  if (j > 62) throw std::out_of_range("block index too large");
  return (std::uint64_t{1} << j) - 1;
}

Rational connectify_envelope(std::uint64_t n) {
  return Rational(Integer(1), pow2(static_cast<unsigned long>(floor_log2(n + 1))));
}

ComputableSequence connectify(const ComputableSequence& seq) {
  auto at = seq.at;
  return {seq.name + "+connected", seq.depth, [at](std::uint64_t n) {
            const int j = floor_log2(n + 1);
            const std::uint64_t s = n + 1 - (std::uint64_t{1} << j);
            const DyadicMeasure a = at(static_cast<std::uint64_t>(j));
            if (s == 0) return a;
            return interpolate(a, at(static_cast<std::uint64_t>(j) + 1),
                               Rational(Integer(static_cast<unsigned long>(s)), pow2(j)));
          }};
}

AccumulationSet finite_accumulation(const ComputableSequence& seq, std::uint64_t N, const Rational& resolution) {
  if (N < 1) throw std::invalid_argument("horizon must be >= 1");
  if (resolution <= 0) throw std::invalid_argument("resolution must be positive");
  const std::uint64_t lo = N / 2;
  std::vector<WordMeasure> tail(N - lo + 1);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < static_cast<long long>(tail.size()); ++i)
    tail[static_cast<std::size_t>(i)] = seq.at(lo + static_cast<std::uint64_t>(i)).measure();
  const NetReport net = epsilon_net(tail, resolution, seq.depth);
  AccumulationSet a;
  a.horizon = N;
  a.resolution = resolution;
  for (auto r : net.representatives) a.representatives.emplace_back(tail[r]);
  a.members = net.members;
  a.hausdorff = net.radius;
  a.connected = net.connected;
  return a;
}

Rational hausdorff_distance(const std::vector<DyadicMeasure>& a, const std::vector<DyadicMeasure>& b, int L) {
  if (a.empty() || b.empty()) throw std::invalid_argument("Hausdorff distance needs non-empty sets");
  auto directed = [L](const std::vector<DyadicMeasure>& p, const std::vector<DyadicMeasure>& q) {
    Rational worst = 0;
    for (const auto& x : p) {
      Rational best = weak_star_distance(x.measure(), q.front().measure(), L);
      for (const auto& y : q) best = std::min(best, weak_star_distance(x.measure(), y.measure(), L));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

nlohmann::json accumulation_set_to_json(const AccumulationSet& a) {
  nlohmann::json reps = nlohmann::json::array();
  for (std::size_t i = 0; i < a.representatives.size(); ++i)
    reps.push_back({{"measure", measure_to_json(a.representatives[i].measure())}, {"tail_points", a.members[i]}});
  return {{"horizon", a.horizon},
          {"resolution", to_string(a.resolution)},
          {"representatives", std::move(reps)},
          {"hausdorff_bound", to_string(a.hausdorff)},
          {"connected", a.connected}};
}

}  // namespace markerlab
