#include "markerlab/pi2.hpp"

#include <doctest.h>

#include <cmath>

using namespace markerlab;

namespace {

DyadicMeasure bern(const Rational& p) { return DyadicMeasure(WordMeasure::bernoulli(1, p)); }
const DyadicMeasure& up() {
  static const DyadicMeasure m(WordMeasure::point_mass(parse_word("u")));
  return m;
}
const DyadicMeasure& down() {
  static const DyadicMeasure m(WordMeasure::point_mass(parse_word("d")));
  return m;
}

Rational dist(const DyadicMeasure& a, const DyadicMeasure& b) { return weak_star_distance(a.measure(), b.measure(), a.depth()); }

}  // namespace

TEST_CASE("dyadic measures reject other denominators") {
  CHECK(is_dyadic(Rational(3, 8)));
  CHECK(is_dyadic(Rational(5)));
  CHECK_FALSE(is_dyadic(Rational(1, 3)));
  CHECK_THROWS_AS(DyadicMeasure(WordMeasure(1, {Rational(1, 3), Rational(2, 3)})), std::invalid_argument);
  CHECK(bern(Rational(3, 8)).precision() == 3);
  CHECK(up().precision() == 0);
  CHECK(interpolate(up(), down(), Rational(1, 4)) == bern(Rational(3, 4)));
  CHECK(interpolate(up(), down(), 0) == up());
  CHECK_THROWS_AS(interpolate(up(), down(), Rational(1, 3)), std::invalid_argument);
  CHECK_THROWS_AS(interpolate(up(), down(), Rational(2)), std::invalid_argument);
}

TEST_CASE("built-in sequences") {
  const auto c = sequences::constant(up());
  CHECK(c.at(0) == up());
  CHECK(c.at(1'000'000) == up());
  const auto alt = sequences::alternating(up(), down());
  CHECK(alt.at(4) == up());
  CHECK(alt.at(7) == down());
  const auto sweep = sequences::dyadic_sweep(up(), down());
  CHECK(sweep.at(0) == up());
  CHECK(sweep.at(1) == down());
  // past the endpoints, n = 2^j + s sits at (2s + 1) / 2^(j+1) along the segment
  for (std::uint64_t j = 1; j < 6; ++j)
    for (std::uint64_t s = 0; s < (1u << j); ++s) {
      Rational t(static_cast<long>(2 * s + 1), 1L << (j + 1));
      t.canonicalize();
      CHECK(sweep.at((1u << j) + s) == bern(1 - t));
    }
  const auto per = sequences::eventually_periodic({bern(Rational(1, 2))}, {up(), down()});
  CHECK(per.at(0) == bern(Rational(1, 2)));
  CHECK(per.at(1) == up());
  CHECK(per.at(4) == down());
  CHECK_THROWS_AS(sequences::eventually_periodic({}, {}), std::invalid_argument);
}

TEST_CASE("sequence descriptors from JSON name the bad field") {
  const auto u = measure_to_json(up().measure()), d = measure_to_json(down().measure());
  CHECK(sequence_from_json({{"kind", "alternating"}, {"a", u}, {"b", d}}).at(1) == down());
  CHECK(sequence_from_json({{"kind", "constant"}, {"measure", u}}).at(9) == up());
  CHECK(sequence_from_json({{"kind", "sweep"}, {"a", u}, {"b", d}}).at(2) == bern(Rational(3, 4)));
  CHECK(sequence_from_json({{"kind", "periodic"}, {"cycle", {u, d, d}}}).at(5) == down());
  auto message = [](const nlohmann::json& j) {
    try {
      sequence_from_json(j);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message({{"kind", "alternating"}, {"a", u}}).find("'b'") != std::string::npos);
  CHECK(message({{"kind", "spiral"}}).find("kind") != std::string::npos);
  nlohmann::json third = {{"depth", 1}, {"weights", {{"u", "1/3"}, {"d", "2/3"}}}};
  CHECK(message({{"kind", "constant"}, {"measure", third}}).find("measure") != std::string::npos);
  CHECK(message({{"kind", "periodic"}, {"cycle", {u, third}}}).find("cycle[1]") != std::string::npos);
  CHECK_FALSE(message(nlohmann::json::array()).empty());
}

TEST_CASE("connectify interpolates between consecutive terms") {
  const auto base = sequences::alternating(up(), down());
  const auto y = connectify(base);
  for (std::uint64_t j = 0; j < 12; ++j) CHECK(y.at(connectify_index(j)) == base.at(j));
  // direct staircase: block j runs from x_j towards x_(j+1) in 2^j steps
  std::uint64_t n = 0;
  for (int j = 0; j < 10; ++j)
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << j); ++s, ++n) {
      Rational frac(static_cast<long>(s), 1L << j);
      frac.canonicalize();
      const Rational p_up = j % 2 == 0 ? 1 - frac : frac;
      CHECK(y.at(n) == bern(p_up));
    }
  const auto c = connectify(sequences::constant(up()));
  for (std::uint64_t m = 0; m < 100; ++m) CHECK(c.at(m) == up());
}

TEST_CASE("connectified steps stay under both envelopes") {
  const auto y = connectify(sequences::eventually_periodic({}, {up(), down(), bern(Rational(1, 2))}));
  Rational prev_env = 2;
  for (std::uint64_t n = 0; n < 4096; ++n) {
    const Rational step = dist(y.at(n), y.at(n + 1));
    const Rational env = connectify_envelope(n);
    CHECK(step <= env);
    CHECK(env <= prev_env);
    prev_env = env;
    if (n >= 1) {
      const auto root = static_cast<long>(std::floor(std::sqrt(static_cast<double>(n))));
      CHECK(step <= Rational(1, root));
    }
  }
  CHECK(connectify_envelope(0) == 1);
  CHECK(connectify_envelope(6) == Rational(1, 4));
}

TEST_CASE("original tail points survive connectification") {
  const auto base = sequences::alternating(up(), down());
  const auto y = connectify(base);
  const std::uint64_t N = 1u << 12;
  const auto acc = finite_accumulation(y, N, Rational(1, 64));
  for (std::uint64_t j = 0; connectify_index(j) <= N; ++j) {
    if (connectify_index(j) < N / 2) continue;
    bool found = false;
    for (std::uint64_t n = N / 2; n <= N; ++n) found = found || y.at(n) == base.at(j);
    CHECK(found);
  }
  CHECK(acc.connected);
}

TEST_CASE("finite accumulation: constant, periodic, sweep") {
  const auto one = finite_accumulation(sequences::constant(up()), 100, Rational(1, 256));
  CHECK(one.representatives.size() == 1);
  CHECK(one.hausdorff == 0);

  const auto two = finite_accumulation(sequences::eventually_periodic({bern(Rational(1, 2))}, {up(), down()}), 100,
                                       Rational(1, 256));
  REQUIRE(two.representatives.size() == 2);
  CHECK(hausdorff_distance(two.representatives, {up(), down()}, 1) == 0);
  CHECK_FALSE(two.connected);

  const Rational res(1, 64);
  const std::uint64_t N = 1u << 10;
  const auto sweep = finite_accumulation(sequences::dyadic_sweep(up(), down()), N, res);
  std::vector<DyadicMeasure> grid;
  for (int i = 0; i <= 256; ++i) {
    Rational p(i, 256);
    p.canonicalize();
    grid.push_back(bern(p));
  }
  // tail points are 2^-9 apart along a segment of length 1/2
  CHECK(hausdorff_distance(sweep.representatives, grid, 1) <= res + Rational(1, 1024));
  CHECK(sweep.connected);
  CHECK(sweep.hausdorff <= res);
  CHECK_THROWS_AS(finite_accumulation(sequences::constant(up()), 0, res), std::invalid_argument);
}

TEST_CASE("finer resolution refines the net") {
  const auto seq = sequences::dyadic_sweep(up(), down());
  const auto coarse = finite_accumulation(seq, 1u << 9, Rational(1, 16));
  for (const Rational fine : {Rational(1, 32), Rational(1, 64), Rational(1, 128)}) {
    const auto f = finite_accumulation(seq, 1u << 9, fine);
    CHECK(f.representatives.size() >= coarse.representatives.size());
    CHECK(hausdorff_distance(f.representatives, coarse.representatives, 1) <= Rational(1, 16));
  }
}

TEST_CASE("Hausdorff distance and JSON") {
  CHECK(hausdorff_distance({up()}, {down()}, 1) == Rational(1, 2));
  CHECK(hausdorff_distance({up(), down()}, {up()}, 1) == Rational(1, 2));
  CHECK_THROWS_AS(hausdorff_distance({}, {up()}, 1), std::invalid_argument);
  const auto acc = finite_accumulation(sequences::constant(up()), 10, Rational(1, 8));
  const auto j = accumulation_set_to_json(acc);
  CHECK(j["horizon"] == 10);
  CHECK(j["representatives"].size() == 1);
  CHECK(j["hausdorff_bound"] == "0");
}
