#include "markerlab/measures.hpp"

#include <doctest.h>

#include <random>

using namespace markerlab;

namespace {

WordMeasure random_measure(std::mt19937_64& rng, int depth) {
  std::vector<Rational> w;
  Rational total = 0;
  for (int i = 0; i < (1 << depth); ++i) {
    w.emplace_back(static_cast<long>(rng() % 5));
    total += w.back();
  }
  if (total == 0) {
    w[0] = 1;
    total = 1;
  }
  for (auto& x : w) x /= total;
  return WordMeasure(depth, w);
}

// Full-table scan: for every level and every word, sum the weights of its extensions.
Rational naive_distance(const WordMeasure& a, const WordMeasure& b, int L) {
  Rational total = 0;
  for (int l = 1; l <= L; ++l) {
    Rational worst = 0;
    for (std::size_t w = 0; w < (std::size_t{1} << l); ++w) {
      Rational pa = 0, pb = 0;
      for (std::size_t i = 0; i < a.weights().size(); ++i)
        if ((i >> (a.depth() - l)) == w) pa += a[i];
      for (std::size_t i = 0; i < b.weights().size(); ++i)
        if ((i >> (b.depth() - l)) == w) pb += b[i];
      worst = std::max(worst, abs(Rational(pa - pb)));
    }
    total += worst / Rational(pow2(static_cast<unsigned long>(l)));
  }
  return total;
}

Rational keep_factor(const OdometerSchedule& t, int i) { return Rational(4 * t(i) - 1, 4 * t(i)); }

}  // namespace

TEST_CASE("words and measures validate their input") {
  CHECK(word_string(parse_word("udu")) == "udu");
  CHECK_THROWS_AS(parse_word("uxd"), std::invalid_argument);
  CHECK_THROWS_AS(WordMeasure(1, {Rational(1, 2)}), std::invalid_argument);
  CHECK_THROWS_AS(WordMeasure(1, {Rational(1, 2), Rational(1, 3)}), std::invalid_argument);
  CHECK_THROWS_AS(WordMeasure(1, {Rational(3, 2), Rational(-1, 2)}), std::invalid_argument);
  CHECK(WordMeasure::bernoulli(3, Rational(1, 2)) == WordMeasure::uniform(3));
  CHECK(WordMeasure::bernoulli(2, Rational(1, 3)).probability(parse_word("ud")) == Rational(2, 9));
}

TEST_CASE("marginals sum sibling pairs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_measure(rng, 4);
    for (int l = 0; l < 4; ++l) {
      const auto a = m.marginal(l + 1).marginal(l);
      CHECK(a == m.marginal(l));
      Rational total = 0;
      const auto ml = m.marginal(l);
      for (const auto& w : ml.weights()) total += w;
      CHECK(total == 1);
    }
  }
  const auto p = WordMeasure::point_mass(parse_word("dud"));
  CHECK(p.probability(parse_word("du")) == 1);
  CHECK(p.probability(parse_word("dd")) == 0);
}

TEST_CASE("JSON and CSV round-trips keep exact weights") {
  std::mt19937_64 rng(9);
  const auto m = random_measure(rng, 3);
  CHECK(measure_from_json(measure_to_json(m)) == m);
  const std::string csv = measure_to_csv(WordMeasure::uniform(1));
  CHECK(csv == "word,weight\nu,1/2\nd,1/2\n");
  CHECK_THROWS_AS(measure_from_json(nlohmann::json::object()), std::invalid_argument);
}

TEST_CASE("weak-* distance: closed forms and the naive scan") {
  const auto up = WordMeasure::point_mass(parse_word("uuuuuuuuuu"));
  const auto down = WordMeasure::point_mass(parse_word("dddddddddd"));
  CHECK(weak_star_distance(up, up, 10) == 0);
  CHECK(weak_star_distance(up, down, 10) == Rational(1023, 1024));
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_measure(rng, 4), b = random_measure(rng, 4);
    CHECK(weak_star_distance(a, b, 4) == naive_distance(a, b, 4));
    CHECK(weak_star_distance(a, b, 3) == naive_distance(a, b, 3));
  }
  CHECK_THROWS_AS(weak_star_distance(WordMeasure::uniform(2), WordMeasure::uniform(3), 3), std::invalid_argument);
}

TEST_CASE("weak-* distance is a metric on random triples") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_measure(rng, 3), b = random_measure(rng, 3), c = random_measure(rng, 3);
    const Rational ab = weak_star_distance(a, b, 3);
    CHECK(ab == weak_star_distance(b, a, 3));
    CHECK((ab == 0) == (a == b));
    CHECK(weak_star_distance(a, c, 3) <= ab + weak_star_distance(b, c, 3));
  }
}

TEST_CASE("mixtures are exact convex combinations") {
  const auto u = WordMeasure::point_mass(parse_word("u"));
  const auto d = WordMeasure::point_mass(parse_word("d"));
  CHECK(mixture({{Rational(1, 2), u}, {Rational(1, 2), d}}) == WordMeasure::uniform(1));
  CHECK_THROWS_AS(mixture({{Rational(1, 2), u}, {Rational(1, 2), WordMeasure::uniform(2)}}), std::invalid_argument);
  CHECK_THROWS_AS(mixture({}), std::invalid_argument);
}

TEST_CASE("conditional measure with k = l is a single term") {
  MeasureFlow flow;
  flow.measure = [](int) { return WordMeasure::point_mass(parse_word("ud")); };
  const int l = 2;
  const auto c = conditional_grid_measure(l, l, flow);
  const Rational f(1, 4 * flow.t(l));
  CHECK(c.raw[1] == f);
  CHECK(c.residual == 1 - f);
  CHECK(c.renormalized == WordMeasure::point_mass(parse_word("ud")));
  CHECK_THROWS_AS(conditional_grid_measure(1, 2, flow), std::invalid_argument);
}

TEST_CASE("conditional measure with t = 2 and distinct point masses") {
  MeasureFlow flow;
  flow.t = OdometerSchedule::constant(2);
  flow.measure = [](int j) { return WordMeasure::point_mass(parse_word(j == 1 ? "uu" : j == 2 ? "ud" : "du")); };
  const auto c = conditional_grid_measure(3, 1, flow);
  // depth-1 marginals: u, u, d
  CHECK(c.raw[0] == Rational(1, 8) * Rational(49, 64) + Rational(1, 8) * Rational(7, 8));
  CHECK(c.raw[1] == Rational(1, 8));
  CHECK(c.residual == Rational(343, 512));
  const auto c2 = conditional_grid_measure(3, 2, flow);
  CHECK(c2.raw[0] == 0);
  CHECK(c2.raw[1] == Rational(7, 64));
  CHECK(c2.raw[2] == Rational(1, 8));
}

TEST_CASE("mass identity and telescoping hold on random schedules") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<WordMeasure> ms;
    for (int j = 0; j < 20; ++j) ms.push_back(random_measure(rng, 2));
    std::vector<int> ts;
    for (int j = 0; j < 20; ++j) ts.push_back(2 + static_cast<int>(rng() % 6));
    MeasureFlow flow;
    flow.measure = [&](int j) { return ms[static_cast<std::size_t>(j)]; };
    flow.t = OdometerSchedule([&](int j) { return ts[static_cast<std::size_t>(j)]; });
    const int l = 1 + static_cast<int>(rng() % 2), k = l + static_cast<int>(rng() % 15);
    const auto c = conditional_grid_measure(k, l, flow);
    Rational mass = c.residual;
    for (const auto& w : c.raw) mass += w;
    CHECK(mass == 1);
    Rational tele = 0, prod = 1;
    for (int j = l; j <= k; ++j) {
      Rational coef(1, 4 * ts[static_cast<std::size_t>(j)]);
      for (int i = j + 1; i <= k; ++i) coef *= keep_factor(flow.t, i);
      tele += coef;
      prod *= keep_factor(flow.t, j);
    }
    CHECK(tele == 1 - prod);
    CHECK(c.residual == prod);
    const auto s = serial::conditional_grid_measure(k, l, flow);
    CHECK(s.raw == c.raw);
    CHECK(s.renormalized == c.renormalized);
  }
}

TEST_CASE("constant flows telescope to the constant measure") {
  std::mt19937_64 rng(23);
  const auto m = random_measure(rng, 3);
  MeasureFlow flow;
  flow.measure = [&](int) { return m; };
  for (int k = 3; k < 30; ++k) {
    const auto c = conditional_grid_measure(k, 3, flow);
    CHECK(c.renormalized == m);
    for (std::size_t i = 0; i < c.raw.size(); ++i) CHECK(c.raw[i] == m[i] * (1 - c.residual));
  }
  for (const auto& d : flow_limit_check(flow, m, 3, 40)) CHECK(d == 0);
}

TEST_CASE("renormalised conditional measures are affine in the schedule") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<WordMeasure> a, b;
    for (int j = 0; j < 12; ++j) {
      a.push_back(random_measure(rng, 2));
      b.push_back(random_measure(rng, 2));
    }
    const Rational p = make_rational(static_cast<long>(rng() % 11), 10);
    MeasureFlow fa, fb, fm;
    fa.measure = [&](int j) { return a[static_cast<std::size_t>(j)]; };
    fb.measure = [&](int j) { return b[static_cast<std::size_t>(j)]; };
    fm.measure = [&](int j) {
      return mixture({{p, a[static_cast<std::size_t>(j)]}, {1 - p, b[static_cast<std::size_t>(j)]}});
    };
    const auto ra = conditional_grid_measure(11, 2, fa).renormalized;
    const auto rb = conditional_grid_measure(11, 2, fb).renormalized;
    CHECK(conditional_grid_measure(11, 2, fm).renormalized == mixture({{p, ra}, {1 - p, rb}}));
  }
}

TEST_CASE("switching schedule reaches 2^-10 at the closed-form horizon") {
  const auto ma = WordMeasure::point_mass(parse_word("uu"));
  const auto mb = WordMeasure::bernoulli(2, Rational(1, 3));
  const int l = 2, j0 = 6;
  MeasureFlow flow;
  flow.measure = [&](int j) { return j < j0 ? ma : mb; };
  const auto& t = flow.t;
  // Renormalised flow = alpha_k m_a + (1 - alpha_k) m_b with alpha_k the
  // surviving weight of the early scales.
  const Rational dab = weak_star_distance(ma, mb, l);
  const Rational tol(1, 1024);
  Rational before = 1, after = 1;
  for (int i = l; i < j0; ++i) before *= keep_factor(t, i);
  int horizon = -1;
  for (int k = j0; k < 2000; ++k) {
    after *= keep_factor(t, k);
    const Rational alpha = (1 - before) * after / (1 - before * after);
    if (alpha * dab < tol) {
      horizon = k;
      break;
    }
  }
  REQUIRE(horizon > j0);
  const auto d = flow_limit_check(flow, mb, l, horizon);
  CHECK(d.back() < tol);
  CHECK(d[static_cast<std::size_t>(horizon - 1 - l)] >= tol);
  for (std::size_t i = static_cast<std::size_t>(j0 - l) + 1; i < d.size(); ++i) CHECK(d[i] <= d[i - 1]);
}

TEST_CASE("two interleaved targets keep oscillating") {
  const auto ma = WordMeasure::point_mass(parse_word("u"));
  const auto mb = WordMeasure::point_mass(parse_word("d"));
  MeasureFlow flow;
  flow.measure = repetition_schedule([&](int i) { return i % 2 ? mb : ma; });
  const auto d = flow_limit_check(flow, ma, 1, 1024);
  // Block [256, 511] repeats m_a and block [512, 1023] repeats m_b.
  CHECK(d[static_cast<std::size_t>(511 - 1)] < Rational(1, 64));
  CHECK(d[static_cast<std::size_t>(1023 - 1)] > Rational(3, 8));
  Rational low = 1;
  for (std::size_t i = 255; i < d.size(); ++i) low = std::min(low, d[i]);
  Rational high = 0;
  for (std::size_t i = 255; i < d.size(); ++i) high = std::max(high, d[i]);
  CHECK(high - low > Rational(1, 8));
}

TEST_CASE("repetition schedule uses floor log2") {
  const std::vector<int> expected{0, 1, 1, 2, 2, 2, 2, 3};
  for (int j = 1; j <= 8; ++j) CHECK(repetition_index(j) == expected[static_cast<std::size_t>(j - 1)]);
  CHECK(repetition_index(0) == 0);
  auto s = repetition_schedule([](int i) { return WordMeasure::point_mass(std::vector<Bit>(1, i % 2 ? Bit::Down : Bit::Up)); });
  CHECK(s(5) == WordMeasure::point_mass(parse_word("u")));
  CHECK(s(9) == WordMeasure::point_mass(parse_word("d")));
}

TEST_CASE("first scale suppresses earlier contributions") {
  MeasureFlow flow;
  flow.first = 5;
  flow.measure = [](int) { return WordMeasure::uniform(1); };
  CHECK_FALSE(conditional_grid_measure(4, 1, flow).defined);
  CHECK(conditional_grid_measure(5, 1, flow).defined);
  CHECK(conditional_grid_measure(5, 1, flow).residual == 1 - Rational(1, 4 * flow.t(5)));
}

TEST_CASE("epsilon-net groups nearby points") {
  const auto u = WordMeasure::point_mass(parse_word("u"));
  const auto d = WordMeasure::point_mass(parse_word("d"));
  const auto net = epsilon_net({u, u, d, u, d}, Rational(1, 8), 1);
  CHECK(net.representatives == std::vector<std::size_t>{0, 2});
  CHECK(net.members == std::vector<std::size_t>{3, 2});
  CHECK(net.radius == 0);
  CHECK_FALSE(net.connected);

  std::vector<WordMeasure> segment;
  for (int i = 0; i <= 16; ++i) segment.push_back(WordMeasure::bernoulli(1, make_rational(i, 16)));
  const auto chain = epsilon_net(segment, Rational(1, 32), 1);
  // neighbours sit exactly one resolution apart, so every other point is a representative
  CHECK(chain.connected);
  CHECK(chain.representatives.size() == 9);
  CHECK(chain.radius == Rational(1, 32));
}
