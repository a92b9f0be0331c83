#include "markerlab/robinson.hpp"
#include "markerlab/robinson_io.hpp"

#include <doctest.h>

#include <functional>
#include <random>
#include <set>

using namespace markerlab;

namespace {

const Tileset& robinson() {
  static const Tileset ts = build_tileset();
  return ts;
}

// Adjacency from the edge strings alone.
bool fits_east(const Tileset& ts, TileId w, TileId e) {
  return ts.tile(w).edge(Dir::East) == mate(ts.tile(e).edge(Dir::West));
}
bool fits_north(const Tileset& ts, TileId s, TileId n) {
  return ts.tile(s).edge(Dir::North) == mate(ts.tile(n).edge(Dir::South));
}

// Cell-by-cell backtracking count of admissible n x n squares.
std::uint64_t naive_count(const Tileset& ts, int n) {
  std::vector<TileId> grid(static_cast<std::size_t>(n) * n, kHole);
  std::function<std::uint64_t(int)> go = [&](int cell) -> std::uint64_t {
    if (cell == n * n) return 1;
    const int x = cell % n, y = cell / n;
    std::uint64_t total = 0;
    for (TileId t = 0; t < static_cast<TileId>(ts.size()); ++t) {
      if (x > 0 && !fits_east(ts, grid[cell - 1], t)) continue;
      if (y > 0 && !fits_north(ts, grid[cell - n], t)) continue;
      grid[cell] = t;
      total += go(cell + 1);
    }
    return total;
  };
  return go(0);
}

}  // namespace

TEST_CASE("mate is an involution on structured and plain labels") {
  for (const auto& t : robinson().tiles())
    for (const auto& e : t.edges) CHECK(mate(mate(e)) == e);
  CHECK(mate("plain") == "plain");
  CHECK(mate("+/01") == "-/00");
  CHECK(mate("-Lr/10") == "+Rr/11");
}

TEST_CASE("edge labels round-trip through decode and encode") {
  for (const auto& t : robinson().tiles())
    for (const auto& e : t.edges) {
      const auto d = RobinsonEdge::decode(e);
      REQUIRE(d.has_value());
      CHECK(d->encode() == e);
    }
  CHECK_FALSE(RobinsonEdge::decode("x/00").has_value());
  CHECK_FALSE(RobinsonEdge::decode("+Lq/00").has_value());
}

TEST_CASE("deduplicated variants give the 100-tile set, closed under rotation") {
  std::set<std::array<std::string, 4>> distinct;
  for (const auto& v : robinson_variants()) distinct.insert(v.edges());
  CHECK(distinct.size() == 100);
  CHECK(robinson().size() == 100);
  for (const auto& t : robinson().tiles()) {
    CHECK(distinct.count(t.edges) == 1);
    CHECK(robinson().find(rotate(t).edges).has_value());
  }
}

TEST_CASE("four quarter turns of a tile are the identity") {
  for (const auto& t : robinson().tiles()) {
    Tile r = t;
    for (int i = 0; i < 4; ++i) r = rotate(r);
    CHECK(r.edges == t.edges);
  }
}

TEST_CASE("adjacency tables agree with edge-string matching") {
  const auto& ts = robinson();
  for (TileId a = 0; a < static_cast<TileId>(ts.size()); ++a)
    for (TileId b = 0; b < static_cast<TileId>(ts.size()); ++b) {
      CHECK(ts.horizontal_ok(a, b) == fits_east(ts, a, b));
      CHECK(ts.vertical_ok(a, b) == fits_north(ts, a, b));
    }
}

TEST_CASE("macro-tiles have side 2^n - 1, no violations and macro-tile quadrants") {
  const int quadrant[2][2] = {{0, 3}, {1, 2}};
  for (int n = 1; n <= 6; ++n)
    for (int o = 0; o < 4; ++o) {
      const auto m = build_macro_tile(robinson(), n, o);
      CHECK(m.patch.width() == (1 << n) - 1);
      CHECK(m.patch.height() == (1 << n) - 1);
      CHECK(m.patch.total());
      CHECK(check_patch(robinson(), m.patch).empty());
      if (n == 1) continue;
      const int h = (1 << (n - 1)) - 1;
      for (int qx = 0; qx < 2; ++qx)
        for (int qy = 0; qy < 2; ++qy)
          CHECK(m.patch.sub(qx * (h + 1), qy * (h + 1), h, h) ==
                build_macro_tile(robinson(), n - 1, quadrant[qx][qy]).patch);
    }
  CHECK_THROWS_AS(build_macro_tile(robinson(), 0, 0), std::invalid_argument);
}

TEST_CASE("rotating a macro-tile gives the next orientation") {
  for (int n = 2; n <= 5; ++n)
    for (int o = 0; o < 4; ++o)
      CHECK(rotate_patch(robinson(), build_macro_tile(robinson(), n, o).patch) ==
            build_macro_tile(robinson(), n, (o + 1) % 4).patch);
}

TEST_CASE("check_patch reports edge mismatches") {
  const auto& ts = robinson();
  TileId a = 0, b = 0;
  for (b = 0; b < static_cast<TileId>(ts.size()); ++b)
    if (!fits_east(ts, a, b)) break;
  Patch p(2, 1);
  p.set(0, 0, a);
  p.set(1, 0, b);
  const auto v = check_patch(ts, p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "horizontal");
  Patch bad(1, 1);
  bad.set(0, 0, 1000);
  CHECK_THROWS_AS(check_patch(ts, bad), std::invalid_argument);
}

TEST_CASE("forbidden patterns are reported with their index") {
  Tileset ts({{0, {"a", "a", "a", "a"}, "A", 0}, {1, {"a", "a", "a", "a"}, "B", 0}},
             {ForbiddenPattern{{{0, 0, 0}, {1, 0, 1}}}});
  Patch p(2, 1);
  p.set(0, 0, 0);
  p.set(1, 0, 1);
  const auto v = check_patch(ts, p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "forbidden:0");
}

TEST_CASE("admissible counts match a cell-by-cell oracle") {
  for (int n = 1; n <= 3; ++n) {
    const auto r = count_admissible(robinson(), n, 1u << 30);
    CHECK(r.status == SearchStatus::Complete);
    CHECK(r.count == naive_count(robinson(), n));
  }
  CHECK(count_admissible(robinson(), 1, 1u << 20).count == 100);
}

TEST_CASE("parallel and serial counts agree, and budgets are reported") {
  const auto p = count_admissible(robinson(), 4, 1u << 30);
  const auto s = serial::count_admissible(robinson(), 4, 1u << 30);
  CHECK(p.count == s.count);
  CHECK(p.status == SearchStatus::Complete);
  CHECK(count_admissible(robinson(), 4, 10).status == SearchStatus::BudgetExceeded);
}

TEST_CASE("counting with a tall forbidden pattern is rejected") {
  Tileset ts({{0, {"a", "a", "a", "a"}, "A", 0}}, {ForbiddenPattern{{{0, 0, 0}, {0, 1, 0}, {0, 2, 0}}}});
  CHECK_THROWS_AS(count_admissible(ts, 3, 1000), std::invalid_argument);
}

TEST_CASE("tileset and patch JSON round-trip") {
  const auto& ts = robinson();
  const Tileset back = tileset_from_json(tileset_to_json(ts));
  REQUIRE(back.size() == ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(back.tiles()[i].edges == ts.tiles()[i].edges);

  Patch p = build_macro_tile(ts, 3, 2).patch;
  p.set(3, 3, kHole);
  p.set_origin({5, -2});
  CHECK(patch_from_json(patch_to_json(p)) == p);
}

TEST_CASE("malformed tileset JSON names the field") {
  nlohmann::json j = {{"tiles", {{{"id", 0}, {"north", "a"}, {"east", "a"}, {"south", "a"}}}}};
  try {
    tileset_from_json(j);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("west") != std::string::npos);
  }
  CHECK_THROWS_AS(tileset_from_json(nlohmann::json::object()), std::invalid_argument);
}

TEST_CASE("SVG has one rect per cell and red strokes at even levels") {
  const auto m = build_macro_tile(robinson(), 3, 0);
  const std::string svg = render_svg(robinson(), m.patch);
  std::size_t rects = 0;
  for (std::size_t pos = svg.find("<rect"); pos != std::string::npos; pos = svg.find("<rect", pos + 1)) ++rects;
  CHECK(rects == 49);
  CHECK(svg.find("stroke=\"red\"") != std::string::npos);
  CHECK(svg.find("<!--") == std::string::npos);
  CHECK(svg == render_svg(robinson(), m.patch));
  CHECK(render_svg(robinson(), m.patch, {24, true}).find("<!--") != std::string::npos);
}
