#include "markerlab/robinson.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace markerlab {

// ---------------------------------------------------------------------------
// Edge labels

std::string RobinsonEdge::encode() const {
  std::string s;
  s += outward ? '+' : '-';
  if (side) {
    s += side->slot == Slot::Left ? 'L' : 'R';
    s += side->colour == LineColour::Black ? 'k' : 'r';
  }
  s += '/';
  s += static_cast<char>('0' + along_parity);
  s += static_cast<char>('0' + normal_parity);
  return s;
}

std::optional<RobinsonEdge> RobinsonEdge::decode(std::string_view label) {
  if (label.size() != 4 && label.size() != 6) return std::nullopt;
  RobinsonEdge e;
  if (label[0] == '+') e.outward = true;
  else if (label[0] != '-') return std::nullopt;
  std::size_t pos = 1;
  if (label.size() == 6) {
    SideLine side;
    if (label[1] == 'L') side.slot = Slot::Left;
    else if (label[1] == 'R') side.slot = Slot::Right;
    else return std::nullopt;
    if (label[2] == 'k') side.colour = LineColour::Black;
    else if (label[2] == 'r') side.colour = LineColour::Red;
    else return std::nullopt;
    e.side = side;
    pos = 3;
  }
  if (label[pos] != '/') return std::nullopt;
  const char a = label[pos + 1];
  const char n = label[pos + 2];
  if ((a != '0' && a != '1') || (n != '0' && n != '1')) return std::nullopt;
  e.along_parity = static_cast<std::uint8_t>(a - '0');
  e.normal_parity = static_cast<std::uint8_t>(n - '0');
  return e;
}

std::string mate(std::string_view label) {
  auto e = RobinsonEdge::decode(label);
  if (!e) return std::string(label);
  e->outward = !e->outward;
  if (e->side) e->side->slot = flip(e->side->slot);
  e->normal_parity ^= 1;
  return e->encode();
}

Tile rotate(const Tile& tile) {
  Tile r = tile;
  for (Dir d : kAllDirs) r.edges[index(ccw(d))] = tile.edges[index(d)];
  r.rotation = (tile.rotation + 1) % 4;
  return r;
}

// ---------------------------------------------------------------------------
// Patterns, tilesets, patches

int ForbiddenPattern::min_dx() const {
  int m = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) m = i == 0 ? cells[i].dx : std::min(m, cells[i].dx);
  return m;
}

int ForbiddenPattern::min_dy() const {
  int m = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) m = i == 0 ? cells[i].dy : std::min(m, cells[i].dy);
  return m;
}

int ForbiddenPattern::width() const {
  if (cells.empty()) return 0;
  int hi = cells[0].dx;
  for (const auto& c : cells) hi = std::max(hi, c.dx);
  return hi - min_dx() + 1;
}

int ForbiddenPattern::height() const {
  if (cells.empty()) return 0;
  int hi = cells[0].dy;
  for (const auto& c : cells) hi = std::max(hi, c.dy);
  return hi - min_dy() + 1;
}

Tileset::Tileset(std::vector<Tile> tiles, std::vector<ForbiddenPattern> forbidden)
    : tiles_(std::move(tiles)), forbidden_(std::move(forbidden)) {
  const std::size_t n = tiles_.size();
  for (std::size_t i = 0; i < n; ++i) tiles_[i].id = static_cast<TileId>(i);
  for (auto& p : forbidden_) {
    if (p.cells.empty()) throw std::invalid_argument("forbidden pattern with empty support");
    for (const auto& c : p.cells)
      if (c.tile < 0 || static_cast<std::size_t>(c.tile) >= n)
        throw std::invalid_argument("forbidden pattern refers to unknown tile " + std::to_string(c.tile));
  }
  h_ok_.assign(n * n, 0);
  v_ok_.assign(n * n, 0);
  east_of_.assign(n, {});
  std::vector<std::string> east_mates(n), north_mates(n);
  for (std::size_t a = 0; a < n; ++a) {
    east_mates[a] = mate(tiles_[a].edge(Dir::East));
    north_mates[a] = mate(tiles_[a].edge(Dir::North));
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (tiles_[b].edge(Dir::West) == east_mates[a]) {
        h_ok_[a * n + b] = 1;
        east_of_[a].push_back(static_cast<TileId>(b));
      }
      if (tiles_[b].edge(Dir::South) == north_mates[a]) v_ok_[a * n + b] = 1;
    }
  }
}

std::optional<TileId> Tileset::find(const std::array<std::string, 4>& edges) const {
  for (const auto& t : tiles_)
    if (t.edges == edges) return t.id;
  return std::nullopt;
}

std::optional<TileId> Tileset::find_name(std::string_view name) const {
  for (const auto& t : tiles_)
    if (t.name == name) return t.id;
  return std::nullopt;
}

Patch::Patch(int width, int height, Coord origin, TileId fill)
    : width_(width), height_(height), origin_(origin) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative patch extent");
  cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

bool Patch::total() const {
  return std::none_of(cells_.begin(), cells_.end(), [](TileId t) { return t == kHole; });
}

Patch Patch::sub(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || x0 + w > width_ || y0 + h > height_)
    throw std::out_of_range("sub-patch outside patch");
  Patch out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.set(x, y, at(x0 + x, y0 + y));
  return out;
}

void Patch::paste(const Patch& p, int x0, int y0) {
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) set(x0 + x, y0 + y, p.at(x, y));
}

namespace {

bool pattern_at(const Patch& patch, const ForbiddenPattern& p, int x0, int y0) {
  for (const auto& c : p.cells) {
    const int x = x0 + c.dx;
    const int y = y0 + c.dy;
    if (x < 0 || y < 0 || x >= patch.width() || y >= patch.height()) return false;
    if (patch.at(x, y) != c.tile) return false;
  }
  return true;
}

}  // namespace

std::vector<Violation> check_patch(const Tileset& tileset, const Patch& patch) {
  for (TileId t : patch.cells())
    if (t != kHole && !tileset.contains(t))
      throw std::invalid_argument("patch contains unknown tile id " + std::to_string(t));

  std::vector<Violation> out;
  const Coord o = patch.origin();
  for (int y = 0; y < patch.height(); ++y) {
    for (int x = 0; x < patch.width(); ++x) {
      const TileId t = patch.at(x, y);
      if (t == kHole) continue;
      if (x + 1 < patch.width()) {
        const TileId e = patch.at(x + 1, y);
        if (e != kHole && !tileset.horizontal_ok(t, e)) out.push_back({{o.x + x, o.y + y}, "horizontal"});
      }
      if (y + 1 < patch.height()) {
        const TileId n = patch.at(x, y + 1);
        if (n != kHole && !tileset.vertical_ok(t, n)) out.push_back({{o.x + x, o.y + y}, "vertical"});
      }
    }
  }
  const auto& forbidden = tileset.forbidden();
  for (std::size_t i = 0; i < forbidden.size(); ++i) {
    const auto& p = forbidden[i];
    const int mx = p.min_dx();
    const int my = p.min_dy();
    for (int y = -my; y + my + p.height() <= patch.height(); ++y)
      for (int x = -mx; x + mx + p.width() <= patch.width(); ++x)
        if (pattern_at(patch, p, x, y))
          out.push_back({{o.x + x, o.y + y}, "forbidden:" + std::to_string(i)});
  }
  return out;
}

Patch rotate_patch(const Tileset& tileset, const Patch& patch) {
  const int w = patch.width();
  const int h = patch.height();
  Patch out(h, w, patch.origin());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const TileId t = patch.at(x, y);
      TileId r = kHole;
      if (t != kHole) {
        auto found = tileset.find(rotate(tileset.tile(t)).edges);
        if (!found) throw std::invalid_argument("rotated tile missing from tileset: " + tileset.tile(t).name);
        r = *found;
      }
      out.set(h - 1 - y, x, r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Robinson tiles

std::string_view template_name(RobinsonTemplate t) {
  switch (t) {
    case RobinsonTemplate::Arm: return "arm";
    case RobinsonTemplate::ArmLeft: return "arm_left";
    case RobinsonTemplate::ArmRight: return "arm_right";
    case RobinsonTemplate::BumpyCorner: return "bumpy_corner";
    case RobinsonTemplate::CrossedArm: return "crossed_arm";
    case RobinsonTemplate::CrossedArmLeft: return "crossed_arm_left";
    case RobinsonTemplate::CrossedArmRight: return "crossed_arm_right";
    case RobinsonTemplate::BigCorner: return "big_corner";
  }
  return "?";
}

namespace {

bool is_corner(RobinsonTemplate t) {
  return t == RobinsonTemplate::BumpyCorner || t == RobinsonTemplate::BigCorner;
}

bool has_parallel(RobinsonTemplate t) {
  return t == RobinsonTemplate::ArmLeft || t == RobinsonTemplate::ArmRight ||
         t == RobinsonTemplate::CrossedArmLeft || t == RobinsonTemplate::CrossedArmRight;
}

bool has_cross(RobinsonTemplate t) {
  return t == RobinsonTemplate::CrossedArm || t == RobinsonTemplate::CrossedArmLeft ||
         t == RobinsonTemplate::CrossedArmRight;
}

Slot parallel_slot(RobinsonTemplate t) {
  return (t == RobinsonTemplate::ArmLeft || t == RobinsonTemplate::CrossedArmLeft) ? Slot::Left : Slot::Right;
}

char colour_letter(LineColour c) { return c == LineColour::Black ? 'k' : 'r'; }

}  // namespace

std::array<std::string, 4> RobinsonShape::edges() const {
  std::array<RobinsonEdge, 4> e{};
  for (Dir d : kAllDirs) {
    auto& edge = e[index(d)];
    edge.outward = is_corner(kind) || d == heading;
    const bool vertical_edge = d == Dir::North || d == Dir::South;
    edge.along_parity = vertical_edge ? px : py;
    edge.normal_parity = vertical_edge ? py : px;
  }
  if (is_corner(kind)) {
    e[index(heading)].side = SideLine{Slot::Left, line};
    e[index(ccw(heading))].side = SideLine{Slot::Right, line};
  } else {
    if (has_parallel(kind)) {
      const Slot s = parallel_slot(kind);
      e[index(heading)].side = SideLine{s, line};
      e[index(opposite(heading))].side = SideLine{flip(s), line};
    }
    if (has_cross(kind)) {
      // The crossing square lies behind the arrow.
      e[index(cw(heading))].side = SideLine{Slot::Right, cross};
      e[index(ccw(heading))].side = SideLine{Slot::Left, cross};
    }
  }
  std::array<std::string, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = e[i].encode();
  return out;
}

RobinsonShape RobinsonShape::rotated() const {
  RobinsonShape r = *this;
  r.heading = ccw(heading);
  std::swap(r.px, r.py);
  return r;
}

std::string RobinsonShape::name() const {
  static constexpr const char* kDirNames[] = {"N", "E", "S", "W"};
  std::string s(template_name(kind));
  s += '[';
  s += kDirNames[index(heading)];
  if (is_corner(kind) || has_parallel(kind)) s += colour_letter(line);
  if (has_cross(kind)) {
    s += 'x';
    s += colour_letter(cross);
  }
  s += ',';
  s += static_cast<char>('0' + px);
  s += static_cast<char>('0' + py);
  s += ']';
  return s;
}

std::vector<RobinsonShape> robinson_variants() {
  using T = RobinsonTemplate;
  const LineColour colours[] = {LineColour::Black, LineColour::Red};
  std::vector<RobinsonShape> base;
  for (int ti = 0; ti < kRobinsonTemplates; ++ti) {
    const auto kind = static_cast<T>(ti);
    if (kind == T::BumpyCorner) {
      base.push_back({kind, Dir::East, LineColour::Black, LineColour::Black, 0, 0});
      continue;
    }
    if (kind == T::BigCorner) {
      for (auto c : colours) base.push_back({kind, Dir::East, c, LineColour::Black, 1, 1});
      continue;
    }
    // Arms pointing north sit on (odd, even) or (odd, odd) cells.
    for (std::uint8_t py : {std::uint8_t{0}, std::uint8_t{1}}) {
      if (kind == T::Arm) {
        base.push_back({kind, Dir::North, LineColour::Black, LineColour::Black, 1, py});
      } else if (kind == T::ArmLeft || kind == T::ArmRight) {
        for (auto c : colours) base.push_back({kind, Dir::North, c, LineColour::Black, 1, py});
      } else if (kind == T::CrossedArm) {
        for (auto c : colours) base.push_back({kind, Dir::North, LineColour::Black, c, 1, py});
      } else {
        // Lines of consecutive levels cross with alternating colours.
        base.push_back({kind, Dir::North, LineColour::Red, LineColour::Black, 1, py});
        base.push_back({kind, Dir::North, LineColour::Black, LineColour::Red, 1, py});
      }
    }
  }
  std::vector<RobinsonShape> out;
  for (const auto& b : base) {
    RobinsonShape s = b;
    for (int r = 0; r < 4; ++r) {
      out.push_back(s);
      s = s.rotated();
    }
  }
  return out;
}

Tileset build_tileset() {
  std::vector<Tile> tiles;
  std::map<std::array<std::string, 4>, std::size_t> seen;
  const auto variants = robinson_variants();
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto& v = variants[i];
    auto edges = v.edges();
    if (seen.contains(edges)) continue;
    seen.emplace(edges, tiles.size());
    Tile t;
    t.edges = std::move(edges);
    t.name = v.name();
    t.rotation = static_cast<int>(i % 4);
    tiles.push_back(std::move(t));
  }
  return Tileset(std::move(tiles));
}

RobinsonShape macro_cell_shape(int n, int orientation, int x, int y) {
  const int side = macro_side(n);
  if (n < 1 || x < 0 || y < 0 || x >= side || y >= side) throw std::out_of_range("cell outside macro-tile");
  if (n == 1) return {RobinsonTemplate::BumpyCorner, orientation_heading(orientation), LineColour::Black,
                      LineColour::Black, 0, 0};
  const int h = macro_side(n - 1);  // centre index == sub-tile side
  if (x != h && y != h) {
    const int qx = x > h ? 1 : 0;
    const int qy = y > h ? 1 : 0;
    // Quadrant sub-tiles open towards the centre.
    static constexpr int kQuadrantOrientation[2][2] = {{0, 3}, {1, 2}};  // [qx][qy]
    return macro_cell_shape(n - 1, kQuadrantOrientation[qx][qy], x - qx * (h + 1), y - qy * (h + 1));
  }
  const auto px = static_cast<std::uint8_t>(x % 2);
  const auto py = static_cast<std::uint8_t>(y % 2);
  const Dir leg1 = orientation_heading(orientation);
  const Dir leg2 = ccw(leg1);
  if (x == h && y == h) return {RobinsonTemplate::BigCorner, leg1, level_colour(n), LineColour::Black, px, py};

  Dir heading;
  int dist;
  if (y == h) {
    heading = x > h ? Dir::East : Dir::West;
    dist = std::abs(x - h);
  } else {
    heading = y > h ? Dir::North : Dir::South;
    dist = std::abs(y - h);
  }
  const bool crossed = dist == (1 << (n - 2));
  const bool parallel = heading == leg1 || heading == leg2;
  using T = RobinsonTemplate;
  T kind;
  if (parallel) {
    const bool left = heading == leg1;
    kind = crossed ? (left ? T::CrossedArmLeft : T::CrossedArmRight) : (left ? T::ArmLeft : T::ArmRight);
  } else {
    kind = crossed ? T::CrossedArm : T::Arm;
  }
  return {kind, heading, parallel ? level_colour(n) : LineColour::Black,
          crossed ? level_colour(n - 1) : LineColour::Black, px, py};
}

namespace {

TileId lookup_shape(const Tileset& ts, const RobinsonShape& s) {
  auto id = ts.find(s.edges());
  if (!id) throw std::invalid_argument("tileset lacks Robinson tile " + s.name());
  return *id;
}

}  // namespace

MacroTile build_macro_tile(const Tileset& robinson, int n, int orientation) {
  if (n < 1) throw std::invalid_argument("macro-tile scale must be >= 1");
  if (n > 14) throw std::invalid_argument("macro-tile scale above 14 exceeds the desk limit");
  if (orientation < 0 || orientation > 3) throw std::invalid_argument("orientation must be in 0..3");
  MacroTile m;
  m.scale = n;
  m.orientation = orientation;
  if (n == 1) {
    m.patch = Patch(1, 1);
    m.patch.set(0, 0, lookup_shape(robinson, macro_cell_shape(1, orientation, 0, 0)));
    return m;
  }
  const int side = macro_side(n);
  const int h = macro_side(n - 1);
  m.patch = Patch(side, side);
  m.patch.paste(build_macro_tile(robinson, n - 1, 0).patch, 0, 0);
  m.patch.paste(build_macro_tile(robinson, n - 1, 1).patch, h + 1, 0);
  m.patch.paste(build_macro_tile(robinson, n - 1, 2).patch, h + 1, h + 1);
  m.patch.paste(build_macro_tile(robinson, n - 1, 3).patch, 0, h + 1);
  for (int i = 0; i < side; ++i) {
    m.patch.set(i, h, lookup_shape(robinson, macro_cell_shape(n, orientation, i, h)));
    m.patch.set(h, i, lookup_shape(robinson, macro_cell_shape(n, orientation, h, i)));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Row-transfer counting

namespace {

struct RowHash {
  std::size_t operator()(const std::vector<TileId>& row) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (TileId t : row) h = (h ^ static_cast<std::size_t>(t)) * 1099511628211ULL;
    return h;
  }
};

using RowCounts = std::unordered_map<std::vector<TileId>, Integer, RowHash>;

struct RowRules {
  const Tileset& ts;
  int n;
  std::vector<const ForbiddenPattern*> one_row;
  std::vector<const ForbiddenPattern*> two_row;

  RowRules(const Tileset& tileset, int width) : ts(tileset), n(width) {
    for (const auto& p : ts.forbidden()) {
      if (p.height() > 2) throw std::invalid_argument("count_admissible supports forbidden patterns of height <= 2");
      if (p.width() > n) continue;
      (p.height() == 1 ? one_row : two_row).push_back(&p);
    }
  }

  // True when no forbidden pattern occurs in `row` (and in the pair prev/row).
  bool rows_ok(const std::vector<TileId>* prev, const std::vector<TileId>& row) const {
    auto cell = [&](int x, int dy) -> TileId { return dy == 0 ? (*prev)[x] : row[x]; };
    for (const auto* p : one_row) {
      const int mx = p->min_dx();
      for (int x0 = -mx; x0 + mx + p->width() <= n; ++x0) {
        bool hit = true;
        for (const auto& c : p->cells)
          if (row[x0 + c.dx] != c.tile) { hit = false; break; }
        if (hit) return false;
      }
    }
    if (!prev) return true;
    for (const auto* p : two_row) {
      const int mx = p->min_dx();
      const int my = p->min_dy();
      for (int x0 = -mx; x0 + mx + p->width() <= n; ++x0) {
        bool hit = true;
        for (const auto& c : p->cells)
          if (cell(x0 + c.dx, c.dy - my) != c.tile) { hit = false; break; }
        if (hit) return false;
      }
    }
    return true;
  }
};

// Enumerates rows compatible with `below` (or any row when null), adding
// `weight` to each successor in `out`. Returns false when the budget ran out.
bool expand_rows(const RowRules& rules, const std::vector<TileId>* below, const Integer& weight,
                 RowCounts& out, std::atomic<std::uint64_t>& nodes, std::uint64_t budget) {
  const Tileset& ts = rules.ts;
  const int n = rules.n;
  std::vector<TileId> row(n, kHole);
  std::vector<std::size_t> cursor(n, 0);
  const auto T = static_cast<TileId>(ts.size());
  auto candidate = [&](int x, std::size_t i) -> std::optional<TileId> {
    if (x == 0) {
      if (i >= static_cast<std::size_t>(T)) return std::nullopt;
      return static_cast<TileId>(i);
    }
    auto opts = ts.east_options(row[x - 1]);
    if (i >= opts.size()) return std::nullopt;
    return opts[i];
  };
  int x = 0;
  cursor[0] = 0;
  std::uint64_t local = 0;
  while (x >= 0) {
    auto c = candidate(x, cursor[x]);
    if (!c) {
      --x;
      continue;
    }
    ++cursor[x];
    if (++local == 1024) {
      if (nodes.fetch_add(local) + local > budget) return false;
      local = 0;
    }
    if (below && !ts.vertical_ok((*below)[x], *c)) continue;
    row[x] = *c;
    if (x + 1 == n) {
      if (rules.rows_ok(below, row)) out[row] += weight;
      continue;
    }
    ++x;
    cursor[x] = 0;
  }
  return nodes.fetch_add(local) + local <= budget;
}

CountResult count_rows(const Tileset& ts, int n, std::uint64_t budget, bool parallel) {
  if (n < 1) throw std::invalid_argument("window side must be >= 1");
  const RowRules rules(ts, n);
  std::atomic<std::uint64_t> nodes{0};
  CountResult result;

  RowCounts level;
  bool ok = expand_rows(rules, nullptr, Integer(1), level, nodes, budget);
  for (int r = 1; r < n && ok; ++r) {
    std::vector<const std::pair<const std::vector<TileId>, Integer>*> states;
    states.reserve(level.size());
    for (const auto& kv : level) states.push_back(&kv);
    const int threads = parallel ? omp_get_max_threads() : 1;
    std::vector<RowCounts> partial(static_cast<std::size_t>(threads));
    std::atomic<bool> all_ok{true};
    const auto count = static_cast<long>(states.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (long i = 0; i < count; ++i) {
      if (!all_ok.load(std::memory_order_relaxed)) continue;
      auto& mine = partial[static_cast<std::size_t>(omp_get_thread_num())];
      if (!expand_rows(rules, &states[i]->first, states[i]->second, mine, nodes, budget)) all_ok = false;
    }
    ok = all_ok;
    RowCounts next = std::move(partial[0]);
    for (std::size_t t = 1; t < partial.size(); ++t)
      for (auto& kv : partial[t]) next[kv.first] += kv.second;
    level = std::move(next);
  }
  result.status = ok ? SearchStatus::Complete : SearchStatus::BudgetExceeded;
  for (const auto& kv : level) result.count += kv.second;
  if (!ok) result.count = 0;
  result.nodes = nodes.load();
  return result;
}

}  // namespace

CountResult count_admissible(const Tileset& tileset, int n, std::uint64_t budget) {
  return count_rows(tileset, n, budget, true);
}

namespace serial {
CountResult count_admissible(const Tileset& tileset, int n, std::uint64_t budget) {
  return count_rows(tileset, n, budget, false);
}
}  // namespace serial

}  // namespace markerlab
