#pragma once

// Wang-tile formalism, the Robinson tileset and its macro-tile hierarchy.
//
// Coordinates are row-major with the origin at the lower-left corner and y
// increasing upward. Edge labels are strings; two facing edges match when
// one is the `mate` of the other. Structured Robinson labels have the form
//
//     <arrow><side>/<along><normal>
//
// where <arrow> is '+' (principal arrow leaves the tile) or '-', <side> is
// empty or a slot letter 'L'/'R' (seen looking out of the tile) followed by
// a colour letter 'k' (black) or 'r' (red), and the two digits are the
// parity of the coordinate running along the edge and of the coordinate
// normal to it. Any other string is a plain label and is its own mate.

#include "markerlab/exact.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace markerlab {

enum class Dir : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

inline constexpr std::array<Dir, 4> kAllDirs{Dir::North, Dir::East, Dir::South, Dir::West};

constexpr Dir ccw(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 3) % 4); }
constexpr Dir cw(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 1) % 4); }
constexpr Dir opposite(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 2) % 4); }
constexpr int index(Dir d) { return static_cast<int>(d); }

enum class LineColour : std::uint8_t { Black, Red };
enum class Slot : std::uint8_t { Left, Right };

constexpr Slot flip(Slot s) { return s == Slot::Left ? Slot::Right : Slot::Left; }

struct SideLine {
  Slot slot = Slot::Left;
  LineColour colour = LineColour::Black;
  friend bool operator==(const SideLine&, const SideLine&) = default;
};

struct RobinsonEdge {
  bool outward = false;
  std::optional<SideLine> side;
  std::uint8_t along_parity = 0;
  std::uint8_t normal_parity = 0;

  std::string encode() const;
  static std::optional<RobinsonEdge> decode(std::string_view label);
  friend bool operator==(const RobinsonEdge&, const RobinsonEdge&) = default;
};

/// The label a facing edge must carry to match `label`. Involutive.
std::string mate(std::string_view label);

using TileId = std::int32_t;
inline constexpr TileId kHole = -1;

struct Tile {
  TileId id = 0;
  std::array<std::string, 4> edges;  // indexed by Dir
  std::string name;
  int rotation = 0;  // quarter turns counter-clockwise from the template

  const std::string& edge(Dir d) const { return edges[index(d)]; }
};

/// Quarter turn counter-clockwise: the east edge becomes the north edge.
Tile rotate(const Tile& tile);

struct PatternCell {
  int dx = 0;
  int dy = 0;
  TileId tile = 0;
  friend bool operator==(const PatternCell&, const PatternCell&) = default;
};

struct ForbiddenPattern {
  std::vector<PatternCell> cells;

  int min_dx() const;
  int min_dy() const;
  int width() const;
  int height() const;
};

class Tileset {
 public:
  Tileset() = default;
  /// Tiles are renumbered so that id == position.
  explicit Tileset(std::vector<Tile> tiles, std::vector<ForbiddenPattern> forbidden = {});

  std::size_t size() const { return tiles_.size(); }
  const std::vector<Tile>& tiles() const { return tiles_; }
  const Tile& tile(TileId id) const { return tiles_.at(static_cast<std::size_t>(id)); }
  const std::vector<ForbiddenPattern>& forbidden() const { return forbidden_; }
  bool contains(TileId id) const { return id >= 0 && static_cast<std::size_t>(id) < tiles_.size(); }

  /// `west` may sit immediately west of `east`.
  bool horizontal_ok(TileId west, TileId east) const { return h_ok_[west * size() + east] != 0; }
  /// `south` may sit immediately south of `north`.
  bool vertical_ok(TileId south, TileId north) const { return v_ok_[south * size() + north] != 0; }

  std::span<const TileId> east_options(TileId west) const { return east_of_[west]; }

  /// Tile with exactly these edges (N, E, S, W), if present.
  std::optional<TileId> find(const std::array<std::string, 4>& edges) const;
  std::optional<TileId> find_name(std::string_view name) const;

 private:
  std::vector<Tile> tiles_;
  std::vector<ForbiddenPattern> forbidden_;
  std::vector<std::uint8_t> h_ok_;
  std::vector<std::uint8_t> v_ok_;
  std::vector<std::vector<TileId>> east_of_;
};

struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

/// Rectangular tile assignment; kHole marks an unassigned cell.
class Patch {
 public:
  Patch() = default;
  Patch(int width, int height, Coord origin = {}, TileId fill = kHole);

  int width() const { return width_; }
  int height() const { return height_; }
  Coord origin() const { return origin_; }
  void set_origin(Coord c) { origin_ = c; }

  TileId at(int x, int y) const { return cells_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int x, int y, TileId t) { cells_[static_cast<std::size_t>(y) * width_ + x] = t; }
  std::span<const TileId> cells() const { return cells_; }

  bool total() const;
  /// Copy of the w x h block whose lower-left cell is (x0, y0); origin reset to (0, 0).
  Patch sub(int x0, int y0, int w, int h) const;
  void paste(const Patch& p, int x0, int y0);

  friend bool operator==(const Patch&, const Patch&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  Coord origin_{};
  std::vector<TileId> cells_;
};

struct Violation {
  Coord at;          // lattice coordinate (origin + local offset)
  std::string rule;  // "horizontal", "vertical" or "forbidden:<index>"
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Every edge mismatch and forbidden-pattern occurrence in `patch`.
/// Throws std::invalid_argument on tile ids outside the tileset.
std::vector<Violation> check_patch(const Tileset& tileset, const Patch& patch);

/// CCW quarter turn of the patch, rotating each tile; throws if a rotated
/// tile is missing from the tileset.
Patch rotate_patch(const Tileset& tileset, const Patch& patch);

// ---------------------------------------------------------------------------
// Robinson tiles

enum class RobinsonTemplate : std::uint8_t {
  Arm,              // plain arm
  ArmLeft,          // arm carrying a side line left of its arrow
  ArmRight,
  BumpyCorner,      // the 1-macro-tile
  CrossedArm,       // arm crossed by a perpendicular side line
  CrossedArmLeft,
  CrossedArmRight,
  BigCorner,        // centre of an n-macro-tile, n >= 2
};

inline constexpr int kRobinsonTemplates = 8;

std::string_view template_name(RobinsonTemplate t);

/// Semantic description of a decorated Robinson tile.
struct RobinsonShape {
  RobinsonTemplate kind = RobinsonTemplate::Arm;
  // Arms: direction of the principal arrow through the tile. Corners: first
  // leg of the L; the second leg is ccw(heading).
  Dir heading = Dir::North;
  LineColour line = LineColour::Black;   // corner L or parallel side line
  LineColour cross = LineColour::Black;  // perpendicular side line
  std::uint8_t px = 0;
  std::uint8_t py = 0;

  std::array<std::string, 4> edges() const;
  RobinsonShape rotated() const;
  std::string name() const;
  friend bool operator==(const RobinsonShape&, const RobinsonShape&) = default;
};

/// Every decorated variant of every template in all four rotations, before
/// deduplication.
std::vector<RobinsonShape> robinson_variants();

/// The Robinson tileset: template variants closed under rotation, duplicates
/// (identical edge tuples) merged.
Tileset build_tileset();

/// Colour of the lines of level-n squares: black for odd n, red for even n.
constexpr LineColour level_colour(int n) { return n % 2 == 1 ? LineColour::Black : LineColour::Red; }

/// Corner orientation o in 0..3: the macro-tile's big corner opens NE, NW, SW, SE.
constexpr Dir orientation_heading(int o) {
  Dir d = Dir::East;
  for (int i = 0; i < o; ++i) d = ccw(d);
  return d;
}

constexpr int macro_side(int n) { return (1 << n) - 1; }

struct MacroTile {
  int scale = 1;
  int orientation = 0;
  Patch patch;
};

/// The n-macro-tile assembled from four (n-1)-macro-tiles and a central
/// cross. Throws std::invalid_argument for n < 1 or n > 14.
MacroTile build_macro_tile(const Tileset& robinson, int n, int orientation);

/// Semantic shape of cell (x, y) of the n-macro-tile with orientation o.
RobinsonShape macro_cell_shape(int n, int orientation, int x, int y);

// ---------------------------------------------------------------------------
// Exact counting of locally admissible square patterns

enum class SearchStatus : std::uint8_t { Complete, BudgetExceeded };

struct CountResult {
  SearchStatus status = SearchStatus::Complete;
  Integer count;             // exact when status == Complete, a lower bound otherwise
  std::uint64_t nodes = 0;   // DFS node expansions
};

/// |G_{I_n}| by row transfer: each state is a full row, successor rows are
/// enumerated by depth-first search under edge constraints. Forbidden
/// patterns taller than two rows are rejected. Parallel over states.
CountResult count_admissible(const Tileset& tileset, int n, std::uint64_t budget);

namespace serial {
CountResult count_admissible(const Tileset& tileset, int n, std::uint64_t budget);
}  // namespace serial

}  // namespace markerlab
