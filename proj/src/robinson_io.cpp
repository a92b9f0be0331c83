#include "markerlab/robinson_io.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace markerlab {

using nlohmann::json;

namespace {

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    throw std::invalid_argument(where + ": missing string field '" + key + "'");
  return j[key].get<std::string>();
}

int require_int(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw std::invalid_argument(where + ": missing integer field '" + key + "'");
  return j[key].get<int>();
}

}  // namespace

json tileset_to_json(const Tileset& tileset) {
  json tiles = json::array();
  for (const auto& t : tileset.tiles()) {
    json jt{{"id", t.id},
            {"north", t.edge(Dir::North)},
            {"east", t.edge(Dir::East)},
            {"south", t.edge(Dir::South)},
            {"west", t.edge(Dir::West)}};
    if (!t.name.empty()) jt["name"] = t.name;
    tiles.push_back(std::move(jt));
  }
  json forbidden = json::array();
  for (const auto& p : tileset.forbidden()) {
    json cells = json::array();
    for (const auto& c : p.cells) cells.push_back({{"dx", c.dx}, {"dy", c.dy}, {"tile", c.tile}});
    forbidden.push_back({{"cells", std::move(cells)}});
  }
  return {{"tiles", std::move(tiles)}, {"forbidden", std::move(forbidden)}};
}

Tileset tileset_from_json(const json& j) {
  if (!j.is_object() || !j.contains("tiles") || !j["tiles"].is_array())
    throw std::invalid_argument("tileset: expected an object with a 'tiles' array");
  std::vector<Tile> tiles;
  std::vector<int> ids;
  for (std::size_t i = 0; i < j["tiles"].size(); ++i) {
    const auto& jt = j["tiles"][i];
    const std::string where = "tiles[" + std::to_string(i) + "]";
    Tile t;
    ids.push_back(require_int(jt, "id", where));
    t.edges[index(Dir::North)] = require_string(jt, "north", where);
    t.edges[index(Dir::East)] = require_string(jt, "east", where);
    t.edges[index(Dir::South)] = require_string(jt, "south", where);
    t.edges[index(Dir::West)] = require_string(jt, "west", where);
    if (jt.contains("name") && jt["name"].is_string()) t.name = jt["name"].get<std::string>();
    tiles.push_back(std::move(t));
  }
  auto position = [&](int id, const std::string& where) -> TileId {
    for (std::size_t k = 0; k < ids.size(); ++k)
      if (ids[k] == id) return static_cast<TileId>(k);
    throw std::invalid_argument(where + ": unknown tile id " + std::to_string(id));
  };
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      if (ids[a] == ids[b]) throw std::invalid_argument("tiles: duplicate id " + std::to_string(ids[a]));

  std::vector<ForbiddenPattern> forbidden;
  if (j.contains("forbidden")) {
    if (!j["forbidden"].is_array()) throw std::invalid_argument("forbidden: expected an array");
    for (std::size_t i = 0; i < j["forbidden"].size(); ++i) {
      const auto& jp = j["forbidden"][i];
      const std::string where = "forbidden[" + std::to_string(i) + "]";
      if (!jp.contains("cells") || !jp["cells"].is_array() || jp["cells"].empty())
        throw std::invalid_argument(where + ": expected a non-empty 'cells' array");
      ForbiddenPattern p;
      for (std::size_t c = 0; c < jp["cells"].size(); ++c) {
        const auto& jc = jp["cells"][c];
        const std::string cw = where + ".cells[" + std::to_string(c) + "]";
        p.cells.push_back({require_int(jc, "dx", cw), require_int(jc, "dy", cw),
                           position(require_int(jc, "tile", cw), cw)});
      }
      forbidden.push_back(std::move(p));
    }
  }
  return Tileset(std::move(tiles), std::move(forbidden));
}

json patch_to_json(const Patch& patch) {
  json rows = json::array();
  for (int y = patch.height() - 1; y >= 0; --y) {
    json row = json::array();
    for (int x = 0; x < patch.width(); ++x) {
      const TileId t = patch.at(x, y);
      row.push_back(t == kHole ? json(nullptr) : json(t));
    }
    rows.push_back(std::move(row));
  }
  return {{"width", patch.width()},
          {"height", patch.height()},
          {"origin", {patch.origin().x, patch.origin().y}},
          {"rows", std::move(rows)}};
}

Patch patch_from_json(const json& j) {
  const int w = require_int(j, "width", "patch");
  const int h = require_int(j, "height", "patch");
  Coord origin;
  if (j.contains("origin")) {
    const auto& o = j["origin"];
    if (!o.is_array() || o.size() != 2) throw std::invalid_argument("patch.origin: expected [x, y]");
    origin = {o[0].get<int>(), o[1].get<int>()};
  }
  if (!j.contains("rows") || !j["rows"].is_array() || j["rows"].size() != static_cast<std::size_t>(h))
    throw std::invalid_argument("patch.rows: expected " + std::to_string(h) + " rows");
  Patch p(w, h, origin);
  for (int r = 0; r < h; ++r) {
    const auto& row = j["rows"][r];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(w))
      throw std::invalid_argument("patch.rows[" + std::to_string(r) + "]: expected " + std::to_string(w) + " cells");
    for (int x = 0; x < w; ++x) p.set(x, h - 1 - r, row[x].is_null() ? kHole : row[x].get<TileId>());
  }
  return p;
}

json adjacency_to_json(const Tileset& tileset) {
  json h = json::array();
  json v = json::array();
  const auto n = static_cast<TileId>(tileset.size());
  for (TileId a = 0; a < n; ++a) {
    for (TileId b = 0; b < n; ++b) {
      if (tileset.horizontal_ok(a, b)) h.push_back({a, b});
      if (tileset.vertical_ok(a, b)) v.push_back({a, b});
    }
  }
  return {{"horizontal", std::move(h)}, {"vertical", std::move(v)}};
}

namespace {

struct Vec {
  double x, y;
};

Vec unit(Dir d) {
  switch (d) {
    case Dir::North: return {0, 1};
    case Dir::East: return {1, 0};
    case Dir::South: return {0, -1};
    case Dir::West: return {-1, 0};
  }
  return {0, 0};
}

// Offset of a side line from the edge midpoint, in tile units.
Vec slot_offset(Dir outward, Slot slot) {
  const Vec left = unit(ccw(outward));
  const double s = slot == Slot::Left ? 0.25 : -0.25;
  return {left.x * s, left.y * s};
}

}  // namespace

std::string render_svg(const Tileset& tileset, const Patch& patch, const SvgOptions& options) {
  const int c = options.cell;
  const int W = patch.width() * c;
  const int H = patch.height() * c;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << ' ' << H << "\">\n";
  if (options.timestamp) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    out << "<!-- rendered " << std::chrono::duration_cast<std::chrono::seconds>(now).count() << " -->\n";
  }
  auto px = [&](double x) { return x * c; };
  auto py = [&](double y) { return H - y * c; };
  char buf[160];
  for (int y = 0; y < patch.height(); ++y) {
    for (int x = 0; x < patch.width(); ++x) {
      const TileId t = patch.at(x, y);
      std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\" stroke=\"#ccc\" stroke-width=\"0.5\"/>\n",
                    x * c, H - (y + 1) * c, c, c, t == kHole ? "#eee" : "#fff");
      out << buf;
      if (t == kHole) continue;
      const Tile& tile = tileset.tile(t);
      const Vec centre{x + 0.5, y + 0.5};

      std::array<std::optional<RobinsonEdge>, 4> edges;
      int outward = 0;
      for (Dir d : kAllDirs) {
        edges[index(d)] = RobinsonEdge::decode(tile.edge(d));
        if (edges[index(d)] && edges[index(d)]->outward) ++outward;
      }
      if (!edges[0] || !edges[1] || !edges[2] || !edges[3]) continue;

      for (Dir d : kAllDirs) {
        if (!edges[index(d)]->outward) continue;
        const Vec u = unit(d);
        std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#bbb\" stroke-width=\"1\"/>\n",
                      px(centre.x), py(centre.y), px(centre.x + 0.5 * u.x), py(centre.y + 0.5 * u.y));
        out << buf;
      }
      // Corners bend their two side lines into an L; every other line runs straight through.
      Vec bend{0, 0};
      if (outward == 4) {
        for (Dir d : kAllDirs)
          if (const auto& e = edges[index(d)]; e->side) {
            const Vec o = slot_offset(d, e->side->slot);
            bend.x += o.x;
            bend.y += o.y;
          }
      }
      for (Dir d : kAllDirs) {
        const auto& e = edges[index(d)];
        if (!e->side) continue;
        const Vec u = unit(d);
        const Vec o = slot_offset(d, e->side->slot);
        const Vec a{centre.x + 0.5 * u.x + o.x, centre.y + 0.5 * u.y + o.y};
        const Vec b = outward == 4 ? Vec{centre.x + bend.x, centre.y + bend.y} : Vec{centre.x + o.x, centre.y + o.y};
        std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"2\"/>\n",
                      px(a.x), py(a.y), px(b.x), py(b.y),
                      e->side->colour == LineColour::Red ? "red" : "black");
        out << buf;
      }
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace markerlab
