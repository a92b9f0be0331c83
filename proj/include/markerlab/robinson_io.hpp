#pragma once

#include "markerlab/robinson.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace markerlab {

nlohmann::json tileset_to_json(const Tileset& tileset);
/// Throws std::invalid_argument with the offending field on malformed input.
Tileset tileset_from_json(const nlohmann::json& j);

/// {"width", "height", "origin": [x, y], "rows": [[...], ...]}; rows are
/// listed top to bottom so the text reads like the picture. Holes are null.
nlohmann::json patch_to_json(const Patch& patch);
Patch patch_from_json(const nlohmann::json& j);

/// Adjacency tables as {"horizontal": [[w, e], ...], "vertical": [[s, n], ...]}.
nlohmann::json adjacency_to_json(const Tileset& tileset);

struct SvgOptions {
  int cell = 24;
  bool timestamp = false;
};

/// One rect per tile plus its side-line decoration; red lines are stroked red.
std::string render_svg(const Tileset& tileset, const Patch& patch, const SvgOptions& options = {});

}  // namespace markerlab
