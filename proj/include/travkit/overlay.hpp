#pragma once

#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "travkit/gridmap.hpp"
#include "travkit/raster.hpp"

namespace travkit {

/// Top-down rendering of a map, +y up, one pixel per cell. Rejected cells are
/// dark red, unknown cells gray, the rest shaded from dark to bright green by
/// semantic traversability. `path` is drawn in blue with start/end markers.
RgbImage render_overlay(const TravGridMap& map, const std::vector<Eigen::Vector2d>& path = {},
                        double hard_geo_threshold = 0.1);

void write_overlay(const std::filesystem::path& file, const TravGridMap& map,
                   const std::vector<Eigen::Vector2d>& path = {}, double hard_geo_threshold = 0.1);

}  // namespace travkit
