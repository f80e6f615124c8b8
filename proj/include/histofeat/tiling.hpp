#pragma once

#include <optional>
#include <string>
#include <vector>

#include "histofeat/image.hpp"

namespace histofeat {

// One raster patch plus provenance.
struct Tile {
    ImageU8 pixels;                     // tile_size x tile_size x 3
    std::string source_id;              // parent image identifier
    int grid_x = 0;                     // tile-grid coordinates
    int grid_y = 0;
    std::optional<std::string> patient_id;

    std::string id() const;             // unique, sortable identifier
};

// Resamples so that one output pixel covers target_mpp microns. Bilinear,
// pixel-center aligned; exact pass-through when source == target.
ImageU8 rescale_to_mpp(const ImageU8& image, double source_mpp, double target_mpp);

// Non-overlapping by default (stride == tile_size). Partial edge tiles are
// discarded; an image smaller than tile_size yields an empty list.
std::vector<Tile> tile_image(const ImageU8& image, int tile_size, int stride,
                             const std::string& source_id,
                             const std::optional<std::string>& patient_id = std::nullopt);

// keep == false iff the fraction of pixels with all channels >= threshold
// exceeds max_white_fraction (strict).
bool content_filter(const ImageU8& tile, int white_threshold, double max_white_fraction);

}  // namespace histofeat
