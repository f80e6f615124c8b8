#include "histofeat/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "histofeat/common.hpp"

namespace histofeat {

std::string Tile::id() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "#x%04dy%04d", grid_x, grid_y);
    return source_id + buf;
}

ImageU8 rescale_to_mpp(const ImageU8& image, double source_mpp, double target_mpp) {
    if (image.empty()) throw InvalidInput("rescale on empty image");
    if (!(source_mpp > 0.0 && source_mpp < 100.0) || !(target_mpp > 0.0 && target_mpp < 100.0))
        throw InvalidInput("mpp values must lie in (0, 100)");
    if (source_mpp == target_mpp) return image;

    double factor = source_mpp / target_mpp;
    int out_w = int(std::llround(double(image.width) * factor));
    int out_h = int(std::llround(double(image.height) * factor));
    if (out_w <= 0 || out_h <= 0) throw InvalidInput("rescale output dimension is zero");

    ImageU8 out;
    out.width = out_w;
    out.height = out_h;
    out.pixels.resize(std::size_t(out_w) * out_h * 3);
    double sx = double(image.width) / double(out_w);
    double sy = double(image.height) / double(out_h);
    for (int y = 0; y < out_h; ++y) {
        double fy = (double(y) + 0.5) * sy - 0.5;
        fy = std::min(std::max(fy, 0.0), double(image.height - 1));
        int y0 = int(fy);
        int y1 = std::min(y0 + 1, image.height - 1);
        double wy = fy - double(y0);
        for (int x = 0; x < out_w; ++x) {
            double fx = (double(x) + 0.5) * sx - 0.5;
            fx = std::min(std::max(fx, 0.0), double(image.width - 1));
            int x0 = int(fx);
            int x1 = std::min(x0 + 1, image.width - 1);
            double wx = fx - double(x0);
            for (int c = 0; c < 3; ++c) {
                double v00 = image.pixels[(std::size_t(y0) * image.width + x0) * 3 + c];
                double v01 = image.pixels[(std::size_t(y0) * image.width + x1) * 3 + c];
                double v10 = image.pixels[(std::size_t(y1) * image.width + x0) * 3 + c];
                double v11 = image.pixels[(std::size_t(y1) * image.width + x1) * 3 + c];
                double v = v00 * (1 - wx) * (1 - wy) + v01 * wx * (1 - wy) +
                           v10 * (1 - wx) * wy + v11 * wx * wy;
                out.pixels[(std::size_t(y) * out_w + x) * 3 + c] =
                    std::uint8_t(std::lround(std::min(255.0, std::max(0.0, v))));
            }
        }
    }
    return out;
}

std::vector<Tile> tile_image(const ImageU8& image, int tile_size, int stride,
                             const std::string& source_id,
                             const std::optional<std::string>& patient_id) {
    if (tile_size < 1 || stride < 1) throw InvalidInput("tile_size and stride must be >= 1");
    std::vector<Tile> tiles;
    if (image.width < tile_size || image.height < tile_size) return tiles;
    int nx = (image.width - tile_size) / stride + 1;
    int ny = (image.height - tile_size) / stride + 1;
    tiles.reserve(std::size_t(nx) * ny);
    for (int gy = 0; gy < ny; ++gy) {
        for (int gx = 0; gx < nx; ++gx) {
            Tile t;
            t.pixels.width = tile_size;
            t.pixels.height = tile_size;
            t.pixels.pixels.resize(std::size_t(tile_size) * tile_size * 3);
            int ox = gx * stride;
            int oy = gy * stride;
            for (int y = 0; y < tile_size; ++y) {
                const std::uint8_t* src = image.row(oy + y) + std::size_t(ox) * 3;
                std::copy(src, src + std::size_t(tile_size) * 3, t.pixels.row(y));
            }
            t.source_id = source_id;
            t.grid_x = gx;
            t.grid_y = gy;
            t.patient_id = patient_id;
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

bool content_filter(const ImageU8& tile, int white_threshold, double max_white_fraction) {
    if (!(max_white_fraction > 0.0 && max_white_fraction <= 1.0))
        throw InvalidInput("max_white_fraction must lie in (0, 1]");
    if (tile.empty()) throw InvalidInput("content_filter on empty tile");
    std::size_t n = std::size_t(tile.width) * tile.height;
    std::size_t white = 0;
    for (std::size_t p = 0; p < n; ++p) {
        const std::uint8_t* px = tile.pixels.data() + p * 3;
        if (px[0] >= white_threshold && px[1] >= white_threshold && px[2] >= white_threshold)
            ++white;
    }
    return double(white) / double(n) <= max_white_fraction;
}

}  // namespace histofeat
