#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace histofeat {

// Interleaved RGB, row-major, 8 bits per channel.
struct ImageU8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size = width * height * 3

    bool empty() const { return width == 0 || height == 0; }
    std::size_t size_bytes() const { return pixels.size(); }
    const std::uint8_t* row(int y) const { return pixels.data() + std::size_t(y) * width * 3; }
    std::uint8_t* row(int y) { return pixels.data() + std::size_t(y) * width * 3; }
};

ImageU8 make_image(int width, int height, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0);

// Reads a PNG or TIFF image by file extension (.png, .tif, .tiff).
// Grayscale is expanded to RGB, alpha is dropped. TIFF support covers 8-bit
// uncompressed and deflate-compressed strips; pyramidal formats are out of
// scope, the manifest points at pre-exported level images.
ImageU8 load_image(const std::string& path);

void save_png(const std::string& path, const ImageU8& img);
void save_tiff(const std::string& path, const ImageU8& img);
void save_image(const std::string& path, const ImageU8& img);

bool has_image_extension(const std::string& path);

}  // namespace histofeat
