#include "histofeat/image.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <png.h>
#include <zlib.h>

#include "histofeat/common.hpp"

namespace histofeat {

ImageU8 make_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (width <= 0 || height <= 0) throw InvalidInput("image dimensions must be positive");
    ImageU8 img;
    img.width = width;
    img.height = height;
    img.pixels.resize(std::size_t(width) * height * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

namespace {

std::string lower_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return ext;
}

ImageU8 load_png(const std::string& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str())) {
        throw ItemError(path, std::string("PNG read failed: ") + png.message);
    }
    png.format = PNG_FORMAT_RGB;
    ImageU8 img;
    img.width = int(png.width);
    img.height = int(png.height);
    img.pixels.resize(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
        png_image_free(&png);
        throw ItemError(path, std::string("PNG decode failed: ") + png.message);
    }
    return img;
}

// ---- minimal TIFF (8-bit, uncompressed or deflate strips) ----

struct TiffReader {
    const std::vector<std::uint8_t>& buf;
    bool big_endian = false;

    std::uint16_t u16(std::size_t off) const {
        if (off + 2 > buf.size()) throw InvalidInput("TIFF truncated");
        return big_endian ? std::uint16_t(buf[off] << 8 | buf[off + 1])
                          : std::uint16_t(buf[off + 1] << 8 | buf[off]);
    }
    std::uint32_t u32(std::size_t off) const {
        if (off + 4 > buf.size()) throw InvalidInput("TIFF truncated");
        if (big_endian)
            return std::uint32_t(buf[off]) << 24 | std::uint32_t(buf[off + 1]) << 16 |
                   std::uint32_t(buf[off + 2]) << 8 | buf[off + 3];
        return std::uint32_t(buf[off + 3]) << 24 | std::uint32_t(buf[off + 2]) << 16 |
               std::uint32_t(buf[off + 1]) << 8 | buf[off];
    }
};

std::vector<std::uint32_t> read_tag_values(const TiffReader& r, std::size_t entry_off) {
    std::uint16_t type = r.u16(entry_off + 2);
    std::uint32_t count = r.u32(entry_off + 4);
    std::size_t elem = type == 3 ? 2 : type == 4 ? 4 : type == 1 ? 1 : 0;
    if (elem == 0) throw InvalidInput("TIFF tag type unsupported");
    std::size_t total = elem * count;
    std::size_t data_off = total <= 4 ? entry_off + 8 : r.u32(entry_off + 8);
    std::vector<std::uint32_t> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::size_t off = data_off + i * elem;
        out[i] = elem == 1 ? (off < r.buf.size() ? r.buf[off] : throw InvalidInput("TIFF truncated"))
                 : elem == 2 ? r.u16(off)
                             : r.u32(off);
    }
    return out;
}

std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* data, std::size_t len, std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw NumericalError("zlib init failed");
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = uInt(len);
    zs.next_out = out.data();
    zs.avail_out = uInt(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw InvalidInput("TIFF deflate strip is corrupt");
    out.resize(out.size() - zs.avail_out);
    return out;
}

ImageU8 load_tiff(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ItemError(path, "cannot open");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 8) throw ItemError(path, "not a TIFF file");

    TiffReader r{buf};
    if (buf[0] == 'I' && buf[1] == 'I')
        r.big_endian = false;
    else if (buf[0] == 'M' && buf[1] == 'M')
        r.big_endian = true;
    else
        throw ItemError(path, "not a TIFF file");
    if (r.u16(2) != 42) throw ItemError(path, "not a TIFF file");

    try {
        std::size_t ifd = r.u32(4);
        std::uint16_t n_entries = r.u16(ifd);

        std::uint32_t width = 0, height = 0, compression = 1, spp = 1, rows_per_strip = 0;
        std::uint32_t photometric = 1, planar = 1;
        std::vector<std::uint32_t> bits{8}, strip_offsets, strip_counts;
        for (std::uint16_t i = 0; i < n_entries; ++i) {
            std::size_t e = ifd + 2 + std::size_t(i) * 12;
            switch (r.u16(e)) {
                case 256: width = read_tag_values(r, e)[0]; break;
                case 257: height = read_tag_values(r, e)[0]; break;
                case 258: bits = read_tag_values(r, e); break;
                case 259: compression = read_tag_values(r, e)[0]; break;
                case 262: photometric = read_tag_values(r, e)[0]; break;
                case 273: strip_offsets = read_tag_values(r, e); break;
                case 277: spp = read_tag_values(r, e)[0]; break;
                case 278: rows_per_strip = read_tag_values(r, e)[0]; break;
                case 279: strip_counts = read_tag_values(r, e); break;
                case 284: planar = read_tag_values(r, e)[0]; break;
                default: break;
            }
        }
        if (width == 0 || height == 0 || strip_offsets.empty())
            throw InvalidInput("TIFF missing required tags");
        if (planar != 1) throw InvalidInput("TIFF planar configuration unsupported");
        for (auto b : bits)
            if (b != 8) throw InvalidInput("only 8-bit TIFF is supported");
        if (spp != 1 && spp != 3 && spp != 4)
            throw InvalidInput("TIFF samples per pixel unsupported");
        if (compression != 1 && compression != 8 && compression != 32946)
            throw InvalidInput("only uncompressed or deflate TIFF is supported");
        if (photometric != 1 && photometric != 2)
            throw InvalidInput("TIFF photometric interpretation unsupported");
        if (rows_per_strip == 0) rows_per_strip = height;
        if (strip_counts.size() != strip_offsets.size())
            throw InvalidInput("TIFF strip tables disagree");

        std::size_t row_bytes = std::size_t(width) * spp;
        std::vector<std::uint8_t> raw;
        raw.reserve(row_bytes * height);
        for (std::size_t s = 0; s < strip_offsets.size(); ++s) {
            std::size_t off = strip_offsets[s], len = strip_counts[s];
            if (off + len > buf.size()) throw InvalidInput("TIFF strip out of bounds");
            std::uint32_t rows = std::uint32_t(std::min<std::size_t>(rows_per_strip, height - s * rows_per_strip));
            if (compression == 1) {
                raw.insert(raw.end(), buf.begin() + off, buf.begin() + off + len);
            } else {
                auto strip = zlib_inflate(buf.data() + off, len, row_bytes * rows);
                raw.insert(raw.end(), strip.begin(), strip.end());
            }
        }
        if (raw.size() < row_bytes * height) throw InvalidInput("TIFF pixel data truncated");

        ImageU8 img;
        img.width = int(width);
        img.height = int(height);
        img.pixels.resize(std::size_t(width) * height * 3);
        for (std::size_t p = 0; p < std::size_t(width) * height; ++p) {
            const std::uint8_t* src = raw.data() + p * spp;
            std::uint8_t* dst = img.pixels.data() + p * 3;
            if (spp == 1) {
                dst[0] = dst[1] = dst[2] = src[0];
            } else {
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            }
        }
        return img;
    } catch (const ItemError&) {
        throw;
    } catch (const Error& e) {
        throw ItemError(path, e.what());
    }
}

void append_u16le(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(std::uint8_t(x & 0xff));
    v.push_back(std::uint8_t(x >> 8));
}
void append_u32le(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(std::uint8_t(x & 0xff));
    v.push_back(std::uint8_t((x >> 8) & 0xff));
    v.push_back(std::uint8_t((x >> 16) & 0xff));
    v.push_back(std::uint8_t(x >> 24));
}

}  // namespace

ImageU8 load_image(const std::string& path) {
    std::string ext = lower_ext(path);
    if (ext == "png") return load_png(path);
    if (ext == "tif" || ext == "tiff") return load_tiff(path);
    throw ItemError(path, "unsupported image extension");
}

bool has_image_extension(const std::string& path) {
    std::string ext = lower_ext(path);
    return ext == "png" || ext == "tif" || ext == "tiff";
}

void save_png(const std::string& path, const ImageU8& img) {
    if (img.empty()) throw InvalidInput("cannot save empty image");
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = png_uint_32(img.width);
    png.height = png_uint_32(img.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
        throw IoError("PNG write failed: " + path + ": " + png.message);
    }
}

void save_tiff(const std::string& path, const ImageU8& img) {
    if (img.empty()) throw InvalidInput("cannot save empty image");
    // Little-endian, single uncompressed strip, RGB.
    std::vector<std::uint8_t> out;
    out.reserve(img.pixels.size() + 256);
    out.push_back('I');
    out.push_back('I');
    append_u16le(out, 42);
    std::uint32_t pixel_off = 8;
    std::uint32_t ifd_off = pixel_off + std::uint32_t(img.pixels.size());
    append_u32le(out, ifd_off);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());

    const std::uint16_t n_entries = 9;
    std::uint32_t bits_off = ifd_off + 2 + n_entries * 12 + 4;
    auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t count, std::uint32_t value) {
        append_u16le(out, tag);
        append_u16le(out, type);
        append_u32le(out, count);
        if (type == 3 && count == 1) {
            append_u16le(out, std::uint16_t(value));
            append_u16le(out, 0);
        } else {
            append_u32le(out, value);
        }
    };
    append_u16le(out, n_entries);
    entry(256, 4, 1, std::uint32_t(img.width));
    entry(257, 4, 1, std::uint32_t(img.height));
    entry(258, 3, 3, bits_off);
    entry(259, 3, 1, 1);
    entry(262, 3, 1, 2);
    entry(273, 4, 1, pixel_off);
    entry(277, 3, 1, 3);
    entry(278, 4, 1, std::uint32_t(img.height));
    entry(279, 4, 1, std::uint32_t(img.pixels.size()));
    append_u32le(out, 0);  // next IFD
    append_u16le(out, 8);
    append_u16le(out, 8);
    append_u16le(out, 8);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(out.data()), std::streamsize(out.size()));
    if (!f) throw IoError("write failed: " + path);
}

void save_image(const std::string& path, const ImageU8& img) {
    std::string ext = lower_ext(path);
    if (ext == "png") return save_png(path, img);
    if (ext == "tif" || ext == "tiff") return save_tiff(path, img);
    throw IoError("unsupported image extension: " + path);
}

}  // namespace histofeat
