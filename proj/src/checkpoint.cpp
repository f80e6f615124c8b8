#include "histofeat/checkpoint.hpp"

#include <cmath>

#include "histofeat/common.hpp"
#include "histofeat/io_util.hpp"

namespace histofeat {

namespace {
constexpr char kMagic[4] = {'H', 'F', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const nn::Params& params) {
    std::string out;
    out.append(kMagic, 4);
    put_u32le(out, kVersion);
    for (const auto& [name, t] : params.items) {
        put_u32le(out, std::uint32_t(name.size()));
        out += name;
        put_u32le(out, std::uint32_t(t.shape.size()));
        for (int d : t.shape) put_u32le(out, std::uint32_t(d));
        for (float v : t.data) put_f32le(out, v);
    }
    write_file(path, out);
}

nn::Params load_checkpoint(const std::string& path) {
    const std::string buf = read_file(path);
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (pos + n > buf.size()) throw IoError("truncated checkpoint: " + path);
    };
    need(8);
    if (std::string(buf.data(), 4) != std::string(kMagic, 4))
        throw IoError("bad checkpoint magic: " + path);
    pos = 4;
    const std::uint32_t version = get_u32le(buf, pos);
    if (version != kVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));

    nn::Params params;
    while (pos < buf.size()) {
        need(4);
        const std::uint32_t name_len = get_u32le(buf, pos);
        need(name_len);
        std::string name(buf.data() + pos, name_len);
        pos += name_len;
        need(4);
        const std::uint32_t rank = get_u32le(buf, pos);
        if (rank == 0 || rank > 8) throw IoError("bad tensor rank in checkpoint: " + path);
        std::vector<int> shape(rank);
        std::size_t count = 1;
        for (auto& d : shape) {
            need(4);
            const std::uint32_t dim = get_u32le(buf, pos);
            if (dim == 0 || dim > (1u << 24)) throw IoError("bad tensor dim in checkpoint");
            d = int(dim);
            count *= dim;
        }
        need(count * 4);
        nn::Tensor t(shape);
        for (std::size_t i = 0; i < count; ++i) {
            t.data[i] = get_f32le(buf, pos);
            if (!std::isfinite(t.data[i]))
                throw IoError("non-finite value in checkpoint tensor " + name);
        }
        params.add(name, std::move(t));
    }
    if (params.items.empty()) throw IoError("checkpoint has no tensors: " + path);
    return params;
}

}  // namespace histofeat
