#include "histofeat/io_util.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "histofeat/common.hpp"

namespace histofeat {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidInput("not a number: '" + s + "'");
    return v;
}

long parse_long(const std::string& s) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw InvalidInput("not an integer: '" + s + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

void check_csv_field(const std::string& field) {
    if (field.find(',') != std::string::npos || field.find('\n') != std::string::npos)
        throw InvalidInput("CSV field contains a separator: '" + field + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

void put_u32le(std::string& out, std::uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char(v >> 24)};
    out.append(b, 4);
}

void put_f32le(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(out, bits);
}

std::uint32_t get_u32le(const std::string& buf, std::size_t& off) {
    if (off + 4 > buf.size()) throw InvalidInput("binary payload truncated");
    auto b = reinterpret_cast<const unsigned char*>(buf.data() + off);
    off += 4;
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

float get_f32le(const std::string& buf, std::size_t& off) {
    std::uint32_t bits = get_u32le(buf, off);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace histofeat
