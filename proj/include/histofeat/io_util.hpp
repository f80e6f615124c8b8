#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace histofeat {

// Shortest representation that round-trips; identical bytes for identical
// doubles, so CSV/JSON emission stays reproducible.
std::string format_double(double v);
double parse_double(const std::string& s);
long parse_long(const std::string& s);

std::vector<std::string> split_csv_line(const std::string& line);
// CSV fields are written unquoted; commas and newlines are rejected.
void check_csv_field(const std::string& field);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Little-endian primitives for the binary formats.
void put_u32le(std::string& out, std::uint32_t v);
void put_f32le(std::string& out, float v);
std::uint32_t get_u32le(const std::string& buf, std::size_t& off);
float get_f32le(const std::string& buf, std::size_t& off);

}  // namespace histofeat
