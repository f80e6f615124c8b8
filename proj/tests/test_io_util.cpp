#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "histofeat/common.hpp"
#include "histofeat/io_util.hpp"
#include "test_util.hpp"

using namespace histofeat;

TEST_CASE("format_double round-trips exactly") {
    const std::vector<double> samples{0.0,   1.0,     -1.0,  0.1,  1.0 / 3.0, 1e300,
                                      1e-300, 2.5e-8, -42.0, 1e17, 0.6785,    7.77e-10};
    for (double v : samples) {
        const std::string s = format_double(v);
        CHECK(parse_double(s) == v);
    }
    // Identical doubles produce identical strings.
    CHECK(format_double(0.1 + 0.2) == format_double(0.30000000000000004));
}

TEST_CASE("parse rejects junk and partial numbers") {
    CHECK_THROWS_AS(parse_double(""), InvalidInput);
    CHECK_THROWS_AS(parse_double("12x"), InvalidInput);
    CHECK_THROWS_AS(parse_double("--3"), InvalidInput);
    CHECK_THROWS_AS(parse_long(""), InvalidInput);
    CHECK_THROWS_AS(parse_long("3.5"), InvalidInput);
    CHECK_THROWS_AS(parse_long("7a"), InvalidInput);
    CHECK(parse_long("-12") == -12);
    CHECK(parse_double("-0.5") == -0.5);
}

TEST_CASE("split_csv_line") {
    CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(split_csv_line("a") == std::vector<std::string>{"a"});
    CHECK(split_csv_line("") == std::vector<std::string>{""});
    // Windows line endings are tolerated.
    CHECK(split_csv_line("a,b\r") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("check_csv_field rejects separators") {
    CHECK_NOTHROW(check_csv_field("plain_field-1.5"));
    CHECK_THROWS_AS(check_csv_field("a,b"), InvalidInput);
    CHECK_THROWS_AS(check_csv_field("a\nb"), InvalidInput);
}

TEST_CASE("file round-trip keeps binary content") {
    testutil::TempDir tmp;
    std::string payload = "line1\n\0mid\0\xff tail";
    payload += std::string(1, '\0');
    const std::string path = tmp.file("blob.bin");
    write_file(path, payload);
    CHECK(read_file(path) == payload);

    CHECK_THROWS_AS(read_file(tmp.file("missing.bin")), IoError);
}

TEST_CASE("little-endian primitives") {
    std::string buf;
    put_u32le(buf, 0xDEADBEEFu);
    REQUIRE(buf.size() == 4);
    CHECK(std::uint8_t(buf[0]) == 0xEF);
    CHECK(std::uint8_t(buf[1]) == 0xBE);
    CHECK(std::uint8_t(buf[2]) == 0xAD);
    CHECK(std::uint8_t(buf[3]) == 0xDE);

    put_f32le(buf, 1.5f);
    put_f32le(buf, -0.125f);
    std::size_t off = 0;
    CHECK(get_u32le(buf, off) == 0xDEADBEEFu);
    CHECK(get_f32le(buf, off) == 1.5f);
    CHECK(get_f32le(buf, off) == -0.125f);
    CHECK(off == buf.size());

    // Reading past the end is rejected.
    std::size_t bad = buf.size() - 2;
    CHECK_THROWS_AS(get_u32le(buf, bad), InvalidInput);
}
