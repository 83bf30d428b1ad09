#include <doctest.h>

#include "stencilstream/codec.hpp"
#include "stencilstream/error.hpp"
#include "stencilstream/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>

using namespace stencilstream;
namespace cd = stencilstream::codec_detail;

namespace {

// Base -2 digits by repeated division, independent of the mask trick.
std::uint64_t negabinary_oracle(std::int64_t q) {
    std::uint64_t u = 0;
    int bit = 0;
    while (q != 0) {
        std::int64_t r = q % -2;
        q /= -2;
        if (r < 0) {
            r += 2;
            q += 1;
        }
        u |= static_cast<std::uint64_t>(r) << bit++;
    }
    return u;
}

std::vector<double> sinusoid(Extents3 e, double fx, double fy, double fz) {
    std::vector<double> v(e.count());
    for (std::size_t z = 0; z < e.nz; ++z)
        for (std::size_t y = 0; y < e.ny; ++y)
            for (std::size_t x = 0; x < e.nx; ++x) {
                v[(z * e.ny + y) * e.nx + x] =
                    std::sin(std::numbers::pi * fx * (x + 1) / (e.nx + 1)) *
                    std::sin(std::numbers::pi * fy * (y + 1) / (e.ny + 1)) *
                    std::sin(std::numbers::pi * fz * (z + 1) / (e.nz + 1));
            }
    return v;
}

double max_abs_error(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("rate bounds") {
    CHECK_THROWS_AS(Rate(7), Error);
    CHECK_THROWS_AS(Rate(65), Error);
    CHECK(Rate(8).payload_bits(1) == 512);
    CHECK(Rate(32).payload_bits(64) == 2048);
    CHECK(Rate(24).payload_bits(512) == 12288);
    CHECK(Rate(24).payload_bits(65) == 2 * 64 * 24);
}

TEST_CASE("negabinary examples at 4-bit width") {
    CHECK(cd::negabinary_map(0, 4) == 0);
    CHECK(cd::negabinary_map(1, 4) == 1);
    CHECK(cd::negabinary_map(-1, 4) == 3);
    CHECK(cd::negabinary_map(2, 4) == 6);
    for (std::int64_t q = -10; q <= 5; ++q) {
        CHECK(cd::negabinary_map(q, 4) == negabinary_oracle(q));
        CHECK(cd::negabinary_unmap(cd::negabinary_map(q, 4), 4) == q);
    }
}

TEST_CASE("negabinary agrees with the base -2 oracle at full width") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> dist(-(std::int64_t{1} << 60), std::int64_t{1} << 60);
    for (int t = 0; t < 20000; ++t) {
        const std::int64_t q = dist(rng);
        REQUIRE(cd::negabinary_map(q) == negabinary_oracle(q));
    }
}

TEST_CASE("negabinary round trip") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 1000000; ++t) {
        const auto q = static_cast<std::int64_t>(rng());
        REQUIRE(cd::negabinary_unmap(cd::negabinary_map(q)) == q);
    }
}

TEST_CASE("lifting examples") {
    CHECK(cd::lift_forward({0, 0, 0, 0}) == std::array<std::int64_t, 4>{0, 0, 0, 0});
    for (std::int64_t c : {1LL, -1LL, 7LL, -123456789LL, (1LL << 60) - 1}) {
        CHECK(cd::lift_forward({c, c, c, c}) == std::array<std::int64_t, 4>{c, 0, 0, 0});
    }
    // By hand: s = (1, 4), d = (8, 7); then floor(5/2) = 2 and 1 - 4 = -3.
    CHECK(cd::lift_forward({5, -3, 8, 1}) == std::array<std::int64_t, 4>{2, -3, 8, 7});
}

TEST_CASE("lifting round trip over random vectors") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> dist(-(std::int64_t{1} << 61) + 1, (std::int64_t{1} << 61) - 1);
    for (int t = 0; t < 1000000; ++t) {
        const std::array<std::int64_t, 4> v{dist(rng), dist(rng), dist(rng), dist(rng)};
        REQUIRE(cd::lift_inverse(cd::lift_forward(v)) == v);
    }
}

TEST_CASE("lifting rejects inputs beyond the guard bits") {
    const std::int64_t big = std::int64_t{1} << 61;
    CHECK_THROWS_AS(cd::lift_forward({big, 0, 0, 0}), Error);
    CHECK_THROWS_AS(cd::lift_forward({0, 0, 0, -big}), Error);
}

TEST_CASE("bit transpose matches a naive transpose") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        std::array<std::uint64_t, 64> a{};
        for (auto& w : a) w = rng();
        std::array<std::uint64_t, 64> expect{};
        for (int i = 0; i < 64; ++i)
            for (int k = 0; k < 64; ++k)
                if ((a[static_cast<std::size_t>(k)] >> i) & 1u) expect[static_cast<std::size_t>(i)] |= std::uint64_t{1} << k;
        cd::transpose_bits(a);
        REQUIRE(a == expect);
    }
}

TEST_CASE("coefficient order sorts by level sum, ties by index") {
    const auto& order = cd::coefficient_order();
    const int level[4] = {0, 1, 2, 2};
    auto key = [&](int p) { return level[p & 3] + level[(p >> 2) & 3] + level[p >> 4]; };
    CHECK(order[0] == 0);
    std::array<bool, 64> seen{};
    for (std::size_t i = 0; i < 64; ++i) {
        seen[order[i]] = true;
        if (i > 0) {
            const int a = key(order[i - 1]), b = key(order[i]);
            REQUIRE((a < b || (a == b && order[i - 1] < order[i])));
        }
    }
    for (bool s : seen) CHECK(s);
}

TEST_CASE("fixed payload sizes") {
    const auto codec = Codec::fixed_rate(Rate(32));
    std::vector<double> one_cell(64, 1.5);
    CHECK(codec.encode(one_cell, {4, 4, 4}).bit_length() == 2048);

    const auto c24 = Codec::fixed_rate(Rate(24));
    const auto region = sinusoid({8, 8, 8}, 1, 1, 1);
    const auto p = c24.encode(region, {8, 8, 8});
    CHECK(p.bit_length() == 12288);
    CHECK(p.info.cell_grid() == std::array<std::size_t, 3>{2, 2, 2});

    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::size_t> ext(1, 13);
    for (int t = 0; t < 200; ++t) {
        const Extents3 e{ext(rng), ext(rng), ext(rng)};
        const auto values = sinusoid(e, 2, 1, 3);
        for (int bits : {8, 16, 24, 32, 40, 48}) {
            const auto payload = Codec::fixed_rate(Rate(bits)).encode(values, e);
            const std::size_t n = e.count();
            REQUIRE(payload.bit_length() == (n + 63) / 64 * 64 * static_cast<std::size_t>(bits));
            REQUIRE(decode(payload).size() == n);
        }
    }
}

TEST_CASE("empty regions code to empty payloads") {
    for (const Codec& c : {Codec::passthrough(), Codec::fixed_rate(Rate(24))}) {
        const Extents3 e{10, 10, 0};
        const auto p = c.encode(std::vector<double>{}, e);
        CHECK(p.words.empty());
        CHECK(c.payload_words(e) == 0);
        CHECK(decode(p).empty());
    }
}

TEST_CASE("passthrough is bitwise identity") {
    std::mt19937_64 rng(29);
    std::vector<double> values(5 * 3 * 7);
    for (auto& v : values) {
        double d;
        do {
            const std::uint64_t bits = rng();
            std::memcpy(&d, &bits, sizeof d);
        } while (!std::isfinite(d));
        v = d;
    }
    values[0] = -0.0;
    values[1] = std::numeric_limits<double>::denorm_min();
    const auto payload = Codec::passthrough().encode(values, {5, 3, 7});
    const auto back = decode(payload);
    CHECK(std::memcmp(back.data(), values.data(), values.size() * sizeof(double)) == 0);
}

TEST_CASE("non-finite input is rejected") {
    std::vector<double> values(64, 1.0);
    values[17] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Codec::fixed_rate(Rate(16)).encode(values, {4, 4, 4}), Error);
    values[17] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(Codec::passthrough().encode(values, {4, 4, 4}), Error);
    CHECK_THROWS_AS(Codec::passthrough().encode(values, {0, 4, 4}), Error);
}

TEST_CASE("corrupt payload length is rejected") {
    const auto values = sinusoid({4, 4, 8}, 1, 1, 1);
    auto payload = Codec::fixed_rate(Rate(16)).encode(values, {4, 4, 8});
    payload.words.pop_back();
    CHECK_THROWS_AS(decode(payload), Error);
    auto bytes = payload_to_bytes(Codec::fixed_rate(Rate(16)).encode(values, {4, 4, 8}));
    bytes.pop_back();
    CHECK_THROWS_AS(payload_from_bytes(bytes, Codec::fixed_rate(Rate(16)), {4, 4, 8}), Error);
}

TEST_CASE("byte serialization round trip is little endian") {
    const auto values = sinusoid({6, 5, 4}, 1, 2, 1);
    const auto codec = Codec::fixed_rate(Rate(20));
    const auto payload = codec.encode(values, {6, 5, 4});
    const auto bytes = payload_to_bytes(payload);
    CHECK(bytes.size() * 8 == payload.bit_length());
    CHECK(bytes[0] == (payload.words[0] & 0xff));
    // Exponent field of the first block sits in the low 16 bits.
    CHECK((bytes[0] | (bytes[1] << 8)) == (payload.words[0] & 0xffff));
    const auto back = payload_from_bytes(bytes, codec, {6, 5, 4});
    CHECK(back.words == payload.words);
    CHECK(back.info == payload.info);
}

TEST_CASE("zero and constant cells are exact") {
    std::vector<double> zeros(64, 0.0);
    CHECK(decode(Codec::fixed_rate(Rate(8)).encode(zeros, {4, 4, 4})) == zeros);

    std::mt19937_64 rng(31);
    std::vector<double> constants = {1.0, -1.0, 1500.0, 3.14159, -2.5e-300, 7.7e+300,
                                     std::numeric_limits<double>::denorm_min(),
                                     std::numeric_limits<double>::max()};
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-1000, 1000);
    for (int t = 0; t < 200; ++t) constants.push_back(std::ldexp(mant(rng), ex(rng)));

    for (double c : constants) {
        if (c == 0.0) continue;
        const std::vector<double> cell(64, c);
        for (int bits = 24; bits <= 64; bits += 8) {
            const auto back = decode(Codec::fixed_rate(Rate(bits)).encode(cell, {4, 4, 4}));
            for (double v : back) REQUIRE(v == c);
        }
    }
}

TEST_CASE("fidelity improves with rate on smooth fields") {
    for (std::size_t n : {16u, 32u}) {
        const Extents3 e{n, n, n};
        const auto field = sinusoid(e, 1, 1, 1);
        double previous = std::numeric_limits<double>::infinity();
        for (int bits : {8, 16, 24, 32, 40, 48}) {
            const double err = max_abs_error(field, decode(Codec::fixed_rate(Rate(bits)).encode(field, e)));
            CAPTURE(n);
            CAPTURE(bits);
            CHECK(err <= previous);
            CHECK(std::isfinite(err));
            previous = err;
        }
        CHECK(previous < 1e-12);
    }
}

TEST_CASE("encoding is deterministic and cells are independent") {
    const Extents3 e{8, 4, 4};
    auto field = sinusoid(e, 3, 2, 1);
    const auto codec = Codec::fixed_rate(Rate(12));
    const auto a = codec.encode(field, e);
    CHECK(codec.encode(field, e).words == a.words);
    const auto before = decode(a);

    // Perturb only the second cell (x in [4, 8)).
    for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t y = 0; y < 4; ++y) field[(z * 4 + y) * 8 + 5] *= -7.0;
    const auto after = decode(codec.encode(field, e));
    for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t y = 0; y < 4; ++y)
            for (std::size_t x = 0; x < 4; ++x) {
                const std::size_t i = (z * 4 + y) * 8 + x;
                REQUIRE(std::bit_cast<std::uint64_t>(after[i]) == std::bit_cast<std::uint64_t>(before[i]));
            }
}

TEST_CASE("decoding arbitrary payload bits is total") {
    std::mt19937_64 rng(37);
    for (int bits : {8, 24, 64}) {
        const auto codec = Codec::fixed_rate(Rate(bits));
        EncodedPayload p;
        p.info = codec.layout({7, 5, 3});
        p.words.resize(p.info.word_count());
        for (int t = 0; t < 200; ++t) {
            for (auto& w : p.words) w = rng();
            const auto out = decode(p);
            for (double v : out) REQUIRE(std::isfinite(v));
        }
    }
}
