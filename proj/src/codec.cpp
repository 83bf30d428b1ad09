#include "stencilstream/codec.hpp"

#include "stencilstream/error.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

namespace stencilstream {

namespace codec_detail {

namespace {

constexpr std::uint64_t negabinary_mask = 0xaaaaaaaaaaaaaaaaULL;

std::uint64_t width_mask(int width) {
    return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

// Wrapping arithmetic: decoding must be total even for adversarial payloads.
std::int64_t wadd(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wsub(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}

void lift_forward_strided(std::int64_t* p, std::size_t s) {
    const std::int64_t a0 = p[0], a1 = p[s], a2 = p[2 * s], a3 = p[3 * s];
    const std::int64_t s0 = (a0 + a1) >> 1, d0 = a0 - a1;
    const std::int64_t s1 = (a2 + a3) >> 1, d1 = a2 - a3;
    p[0] = (s0 + s1) >> 1;
    p[s] = s0 - s1;
    p[2 * s] = d0;
    p[3 * s] = d1;
}

// b = s - floor(d/2), a = b + d inverts s = floor((a+b)/2), d = a - b.
void lift_inverse_strided(std::int64_t* p, std::size_t s) {
    const std::int64_t ss = p[0], sd = p[s], d0 = p[2 * s], d1 = p[3 * s];
    const std::int64_t s1 = wsub(ss, sd >> 1);
    const std::int64_t s0 = wadd(s1, sd);
    const std::int64_t a1 = wsub(s0, d0 >> 1);
    const std::int64_t a3 = wsub(s1, d1 >> 1);
    p[0] = wadd(a1, d0);
    p[s] = a1;
    p[2 * s] = wadd(a3, d1);
    p[3 * s] = a3;
}

void forward_transform(std::array<std::int64_t, 64>& q) {
    for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t y = 0; y < 4; ++y) lift_forward_strided(&q[4 * y + 16 * z], 1);
    for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t x = 0; x < 4; ++x) lift_forward_strided(&q[x + 16 * z], 4);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) lift_forward_strided(&q[x + 4 * y], 16);
}

void inverse_transform(std::array<std::int64_t, 64>& q) {
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) lift_inverse_strided(&q[x + 4 * y], 16);
    for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t x = 0; x < 4; ++x) lift_inverse_strided(&q[x + 16 * z], 4);
    for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t y = 0; y < 4; ++y) lift_inverse_strided(&q[4 * y + 16 * z], 1);
}

// LSB-first bit stream over a fixed span of words.
class BitWriter {
  public:
    explicit BitWriter(std::span<std::uint64_t> words) : words_(words) {}

    void write_bits(std::uint64_t value, unsigned n) {
        if (n == 0) return;
        if (n < 64) value &= (std::uint64_t{1} << n) - 1;
        const std::size_t w = pos_ >> 6;
        const unsigned off = pos_ & 63;
        words_[w] |= value << off;
        if (off + n > 64) words_[w + 1] |= value >> (64 - off);
        pos_ += n;
    }
    void write_bit(bool bit) {
        if (bit) words_[pos_ >> 6] |= std::uint64_t{1} << (pos_ & 63);
        ++pos_;
    }

  private:
    std::span<std::uint64_t> words_;
    std::size_t pos_ = 0;
};

class BitReader {
  public:
    explicit BitReader(std::span<const std::uint64_t> words) : words_(words) {}

    std::uint64_t read_bits(unsigned n) {
        if (n == 0) return 0;
        const std::size_t w = pos_ >> 6;
        const unsigned off = pos_ & 63;
        std::uint64_t value = words_[w] >> off;
        if (off + n > 64) value |= words_[w + 1] << (64 - off);
        if (n < 64) value &= (std::uint64_t{1} << n) - 1;
        pos_ += n;
        return value;
    }
    bool read_bit() {
        const bool bit = (words_[pos_ >> 6] >> (pos_ & 63)) & 1u;
        ++pos_;
        return bit;
    }

  private:
    std::span<const std::uint64_t> words_;
    std::size_t pos_ = 0;
};

std::array<std::uint8_t, 64> make_order() {
    constexpr int level[4] = {0, 1, 2, 2};
    std::array<std::uint8_t, 64> order{};
    std::iota(order.begin(), order.end(), std::uint8_t{0});
    auto key = [&](std::uint8_t p) { return level[p & 3] + level[(p >> 2) & 3] + level[p >> 4]; };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint8_t a, std::uint8_t b) { return key(a) < key(b); });
    return order;
}

} // namespace

std::uint64_t negabinary_map(std::int64_t q, int width) {
    const std::uint64_t m = negabinary_mask & width_mask(width);
    return ((static_cast<std::uint64_t>(q) + m) ^ m) & width_mask(width);
}

std::int64_t negabinary_unmap(std::uint64_t u, int width) {
    const std::uint64_t mask = width_mask(width);
    const std::uint64_t m = negabinary_mask & mask;
    // Exact in 64-bit two's complement for every width-bit digit string.
    return static_cast<std::int64_t>(((u & mask) ^ m) - m);
}

std::array<std::int64_t, 4> lift_forward(const std::array<std::int64_t, 4>& v) {
    constexpr std::int64_t limit = std::int64_t{1} << lift_input_bits;
    for (auto x : v) {
        if (x >= limit || x <= -limit) {
            fail(ErrorKind::codec, "lifting input " + std::to_string(x) + " exceeds guard bits");
        }
    }
    auto out = v;
    lift_forward_strided(out.data(), 1);
    return out;
}

std::array<std::int64_t, 4> lift_inverse(const std::array<std::int64_t, 4>& v) {
    auto out = v;
    lift_inverse_strided(out.data(), 1);
    return out;
}

const std::array<std::uint8_t, 64>& coefficient_order() {
    static const auto order = make_order();
    return order;
}

void transpose_bits(std::array<std::uint64_t, 64>& a) {
    // Swap the off-diagonal j x j blocks of every 2j x 2j tile, halving j.
    constexpr std::uint64_t masks[] = {0x00000000ffffffffULL, 0x0000ffff0000ffffULL,
                                       0x00ff00ff00ff00ffULL, 0x0f0f0f0f0f0f0f0fULL,
                                       0x3333333333333333ULL, 0x5555555555555555ULL};
    unsigned j = 32;
    for (std::uint64_t m : masks) {
        for (unsigned k = 0; k < 64; k = ((k | j) + 1) & ~j) {
            const std::uint64_t t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k + j] ^= t;
            a[k] ^= t << j;
        }
        j >>= 1;
    }
}

void encode_block(std::span<const double, 64> values, int rate_bits,
                  std::span<std::uint64_t> out) {
    std::fill(out.begin(), out.end(), 0);
    BitWriter writer(out);

    double max_abs = 0.0;
    for (double v : values) max_abs = std::max(max_abs, std::fabs(v));
    if (max_abs == 0.0) {
        writer.write_bits(zero_block_flag, exponent_bits);
        return;
    }

    // Block floating point: the maximum keeps all 53 significant bits.
    const int emax = std::ilogb(max_abs);
    writer.write_bits(static_cast<std::uint64_t>(emax + exponent_bias), exponent_bits);
    std::array<std::int64_t, 64> q{};
    for (std::size_t i = 0; i < 64; ++i) {
        q[i] = static_cast<std::int64_t>(std::llrint(std::ldexp(values[i], fraction_bits - emax)));
    }
    forward_transform(q);

    const auto& order = coefficient_order();
    std::array<std::uint64_t, 64> planes{};
    for (std::size_t i = 0; i < 64; ++i) planes[i] = negabinary_map(q[order[i]]);
    transpose_bits(planes);

    // Embedded bit-plane coding, most significant plane first. Bits of
    // coefficients already known to be significant are sent verbatim; the rest
    // of the plane is sent as group tests plus unary runs to the next one-bit.
    unsigned budget = static_cast<unsigned>(64 * rate_bits - exponent_bits);
    unsigned n = 0;
    for (int k = 63; k >= 0 && budget > 0; --k) {
        std::uint64_t x = planes[static_cast<std::size_t>(k)];
        const unsigned m = std::min(n, budget);
        budget -= m;
        writer.write_bits(x, m);
        x = m < 64 ? x >> m : 0;
        while (n < 64 && budget > 0) {
            --budget;
            const bool any = x != 0;
            writer.write_bit(any);
            if (!any) break;
            while (n < 63 && budget > 0) {
                --budget;
                const bool one = x & 1u;
                writer.write_bit(one);
                if (one) break;
                x >>= 1;
                ++n;
            }
            x >>= 1;
            ++n;
        }
    }
}

void decode_block(std::span<const std::uint64_t> in, int rate_bits, std::span<double, 64> values) {
    BitReader reader(in);
    const auto field = static_cast<std::uint16_t>(reader.read_bits(exponent_bits));
    if (field == zero_block_flag) {
        std::fill(values.begin(), values.end(), 0.0);
        return;
    }
    const int emax = static_cast<int>(field) - exponent_bias;

    std::array<std::uint64_t, 64> planes{};
    unsigned budget = static_cast<unsigned>(64 * rate_bits - exponent_bits);
    unsigned n = 0;
    for (int k = 63; k >= 0 && budget > 0; --k) {
        const unsigned m = std::min(n, budget);
        budget -= m;
        std::uint64_t x = reader.read_bits(m);
        while (n < 64 && budget > 0) {
            --budget;
            if (!reader.read_bit()) break;
            while (n < 63 && budget > 0) {
                --budget;
                if (reader.read_bit()) break;
                ++n;
            }
            x |= std::uint64_t{1} << n;
            ++n;
        }
        planes[static_cast<std::size_t>(k)] = x;
    }
    transpose_bits(planes);

    const auto& order = coefficient_order();
    std::array<std::int64_t, 64> q{};
    for (std::size_t i = 0; i < 64; ++i) q[order[i]] = negabinary_unmap(planes[i]);
    inverse_transform(q);

    for (std::size_t i = 0; i < 64; ++i) {
        double v = std::ldexp(static_cast<double>(q[i]), emax - fraction_bits);
        if (!std::isfinite(v)) v = std::copysign(DBL_MAX, v);
        values[i] = v;
    }
}

} // namespace codec_detail

namespace {

using codec_detail::block_values;

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

void check_extents(Extents3 e) {
    // Empty regions (a remainder of zero planes) code to an empty payload.
    if (e.nx == 0 || e.ny == 0 || e.nz == 0) return;
    if (e.nx > SIZE_MAX / e.ny || e.nx * e.ny > SIZE_MAX / e.nz ||
        e.count() > SIZE_MAX / (64 * sizeof(double))) {
        fail(ErrorKind::codec, "region larger than the addressable cell grid");
    }
}

// Full 4x4x4 cells come first in z-major cell order, each coded as one
// block. Values of partial cells follow, concatenated in the same cell order
// and chunked into 64-value blocks; the final chunk repeats its last value.
class BlockLayout {
  public:
    explicit BlockLayout(Extents3 e) : e_(e), fx_(e.nx / 4), fy_(e.ny / 4), fz_(e.nz / 4) {
        const std::size_t cx = ceil_div(e.nx, 4), cy = ceil_div(e.ny, 4), cz = ceil_div(e.nz, 4);
        if (fx_ * fy_ * fz_ == cx * cy * cz) return;
        leftover_.reserve(e.count() - 64 * full_cells());
        for (std::size_t kz = 0; kz < cz; ++kz)
            for (std::size_t ky = 0; ky < cy; ++ky)
                for (std::size_t kx = 0; kx < cx; ++kx) {
                    if (kx < fx_ && ky < fy_ && kz < fz_) continue;
                    for (std::size_t z = 4 * kz; z < std::min(4 * kz + 4, e.nz); ++z)
                        for (std::size_t y = 4 * ky; y < std::min(4 * ky + 4, e.ny); ++y)
                            for (std::size_t x = 4 * kx; x < std::min(4 * kx + 4, e.nx); ++x)
                                leftover_.push_back(index(x, y, z));
                }
    }

    std::size_t full_cells() const { return fx_ * fy_ * fz_; }
    std::size_t blocks() const { return full_cells() + ceil_div(leftover_.size(), 64); }

    template <typename F>
    void for_each_block(F&& f) const {
        std::array<std::size_t, 64> idx{};
        std::size_t b = 0;
        for (std::size_t kz = 0; kz < fz_; ++kz)
            for (std::size_t ky = 0; ky < fy_; ++ky)
                for (std::size_t kx = 0; kx < fx_; ++kx, ++b) {
                    const std::size_t base = index(4 * kx, 4 * ky, 4 * kz);
                    for (std::size_t z = 0; z < 4; ++z)
                        for (std::size_t y = 0; y < 4; ++y)
                            for (std::size_t x = 0; x < 4; ++x)
                                idx[x + 4 * y + 16 * z] = base + (z * e_.ny + y) * e_.nx + x;
                    f(b, idx, std::size_t{64});
                }
        for (std::size_t start = 0; start < leftover_.size(); start += 64, ++b) {
            const std::size_t valid = std::min<std::size_t>(64, leftover_.size() - start);
            for (std::size_t i = 0; i < 64; ++i) {
                idx[i] = leftover_[start + std::min(i, valid - 1)];
            }
            f(b, idx, valid);
        }
    }

  private:
    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
        return (z * e_.ny + y) * e_.nx + x;
    }

    Extents3 e_;
    std::size_t fx_, fy_, fz_;
    std::vector<std::size_t> leftover_;
};

} // namespace

Rate::Rate(int bits_per_value) : bits_(bits_per_value) {
    if (bits_per_value < min_bits || bits_per_value > max_bits) {
        fail(ErrorKind::config, "rate " + std::to_string(bits_per_value) +
                                    " outside [8, 64] bits per value");
    }
}

std::size_t Rate::payload_bits(std::size_t n) const {
    return ceil_div(n, block_values) * block_values * static_cast<std::size_t>(bits_);
}

std::size_t PayloadInfo::bit_length() const {
    if (kind == CodecKind::passthrough) return extents.count() * 64;
    return blocks * block_values * static_cast<std::size_t>(rate_bits);
}

std::array<std::size_t, 3> PayloadInfo::cell_grid() const {
    return {ceil_div(extents.nx, 4), ceil_div(extents.ny, 4), ceil_div(extents.nz, 4)};
}

std::optional<Rate> Codec::rate() const {
    if (kind_ == CodecKind::passthrough) return std::nullopt;
    return Rate(bits_);
}

std::string Codec::name() const {
    return kind_ == CodecKind::passthrough ? "passthrough" : "fixed-rate/" + std::to_string(bits_);
}

PayloadInfo Codec::layout(Extents3 extents) const {
    check_extents(extents);
    PayloadInfo info{kind_, bits_, extents, 0};
    if (kind_ == CodecKind::fixed_rate) info.blocks = ceil_div(extents.count(), block_values);
    return info;
}

PayloadInfo Codec::encode_into(std::span<const double> values, Extents3 extents,
                               std::span<std::uint64_t> out) const {
    const PayloadInfo info = layout(extents);
    if (values.size() != extents.count()) {
        fail(ErrorKind::codec, "value count does not match region extents");
    }
    if (out.size() != info.word_count()) {
        fail(ErrorKind::codec, "output buffer does not match payload size");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            fail(ErrorKind::codec, "non-finite value at region index " + std::to_string(i));
        }
    }

    if (kind_ == CodecKind::passthrough) {
        std::memcpy(out.data(), values.data(), values.size_bytes());
        return info;
    }

    const BlockLayout blocks(extents);
    const auto words = static_cast<std::size_t>(bits_);
    std::array<double, 64> cell{};
    blocks.for_each_block([&](std::size_t b, const std::array<std::size_t, 64>& idx, std::size_t) {
        for (std::size_t i = 0; i < 64; ++i) cell[i] = values[idx[i]];
        codec_detail::encode_block(cell, bits_, out.subspan(b * words, words));
    });
    return info;
}

EncodedPayload Codec::encode(std::span<const double> values, Extents3 extents) const {
    EncodedPayload payload;
    payload.words.resize(layout(extents).word_count());
    payload.info = encode_into(values, extents, payload.words);
    return payload;
}

void decode_into(const PayloadInfo& info, std::span<const std::uint64_t> words,
                 std::span<double> out) {
    check_extents(info.extents);
    if (info.kind == CodecKind::fixed_rate) {
        if (info.rate_bits < Rate::min_bits || info.rate_bits > Rate::max_bits ||
            info.blocks != ceil_div(info.extents.count(), block_values)) {
            fail(ErrorKind::codec, "corrupt payload header");
        }
    }
    if (words.size() != info.word_count()) {
        fail(ErrorKind::codec, "payload length " + std::to_string(words.size() * 64) +
                                   " bits, expected " + std::to_string(info.bit_length()));
    }
    if (out.size() != info.extents.count()) {
        fail(ErrorKind::codec, "output buffer does not match region extents");
    }

    if (info.kind == CodecKind::passthrough) {
        std::memcpy(out.data(), words.data(), out.size_bytes());
        return;
    }

    const BlockLayout blocks(info.extents);
    const auto n = static_cast<std::size_t>(info.rate_bits);
    std::array<double, 64> cell{};
    blocks.for_each_block(
        [&](std::size_t b, const std::array<std::size_t, 64>& idx, std::size_t valid) {
            codec_detail::decode_block(words.subspan(b * n, n), info.rate_bits, cell);
            for (std::size_t i = 0; i < valid; ++i) out[idx[i]] = cell[i];
        });
}

std::vector<double> decode(const EncodedPayload& payload) {
    std::vector<double> out(payload.info.extents.count());
    decode_into(payload.info, payload.words, out);
    return out;
}

std::vector<std::uint8_t> payload_to_bytes(const EncodedPayload& payload) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(payload.words.size() * 8);
    for (std::uint64_t w : payload.words) {
        for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
    }
    return bytes;
}

EncodedPayload payload_from_bytes(std::span<const std::uint8_t> bytes, const Codec& codec,
                                  Extents3 extents) {
    EncodedPayload payload;
    payload.info = codec.layout(extents);
    if (bytes.size() != payload.info.byte_count()) {
        fail(ErrorKind::codec, "truncated or oversized payload: " + std::to_string(bytes.size()) +
                                   " bytes, expected " + std::to_string(payload.info.byte_count()));
    }
    payload.words.resize(payload.info.word_count());
    for (std::size_t w = 0; w < payload.words.size(); ++w) {
        std::uint64_t v = 0;
        for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[8 * w + static_cast<std::size_t>(b)];
        payload.words[w] = v;
    }
    return payload;
}

} // namespace stencilstream
