#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stencilstream {

// Bits spent per double value by the fixed-rate codec, in [8, 64].
class Rate {
  public:
    static constexpr int min_bits = 8;
    static constexpr int max_bits = 64;

    explicit Rate(int bits_per_value);

    int bits() const { return bits_; }
    // Exact payload size for n values: ceil(n / 64) * 64 * bits.
    std::size_t payload_bits(std::size_t n) const;

    bool operator==(const Rate&) const = default;

  private:
    int bits_;
};

struct Extents3 {
    std::size_t nx = 0, ny = 0, nz = 0;

    std::size_t count() const { return nx * ny * nz; }
    bool operator==(const Extents3&) const = default;
};

enum class CodecKind { passthrough, fixed_rate };

// Everything needed to decode a payload except the words themselves.
struct PayloadInfo {
    CodecKind kind = CodecKind::passthrough;
    int rate_bits = 64;       // 64 for passthrough
    Extents3 extents;
    std::size_t blocks = 0;   // coded 64-value blocks (fixed-rate only)

    std::size_t bit_length() const;
    std::size_t word_count() const { return bit_length() / 64; }
    std::size_t byte_count() const { return bit_length() / 8; }
    // Nominal 4x4x4 cell grid covering the region.
    std::array<std::size_t, 3> cell_grid() const;

    bool operator==(const PayloadInfo&) const = default;
};

struct EncodedPayload {
    PayloadInfo info;
    std::vector<std::uint64_t> words;

    std::size_t bit_length() const { return words.size() * 64; }
};

class Codec {
  public:
    static Codec passthrough() { return Codec(CodecKind::passthrough, 64); }
    static Codec fixed_rate(Rate rate) { return Codec(CodecKind::fixed_rate, rate.bits()); }

    CodecKind kind() const { return kind_; }
    bool lossless() const { return kind_ == CodecKind::passthrough; }
    std::optional<Rate> rate() const;
    std::string name() const;

    PayloadInfo layout(Extents3 extents) const;
    std::size_t payload_words(Extents3 extents) const { return layout(extents).word_count(); }

    // Encodes values (x fastest, z slowest) into out, which must hold exactly
    // payload_words(extents) words. Rejects non-finite input.
    PayloadInfo encode_into(std::span<const double> values, Extents3 extents,
                            std::span<std::uint64_t> out) const;
    EncodedPayload encode(std::span<const double> values, Extents3 extents) const;

    bool operator==(const Codec&) const = default;

  private:
    Codec(CodecKind kind, int bits) : kind_(kind), bits_(bits) {}

    CodecKind kind_;
    int bits_;
};

void decode_into(const PayloadInfo& info, std::span<const std::uint64_t> words,
                 std::span<double> out);
std::vector<double> decode(const EncodedPayload& payload);

// Portable little-endian byte stream of the payload bits (see docs/payload_format.md).
std::vector<std::uint8_t> payload_to_bytes(const EncodedPayload& payload);
EncodedPayload payload_from_bytes(std::span<const std::uint8_t> bytes, const Codec& codec,
                                  Extents3 extents);

// Building blocks of the fixed-rate codec, exposed for testing.
namespace codec_detail {

constexpr int block_values = 64;
constexpr int exponent_bits = 16;
constexpr std::uint16_t zero_block_flag = 0xffff;
constexpr int exponent_bias = 1074;
// Fraction bits kept below the leading one of the block maximum.
constexpr int fraction_bits = 52;
// Lifting inputs must stay below 2^lift_input_bits (64-bit word, 2 guard bits, sign).
constexpr int lift_input_bits = 61;

// Base -2 mapping at the given word width (1..64).
std::uint64_t negabinary_map(std::int64_t q, int width = 64);
std::int64_t negabinary_unmap(std::uint64_t u, int width = 64);

// Two-level S-transform: outputs (low-pass, level-1 detail, level-2 details).
std::array<std::int64_t, 4> lift_forward(const std::array<std::int64_t, 4>& v);
std::array<std::int64_t, 4> lift_inverse(const std::array<std::int64_t, 4>& v);

// Coding order: positions x + 4y + 16z sorted by summed transform level, then index.
const std::array<std::uint8_t, 64>& coefficient_order();

// In-place 64x64 bit-matrix transpose: after the call, bit i of a[k] is the
// former bit k of a[i].
void transpose_bits(std::array<std::uint64_t, 64>& a);

void encode_block(std::span<const double, 64> values, int rate_bits,
                  std::span<std::uint64_t> out);
void decode_block(std::span<const std::uint64_t> in, int rate_bits,
                  std::span<double, 64> values);

} // namespace codec_detail

} // namespace stencilstream
