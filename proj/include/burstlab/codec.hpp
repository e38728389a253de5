#pragma once
// Differential compression of N-bit word streams and packing of compressed
// MARS into one block with seek markers.
//
// Token per word after the first: header (N - L) on floor(1 + log2 N) bits,
// sign bit, then the low (header - 1) bits of the delta, where L counts the
// leading zeros (delta >= 0) or ones (delta < 0) of the N-bit delta.

#include <burstlab/numeric.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace burstlab {

/// Growable bit sequence. Bit k lives in byte k / 8 at bit position k % 8;
/// multi-bit fields are written least-significant bit first.
class BitStream {
public:
    BitStream() = default;

    void append(std::uint64_t value, int nbits);
    void append(const BitStream& other);
    /// Appends zero bits up to the next multiple of `multiple`.
    void pad_to(std::uint64_t multiple);

    /// Reads `nbits` (<= 64) starting at `pos`; throws TruncatedStream past the end.
    std::uint64_t read(std::uint64_t pos, int nbits) const;
    /// Copy of bits [pos, pos + nbits).
    BitStream slice(std::uint64_t pos, std::uint64_t nbits) const;

    std::uint64_t size_bits() const { return bits_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    static BitStream from_bytes(std::vector<std::uint8_t> bytes, std::uint64_t nbits);

    friend bool operator==(const BitStream& a, const BitStream& b) {
        return a.bits_ == b.bits_ && a.bytes_ == b.bytes_;
    }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t bits_ = 0;
};

/// Sequential reader over a BitStream.
class BitReader {
public:
    BitReader(const BitStream& s, std::uint64_t pos = 0) : stream_(&s), pos_(pos) {}
    std::uint64_t take(int nbits) {
        auto v = stream_->read(pos_, nbits);
        pos_ += static_cast<std::uint64_t>(nbits);
        return v;
    }
    std::uint64_t position() const { return pos_; }

private:
    const BitStream* stream_;
    std::uint64_t pos_;
};

/// floor(1 + log2(N)).
int header_bits(int word_bits);

struct DeltaToken {
    int header = 0;             // N - L, in [0, N]
    bool negative = false;
    std::uint64_t payload = 0;  // low (header - 1) bits of delta
    int payload_bits = 0;

    int length_bits(int word_bits) const { return header_bits(word_bits) + 1 + payload_bits; }
};

DeltaToken delta_token(Word prev, Word cur, int word_bits);

/// Closed-form length: N + sum over tokens of (floor(1+log2 N) + 1 + max(header - 1, 0)).
std::uint64_t compressed_size_bits(std::span<const Word> words, int word_bits);

/// First word raw, then one token per word. Stateless across calls.
BitStream compress_mars(std::span<const Word> words, int word_bits);
void compress_mars_into(BitStream& out, std::span<const Word> words, int word_bits);

/// Throws TruncatedStream or CorruptBlock (header > N).
std::vector<Word> decompress_mars(const BitStream& stream, std::uint64_t start_bit, int word_bits, std::size_t count);

struct Marker {
    std::uint64_t coarse = 0;  // bus words from block base
    std::uint32_t fine = 0;    // bit within that word

    std::uint64_t bit_position(int bus_width) const { return coarse * static_cast<std::uint64_t>(bus_width) + fine; }
    friend bool operator==(const Marker&, const Marker&) = default;
};

Marker marker_at(std::uint64_t bit, int bus_width);

struct CompressedBlock {
    BitStream stream;  // padded to a bus word at the very end
    std::vector<Marker> markers;
    std::vector<std::uint32_t> word_counts;
    std::uint64_t content_bits = 0;  // end of the last MARS, before the final pad
    int word_bits = 0;
    int bus_width = 64;

    std::size_t mars_count() const { return markers.size(); }
    /// Bit where MARS k ends (start of k + 1, or end of content).
    std::uint64_t end_bit(std::size_t k) const;
};

/// Concatenates streams without padding between them; pads once at the end.
CompressedBlock pack_block(const std::vector<BitStream>& mars_streams, const std::vector<std::uint32_t>& word_counts,
                           int word_bits, int bus_width);

struct SeekRange {
    std::uint64_t first_word = 0;  // aligned bus words [first_word, end_word)
    std::uint64_t end_word = 0;
    std::uint32_t start_bit = 0;   // offset of the MARS within the range
};

/// Minimal aligned range covering MARS k. Throws std::out_of_range.
SeekRange seek_mars(const CompressedBlock& block, std::size_t k);

/// Decompresses MARS k by fetching only its seek range.
std::vector<Word> decompress_block_mars(const CompressedBlock& block, std::size_t k);

/// Sequential decompression of every MARS, concatenated.
std::vector<Word> decompress_block(const CompressedBlock& block);

// ---- block file format -----------------------------------------------------
// "MARS1", u8 N, u8 log2(busWidth), u32 marsCount,
// per MARS {u32 wordCount, u32 coarse, u16 fine}, payload bytes. Little-endian.

std::vector<std::uint8_t> serialize_block(const CompressedBlock& block);
/// Throws CorruptBlock on bad magic, truncation or inconsistent markers.
CompressedBlock deserialize_block(std::span<const std::uint8_t> bytes);

}  // namespace burstlab
