#include <burstlab/codec.hpp>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace burstlab {

// ---- BitStream -------------------------------------------------------------

void BitStream::append(std::uint64_t value, int nbits) {
    if (nbits < 0 || nbits > 64) throw std::invalid_argument("BitStream::append: nbits out of range");
    if (nbits < 64) value &= (std::uint64_t{1} << nbits) - 1;
    int done = 0;
    while (done < nbits) {
        const std::uint64_t byte = bits_ / 8;
        const int offset = static_cast<int>(bits_ % 8);
        if (byte == bytes_.size()) bytes_.push_back(0);
        const int take = std::min(8 - offset, nbits - done);
        const auto chunk = static_cast<std::uint8_t>((value >> done) & ((1u << take) - 1));
        bytes_[byte] |= static_cast<std::uint8_t>(chunk << offset);
        done += take;
        bits_ += static_cast<std::uint64_t>(take);
    }
}

void BitStream::append(const BitStream& other) {
    std::uint64_t pos = 0;
    while (pos < other.bits_) {
        const int take = static_cast<int>(std::min<std::uint64_t>(64, other.bits_ - pos));
        append(other.read(pos, take), take);
        pos += static_cast<std::uint64_t>(take);
    }
}

void BitStream::pad_to(std::uint64_t multiple) {
    if (multiple == 0) return;
    const std::uint64_t target = (bits_ + multiple - 1) / multiple * multiple;
    bits_ = target;
    bytes_.resize((bits_ + 7) / 8, 0);
}

std::uint64_t BitStream::read(std::uint64_t pos, int nbits) const {
    if (nbits < 0 || nbits > 64) throw std::invalid_argument("BitStream::read: nbits out of range");
    if (pos + static_cast<std::uint64_t>(nbits) > bits_)
        throw TruncatedStream("read of " + std::to_string(nbits) + " bits at " + std::to_string(pos) +
                              " passes the end of a " + std::to_string(bits_) + "-bit stream");
    std::uint64_t value = 0;
    int done = 0;
    while (done < nbits) {
        const std::uint64_t at = pos + static_cast<std::uint64_t>(done);
        const int offset = static_cast<int>(at % 8);
        const int take = std::min(8 - offset, nbits - done);
        const std::uint64_t chunk = (bytes_[at / 8] >> offset) & ((1u << take) - 1);
        value |= chunk << done;
        done += take;
    }
    return value;
}

BitStream BitStream::slice(std::uint64_t pos, std::uint64_t nbits) const {
    BitStream out;
    std::uint64_t done = 0;
    while (done < nbits) {
        const int take = static_cast<int>(std::min<std::uint64_t>(64, nbits - done));
        out.append(read(pos + done, take), take);
        done += static_cast<std::uint64_t>(take);
    }
    return out;
}

BitStream BitStream::from_bytes(std::vector<std::uint8_t> bytes, std::uint64_t nbits) {
    if (nbits > bytes.size() * 8) throw TruncatedStream("bit length exceeds byte buffer");
    BitStream s;
    bytes.resize((nbits + 7) / 8);
    if (nbits % 8 && !bytes.empty()) bytes.back() &= static_cast<std::uint8_t>((1u << (nbits % 8)) - 1);
    s.bytes_ = std::move(bytes);
    s.bits_ = nbits;
    return s;
}

// ---- tokens ----------------------------------------------------------------

int header_bits(int word_bits) { return std::bit_width(static_cast<unsigned>(word_bits)); }

DeltaToken delta_token(Word prev, Word cur, int word_bits) {
    const Word mask = low_mask(word_bits);
    const Word delta = (cur - prev) & mask;
    const bool negative = (delta >> (word_bits - 1)) & 1;
    // Leading zeros of delta, or of ~delta for a negative delta, within N bits.
    const Word probe = negative ? (~delta & mask) : delta;
    const int significant = probe == 0 ? 0 : std::bit_width(probe);  // = N - L
    DeltaToken t;
    t.header = significant;
    t.negative = negative;
    t.payload_bits = std::max(significant - 1, 0);
    t.payload = delta & low_mask(t.payload_bits);
    return t;
}

std::uint64_t compressed_size_bits(std::span<const Word> words, int word_bits) {
    if (words.empty()) return 0;
    std::uint64_t bits = static_cast<std::uint64_t>(word_bits);
    const auto fixed = static_cast<std::uint64_t>(header_bits(word_bits) + 1);
    for (std::size_t i = 1; i < words.size(); ++i)
        bits += fixed + static_cast<std::uint64_t>(std::max(delta_token(words[i - 1], words[i], word_bits).header - 1, 0));
    return bits;
}

void compress_mars_into(BitStream& out, std::span<const Word> words, int word_bits) {
    if (words.empty()) throw std::invalid_argument("compress_mars: empty MARS");
    const int hb = header_bits(word_bits);
    out.append(words[0] & low_mask(word_bits), word_bits);
    for (std::size_t i = 1; i < words.size(); ++i) {
        const DeltaToken t = delta_token(words[i - 1], words[i], word_bits);
        out.append(static_cast<std::uint64_t>(t.header), hb);
        out.append(t.negative ? 1 : 0, 1);
        out.append(t.payload, t.payload_bits);
    }
}

BitStream compress_mars(std::span<const Word> words, int word_bits) {
    BitStream out;
    compress_mars_into(out, words, word_bits);
    return out;
}

std::vector<Word> decompress_mars(const BitStream& stream, std::uint64_t start_bit, int word_bits, std::size_t count) {
    std::vector<Word> out;
    if (count == 0) return out;
    out.reserve(count);
    const Word mask = low_mask(word_bits);
    const int hb = header_bits(word_bits);
    BitReader in(stream, start_bit);
    Word prev = in.take(word_bits);
    out.push_back(prev);
    while (out.size() < count) {
        const int header = static_cast<int>(in.take(hb));
        const bool negative = in.take(1) != 0;
        if (header > word_bits)
            throw CorruptBlock("token header " + std::to_string(header) + " exceeds word size " +
                               std::to_string(word_bits));
        const int payload_bits = std::max(header - 1, 0);
        const Word payload = in.take(payload_bits);
        Word delta;
        if (!negative)
            delta = header == 0 ? 0 : ((Word{1} << (header - 1)) | payload);
        else
            delta = header == 0 ? mask : ((header >= 64 ? Word{0} : (~Word{0}) << header) | payload);  // bit header-1 clear
        prev = (prev + delta) & mask;
        out.push_back(prev);
    }
    return out;
}

// ---- blocks ----------------------------------------------------------------

Marker marker_at(std::uint64_t bit, int bus_width) {
    const auto w = static_cast<std::uint64_t>(bus_width);
    return {bit / w, static_cast<std::uint32_t>(bit % w)};
}

std::uint64_t CompressedBlock::end_bit(std::size_t k) const {
    if (k + 1 < markers.size()) return markers[k + 1].bit_position(bus_width);
    return content_bits;
}

CompressedBlock pack_block(const std::vector<BitStream>& mars_streams, const std::vector<std::uint32_t>& word_counts,
                           int word_bits, int bus_width) {
    if (mars_streams.size() != word_counts.size()) throw std::invalid_argument("pack_block: size mismatch");
    CompressedBlock b;
    b.word_bits = word_bits;
    b.bus_width = bus_width;
    b.word_counts = word_counts;
    for (const BitStream& s : mars_streams) {
        b.markers.push_back(marker_at(b.stream.size_bits(), bus_width));
        b.stream.append(s);
    }
    b.content_bits = b.stream.size_bits();
    b.stream.pad_to(static_cast<std::uint64_t>(bus_width));
    return b;
}

SeekRange seek_mars(const CompressedBlock& block, std::size_t k) {
    if (k >= block.mars_count())
        throw std::out_of_range("MARS index " + std::to_string(k) + " out of range (" +
                                std::to_string(block.mars_count()) + " MARS)");
    const auto w = static_cast<std::uint64_t>(block.bus_width);
    SeekRange r;
    r.first_word = block.markers[k].coarse;
    r.start_bit = block.markers[k].fine;
    r.end_word = std::max(r.first_word + 1, (block.end_bit(k) + w - 1) / w);
    return r;
}

std::vector<Word> decompress_block_mars(const CompressedBlock& block, std::size_t k) {
    const SeekRange r = seek_mars(block, k);
    const auto w = static_cast<std::uint64_t>(block.bus_width);
    const BitStream fetched = block.stream.slice(r.first_word * w, (r.end_word - r.first_word) * w);
    return decompress_mars(fetched, r.start_bit, block.word_bits, block.word_counts[k]);
}

std::vector<Word> decompress_block(const CompressedBlock& block) {
    std::vector<Word> out;
    std::uint64_t pos = 0;
    for (std::size_t k = 0; k < block.mars_count(); ++k) {
        // Sequential: continue where the previous MARS ended, ignoring markers.
        auto words = decompress_mars(block.stream, pos, block.word_bits, block.word_counts[k]);
        pos += compressed_size_bits(words, block.word_bits);
        out.insert(out.end(), words.begin(), words.end());
    }
    return out;
}

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
    for (int k = 0; k < bytes; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t& pos, int bytes) {
    if (pos + static_cast<std::size_t>(bytes) > in.size()) throw CorruptBlock("block file truncated in header");
    std::uint64_t v = 0;
    for (int k = 0; k < bytes; ++k) v |= static_cast<std::uint64_t>(in[pos + k]) << (8 * k);
    pos += static_cast<std::size_t>(bytes);
    return v;
}

constexpr char kMagic[5] = {'M', 'A', 'R', 'S', '1'};

}  // namespace

std::vector<std::uint8_t> serialize_block(const CompressedBlock& block) {
    if (!std::has_single_bit(static_cast<unsigned>(block.bus_width)))
        throw std::invalid_argument("bus width must be a power of two");
    std::vector<std::uint8_t> out(kMagic, kMagic + 5);
    put_le(out, static_cast<std::uint64_t>(block.word_bits), 1);
    put_le(out, static_cast<std::uint64_t>(std::countr_zero(static_cast<unsigned>(block.bus_width))), 1);
    put_le(out, block.mars_count(), 4);
    for (std::size_t k = 0; k < block.mars_count(); ++k) {
        put_le(out, block.word_counts[k], 4);
        put_le(out, block.markers[k].coarse, 4);
        put_le(out, block.markers[k].fine, 2);
    }
    const auto& payload = block.stream.bytes();
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

CompressedBlock deserialize_block(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 5) != 0) throw CorruptBlock("bad magic, expected MARS1");
    std::size_t pos = 5;
    CompressedBlock b;
    b.word_bits = static_cast<int>(get_le(bytes, pos, 1));
    const auto log_bus = get_le(bytes, pos, 1);
    if (b.word_bits < 2 || b.word_bits > 64) throw CorruptBlock("word size out of range");
    if (log_bus < 3 || log_bus > 16) throw CorruptBlock("bus width out of range");
    b.bus_width = 1 << log_bus;
    const auto count = get_le(bytes, pos, 4);
    if (count > (bytes.size() - pos) / 10) throw CorruptBlock("MARS count exceeds file size");
    for (std::uint64_t k = 0; k < count; ++k) {
        b.word_counts.push_back(static_cast<std::uint32_t>(get_le(bytes, pos, 4)));
        Marker m;
        m.coarse = get_le(bytes, pos, 4);
        m.fine = static_cast<std::uint32_t>(get_le(bytes, pos, 2));
        if (m.fine >= static_cast<std::uint32_t>(b.bus_width)) throw CorruptBlock("fine marker exceeds bus width");
        b.markers.push_back(m);
    }
    std::vector<std::uint8_t> payload(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    const std::uint64_t nbits = payload.size() * 8;
    b.stream = BitStream::from_bytes(std::move(payload), nbits);
    b.content_bits = nbits;
    for (std::size_t k = 0; k < b.markers.size(); ++k) {
        const auto at = b.markers[k].bit_position(b.bus_width);
        if (at > nbits || (k > 0 && at < b.markers[k - 1].bit_position(b.bus_width)))
            throw CorruptBlock("markers out of order or past the payload");
    }
    if (!b.markers.empty() && b.markers.front().bit_position(b.bus_width) != 0)
        throw CorruptBlock("first marker must be at bit 0");
    return b;
}

}  // namespace burstlab
