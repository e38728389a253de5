#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <burstlab/codec.hpp>

#include <random>

using namespace burstlab;

namespace {

std::string bits_of(const BitStream& s) {
    std::string out;
    for (std::uint64_t k = 0; k < s.size_bits(); ++k) out.push_back(s.read(k, 1) ? '1' : '0');
    return out;
}

std::vector<Word> roundtrip(const std::vector<Word>& words, int n) {
    return decompress_mars(compress_mars(words, n), 0, n, words.size());
}

}  // namespace

TEST_CASE("bit stream basics") {
    BitStream s;
    s.append(0b101, 3);
    s.append(0xABCD, 16);
    CHECK(s.size_bits() == 19);
    CHECK(s.read(0, 3) == 0b101);
    CHECK(s.read(3, 16) == 0xABCD);
    CHECK_THROWS_AS(s.read(10, 16), TruncatedStream);
    s.pad_to(32);
    CHECK(s.size_bits() == 32);
    CHECK(s.read(19, 13) == 0);
    CHECK(s.slice(3, 16).read(0, 16) == 0xABCD);
    const auto copy = BitStream::from_bytes(s.bytes(), s.size_bits());
    CHECK(copy == s);
    BitStream big;
    big.append(~0ULL, 64);
    big.append(0x5, 3);
    CHECK(big.read(0, 64) == ~0ULL);
    CHECK(big.read(1, 64) == ((~0ULL >> 1) | (1ULL << 63)));
}

TEST_CASE("header width") {
    CHECK(header_bits(4) == 3);
    CHECK(header_bits(8) == 4);
    CHECK(header_bits(18) == 5);
    CHECK(header_bits(32) == 6);
    CHECK(header_bits(64) == 7);
}

TEST_CASE("token examples") {
    const auto up = delta_token(5, 7, 8);
    CHECK(up.header == 2);
    CHECK_FALSE(up.negative);
    CHECK(up.payload_bits == 1);
    CHECK(up.payload == 0);
    CHECK(up.length_bits(8) == 6);

    const auto down = delta_token(7, 4, 8);
    CHECK(down.header == 2);
    CHECK(down.negative);
    CHECK(down.payload_bits == 1);
    CHECK(down.payload == 1);

    for (int n : {4, 8, 18, 64}) {
        const auto same = delta_token(9, 9, n);
        CHECK(same.header == 0);
        CHECK_FALSE(same.negative);
        CHECK(same.payload_bits == 0);
    }
}

TEST_CASE("compress examples") {
    const std::vector<Word> s = {5, 7, 4};
    const auto c = compress_mars(s, 8);
    CHECK(c.size_bits() == 20);
    CHECK(bits_of(c) == oracle::encode_bits(s, 8));
    CHECK(roundtrip(s, 8) == s);
    CHECK(roundtrip({42}, 8) == std::vector<Word>{42});
    CHECK(compress_mars(std::vector<Word>{42}, 8).size_bits() == 8);
}

TEST_CASE("constant streams") {
    for (int n : {4, 12, 18, 32, 64}) {
        for (std::size_t k : {1u, 2u, 10u, 100u}) {
            const std::vector<Word> s(k, low_mask(n) / 3);
            CHECK(compress_mars(s, n).size_bits() == n + (k - 1) * static_cast<std::uint64_t>(header_bits(n) + 1));
        }
    }
}

TEST_CASE("alternating stream expands") {
    for (int n : {8, 12, 18, 32}) {
        std::vector<Word> s;
        for (int k = 0; k < 16; ++k) s.push_back(k % 2 ? (Word{1} << (n - 1)) - 1 : 0);
        const auto c = compress_mars(s, n);
        // Every token costs more than a raw word.
        CHECK(c.size_bits() > s.size() * static_cast<std::uint64_t>(n));
        for (std::size_t k = 1; k < s.size(); ++k) {
            const auto t = delta_token(s[k - 1], s[k], n);
            CHECK(t.length_bits(n) > n);
            CHECK(t.length_bits(n) == n + header_bits(n) - 1);
        }
        CHECK(roundtrip(s, n) == s);
    }
}

TEST_CASE("exhaustive N=4 streams up to length 3") {
    const int n = 4;
    std::size_t cases = 0;
    for (int len = 1; len <= 3; ++len) {
        const int total = 1 << (4 * len);
        for (int code = 0; code < total; ++code) {
            std::vector<Word> s;
            for (int k = 0; k < len; ++k) s.push_back(static_cast<Word>((code >> (4 * k)) & 0xF));
            const auto c = compress_mars(s, n);
            CHECK(bits_of(c) == oracle::encode_bits(s, n));
            CHECK(c.size_bits() == compressed_size_bits(s, n));
            REQUIRE(decompress_mars(c, 0, n, s.size()) == s);
            ++cases;
        }
    }
    CHECK(cases == 16 + 256 + 4096);
}

TEST_CASE("random streams against the bit-string encoder") {
    std::mt19937_64 rng(99);
    for (int n : {12, 17, 18, 24, 28, 32, 64}) {
        for (int trial = 0; trial < 2000; ++trial) {
            const auto s = oracle::random_stream(rng, n, 40);
            const auto c = compress_mars(s, n);
            CHECK(c.size_bits() == compressed_size_bits(s, n));
            CHECK(c.size_bits() <= s.size() * static_cast<std::uint64_t>(n + header_bits(n) + 1));
            if (trial < 200) CHECK(bits_of(c) == oracle::encode_bits(s, n));
            CHECK(decompress_mars(c, 0, n, s.size()) == s);
        }
    }
}

TEST_CASE("decoder errors") {
    BitStream t;
    t.append(3, 4);
    t.append(7, 3);  // header 7 > N=4
    t.append(0, 1);
    CHECK_THROWS_AS(decompress_mars(t, 0, 4, 2), CorruptBlock);
    const auto c = compress_mars(std::vector<Word>{1, 100, 3}, 8);
    CHECK_THROWS_AS(decompress_mars(c, 0, 8, 4), TruncatedStream);
    CHECK_THROWS_AS(decompress_mars(c.slice(0, c.size_bits() - 1), 0, 8, 3), TruncatedStream);
}

TEST_CASE("pack_block markers") {
    BitStream a, b;
    a.append(0xFFFFF, 20);
    b.append(0x1ABC, 13);
    const auto block = pack_block({a, b}, {1, 1}, 8, 32);
    REQUIRE(block.mars_count() == 2);
    CHECK(block.markers[0] == Marker{0, 0});
    CHECK(block.markers[1] == Marker{0, 20});
    CHECK(block.stream.size_bits() == 64);
    CHECK(block.content_bits == 33);

    const auto one = pack_block({a}, {1}, 8, 64);
    CHECK(one.markers.front() == Marker{0, 0});
    CHECK(marker_at(100, 64) == Marker{1, 36});
    CHECK(marker_at(100, 64).bit_position(64) == 100);
}

TEST_CASE("seek range arithmetic") {
    CompressedBlock b;
    b.bus_width = 64;
    b.word_bits = 18;
    b.markers = {Marker{0, 0}, Marker{3, 17}, Marker{5, 2}};
    b.word_counts = {1, 1, 1};
    b.content_bits = 5 * 64 + 40;
    const auto r = seek_mars(b, 1);
    CHECK(r.first_word == 3);
    CHECK(r.end_word == 6);
    CHECK(r.start_bit == 17);
    const auto first = seek_mars(b, 0);
    CHECK(first.first_word == 0);
    CHECK(first.start_bit == 0);
    CHECK_THROWS_AS(seek_mars(b, 3), std::out_of_range);
}

TEST_CASE("seek equals sequential decompression on random blocks") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = std::vector<int>{12, 17, 18, 24, 32, 64}[rng() % 6];
        const int bus = std::vector<int>{32, 64, 128}[rng() % 3];
        const std::size_t count = 1 + rng() % 10;
        std::vector<BitStream> streams;
        std::vector<std::uint32_t> counts;
        std::vector<std::vector<Word>> words;
        std::uint64_t prefix = 0;
        for (std::size_t m = 0; m < count; ++m) {
            words.push_back(oracle::random_stream(rng, n, 30));
            streams.push_back(compress_mars(words.back(), n));
            counts.push_back(static_cast<std::uint32_t>(words.back().size()));
        }
        const auto block = pack_block(streams, counts, n, bus);
        CHECK(block.stream.size_bits() % static_cast<std::uint64_t>(bus) == 0);
        std::vector<Word> all;
        for (std::size_t m = 0; m < count; ++m) {
            CHECK(block.markers[m].bit_position(bus) == prefix);
            prefix += streams[m].size_bits();
            const auto r = seek_mars(block, m);
            CHECK(r.end_word - r.first_word <= (block.end_bit(m) - block.markers[m].bit_position(bus)) / bus + 2);
            CHECK(decompress_block_mars(block, m) == words[m]);
            all.insert(all.end(), words[m].begin(), words[m].end());
        }
        CHECK(decompress_block(block) == all);
    }
}

TEST_CASE("block file round trip and corruption") {
    std::mt19937_64 rng(8);
    std::vector<BitStream> streams;
    std::vector<std::uint32_t> counts;
    for (int m = 0; m < 4; ++m) {
        const auto w = oracle::random_stream(rng, 18, 20);
        streams.push_back(compress_mars(w, 18));
        counts.push_back(static_cast<std::uint32_t>(w.size()));
    }
    const auto block = pack_block(streams, counts, 18, 64);
    const auto bytes = serialize_block(block);
    const auto back = deserialize_block(bytes);
    CHECK(back.markers == block.markers);
    CHECK(back.word_counts == block.word_counts);
    CHECK(back.word_bits == 18);
    CHECK(back.bus_width == 64);
    CHECK(decompress_block(back) == decompress_block(block));
    CHECK(serialize_block(back) == bytes);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(deserialize_block(bad), CorruptBlock);
    try {
        deserialize_block(bad);
    } catch (const CorruptBlock& e) {
        CHECK(std::string(e.what()).find("MARS1") != std::string::npos);
    }
    auto cut = bytes;
    cut.resize(12);
    CHECK_THROWS_AS(deserialize_block(cut), CorruptBlock);
    auto shuffled = bytes;
    // Marker of MARS 1 moved past the end of the payload.
    shuffled[5 + 1 + 1 + 4 + 10 + 4] = 0xFF;
    CHECK_THROWS_AS(deserialize_block(shuffled), CorruptBlock);
}
