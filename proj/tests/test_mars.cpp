#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include <burstlab/mars.hpp>

#include <map>
#include <random>
#include <set>

using namespace burstlab;

namespace {

bool mentions(const PartitionReport& r, const std::string& word) {
    for (const auto& p : r.problems)
        if (p.find(word) != std::string::npos) return true;
    return false;
}

// Library MARS keyed like the oracle map.
std::map<std::vector<TileCoord>, std::vector<Point>> as_groups(const std::vector<Mars>& outs) {
    std::map<std::vector<TileCoord>, std::vector<Point>> g;
    for (const auto& m : outs) g[m.signature.offsets] = m.points;
    return g;
}

}  // namespace

TEST_CASE("jacobi-1d 6x6 counts") {
    const auto p = make_preset("jacobi-1d");
    const auto io = analyze_tile(p.tiling, p.kernel);
    CHECK(io.outputs.size() == 4);
    CHECK(io.inputs.size() == 7);
    std::map<TileCoord, int> per_producer;
    for (const auto& in : io.inputs) ++per_producer[in.producer_offset];
    REQUIRE(per_producer.size() == 3);
    std::multiset<int> counts;
    for (const auto& [o, c] : per_producer) counts.insert(c);
    CHECK(counts == std::multiset<int>{1, 3, 3});
}

TEST_CASE("counts do not depend on tile size") {
    for (std::int64_t s : {6, 10, 64, 200}) {
        const auto k = make_preset("jacobi-1d").kernel;
        const auto io = analyze_tile(TilingScheme::diamond(s, s), k);
        CHECK(io.outputs.size() == 4);
        CHECK(io.inputs.size() == 7);
    }
}

TEST_CASE("consumer signatures") {
    const auto p = make_preset("jacobi-1d");
    // (2,0): t+i=2, t-i=2, all consumers (3,-1),(3,0),(3,1) stay in tile 0.
    CHECK_FALSE(consumer_signature(Point{2, 0}, p.tiling, p.kernel).has_value());
    bool two_offsets = false, has_ne = false;
    for (const auto& pt : enumerate_tile_points(p.tiling, TileCoord{0, 0})) {
        const auto sig = consumer_signature(pt, p.tiling, p.kernel);
        if (!sig) continue;
        CHECK(std::is_sorted(sig->offsets.begin(), sig->offsets.end()));
        for (const auto& o : sig->offsets) CHECK_FALSE(o.is_zero());
        two_offsets = two_offsets || sig->offsets.size() == 2;
        has_ne = has_ne || sig->contains(TileCoord{1, 0});
    }
    CHECK(two_offsets);
    CHECK(has_ne);
}

TEST_CASE("extraction matches the brute-force signature map") {
    const auto k = make_preset("jacobi-1d").kernel;
    for (std::int64_t s : {2, 4, 6, 8}) {
        const auto ts = TilingScheme::diamond(s, s);
        CHECK(as_groups(extract_output_mars(ts, k)) == oracle::signature_groups(ts, k));
    }
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        const auto syn = oracle::random_kernel(rng);
        const auto outs = extract_output_mars(syn.tiling, syn.kernel);
        CHECK(as_groups(outs) == oracle::signature_groups(syn.tiling, syn.kernel));
        for (std::size_t i = 1; i < outs.size(); ++i) CHECK(outs[i - 1].points.front() < outs[i].points.front());
        for (std::size_t i = 0; i < outs.size(); ++i) CHECK(outs[i].id == i);
    }
}

TEST_CASE("partition properties on presets and random kernels") {
    std::vector<std::pair<TilingScheme, Kernel>> cases;
    for (const auto& n : preset_names()) {
        const auto p = make_preset(n);
        cases.emplace_back(p.tiling, p.kernel);
    }
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const auto syn = oracle::random_kernel(rng);
        cases.emplace_back(syn.tiling, syn.kernel);
    }
    for (const auto& [ts, k] : cases) {
        const auto io = analyze_tile(ts, k);
        const auto report = verify_partition(io, ts, k);
        CHECK(report.ok);

        // Irredundancy: sizes add up to the flow-out set, nothing repeated.
        const auto out_set = flow_out_set(ts, k);
        std::size_t total = 0;
        std::set<Point> seen;
        for (const auto& m : io.outputs) {
            total += m.size_words();
            for (const auto& p : m.points) CHECK(seen.insert(p).second);
        }
        CHECK(total == out_set.size());

        // Σ input sizes = |flow-in|.
        std::size_t in_total = 0;
        for (const auto& in : io.inputs) in_total += io.outputs[in.mars_id].size_words();
        CHECK(in_total == flow_in_set(ts, k).size());

        // Atomicity by enumeration: per consumer offset, all or nothing of each MARS.
        const std::size_t dims = ts.sizes.size();
        for (const auto& m : io.outputs) {
            std::map<TileCoord, std::size_t> reads;
            for (const auto& p : m.points) {
                std::set<TileCoord> hit;
                for (const auto& d : k.deps) {
                    auto c = oracle::tile_of(p + d.delta, ts);
                    if (c != TileCoord(dims)) hit.insert(c);
                }
                for (const auto& c : hit) ++reads[c];
            }
            for (const auto& [c, n] : reads) {
                CHECK(n == m.size_words());
                CHECK(m.signature.contains(c));
            }
            CHECK(reads.size() == m.signature.offsets.size());
        }

        // Duality: (o, j) is an input iff -o is in the signature of j.
        std::set<std::pair<TileCoord, std::size_t>> inputs;
        for (const auto& in : io.inputs) {
            CHECK(inputs.emplace(in.producer_offset, in.mars_id).second);
            CHECK(io.outputs[in.mars_id].signature.contains(-in.producer_offset));
        }
        for (const auto& m : io.outputs)
            for (const auto& c : m.signature.offsets) CHECK(inputs.count({-c, m.id}) == 1);
    }
}

TEST_CASE("translation invariance") {
    for (const auto& n : preset_names()) {
        const auto p = make_preset(n);
        const auto origin = extract_output_mars(p.tiling, p.kernel);
        const std::size_t dims = p.tiling.sizes.size();
        for (int shift : {1, -2, 3}) {
            TileCoord tc(dims);
            for (std::size_t k = 0; k < dims; ++k) tc[k] = shift * static_cast<std::int64_t>(k + 1);
            const auto moved = extract_output_mars(p.tiling, p.kernel, tc);
            REQUIRE(moved.size() == origin.size());
            for (std::size_t i = 0; i < origin.size(); ++i) {
                CHECK(moved[i].points == origin[i].points);
                CHECK(moved[i].signature == origin[i].signature);
            }
        }
    }
}

TEST_CASE("3-d presets keep the flow-in identity") {
    for (const char* name : {"jacobi-2d", "seidel-2d"}) {
        const auto p = make_preset(name);
        const auto io = analyze_tile(p.tiling, p.kernel);
        std::size_t total = 0;
        for (const auto& in : io.inputs) total += io.outputs[in.mars_id].size_words();
        CHECK(total == flow_in_set(p.tiling, p.kernel).size());
        CHECK(verify_partition(io, p.tiling, p.kernel).ok);
    }
}

TEST_CASE("fault injection: duplicated point") {
    const auto p = make_preset("jacobi-1d");
    auto io = analyze_tile(p.tiling, p.kernel);
    io.outputs[1].points.push_back(io.outputs[0].points.front());
    const auto r = verify_partition(io, p.tiling, p.kernel);
    CHECK_FALSE(r.ok);
    CHECK(mentions(r, "irredundancy"));
}

TEST_CASE("fault injection: split MARS") {
    const auto p = make_preset("jacobi-1d");
    auto io = analyze_tile(p.tiling, p.kernel);
    auto& big = io.outputs[0];
    REQUIRE(big.points.size() >= 2);
    Mars half = big;
    half.id = io.outputs.size();
    half.points.assign(big.points.begin() + static_cast<std::ptrdiff_t>(big.points.size() / 2), big.points.end());
    big.points.resize(big.points.size() / 2);
    io.outputs.push_back(half);
    const auto r = verify_partition(io, p.tiling, p.kernel);
    CHECK_FALSE(r.ok);
    CHECK(mentions(r, "maximality"));
}

TEST_CASE("fault injection: missing point and wrong grouping") {
    const auto p = make_preset("jacobi-1d");
    {
        auto io = analyze_tile(p.tiling, p.kernel);
        io.outputs[0].points.pop_back();
        const auto r = verify_partition(io, p.tiling, p.kernel);
        CHECK_FALSE(r.ok);
        CHECK(mentions(r, "coverage"));
    }
    {
        // Swap one point between two MARS with different consumers.
        auto io = analyze_tile(p.tiling, p.kernel);
        std::swap(io.outputs[0].points.back(), io.outputs[1].points.back());
        CHECK_FALSE(verify_partition(io, p.tiling, p.kernel).ok);
    }
    {
        auto io = analyze_tile(p.tiling, p.kernel);
        io.inputs.pop_back();
        CHECK_FALSE(verify_partition(io, p.tiling, p.kernel).ok);
    }
}

TEST_CASE("odd diamond sizes are rejected for a single representative tile") {
    CHECK_THROWS(require_translation_invariant(TilingScheme::diamond(5, 6)));
    CHECK_NOTHROW(require_translation_invariant(TilingScheme::diamond(6, 6)));
}
