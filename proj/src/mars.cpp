#include <burstlab/mars.hpp>

#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace burstlab {

bool ConsumerSignature::contains(const TileCoord& o) const {
    return std::binary_search(offsets.begin(), offsets.end(), o);
}

void require_translation_invariant(const TilingScheme& ts) {
    const std::size_t n = ts.sizes.size();
    for (std::size_t k = 0; k < n; ++k) {
        TileCoord unit = TileCoord::zero(n);
        unit[k] = 1;
        if (!tile_translation(ts, unit))
            throw Error("tiling " + ts.str() + " is not translation invariant (diamond sizes must be even)");
    }
}

namespace {

std::optional<ConsumerSignature> signature_in(const Point& p, const TileCoord& home, const TilingScheme& ts,
                                              const Kernel& k) {
    std::set<TileCoord> offsets;
    for (const auto& d : k.deps) {
        TileCoord c = tile_of(p + d.delta, ts);
        if (c != home) offsets.insert(c - home);
    }
    if (offsets.empty()) return std::nullopt;
    return ConsumerSignature{{offsets.begin(), offsets.end()}};
}

}  // namespace

std::optional<ConsumerSignature> consumer_signature(const Point& p, const TilingScheme& ts, const Kernel& k) {
    return signature_in(p, tile_of(p, ts), ts, k);
}

std::vector<Mars> extract_output_mars(const TilingScheme& ts, const Kernel& k, const std::optional<TileCoord>& tile) {
    const TileCoord home = tile.value_or(TileCoord::zero(ts.sizes.size()));
    Point origin = Point::zero(ts.point_dims());
    if (tile) {
        auto shift = tile_translation(ts, home);
        if (!shift) throw Error("tile " + home.str() + " is not a translate of the origin tile");
        origin = *shift;
    }
    std::map<ConsumerSignature, std::vector<Point>> groups;
    for (const Point& p : enumerate_tile_points(ts, home))
        if (auto sig = signature_in(p, home, ts, k)) groups[*sig].push_back(p - origin);

    std::vector<Mars> out;
    out.reserve(groups.size());
    for (auto& [sig, pts] : groups) out.push_back(Mars{0, std::move(pts), sig});  // points already sorted
    std::sort(out.begin(), out.end(), [](const Mars& a, const Mars& b) { return a.points.front() < b.points.front(); });
    for (std::size_t id = 0; id < out.size(); ++id) out[id].id = id;
    return out;
}

std::vector<InputMars> extract_input_map(const TilingScheme&, const Kernel&, const std::vector<Mars>& outputs) {
    // A producer at offset o ships MARS j to us iff -o is in j's signature.
    std::set<std::pair<TileCoord, std::size_t>> entries;
    for (const Mars& m : outputs)
        for (const TileCoord& c : m.signature.offsets) entries.insert({-c, m.id});
    std::vector<InputMars> out;
    for (const auto& [o, id] : entries) out.push_back({o, id});
    return out;
}

std::vector<InputMars> extract_input_map(const TilingScheme& ts, const Kernel& k) {
    return extract_input_map(ts, k, extract_output_mars(ts, k));
}

TileIOSummary analyze_tile(const TilingScheme& ts, const Kernel& k) {
    check_tiling_legal(ts, k);
    require_translation_invariant(ts);
    TileIOSummary s;
    s.outputs = extract_output_mars(ts, k);
    s.inputs = extract_input_map(ts, k, s.outputs);
    return s;
}

std::vector<Point> flow_out_set(const TilingScheme& ts, const Kernel& k) {
    std::vector<Point> out;
    for (const Point& p : enumerate_tile_points(ts, TileCoord::zero(ts.sizes.size())))
        if (consumer_signature(p, ts, k)) out.push_back(p);
    return out;
}

std::vector<Point> flow_in_set(const TilingScheme& ts, const Kernel& k) {
    const TileCoord origin = TileCoord::zero(ts.sizes.size());
    std::set<Point> in;
    for (const Point& q : enumerate_tile_points(ts, origin))
        for (const auto& d : k.deps) {
            Point v = q - d.delta;
            if (tile_of(v, ts) != origin) in.insert(v);
        }
    return {in.begin(), in.end()};
}

PartitionReport verify_partition(const TileIOSummary& summary, const TilingScheme& ts, const Kernel& k) {
    PartitionReport rep;
    auto fail = [&](std::string msg) {
        rep.ok = false;
        rep.problems.push_back(std::move(msg));
    };
    const TileCoord origin = TileCoord::zero(ts.sizes.size());

    // (a) outputs: disjoint, union = flow-out, members share the MARS signature.
    const auto flow_out = flow_out_set(ts, k);
    std::unordered_map<Point, std::size_t, IntVectorHash> owner;
    for (const Mars& m : summary.outputs) {
        if (m.points.empty()) fail("irredundancy: MARS " + std::to_string(m.id) + " is empty");
        for (const Point& p : m.points) {
            if (auto [it, fresh] = owner.emplace(p, m.id); !fresh)
                fail("irredundancy: point " + p.str() + " in MARS " + std::to_string(it->second) + " and " +
                     std::to_string(m.id));
            auto sig = consumer_signature(p, ts, k);
            if (!sig || *sig != m.signature)
                fail("atomicity: point " + p.str() + " of MARS " + std::to_string(m.id) +
                     " has a different consumer set");
        }
    }
    for (const Point& p : flow_out)
        if (!owner.count(p)) fail("coverage: flow-out point " + p.str() + " is in no output MARS");
    if (owner.size() != flow_out.size())
        for (const auto& [p, id] : owner)
            if (!std::binary_search(flow_out.begin(), flow_out.end(), p))
                fail("coverage: point " + p.str() + " of MARS " + std::to_string(id) + " never leaves the tile");

    // Maximality: one MARS per signature.
    std::map<ConsumerSignature, std::size_t> by_sig;
    for (const Mars& m : summary.outputs)
        if (auto [it, fresh] = by_sig.emplace(m.signature, m.id); !fresh)
            fail("atomicity maximality: MARS " + std::to_string(it->second) + " and " + std::to_string(m.id) +
                 " share a signature");

    // (c) atomicity from the consumer side: tile c reads all or nothing of m.
    std::map<TileCoord, std::set<Point>> read_by;  // consumer offset -> points of ours it reads
    for (const Point& p : enumerate_tile_points(ts, origin))
        for (const auto& d : k.deps) {
            TileCoord c = tile_of(p + d.delta, ts);
            if (c != origin) read_by[c].insert(p);
        }
    for (const Mars& m : summary.outputs)
        for (const auto& [c, pts] : read_by) {
            std::size_t hits = 0;
            for (const Point& p : m.points) hits += pts.count(p);
            const bool listed = m.signature.contains(c);
            if (hits != 0 && hits != m.points.size())
                fail("atomicity: consumer " + c.str() + " reads " + std::to_string(hits) + " of " +
                     std::to_string(m.points.size()) + " points of MARS " + std::to_string(m.id));
            else if ((hits != 0) != listed)
                fail("atomicity: consumer " + c.str() + " and MARS " + std::to_string(m.id) +
                     " disagree with the signature");
        }

    // (b) inputs: translated producer MARS are disjoint and cover flow-in.
    const auto flow_in = flow_in_set(ts, k);
    std::unordered_set<Point, IntVectorHash> seen_in;
    std::size_t input_words = 0;
    for (const InputMars& in : summary.inputs) {
        if (in.mars_id >= summary.outputs.size()) {
            fail("input: MARS id " + std::to_string(in.mars_id) + " out of range");
            continue;
        }
        auto shift = tile_translation(ts, in.producer_offset);
        if (!shift) {
            fail("input: producer " + in.producer_offset.str() + " is not a translate");
            continue;
        }
        for (const Point& p : summary.outputs[in.mars_id].points) {
            Point v = p + *shift;
            ++input_words;
            if (!seen_in.insert(v).second) fail("irredundancy: flow-in point " + v.str() + " delivered twice");
            if (!std::binary_search(flow_in.begin(), flow_in.end(), v))
                fail("input: point " + v.str() + " from producer " + in.producer_offset.str() + " is not read");
        }
    }
    for (const Point& v : flow_in)
        if (!seen_in.count(v)) fail("coverage: flow-in point " + v.str() + " is delivered by no input MARS");
    if (rep.ok && input_words != flow_in.size()) fail("input: word count does not match flow-in size");
    return rep;
}

}  // namespace burstlab
