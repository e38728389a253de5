#include <burstlab/membus.hpp>

#include <bit>
#include <map>
#include <sstream>

namespace burstlab {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::MarsCompressed: return "mars-compressed";
        case Variant::MarsPacked: return "mars-packed";
        case Variant::MarsPadded: return "mars-padded";
        case Variant::BaselineMinimal: return "baseline-minimal";
        case Variant::BaselineBbox: return "baseline-bbox";
    }
    return "unknown";
}

Variant parse_variant(const std::string& name) {
    for (Variant v : all_variants())
        if (to_string(v) == name) return v;
    throw ConfigError("variants", "unknown variant '" + name + "'");
}

std::vector<Variant> all_variants() {
    return {Variant::MarsCompressed, Variant::MarsPacked, Variant::MarsPadded, Variant::BaselineMinimal,
            Variant::BaselineBbox};
}

bool is_mars_variant(Variant v) {
    return v == Variant::MarsCompressed || v == Variant::MarsPacked || v == Variant::MarsPadded;
}

void BusConfig::validate() const {
    if (width_bits < 8 || !std::has_single_bit(static_cast<unsigned>(width_bits)))
        throw ConfigError("bus.widthBits", "must be a power of two >= 8");
    if (width_bits > 32768) throw ConfigError("bus.widthBits", "must be <= 32768");
    if (burst_latency < 1) throw ConfigError("bus.burstLatencyCycles", "must be >= 1");
    if (max_burst_beats < 1) throw ConfigError("bus.maxBurstBeats", "must be >= 1");
}

TransferTotals& TransferTotals::operator+=(const TransferTotals& o) {
    bursts += o.bursts;
    cycles += o.cycles;
    transferred_bits += o.transferred_bits;
    useful_bits += o.useful_bits;
    return *this;
}

std::uint64_t burst_cycles(std::uint64_t length_bits, const BusConfig& cfg) {
    const auto width = static_cast<std::uint64_t>(cfg.width_bits);
    if (length_bits % width != 0)
        throw Error("burst of " + std::to_string(length_bits) + " bits is not a multiple of the bus width");
    const std::uint64_t beats = length_bits / width;
    const auto max_beats = static_cast<std::uint64_t>(cfg.max_burst_beats);
    const std::uint64_t full = beats / max_beats, tail = beats % max_beats;
    const auto latency = static_cast<std::uint64_t>(cfg.burst_latency);
    return full * (latency + max_beats) + (tail ? latency + tail : 0);
}

void TransferLog::add(Transfer t, const BusConfig& cfg) {
    const auto width = static_cast<std::uint64_t>(cfg.width_bits);
    if (t.start_bit % width != 0) throw Error("transfer start " + std::to_string(t.start_bit) + " is not bus aligned");
    t.cycles = burst_cycles(t.length_bits, cfg);
    TransferTotals& totals = t.direction == Direction::Read ? reads_ : writes_;
    totals += TransferTotals{1, t.cycles, t.length_bits, t.useful_bits};
    transfers_.push_back(std::move(t));
}

void TransferLog::append(const TransferLog& other) {
    transfers_.insert(transfers_.end(), other.transfers_.begin(), other.transfers_.end());
    reads_ += other.reads_;
    writes_ += other.writes_;
}

std::string TransferLog::to_csv(bool header) const {
    std::ostringstream os;
    if (header) os << "tile,direction,startBit,lengthBits,usefulBits,cycles\n";
    for (const Transfer& t : transfers_) {
        std::string tile;
        for (std::size_t k = 0; k < t.tile.size(); ++k) tile += (k ? ":" : "") + std::to_string(t.tile[k]);
        os << tile << ',' << (t.direction == Direction::Read ? "read" : "write") << ',' << t.start_bit << ','
           << t.length_bits << ',' << t.useful_bits << ',' << t.cycles << '\n';
    }
    return os.str();
}

Transfer aligned_transfer(const TileCoord& tile, Direction dir, std::uint64_t begin_bit, std::uint64_t end_bit,
                          std::uint64_t useful_bits, const BusConfig& cfg) {
    const auto width = static_cast<std::uint64_t>(cfg.width_bits);
    const std::uint64_t first = begin_bit / width;
    const std::uint64_t last = std::max(first + 1, (end_bit + width - 1) / width);
    Transfer t;
    t.tile = tile;
    t.direction = dir;
    t.start_bit = first * width;
    t.length_bits = (last - first) * width;
    t.useful_bits = useful_bits;
    t.cycles = burst_cycles(t.length_bits, cfg);
    return t;
}

MarsBlockLayout fixed_block_layout(const std::vector<std::size_t>& words_by_position, int bits_per_word,
                                   int payload_bits_per_word) {
    MarsBlockLayout l;
    std::uint64_t at = 0;
    const bool padded = payload_bits_per_word > 0 && payload_bits_per_word != bits_per_word;
    for (std::size_t words : words_by_position) {
        l.start.push_back(at);
        if (padded) l.payload.push_back(words * static_cast<std::uint64_t>(payload_bits_per_word));
        at += words * static_cast<std::uint64_t>(bits_per_word);
    }
    l.content_end = at;
    return l;
}

std::vector<PlannedRead> plan_mars_reads(const TileCoord& tile, const BurstCount& runs, const AllocationMap& alloc,
                                         const BlockLayoutLookup& layout_of, const BusConfig& cfg) {
    std::vector<PlannedRead> out;
    for (const ProducerBursts& pb : runs.per_producer) {
        const TileCoord producer = tile + pb.producer_offset;
        const TileBlock& block = alloc.blocks[alloc.index_of(producer)];
        const MarsBlockLayout& layout = layout_of(producer);
        for (const auto& [first, last] : pb.runs) {
            if (last >= layout.start.size())
                throw Error("producer " + producer.str() + " block has no MARS at position " + std::to_string(last));
            const std::uint64_t base = block.base_bytes * 8;
            const std::uint64_t begin = base + layout.start[first], end = base + layout.end(last);
            std::uint64_t useful = 0;
            for (std::size_t pos = first; pos <= last; ++pos) useful += layout.payload_bits(pos);
            PlannedRead r;
            r.transfer = aligned_transfer(tile, Direction::Read, begin, end, useful, cfg);
            r.producer = producer;
            r.first_position = first;
            r.last_position = last;
            out.push_back(std::move(r));
        }
    }
    return out;
}

Transfer plan_mars_write(const TileCoord& tile, const AllocationMap& alloc, const MarsBlockLayout& layout,
                         const BusConfig& cfg) {
    const TileBlock& block = alloc.blocks[alloc.index_of(tile)];
    if ((layout.content_end + 7) / 8 > block.capacity_bytes)
        throw Error("tile " + tile.str() + " block of " + std::to_string(layout.content_end) +
                    " bits overflows its allocation");
    const std::uint64_t base = block.base_bytes * 8;
    std::uint64_t useful = 0;
    for (std::size_t pos = 0; pos < layout.start.size(); ++pos) useful += layout.payload_bits(pos);
    return aligned_transfer(tile, Direction::Write, base, base + layout.content_end, useful, cfg);
}

std::uint64_t OriginalLayout::cell_index(const Point& v) const {
    if (v.size() != spatial_sizes.size() + 1) throw DimensionMismatch("value point " + v.str() + " vs layout");
    if (v[0] < 0) throw Error("value point " + v.str() + " precedes the initial state");
    std::uint64_t index = static_cast<std::uint64_t>(v[0] % depth);
    for (std::size_t s = 0; s < spatial_sizes.size(); ++s) {
        if (v[s + 1] < 0 || v[s + 1] >= spatial_sizes[s]) throw Error("value point " + v.str() + " outside the arrays");
        index = index * static_cast<std::uint64_t>(spatial_sizes[s]) + static_cast<std::uint64_t>(v[s + 1]);
    }
    return index;
}

namespace {

// Bus words covered by a set of cells, coalesced into maximal runs. `useful`
// maps a cell index to whether it counts as payload.
TransferLog coalesce_cells(const TileCoord& tile, std::vector<std::uint64_t> cells,
                           const std::function<bool(std::uint64_t)>& useful, Direction dir,
                           const OriginalLayout& layout, const BusConfig& cfg) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    const auto width = static_cast<std::uint64_t>(cfg.width_bits);
    const auto cbits = static_cast<std::uint64_t>(layout.container_bits);

    // Each run: [first word, end word) plus the payload bits inside it.
    struct Run {
        std::uint64_t first, end, useful;
    };
    std::vector<Run> runs;
    for (std::uint64_t c : cells) {
        const std::uint64_t first = c * cbits / width, end = (c * cbits + cbits + width - 1) / width;
        const std::uint64_t payload = useful(c) ? static_cast<std::uint64_t>(layout.word_bits) : 0;
        if (!runs.empty() && first <= runs.back().end) {
            runs.back().end = std::max(runs.back().end, end);
            runs.back().useful += payload;
        } else {
            runs.push_back({first, end, payload});
        }
    }
    TransferLog log;
    for (const Run& r : runs) {
        Transfer t;
        t.tile = tile;
        t.direction = dir;
        t.start_bit = r.first * width;
        t.length_bits = (r.end - r.first) * width;
        t.useful_bits = r.useful;
        log.add(t, cfg);
    }
    return log;
}

}  // namespace

TransferLog baseline_minimal(const TileCoord& tile, const std::vector<Point>& footprint, Direction dir,
                             const OriginalLayout& layout, const BusConfig& cfg) {
    std::vector<std::uint64_t> cells;
    cells.reserve(footprint.size());
    for (const Point& v : footprint) cells.push_back(layout.cell_index(v));
    return coalesce_cells(tile, std::move(cells), [](std::uint64_t) { return true; }, dir, layout, cfg);
}

TransferLog baseline_bbox(const TileCoord& tile, const std::vector<Point>& footprint, Direction dir,
                          const OriginalLayout& layout, const BusConfig& cfg) {
    const std::size_t spatial = layout.spatial_sizes.size();
    std::map<std::int64_t, std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>> boxes;  // plane -> lo, hi
    std::vector<std::uint64_t> footprint_cells;
    for (const Point& v : footprint) {
        footprint_cells.push_back(layout.cell_index(v));
        auto [it, fresh] = boxes.try_emplace(v[0] % layout.depth);
        auto& [lo, hi] = it->second;
        if (fresh) {
            lo.assign(v.begin() + 1, v.end());
            hi = lo;
        }
        for (std::size_t s = 0; s < spatial; ++s) {
            lo[s] = std::min(lo[s], v[s + 1]);
            hi[s] = std::max(hi[s], v[s + 1]);
        }
    }
    std::sort(footprint_cells.begin(), footprint_cells.end());

    std::vector<std::uint64_t> cells;
    for (const auto& [plane, box] : boxes) {
        const auto& [lo, hi] = box;
        Point v(spatial + 1);
        v[0] = plane;
        for (std::size_t s = 0; s < spatial; ++s) v[s + 1] = lo[s];
        for (;;) {
            cells.push_back(layout.cell_index(v));
            std::size_t s = spatial;
            bool done = true;
            while (s > 0) {
                --s;
                if (++v[s + 1] <= hi[s]) {
                    done = false;
                    break;
                }
                v[s + 1] = lo[s];
            }
            if (done) break;
        }
    }
    auto useful = [&](std::uint64_t c) { return std::binary_search(footprint_cells.begin(), footprint_cells.end(), c); };
    return coalesce_cells(tile, std::move(cells), useful, dir, layout, cfg);
}

}  // namespace burstlab
