#include <burstlab/sim.hpp>

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

namespace burstlab {

// ---- storage ----------------------------------------------------------------

int storage_depth(const Kernel& k, const ProblemInstance& pi) {
    const int depth = temporal_depth(k);
    // Writing (t, x) clobbers (t - depth, x). Safe when every reader of the old
    // value is a producer of the new one (or the new point itself), so any
    // topological tile order has already run it.
    Point step = Point::zero(k.dim);
    step[0] = depth;
    for (const auto& d : k.deps) {
        const Point r = step - d.delta;
        if (r.is_zero()) continue;
        const bool is_dep = std::any_of(k.deps.begin(), k.deps.end(), [&](const DependenceVector& e) { return e.delta == r; });
        if (!is_dep) return static_cast<int>(std::max<std::int64_t>(pi.time_steps + 1, depth));
    }
    return depth;
}

ValueGrid::ValueGrid(std::vector<std::int64_t> spatial_sizes, int depth) : sizes_(std::move(spatial_sizes)), depth_(depth) {
    if (depth < 1) throw Error("grid depth must be >= 1");
    std::size_t cells = static_cast<std::size_t>(depth);
    for (auto s : sizes_) cells *= static_cast<std::size_t>(s);
    cells_.assign(cells, 0);
}

std::size_t ValueGrid::index(const Point& v) const {
    if (v.size() != sizes_.size() + 1) throw DimensionMismatch("value point " + v.str() + " vs grid");
    std::size_t at = static_cast<std::size_t>(((v[0] % depth_) + depth_) % depth_);
    for (std::size_t s = 0; s < sizes_.size(); ++s) {
        if (v[s + 1] < 0 || v[s + 1] >= sizes_[s]) throw Error("value point " + v.str() + " outside the arrays");
        at = at * static_cast<std::size_t>(sizes_[s]) + static_cast<std::size_t>(v[s + 1]);
    }
    return at;
}

namespace {

// Calls f(point) for every point of the box [lo, hi] in row-major order.
template <typename F>
void for_each_in_box(const Point& lo, const Point& hi, F&& f) {
    const std::size_t n = lo.size();
    for (std::size_t k = 0; k < n; ++k)
        if (lo[k] > hi[k]) return;
    Point p = lo;
    for (;;) {
        f(p);
        std::size_t k = n;
        for (;;) {
            if (k == 0) return;
            --k;
            if (++p[k] <= hi[k]) break;
            p[k] = lo[k];
        }
    }
}

double polybench_value(const std::vector<std::int64_t>& sizes, std::int64_t plane, const Point& v) {
    const double n = static_cast<double>(sizes[0]);
    const auto i = static_cast<double>(v[1]);
    const auto p = static_cast<double>(plane);
    if (sizes.size() == 1) return (i + 2 + p) / n;
    const auto j = static_cast<double>(v[2]);
    return (i * (j + 2 + p) + 2 + p) / n;
}

}  // namespace

ValueGrid initial_grid(const Kernel& k, const ProblemInstance& pi) {
    const int depth = storage_depth(k, pi);
    ValueGrid g(pi.spatial_sizes, depth);
    const Arithmetic arith(k);
    std::mt19937_64 rng(pi.init.seed);
    std::uniform_real_distribution<double> uniform(pi.init.low, pi.init.high);
    Point lo = Point::zero(k.dim), hi = Point::zero(k.dim);
    hi[0] = depth - 1;
    for (std::size_t s = 0; s < pi.spatial_sizes.size(); ++s) hi[s + 1] = pi.spatial_sizes[s] - 1;
    for_each_in_box(lo, hi, [&](const Point& v) {
        double x = 0;
        switch (pi.init.kind) {
            case InitKind::PolyBench: x = polybench_value(pi.spatial_sizes, v[0], v); break;
            case InitKind::Constant: x = pi.init.value; break;
            case InitKind::Random: x = uniform(rng); break;
        }
        g.at(v) = arith.encode(x);
    });
    return g;
}

ReferenceResult run_reference(const Kernel& k, const ProblemInstance& pi) {
    k.validate();
    pi.validate(k);
    ReferenceResult r{initial_grid(k, pi), 0};
    const Arithmetic arith(k);
    std::vector<Word> ops(k.deps.size());
    Point lo = Point::zero(k.dim), hi = Point::zero(k.dim);
    lo[0] = 1;
    hi[0] = pi.time_steps;
    for (std::size_t s = 0; s < pi.spatial_sizes.size(); ++s) {
        lo[s + 1] = 1;
        hi[s + 1] = pi.spatial_sizes[s] - 2;
    }
    for_each_in_box(lo, hi, [&](const Point& p) {
        for (std::size_t j = 0; j < k.deps.size(); ++j) ops[j] = r.grid.at(p - k.deps[j].delta);
        r.grid.at(p) = arith.apply(ops, &r.saturations);
    });
    return r;
}

// ---- dispatch / collect -----------------------------------------------------

void dispatch(std::span<const Word> mars_words, const DispatchTable& table, std::span<Word> buffer) {
    if (mars_words.size() != table.addresses.size())
        throw std::out_of_range("dispatch: " + std::to_string(mars_words.size()) + " words for a table of " +
                                std::to_string(table.addresses.size()));
    for (std::size_t i = 0; i < mars_words.size(); ++i) {
        const auto a = table.addresses[i];
        if (a >= buffer.size()) throw std::out_of_range("dispatch: address " + std::to_string(a) + " out of bounds");
        buffer[a] = mars_words[i];
    }
}

std::vector<Word> collect(std::span<const Word> buffer, const DispatchTable& table) {
    std::vector<Word> out;
    out.reserve(table.addresses.size());
    for (auto a : table.addresses) {
        if (a >= buffer.size()) throw std::out_of_range("collect: address " + std::to_string(a) + " out of bounds");
        out.push_back(buffer[a]);
    }
    return out;
}

// ---- tile analysis ----------------------------------------------------------

TileAnalysis TileAnalysis::build(const TilingScheme& ts, const Kernel& k) {
    TileAnalysis a;
    a.io = analyze_tile(ts, k);
    a.weights = build_weights(a.io.outputs);
    a.layout = solve_layout(a.weights, &a.exact_layout);
    a.bursts = count_read_bursts(a.layout, a.io.inputs);

    a.tile_points = enumerate_tile_points(ts, TileCoord::zero(ts.sizes.size()));
    a.flow_in = flow_in_set(ts, k);
    a.buffer_points.reserve(a.tile_points.size() + a.flow_in.size());
    std::merge(a.tile_points.begin(), a.tile_points.end(), a.flow_in.begin(), a.flow_in.end(),
               std::back_inserter(a.buffer_points));
    for (std::size_t i = 0; i < a.buffer_points.size(); ++i)
        a.buffer_slot.emplace(a.buffer_points[i], static_cast<std::uint32_t>(i));
    auto slot = [&](const Point& p) {
        auto it = a.buffer_slot.find(p);
        if (it == a.buffer_slot.end()) throw Error("point " + p.str() + " has no on-chip buffer slot");
        return it->second;
    };

    for (const Point& p : a.tile_points) {
        a.result_slot.push_back(slot(p));
        for (const auto& d : k.deps) a.operand_slots.push_back(slot(p - d.delta));
    }
    for (const InputMars& in : a.io.inputs) {
        const Point shift = *tile_translation(ts, in.producer_offset);
        DispatchTable t;
        for (const Point& p : a.io.outputs[in.mars_id].points) t.addresses.push_back(slot(p + shift));
        a.input_tables.push_back(std::move(t));
    }
    for (const Mars& m : a.io.outputs) {
        DispatchTable t;
        for (std::size_t i = 0; i < m.points.size(); ++i) {
            t.addresses.push_back(slot(m.points[i]));
            a.output_slot.emplace(m.points[i], std::make_pair(m.id, i));
        }
        a.output_tables.push_back(std::move(t));
        a.output_words += m.points.size();
    }
    for (std::size_t id : a.layout.order) a.words_by_position.push_back(a.io.outputs[id].points.size());

    a.box_lo = a.box_hi = a.tile_points.front();
    for (const Point& p : a.tile_points)
        for (std::size_t d = 0; d < p.size(); ++d) {
            a.box_lo[d] = std::min(a.box_lo[d], p[d]);
            a.box_hi[d] = std::max(a.box_hi[d], p[d]);
        }
    if (!a.flow_in.empty()) {
        a.flow_in_lo = a.flow_in_hi = a.flow_in.front();
        for (const Point& p : a.flow_in)
            for (std::size_t d = 0; d < p.size(); ++d) {
                a.flow_in_lo[d] = std::min(a.flow_in_lo[d], p[d]);
                a.flow_in_hi[d] = std::max(a.flow_in_hi[d], p[d]);
            }
    }
    return a;
}

std::size_t TileAnalysis::input_index(const TileCoord& producer_offset, std::size_t mars_id) const {
    for (std::size_t i = 0; i < io.inputs.size(); ++i)
        if (io.inputs[i].producer_offset == producer_offset && io.inputs[i].mars_id == mars_id) return i;
    throw Error("tile does not consume MARS " + std::to_string(mars_id) + " of producer " + producer_offset.str());
}

bool is_full_tile(const TileAnalysis& a, const TilingScheme& ts, const TileCoord& tc, const ProblemInstance& pi) {
    const Point shift = *tile_translation(ts, tc);
    const Point lo = a.box_lo + shift, hi = a.box_hi + shift;
    if (lo[0] < 1 || hi[0] > pi.time_steps) return false;
    for (std::size_t s = 0; s < pi.spatial_sizes.size(); ++s)
        if (lo[s + 1] < 1 || hi[s + 1] > pi.spatial_sizes[s] - 2) return false;
    // Long dependences can reach past the arrays even from interior points.
    const Point flo = a.flow_in_lo + shift, fhi = a.flow_in_hi + shift;
    return a.flow_in.empty() || (in_value_space(flo, pi) && in_value_space(fhi, pi));
}

std::pair<double, double> compression_stats(const std::vector<TileStats>& tiles, const DataTypeSpec& dtype) {
    std::uint64_t words = 0, compressed = 0;
    for (const TileStats& t : tiles) {
        words += t.words;
        compressed += t.compressed_bits;
    }
    if (compressed == 0) return {0.0, 0.0};
    const double c = static_cast<double>(compressed);
    return {static_cast<double>(words) * dtype.total_bits / c, static_cast<double>(words) * dtype.container_bits() / c};
}

// ---- tiled run --------------------------------------------------------------

namespace {

// Byte-addressed off-chip memory holding the tile blocks.
class BlockMemory {
public:
    explicit BlockMemory(std::uint64_t bytes) : bytes_(bytes, 0) {}

    void write(std::uint64_t bit, const BitStream& s) {
        if (bit % 8) throw Error("unaligned block write");
        const auto& src = s.bytes();
        if (bit / 8 + src.size() > bytes_.size()) throw Error("block write past the end of memory");
        std::copy(src.begin(), src.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(bit / 8));
    }

    BitStream read(std::uint64_t bit, std::uint64_t nbits) const {
        if (bit % 8) throw Error("unaligned block read");
        const std::uint64_t first = bit / 8, count = (nbits + 7) / 8;
        if (first + count > bytes_.size()) throw Error("block read past the end of memory");
        auto from = bytes_.begin() + static_cast<std::ptrdiff_t>(first);
        return BitStream::from_bytes({from, from + static_cast<std::ptrdiff_t>(count)}, nbits);
    }

private:
    std::vector<std::uint8_t> bytes_;
};

struct EncodedBlock {
    BitStream stream;
    MarsBlockLayout layout;
};

struct TileOutcome {
    TransferLog log;
    TileStats stats;
    std::uint64_t saturations = 0;
};

class TiledRun {
public:
    TiledRun(const Kernel& k, const TilingScheme& ts, const ProblemInstance& pi, Variant v, const SimOptions& o,
             const TileAnalysis& a)
        : k_(k), ts_(ts), pi_(pi), variant_(v), opts_(o), a_(a), arith_(k), depth_(storage_depth(k, pi)),
          n_(k.dtype.total_bits), container_(k.dtype.container_bits()) {}

    SimResult run();

private:
    bool mars() const { return is_mars_variant(variant_); }
    std::size_t index_of(const TileCoord& tc) const { return alloc_.index_of(tc); }

    void compute(std::vector<Word>& buffer, std::uint64_t& saturations) const;
    EncodedBlock encode(const std::vector<Word>& buffer) const;
    std::vector<Word> decode(const BitStream& s, std::uint64_t offset, std::size_t count) const;
    const MarsBlockLayout& block_layout(const TileCoord& producer) const;
    std::vector<Word> fetch_mars(const TileCoord& producer, std::size_t mars_id) const;

    TileOutcome run_full(std::size_t idx);
    std::uint64_t run_host(std::size_t idx);

    const Kernel& k_;
    const TilingScheme& ts_;
    const ProblemInstance& pi_;
    Variant variant_;
    const SimOptions& opts_;
    const TileAnalysis& a_;
    Arithmetic arith_;
    int depth_;
    int n_;
    int container_;

    std::vector<TileCoord> schedule_;
    std::vector<Point> shifts_;
    std::vector<char> full_;
    AllocationMap alloc_;
    std::unique_ptr<BlockMemory> memory_;
    MarsBlockLayout fixed_layout_;
    std::vector<std::optional<MarsBlockLayout>> markers_;  // compressed variant, by tile index
    ValueGrid init_;
    ValueGrid grid_;
    OriginalLayout original_;
};

void TiledRun::compute(std::vector<Word>& buffer, std::uint64_t& saturations) const {
    const std::size_t nd = k_.deps.size();
    std::vector<Word> ops(nd);
    for (std::size_t i = 0; i < a_.tile_points.size(); ++i) {
        for (std::size_t j = 0; j < nd; ++j) ops[j] = buffer[a_.operand_slots[i * nd + j]];
        buffer[a_.result_slot[i]] = arith_.apply(ops, &saturations);
    }
}

EncodedBlock TiledRun::encode(const std::vector<Word>& buffer) const {
    EncodedBlock b;
    if (variant_ == Variant::MarsCompressed) {
        std::vector<BitStream> streams;
        std::vector<std::uint32_t> counts;
        for (std::size_t id : a_.layout.order) {
            const auto words = collect(buffer, a_.output_tables[id]);
            streams.push_back(compress_mars(words, n_));
            counts.push_back(static_cast<std::uint32_t>(words.size()));
        }
        CompressedBlock block = pack_block(streams, counts, n_, opts_.bus.width_bits);
        for (const Marker& m : block.markers) b.layout.start.push_back(m.bit_position(opts_.bus.width_bits));
        b.layout.content_end = block.content_bits;
        b.stream = std::move(block.stream);
        return b;
    }
    const int slot_bits = variant_ == Variant::MarsPadded ? container_ : n_;
    for (std::size_t id : a_.layout.order)
        for (Word w : collect(buffer, a_.output_tables[id])) b.stream.append(w, slot_bits);
    b.stream.pad_to(static_cast<std::uint64_t>(opts_.bus.width_bits));
    b.layout = fixed_layout_;
    return b;
}

std::vector<Word> TiledRun::decode(const BitStream& s, std::uint64_t offset, std::size_t count) const {
    if (variant_ == Variant::MarsCompressed) return decompress_mars(s, offset, n_, count);
    const int slot_bits = variant_ == Variant::MarsPadded ? container_ : n_;
    std::vector<Word> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = s.read(offset + i * static_cast<std::uint64_t>(slot_bits), slot_bits) & low_mask(n_);
    return out;
}

const MarsBlockLayout& TiledRun::block_layout(const TileCoord& producer) const {
    if (variant_ != Variant::MarsCompressed) return fixed_layout_;
    const auto& m = markers_[index_of(producer)];
    if (!m) throw Error("no markers recorded for producer tile " + producer.str());
    return *m;
}

std::vector<Word> TiledRun::fetch_mars(const TileCoord& producer, std::size_t mars_id) const {
    const MarsBlockLayout& layout = block_layout(producer);
    const std::size_t pos = a_.layout.gamma[mars_id];
    const std::uint64_t base = alloc_.blocks[index_of(producer)].base_bytes * 8;
    const std::uint64_t begin = base + layout.start[pos], end = base + layout.end(pos);
    const std::uint64_t first = begin / 8 * 8;
    const BitStream s = memory_->read(first, end - first);
    return decode(s, begin - first, a_.io.outputs[mars_id].points.size());
}

TileOutcome TiledRun::run_full(std::size_t idx) {
    const TileCoord& tc = schedule_[idx];
    const Point& shift = shifts_[idx];
    TileOutcome out;
    out.stats.tile = tc;
    std::vector<Word> buffer(a_.buffer_points.size(), 0);

    if (mars()) {
        auto lookup = [this](const TileCoord& p) -> const MarsBlockLayout& { return block_layout(p); };
        for (const PlannedRead& r : plan_mars_reads(tc, a_.bursts, alloc_, lookup, opts_.bus)) {
            const BitStream fetched = memory_->read(r.transfer.start_bit, r.transfer.length_bits);
            const MarsBlockLayout& layout = block_layout(r.producer);
            const std::uint64_t base = alloc_.blocks[index_of(r.producer)].base_bytes * 8;
            for (std::size_t pos = r.first_position; pos <= r.last_position; ++pos) {
                const std::size_t id = a_.layout.order[pos];
                const auto words = decode(fetched, base + layout.start[pos] - r.transfer.start_bit,
                                          a_.io.outputs[id].points.size());
                dispatch(words, a_.input_tables[a_.input_index(r.producer - tc, id)], buffer);
            }
            out.log.add(r.transfer, opts_.bus);
        }
        compute(buffer, out.saturations);
        EncodedBlock block = encode(buffer);
        const Transfer w = plan_mars_write(tc, alloc_, block.layout, opts_.bus);
        memory_->write(w.start_bit, block.stream);
        out.log.add(w, opts_.bus);
        out.stats.words = a_.output_words;
        if (variant_ == Variant::MarsCompressed) {
            out.stats.compressed_bits = block.layout.content_end;
            markers_[idx] = std::move(block.layout);
        }
    } else {
        std::vector<Point> footprint;
        footprint.reserve(a_.flow_in.size());
        for (const Point& p : a_.flow_in) {
            footprint.push_back(p + shift);
            buffer[a_.buffer_slot.at(p)] = grid_.at(footprint.back());
        }
        out.log.append(variant_ == Variant::BaselineMinimal
                           ? baseline_minimal(tc, footprint, Direction::Read, original_, opts_.bus)
                           : baseline_bbox(tc, footprint, Direction::Read, original_, opts_.bus));
        compute(buffer, out.saturations);
        footprint.clear();
        for (const Mars& m : a_.io.outputs)
            for (const Point& p : m.points) {
                footprint.push_back(p + shift);
                grid_.at(footprint.back()) = buffer[a_.buffer_slot.at(p)];
            }
        out.log.append(variant_ == Variant::BaselineMinimal
                           ? baseline_minimal(tc, footprint, Direction::Write, original_, opts_.bus)
                           : baseline_bbox(tc, footprint, Direction::Write, original_, opts_.bus));
    }

    // Live-outs go straight to the result arrays, untimed.
    for (std::size_t i = 0; i < a_.tile_points.size(); ++i) {
        const Point p = a_.tile_points[i] + shift;
        if (p[0] > pi_.time_steps - depth_) grid_.at(p) = buffer[a_.result_slot[i]];
    }
    out.stats.reads = out.log.reads();
    out.stats.writes = out.log.writes();
    return out;
}

std::uint64_t TiledRun::run_host(std::size_t idx) {
    const TileCoord& tc = schedule_[idx];
    const Point& shift = shifts_[idx];
    std::uint64_t saturations = 0;

    if (mars()) {
        // Values this tile needs from full producers come out of their blocks.
        std::map<std::pair<std::size_t, std::size_t>, std::vector<Word>> decoded;
        for (const Point& rel : a_.tile_points) {
            const Point p = rel + shift;
            if (!is_iteration(p, pi_)) continue;
            for (const auto& d : k_.deps) {
                const Point q = p - d.delta;
                const TileCoord qt = tile_of(q, ts_);
                if (qt == tc) continue;
                const std::size_t qi = index_of(qt);
                if (!full_[qi]) continue;
                const auto it = a_.output_slot.find(q - shifts_[qi]);
                if (it == a_.output_slot.end()) throw Error("value " + q.str() + " is not in a MARS of " + qt.str());
                const auto [id, at] = it->second;
                auto [slot, fresh] = decoded.try_emplace({qi, id});
                if (fresh) slot->second = fetch_mars(qt, id);
                grid_.at(q) = slot->second[at];
            }
        }
    }

    std::vector<Word> buffer(a_.buffer_points.size(), 0);
    std::vector<Word> ops(k_.deps.size());
    for (std::size_t i = 0; i < a_.tile_points.size(); ++i) {
        const Point p = a_.tile_points[i] + shift;
        Word v = 0;
        if (is_iteration(p, pi_)) {
            for (std::size_t j = 0; j < k_.deps.size(); ++j) ops[j] = grid_.at(p - k_.deps[j].delta);
            v = arith_.apply(ops, &saturations);
            grid_.at(p) = v;
        } else if (in_value_space(p, pi_)) {
            v = init_.at(p);
        }
        buffer[a_.result_slot[i]] = v;
    }

    if (mars()) {
        EncodedBlock block = encode(buffer);
        const Transfer w = plan_mars_write(tc, alloc_, block.layout, opts_.bus);
        memory_->write(w.start_bit, block.stream);
        if (variant_ == Variant::MarsCompressed) markers_[idx] = std::move(block.layout);
    }
    return saturations;
}

SimResult TiledRun::run() {
    schedule_ = legal_tile_schedule(ts_, pi_, k_);
    for (const TileCoord& tc : schedule_) {
        shifts_.push_back(*tile_translation(ts_, tc));
        full_.push_back(is_full_tile(a_, ts_, tc, pi_) ? 1 : 0);
    }

    std::uint64_t capacity_bits = 0;
    switch (variant_) {
        case Variant::MarsCompressed: capacity_bits = worst_case_tile_bits(a_.output_words, n_); break;
        case Variant::MarsPacked: capacity_bits = a_.output_words * static_cast<std::uint64_t>(n_); break;
        case Variant::MarsPadded: capacity_bits = a_.output_words * static_cast<std::uint64_t>(container_); break;
        default: break;
    }
    alloc_ = allocate_blocks(schedule_, (capacity_bits + 7) / 8, opts_.bus.width_bits);
    if (mars()) memory_ = std::make_unique<BlockMemory>(alloc_.total_bytes);
    if (variant_ == Variant::MarsPacked) fixed_layout_ = fixed_block_layout(a_.words_by_position, n_);
    if (variant_ == Variant::MarsPadded) fixed_layout_ = fixed_block_layout(a_.words_by_position, container_, n_);
    markers_.assign(schedule_.size(), std::nullopt);
    init_ = initial_grid(k_, pi_);
    grid_ = init_;
    original_ = OriginalLayout{pi_.spatial_sizes, depth_, container_, n_};

    std::vector<TileOutcome> outcomes(schedule_.size());
    std::uint64_t host_saturations = 0;
    const int threads = std::max(1, opts_.threads);
    for (std::size_t begin = 0; begin < schedule_.size();) {
        std::size_t end = begin;
        while (end < schedule_.size() && wavefront_of(schedule_[end]) == wavefront_of(schedule_[begin])) ++end;

        std::vector<std::size_t> fulls;
        for (std::size_t i = begin; i < end; ++i)
            if (full_[i]) fulls.push_back(i);
        if (threads == 1 || fulls.size() < 2) {
            for (std::size_t i : fulls) outcomes[i] = run_full(i);
        } else {
            std::atomic<std::size_t> next{0};
            std::exception_ptr failure;
            std::mutex failure_mutex;
            auto worker = [&] {
                for (std::size_t j; (j = next.fetch_add(1)) < fulls.size();) {
                    try {
                        outcomes[fulls[j]] = run_full(fulls[j]);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            };
            std::vector<std::thread> pool;
            const auto count = std::min<std::size_t>(static_cast<std::size_t>(threads), fulls.size());
            for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
            if (failure) std::rethrow_exception(failure);
        }
        for (std::size_t i = begin; i < end; ++i)
            if (!full_[i]) host_saturations += run_host(i);
        begin = end;
    }

    SimResult result;
    SimReport& r = result.report;
    r.variant = variant_;
    r.saturations = host_saturations;
    for (std::size_t i = 0; i < schedule_.size(); ++i) {
        if (!full_[i]) {
            ++r.tiles_host;
            continue;
        }
        ++r.tiles_fpga;
        TileOutcome& o = outcomes[i];
        r.saturations += o.saturations;
        if (o.stats.compressed_bits > o.stats.words * static_cast<std::uint64_t>(n_)) ++r.expanded_blocks;
        if (opts_.keep_transfers) result.log.append(o.log);
        r.reads += o.stats.reads;
        r.writes += o.stats.writes;
        result.tiles.push_back(std::move(o.stats));
    }
    r.cycles = r.reads.cycles + r.writes.cycles;
    if (variant_ == Variant::MarsCompressed && r.tiles_fpga > 0) {
        const auto [ratio_true, ratio_padded] = compression_stats(result.tiles, k_.dtype);
        r.ratio_true = ratio_true;
        r.ratio_with_padding = ratio_padded;
    }

    std::optional<ReferenceResult> own;
    const ReferenceResult* ref = opts_.reference;
    if (!ref) ref = &own.emplace(run_reference(k_, pi_));
    r.reference_saturations = ref->saturations;
    if (ref->grid.cells().size() == grid_.cells().size()) {
        for (std::size_t i = 0; i < grid_.cells().size(); ++i)
            if (grid_.cells()[i] != ref->grid.cells()[i]) ++r.mismatches;
        r.correct = r.mismatches == 0;
    } else {
        r.mismatches = grid_.cells().size();
        r.correct = false;
    }
    result.grid = std::move(grid_);
    return result;
}

}  // namespace

SimResult run_tiled(const Kernel& k, const TilingScheme& ts, const ProblemInstance& pi, Variant variant,
                    const SimOptions& opts) {
    k.validate();
    ts.validate();
    pi.validate(k);
    opts.bus.validate();
    std::optional<TileAnalysis> own;
    const TileAnalysis* a = opts.analysis;
    if (!a) a = &own.emplace(TileAnalysis::build(ts, k));
    TiledRun run(k, ts, pi, variant, opts, *a);
    return run.run();
}

}  // namespace burstlab
