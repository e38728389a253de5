#pragma once
// Tiled execution of a stencil with real data movement through a modeled
// off-chip memory, checked against an untiled reference run.
//
// Full tiles run the read, decompress, dispatch, compute, collect, compress,
// write sequence on an on-chip buffer. Partial tiles run on the host path
// directly on the value grid; their transfers are not counted.

#include <burstlab/codec.hpp>
#include <burstlab/kernel_model.hpp>
#include <burstlab/layout.hpp>
#include <burstlab/mars.hpp>
#include <burstlab/membus.hpp>
#include <burstlab/numeric.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace burstlab {

/// Storage planes for the original arrays. Uses temporal_depth when reusing
/// planes is safe under any tile order, else one plane per time step.
int storage_depth(const Kernel& k, const ProblemInstance& pi);

/// Word per (t mod depth, spatial coords).
class ValueGrid {
public:
    ValueGrid() = default;
    ValueGrid(std::vector<std::int64_t> spatial_sizes, int depth);

    Word& at(const Point& value_point) { return cells_[index(value_point)]; }
    Word at(const Point& value_point) const { return cells_[index(value_point)]; }
    std::size_t index(const Point& value_point) const;

    int depth() const { return depth_; }
    const std::vector<std::int64_t>& spatial_sizes() const { return sizes_; }
    const std::vector<Word>& cells() const { return cells_; }
    std::vector<Word>& cells() { return cells_; }

    friend bool operator==(const ValueGrid&, const ValueGrid&) = default;

private:
    std::vector<std::int64_t> sizes_;
    int depth_ = 1;
    std::vector<Word> cells_;
};

/// Initial contents of every plane, deterministic for a given problem.
ValueGrid initial_grid(const Kernel& k, const ProblemInstance& pi);

struct ReferenceResult {
    ValueGrid grid;
    std::uint64_t saturations = 0;
};

/// Untiled loop nest: t = 1..T, spatial interior in row-major order.
ReferenceResult run_reference(const Kernel& k, const ProblemInstance& pi);

/// Unrolled address table of one MARS: buffer slot per word.
struct DispatchTable {
    std::vector<std::uint32_t> addresses;
};

/// Throws std::out_of_range on a bad address or length mismatch.
void dispatch(std::span<const Word> mars_words, const DispatchTable& table, std::span<Word> buffer);
std::vector<Word> collect(std::span<const Word> buffer, const DispatchTable& table);

/// Everything the simulator precomputes from one representative tile.
struct TileAnalysis {
    TileIOSummary io;
    WeightMatrix weights;
    LayoutOrder layout;
    bool exact_layout = true;
    BurstCount bursts;

    std::vector<Point> tile_points;    // origin tile, lexicographic
    std::vector<Point> flow_in;        // relative to the origin tile
    std::vector<Point> buffer_points;  // tile points and flow-in, lexicographic
    std::unordered_map<Point, std::uint32_t, IntVectorHash> buffer_slot;

    std::vector<std::uint32_t> result_slot;    // per tile point
    std::vector<std::uint32_t> operand_slots;  // per tile point, deps.size() entries each
    std::vector<DispatchTable> input_tables;   // parallel to io.inputs
    std::vector<DispatchTable> output_tables;  // by MARS id
    std::vector<std::size_t> words_by_position;
    std::size_t output_words = 0;

    // Relative flow-out point -> (MARS id, index within MARS).
    std::unordered_map<Point, std::pair<std::size_t, std::size_t>, IntVectorHash> output_slot;

    Point box_lo, box_hi;  // bounding box of tile_points
    Point flow_in_lo, flow_in_hi;  // bounding box of flow_in

    static TileAnalysis build(const TilingScheme& ts, const Kernel& k);
    std::size_t input_index(const TileCoord& producer_offset, std::size_t mars_id) const;
};

struct SimOptions {
    BusConfig bus;
    int threads = 1;
    bool keep_transfers = true;                 // full-tile transfer list in the result
    const ReferenceResult* reference = nullptr;  // computed when absent
    const TileAnalysis* analysis = nullptr;      // computed when absent
};

struct TileStats {
    TileCoord tile;
    TransferTotals reads;
    TransferTotals writes;
    std::uint64_t words = 0;           // output words (MARS variants)
    std::uint64_t compressed_bits = 0;  // compressed variant only
};

struct SimReport {
    Variant variant = Variant::MarsCompressed;
    std::size_t tiles_fpga = 0;
    std::size_t tiles_host = 0;
    TransferTotals reads;
    TransferTotals writes;
    std::uint64_t cycles = 0;
    std::optional<double> ratio_true;
    std::optional<double> ratio_with_padding;
    std::size_t expanded_blocks = 0;  // blocks larger compressed than packed
    bool correct = false;
    std::size_t mismatches = 0;
    std::uint64_t saturations = 0;
    std::uint64_t reference_saturations = 0;
};

struct SimResult {
    SimReport report;
    std::vector<TileStats> tiles;  // full tiles, schedule order
    TransferLog log;               // full tiles only
    ValueGrid grid;
};

/// True when every point of tile `tc` is an iteration of the problem and
/// everything it reads from other tiles is a stored value.
bool is_full_tile(const TileAnalysis& a, const TilingScheme& ts, const TileCoord& tc, const ProblemInstance& pi);

SimResult run_tiled(const Kernel& k, const TilingScheme& ts, const ProblemInstance& pi, Variant variant,
                    const SimOptions& opts = {});

/// ratioTrue = packed bits / compressed bits, ratioWithPadding = padded bits /
/// compressed bits, summed over the given tiles.
std::pair<double, double> compression_stats(const std::vector<TileStats>& tiles, const DataTypeSpec& dtype);

}  // namespace burstlab
