#pragma once
// Off-chip bus model and transfer planning.
//
// A burst costs a fixed initiation latency plus one cycle per bus-width beat;
// bursts longer than max_burst_beats are split. Addresses are in bits.

#include <burstlab/kernel_model.hpp>
#include <burstlab/layout.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace burstlab {

enum class Variant { MarsCompressed, MarsPacked, MarsPadded, BaselineMinimal, BaselineBbox };

std::string to_string(Variant v);
/// Throws ConfigError for unknown names.
Variant parse_variant(const std::string& name);
std::vector<Variant> all_variants();
bool is_mars_variant(Variant v);

struct BusConfig {
    int width_bits = 64;
    int burst_latency = 16;
    int max_burst_beats = 256;

    void validate() const;
};

enum class Direction { Read, Write };

struct Transfer {
    TileCoord tile;  // tile on whose behalf the transfer runs
    Direction direction = Direction::Read;
    std::uint64_t start_bit = 0;
    std::uint64_t length_bits = 0;
    std::uint64_t useful_bits = 0;
    std::uint64_t cycles = 0;
};

struct TransferTotals {
    std::uint64_t bursts = 0;
    std::uint64_t cycles = 0;
    std::uint64_t transferred_bits = 0;
    std::uint64_t useful_bits = 0;

    TransferTotals& operator+=(const TransferTotals& o);
};

class TransferLog {
public:
    /// Fills in `cycles`; throws Error when the transfer is not bus aligned.
    void add(Transfer t, const BusConfig& cfg);
    void append(const TransferLog& other);

    const std::vector<Transfer>& transfers() const { return transfers_; }
    const TransferTotals& reads() const { return reads_; }
    const TransferTotals& writes() const { return writes_; }
    std::uint64_t cycles() const { return reads_.cycles + writes_.cycles; }

    /// CSV rows: tile, direction, startBit, lengthBits, usefulBits, cycles.
    std::string to_csv(bool header = true) const;

private:
    std::vector<Transfer> transfers_;
    TransferTotals reads_;
    TransferTotals writes_;
};

/// Throws Error when length is not a multiple of the bus width.
std::uint64_t burst_cycles(std::uint64_t length_bits, const BusConfig& cfg);

/// Transfer covering bits [begin, end), widened to bus-word boundaries.
Transfer aligned_transfer(const TileCoord& tile, Direction dir, std::uint64_t begin_bit, std::uint64_t end_bit,
                          std::uint64_t useful_bits, const BusConfig& cfg);

// ---- MARS layouts ----------------------------------------------------------

/// Bit offsets of the MARS of one tile block, by layout position.
struct MarsBlockLayout {
    std::vector<std::uint64_t> start;    // per layout position, relative to the block base
    std::vector<std::uint64_t> payload;  // data bits per position; empty means end - start
    std::uint64_t content_end = 0;

    std::uint64_t end(std::size_t pos) const { return pos + 1 < start.size() ? start[pos + 1] : content_end; }
    std::uint64_t payload_bits(std::size_t pos) const { return payload.empty() ? end(pos) - start[pos] : payload[pos]; }
};

/// Uncompressed block: words of `bits_per_word` each, MARS in layout order.
/// `payload_bits_per_word` (default: bits_per_word) is what counts as useful.
MarsBlockLayout fixed_block_layout(const std::vector<std::size_t>& words_by_position, int bits_per_word,
                                   int payload_bits_per_word = 0);

struct PlannedRead {
    Transfer transfer;
    TileCoord producer;
    std::size_t first_position = 0;
    std::size_t last_position = 0;
};

using BlockLayoutLookup = std::function<const MarsBlockLayout&(const TileCoord& producer)>;

/// One transfer per run of consecutive layout positions per producer.
/// Throws Error when a producer has no block or layout.
std::vector<PlannedRead> plan_mars_reads(const TileCoord& tile, const BurstCount& runs, const AllocationMap& alloc,
                                         const BlockLayoutLookup& layout_of, const BusConfig& cfg);

/// The whole tile block in a single transfer.
Transfer plan_mars_write(const TileCoord& tile, const AllocationMap& alloc, const MarsBlockLayout& layout,
                         const BusConfig& cfg);

// ---- baselines on the original layout ---------------------------------------

/// Original program arrays: plane (t mod depth) then row-major spatial
/// coordinates, one padded container per word.
struct OriginalLayout {
    std::vector<std::int64_t> spatial_sizes;
    int depth = 2;
    int container_bits = 32;
    int word_bits = 18;

    std::uint64_t cell_index(const Point& value_point) const;
    std::uint64_t bit_address(const Point& value_point) const {
        return cell_index(value_point) * static_cast<std::uint64_t>(container_bits);
    }
};

/// Exact footprint; consecutive bus words coalesce into one burst.
TransferLog baseline_minimal(const TileCoord& tile, const std::vector<Point>& footprint, Direction dir,
                             const OriginalLayout& layout, const BusConfig& cfg);

/// Per time plane, the full spatial bounding box of the footprint.
TransferLog baseline_bbox(const TileCoord& tile, const std::vector<Point>& footprint, Direction dir,
                          const OriginalLayout& layout, const BusConfig& cfg);

}  // namespace burstlab
