#pragma once
// Extraction of MARS (maximal atomic irredundant sets) by enumeration over one
// representative full tile.
//
// Two flow-out points belong to the same MARS iff they are consumed by exactly
// the same set of neighbour tiles. All coordinates are relative to the tile
// origin; full tiles are translates of each other, so one analysis serves all.

#include <burstlab/kernel_model.hpp>

#include <optional>
#include <string>
#include <vector>

namespace burstlab {

/// Sorted set of consumer-tile offsets (consumer - producer), never empty.
struct ConsumerSignature {
    std::vector<TileCoord> offsets;

    bool contains(const TileCoord& o) const;
    friend bool operator==(const ConsumerSignature&, const ConsumerSignature&) = default;
    friend auto operator<=>(const ConsumerSignature& a, const ConsumerSignature& b) {
        return a.offsets <=> b.offsets;
    }
};

struct Mars {
    std::size_t id = 0;
    std::vector<Point> points;  // lexicographic
    ConsumerSignature signature;

    std::size_t size_words() const { return points.size(); }
};

struct InputMars {
    TileCoord producer_offset;  // producer - consumer
    std::size_t mars_id = 0;    // index into the producer's outputs
};

struct TileIOSummary {
    std::vector<Mars> outputs;
    std::vector<InputMars> inputs;
};

std::optional<ConsumerSignature> consumer_signature(const Point& p, const TilingScheme& ts, const Kernel& k);

/// Output MARS of `tile` (default: the origin tile), points relative to its origin,
/// ordered by smallest point.
std::vector<Mars> extract_output_mars(const TilingScheme& ts, const Kernel& k,
                                      const std::optional<TileCoord>& tile = std::nullopt);

/// Every (producer offset, producer MARS) pair the origin tile reads, sorted.
std::vector<InputMars> extract_input_map(const TilingScheme& ts, const Kernel& k, const std::vector<Mars>& outputs);
std::vector<InputMars> extract_input_map(const TilingScheme& ts, const Kernel& k);

TileIOSummary analyze_tile(const TilingScheme& ts, const Kernel& k);

/// Points of the origin tile read by other tiles / points of other tiles read
/// by the origin tile. Both sorted.
std::vector<Point> flow_out_set(const TilingScheme& ts, const Kernel& k);
std::vector<Point> flow_in_set(const TilingScheme& ts, const Kernel& k);

/// Throws IllegalTiling / Error when the tiling cannot be analysed with a
/// single representative tile.
void require_translation_invariant(const TilingScheme& ts);

struct PartitionReport {
    bool ok = true;
    std::vector<std::string> problems;  // human-readable counterexamples
};

/// Checks disjointness and coverage of output and input MARS, atomicity
/// (each consumer reads all or nothing of a MARS) and maximality (distinct
/// signatures).
PartitionReport verify_partition(const TileIOSummary& summary, const TilingScheme& ts, const Kernel& k);

}  // namespace burstlab
