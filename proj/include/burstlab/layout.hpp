#pragma once
// Ordering of a tile's output MARS in memory so that consumers can coalesce
// reads of adjacent MARS, plus per-tile block allocation.
//
// Maximizing contiguities over a permutation with successor variables is the
// maximum-weight Hamiltonian path problem on the co-consumption weights; the
// exact solver runs a subset DP over (visited set, last MARS).

#include <burstlab/kernel_model.hpp>
#include <burstlab/mars.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace burstlab {

struct WeightMatrix {
    std::size_t n = 0;
    std::vector<std::int64_t> w;  // row-major n x n

    explicit WeightMatrix(std::size_t size = 0) : n(size), w(size * size, 0) {}
    std::int64_t& at(std::size_t i, std::size_t j) { return w[i * n + j]; }
    std::int64_t at(std::size_t i, std::size_t j) const { return w[i * n + j]; }
};

struct LayoutOrder {
    std::vector<std::size_t> order;  // MARS ids, memory order
    std::vector<std::size_t> gamma;  // gamma[id] = position
    std::int64_t objective = 0;

    static LayoutOrder from_order(std::vector<std::size_t> order, const WeightMatrix& w);
};

/// w[i][j] = number of consumer offsets reading both MARS i and j.
WeightMatrix build_weights(const std::vector<Mars>& outputs);

inline constexpr std::size_t kMaxExactMars = 20;

/// Optimal order; ties resolve to the lexicographically smallest order.
/// Throws TooManyMars above kMaxExactMars.
LayoutOrder solve_layout_exact(const WeightMatrix& w);

/// Path-merging heuristic: take edges by decreasing weight (ties by index)
/// while they join two fragment endpoints, then concatenate fragments.
LayoutOrder solve_layout_greedy(const WeightMatrix& w);

/// Exact when possible, greedy otherwise.
LayoutOrder solve_layout(const WeightMatrix& w, bool* used_exact = nullptr);

/// Sum of weights of adjacent pairs.
std::int64_t layout_objective(const std::vector<std::size_t>& order, const WeightMatrix& w);

/// CPLEX-LP text of the successor/position model with big-M linearization.
std::string export_ilp(const WeightMatrix& w);

struct ProducerBursts {
    TileCoord producer_offset;
    std::vector<std::size_t> mars;  // consumed MARS ids
    std::size_t bursts = 0;
    // Maximal runs of consecutive layout positions, as [first, last] positions.
    std::vector<std::pair<std::size_t, std::size_t>> runs;
};

struct BurstCount {
    std::vector<ProducerBursts> per_producer;  // sorted by producer offset
    std::size_t total = 0;
};

/// Reads never coalesce across producer tiles.
BurstCount count_read_bursts(const LayoutOrder& layout, const std::vector<InputMars>& input_map);

struct TileBlock {
    std::uint64_t base_bytes = 0;
    std::uint64_t capacity_bytes = 0;
};

struct AllocationMap {
    std::vector<TileCoord> tiles;  // schedule order
    std::vector<TileBlock> blocks;
    std::uint64_t total_bytes = 0;

    /// Index of the tile in schedule order; throws when absent.
    std::size_t index_of(const TileCoord& tc) const;

private:
    friend AllocationMap allocate_blocks(const std::vector<TileCoord>&, std::uint64_t, int);
    std::vector<std::pair<TileCoord, std::size_t>> lookup_;  // sorted
};

/// Contiguous, disjoint, bus-aligned block per tile in schedule order.
AllocationMap allocate_blocks(const std::vector<TileCoord>& schedule, std::uint64_t capacity_bytes, int bus_width_bits);

/// Upper bound on a compressed tile: each word costs at most N + floor(1+log2 N) + 1 bits.
std::uint64_t worst_case_tile_bits(std::uint64_t total_words, int word_bits);

}  // namespace burstlab
