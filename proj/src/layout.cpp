#include <burstlab/layout.hpp>

#include <bit>
#include <map>
#include <numeric>
#include <sstream>

namespace burstlab {

LayoutOrder LayoutOrder::from_order(std::vector<std::size_t> order, const WeightMatrix& w) {
    LayoutOrder l;
    l.gamma.assign(order.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) l.gamma.at(order[pos]) = pos;
    l.objective = layout_objective(order, w);
    l.order = std::move(order);
    return l;
}

WeightMatrix build_weights(const std::vector<Mars>& outputs) {
    WeightMatrix w(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i)
        for (std::size_t j = 0; j < outputs.size(); ++j) {
            if (i == j) continue;
            std::int64_t shared = 0;
            for (const TileCoord& c : outputs[i].signature.offsets) shared += outputs[j].signature.contains(c);
            w.at(i, j) = shared;
        }
    return w;
}

std::int64_t layout_objective(const std::vector<std::size_t>& order, const WeightMatrix& w) {
    std::int64_t total = 0;
    for (std::size_t k = 1; k < order.size(); ++k) total += w.at(order[k - 1], order[k]);
    return total;
}

LayoutOrder solve_layout_exact(const WeightMatrix& w) {
    const std::size_t n = w.n;
    if (n > kMaxExactMars)
        throw TooManyMars(std::to_string(n) + " MARS exceed the exact solver limit of " + std::to_string(kMaxExactMars));
    if (n == 0) return {};

    // rest[mask * n + last]: best weight still obtainable after visiting `mask`
    // and ending at `last`. Filled from the full set downwards.
    const std::size_t full = (std::size_t{1} << n) - 1;
    constexpr std::int32_t kUnset = -1;
    std::vector<std::int32_t> rest((full + 1) * n, kUnset);
    for (std::size_t last = 0; last < n; ++last) rest[full * n + last] = 0;
    for (std::size_t mask = full; mask-- > 1;) {
        for (std::size_t last = 0; last < n; ++last) {
            if (!(mask >> last & 1)) continue;
            std::int32_t best = kUnset;
            for (std::size_t next = 0; next < n; ++next) {
                if (mask >> next & 1) continue;
                const std::size_t m2 = mask | (std::size_t{1} << next);
                best = std::max<std::int32_t>(best, static_cast<std::int32_t>(w.at(last, next)) + rest[m2 * n + next]);
            }
            rest[mask * n + last] = best;
        }
    }

    // Walk forward taking the smallest id that keeps the optimum.
    std::size_t first = 0;
    for (std::size_t s = 1; s < n; ++s)
        if (rest[(std::size_t{1} << s) * n + s] > rest[(std::size_t{1} << first) * n + first]) first = s;
    std::vector<std::size_t> order{first};
    std::size_t mask = std::size_t{1} << first;
    while (mask != full) {
        const std::size_t last = order.back();
        const std::int32_t target = rest[mask * n + last];
        for (std::size_t next = 0; next < n; ++next) {
            if (mask >> next & 1) continue;
            const std::size_t m2 = mask | (std::size_t{1} << next);
            if (static_cast<std::int32_t>(w.at(last, next)) + rest[m2 * n + next] == target) {
                order.push_back(next);
                mask = m2;
                break;
            }
        }
    }
    return LayoutOrder::from_order(std::move(order), w);
}

LayoutOrder solve_layout_greedy(const WeightMatrix& w) {
    const std::size_t n = w.n;
    struct Edge {
        std::int64_t weight;
        std::size_t i, j;
    };
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::max(w.at(i, j), w.at(j, i)) > 0) edges.push_back({std::max(w.at(i, j), w.at(j, i)), i, j});
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.weight > b.weight; });

    std::vector<std::size_t> parent(n), degree(n, 0);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::vector<std::size_t>> adj(n);
    for (const Edge& e : edges) {
        if (degree[e.i] >= 2 || degree[e.j] >= 2) continue;
        auto ri = find(e.i), rj = find(e.j);
        if (ri == rj) continue;
        parent[ri] = rj;
        ++degree[e.i];
        ++degree[e.j];
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }

    // Each fragment starts at its smaller endpoint; fragments in order of that endpoint.
    std::vector<bool> placed(n, false);
    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < n; ++s) {
        if (placed[s] || degree[s] == 2) continue;
        std::size_t prev = n, cur = s;
        while (cur != n) {
            placed[cur] = true;
            order.push_back(cur);
            std::size_t next = n;
            for (std::size_t nb : adj[cur])
                if (nb != prev) next = nb;
            prev = cur;
            cur = next;
        }
    }
    return LayoutOrder::from_order(std::move(order), w);
}

LayoutOrder solve_layout(const WeightMatrix& w, bool* used_exact) {
    const bool exact = w.n <= kMaxExactMars;
    if (used_exact) *used_exact = exact;
    return exact ? solve_layout_exact(w) : solve_layout_greedy(w);
}

std::string export_ilp(const WeightMatrix& w) {
    const std::size_t n = w.n;
    const std::int64_t big_m = 2 * static_cast<std::int64_t>(std::max<std::size_t>(n, 1));
    auto d = [](std::size_t i, std::size_t j) { return "d_" + std::to_string(i) + "_" + std::to_string(j); };
    auto g = [](std::size_t i) { return "g_" + std::to_string(i); };
    auto z = [](std::size_t i, std::size_t j) { return "z_" + std::to_string(i) + "_" + std::to_string(j); };
    auto y = [](std::size_t i, std::size_t j) { return "y_" + std::to_string(i) + "_" + std::to_string(j); };

    std::ostringstream os;
    os << "\\ MARS layout: maximize contiguities between co-consumed MARS\n";
    os << "\\ d_i_j = 1 iff MARS i is immediately before MARS j; g_i = position of MARS i\n";
    os << "\\ big-M = " << big_m << "\n";
    os << "Maximize\n obj:";
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && w.at(i, j) != 0) {
                os << (any ? " + " : " ") << w.at(i, j) << " " << d(i, j);
                any = true;
            }
    if (!any) os << " 0 " << d(0, 0);
    os << "\nSubject To\n";
    for (std::size_t i = 0; i < n; ++i) os << " self_" << i << ": " << d(i, i) << " = 0\n";
    for (std::size_t i = 0; i < n; ++i) {
        os << " out_" << i << ":";
        for (std::size_t j = 0; j < n; ++j) os << (j ? " + " : " ") << d(i, j);
        os << " <= 1\n";
    }
    for (std::size_t j = 0; j < n; ++j) {
        os << " in_" << j << ":";
        for (std::size_t i = 0; i < n; ++i) os << (i ? " + " : " ") << d(i, j);
        os << " <= 1\n";
    }
    os << " links:";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) os << ((i || j) ? " + " : " ") << d(i, j);
    os << " = " << (n == 0 ? 0 : n - 1) << "\n";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const std::string tag = std::to_string(i) + "_" + std::to_string(j);
            // d_i_j = 1  =>  g_j - g_i = 1
            os << " succ_le_" << tag << ": " << g(j) << " - " << g(i) << " + " << big_m << " " << d(i, j)
               << " <= " << 1 + big_m << "\n";
            os << " succ_ge_" << tag << ": " << g(j) << " - " << g(i) << " - " << big_m << " " << d(i, j)
               << " >= " << 1 - big_m << "\n";
            // d_i_j = 0  =>  g_j - g_i <= 0 (z = 0) or g_j - g_i >= 2 (z = 1)
            os << " nsucc_lo_" << tag << ": " << g(j) << " - " << g(i) << " - " << big_m << " " << d(i, j) << " - "
               << big_m << " " << z(i, j) << " <= 0\n";
            os << " nsucc_hi_" << tag << ": " << g(j) << " - " << g(i) << " + " << big_m << " " << d(i, j) << " - "
               << big_m << " " << z(i, j) << " >= " << 2 - big_m << "\n";
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::string tag = std::to_string(i) + "_" + std::to_string(j);
            // |g_i - g_j| >= 1
            os << " dist_a_" << tag << ": " << g(i) << " - " << g(j) << " + " << big_m << " " << y(i, j)
               << " >= 1\n";
            os << " dist_b_" << tag << ": " << g(j) << " - " << g(i) << " - " << big_m << " " << y(i, j)
               << " >= " << 1 - big_m << "\n";
        }
    os << "Bounds\n";
    for (std::size_t i = 0; i < n; ++i) os << " 0 <= " << g(i) << " <= " << n - 1 << "\n";
    os << "Binaries\n";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) os << " " << d(i, j) << "\n";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) os << " " << z(i, j) << "\n";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) os << " " << y(i, j) << "\n";
    os << "Generals\n";
    for (std::size_t i = 0; i < n; ++i) os << " " << g(i) << "\n";
    os << "End\n";
    return os.str();
}

BurstCount count_read_bursts(const LayoutOrder& layout, const std::vector<InputMars>& input_map) {
    std::map<TileCoord, std::vector<std::size_t>> consumed;
    for (const InputMars& in : input_map) consumed[in.producer_offset].push_back(in.mars_id);
    BurstCount bc;
    for (auto& [offset, ids] : consumed) {
        ProducerBursts pb;
        pb.producer_offset = offset;
        std::sort(ids.begin(), ids.end());
        pb.mars = ids;
        std::vector<std::size_t> pos;
        for (std::size_t id : ids) pos.push_back(layout.gamma.at(id));
        std::sort(pos.begin(), pos.end());
        for (std::size_t k = 0; k < pos.size(); ++k) {
            if (k == 0 || pos[k] != pos[k - 1] + 1)
                pb.runs.push_back({pos[k], pos[k]});
            else
                pb.runs.back().second = pos[k];
        }
        pb.bursts = pb.runs.size();
        bc.total += pb.bursts;
        bc.per_producer.push_back(std::move(pb));
    }
    return bc;
}

std::size_t AllocationMap::index_of(const TileCoord& tc) const {
    auto it = std::lower_bound(lookup_.begin(), lookup_.end(), tc,
                               [](const auto& e, const TileCoord& key) { return e.first < key; });
    if (it == lookup_.end() || it->first != tc) throw Error("tile " + tc.str() + " has no allocated block");
    return it->second;
}

AllocationMap allocate_blocks(const std::vector<TileCoord>& schedule, std::uint64_t capacity_bytes, int bus_width_bits) {
    const std::uint64_t bus_bytes = static_cast<std::uint64_t>(bus_width_bits) / 8;
    if (bus_bytes == 0) throw Error("bus width must be at least 8 bits");
    const std::uint64_t cap = std::max<std::uint64_t>(bus_bytes, (capacity_bytes + bus_bytes - 1) / bus_bytes * bus_bytes);
    AllocationMap a;
    a.tiles = schedule;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        a.blocks.push_back({k * cap, cap});
        a.lookup_.push_back({schedule[k], k});
    }
    std::sort(a.lookup_.begin(), a.lookup_.end());
    a.total_bytes = schedule.size() * cap;
    return a;
}

std::uint64_t worst_case_tile_bits(std::uint64_t total_words, int word_bits) {
    const auto header = static_cast<std::uint64_t>(std::bit_width(static_cast<unsigned>(word_bits)));
    return total_words * (static_cast<std::uint64_t>(word_bits) + header + 1);
}

}  // namespace burstlab
