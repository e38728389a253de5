#pragma once
// Independent oracles and random generators shared by the unit tests and the
// acceptance suite. Nothing here calls the library code it is used to check.

#include <burstlab/kernel_model.hpp>
#include <burstlab/layout.hpp>
#include <burstlab/numeric.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using burstlab::Point;
using burstlab::TileCoord;

inline std::int64_t fdiv(std::int64_t a, std::int64_t b) {
    return static_cast<std::int64_t>(std::floor(static_cast<long double>(a) / static_cast<long double>(b)));
}

/// Straight from the definitions: diamond (floor((t+i)/s1), floor((t-i)/s2)),
/// skewed-rect floor((S p) / s).
inline TileCoord tile_of(const Point& p, const burstlab::TilingScheme& ts) {
    const std::size_t n = ts.sizes.size();
    TileCoord c(n);
    if (ts.kind == burstlab::TilingKind::Diamond1D) {
        c[0] = fdiv(p[0] + p[1], ts.sizes[0]);
        c[1] = fdiv(p[0] - p[1], ts.sizes[1]);
        return c;
    }
    for (std::size_t r = 0; r < n; ++r) {
        std::int64_t y = 0;
        for (std::size_t k = 0; k < n; ++k) y += (ts.skew.empty() ? (r == k) : ts.skew[r][k]) * p[k];
        c[r] = fdiv(y, ts.sizes[r]);
    }
    return c;
}

/// Calls f for every integer point in [lo, hi].
template <typename F>
void scan_box(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi, F&& f) {
    Point p = Point::from(lo);
    for (;;) {
        f(p);
        std::size_t k = lo.size();
        for (;;) {
            if (k == 0) return;
            --k;
            if (++p[k] <= hi[k]) break;
            p[k] = lo[k];
        }
    }
}

/// Radius of a box around the origin guaranteed to contain tile 0 and its
/// dependence neighbourhood.
inline std::int64_t reach(const burstlab::TilingScheme& ts, const burstlab::Kernel& k) {
    std::int64_t r = 0;
    for (auto s : ts.sizes) r += s;
    std::int64_t skew = 1;
    for (const auto& row : ts.skew)
        for (auto v : row) skew = std::max<std::int64_t>(skew, std::abs(v));
    std::int64_t dep = 0;
    for (const auto& d : k.deps)
        for (auto v : d.delta) dep = std::max<std::int64_t>(dep, std::abs(v));
    return r * skew + dep + 2;
}

/// Points of tile 0 by scanning a box and testing membership.
inline std::vector<Point> tile_points(const burstlab::TilingScheme& ts, const burstlab::Kernel& k) {
    const auto r = reach(ts, k);
    const std::size_t n = ts.sizes.size();
    std::vector<Point> out;
    const TileCoord origin(n);
    scan_box(std::vector<std::int64_t>(n, -r), std::vector<std::int64_t>(n, r), [&](const Point& p) {
        if (oracle::tile_of(p, ts) == origin) out.push_back(p);
    });
    return out;
}

/// Signature -> points map of tile 0, the second enumeration path for MARS.
inline std::map<std::vector<TileCoord>, std::vector<Point>> signature_groups(const burstlab::TilingScheme& ts,
                                                                            const burstlab::Kernel& k) {
    std::map<std::vector<TileCoord>, std::vector<Point>> groups;
    const TileCoord origin(ts.sizes.size());
    for (const Point& p : tile_points(ts, k)) {
        std::set<TileCoord> consumers;
        for (const auto& d : k.deps) {
            TileCoord c = oracle::tile_of(p + d.delta, ts);
            if (c != origin) consumers.insert(c);
        }
        if (!consumers.empty()) groups[{consumers.begin(), consumers.end()}].push_back(p);
    }
    return groups;
}

/// Best objective over all n! orders.
inline std::int64_t brute_force_layout(const burstlab::WeightMatrix& w) {
    std::vector<std::size_t> perm(w.n);
    std::iota(perm.begin(), perm.end(), 0);
    std::int64_t best = 0;
    do {
        std::int64_t v = 0;
        for (std::size_t k = 0; k + 1 < perm.size(); ++k) v += w.at(perm[k], perm[k + 1]);
        best = std::max(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Maximal runs of consecutive positions occupied by `ids` in `order`.
inline std::size_t runs(const std::vector<std::size_t>& order, const std::vector<std::size_t>& ids) {
    std::size_t count = 0;
    bool inside = false;
    for (std::size_t id : order) {
        const bool hit = std::find(ids.begin(), ids.end(), id) != ids.end();
        if (hit && !inside) ++count;
        inside = hit;
    }
    return count;
}

// ---- codec ------------------------------------------------------------------

/// Bits as a '0'/'1' string, appended LSB first.
inline void put(std::string& s, std::uint64_t v, int nbits) {
    for (int b = 0; b < nbits; ++b) s.push_back(((v >> b) & 1) ? '1' : '0');
}

/// Reference encoder written from the token description: header N-L on
/// floor(1+log2 N) bits, sign, then max(N-L-1, 0) low bits of delta.
inline std::string encode_bits(const std::vector<std::uint64_t>& words, int n) {
    const std::uint64_t mask = n == 64 ? ~0ULL : ((1ULL << n) - 1);
    int hw = 0;
    while ((1 << hw) <= n) ++hw;  // floor(1 + log2 n)
    std::string s;
    put(s, words[0] & mask, n);
    for (std::size_t i = 1; i < words.size(); ++i) {
        const std::uint64_t delta = (words[i] - words[i - 1]) & mask;
        const bool negative = (delta >> (n - 1)) & 1;
        int leading = 0;
        for (int b = n - 1; b >= 0 && (((delta >> b) & 1) == (negative ? 1u : 0u)); --b) ++leading;
        const int header = n - leading;
        const int payload = std::max(header - 1, 0);
        put(s, static_cast<std::uint64_t>(header), hw);
        put(s, negative ? 1 : 0, 1);
        put(s, delta & (payload == 64 ? ~0ULL : ((1ULL << payload) - 1)), payload);
    }
    return s;
}

// ---- generators -------------------------------------------------------------

/// Word streams mixing smooth walks, repeats and raw noise.
inline std::vector<std::uint64_t> random_stream(std::mt19937_64& rng, int n, std::size_t max_len) {
    const std::uint64_t mask = n == 64 ? ~0ULL : ((1ULL << n) - 1);
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    std::vector<std::uint64_t> out(len(rng));
    const int mode = static_cast<int>(rng() % 4);
    std::uint64_t cur = rng() & mask;
    for (auto& w : out) {
        switch (mode) {
            case 0: cur = rng() & mask; break;                  // noise
            case 1: cur += (rng() % 7) - 3; break;              // smooth walk
            case 2: if (rng() % 4 == 0) cur = rng(); break;     // mostly repeats
            default: cur += (rng() & ((1ULL << (rng() % n)) - 1)) * ((rng() & 1) ? 1 : ~0ULL); break;
        }
        cur &= mask;
        w = cur;
    }
    return out;
}

inline burstlab::WeightMatrix random_weights(std::mt19937_64& rng, std::size_t n, std::int64_t max_w = 3) {
    burstlab::WeightMatrix w(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) w.at(i, j) = w.at(j, i) = static_cast<std::int64_t>(rng() % (max_w + 1));
    return w;
}

struct Synthetic {
    burstlab::Kernel kernel;
    burstlab::TilingScheme tiling;
};

/// Random uniform stencil with a tiling that is legal by construction:
/// 1-D kernels with deps (1, di) under diamond tiles, 2-D kernels with
/// deps (1, di, dj) under the (t, t+i, t+j) skew; |di|, |dj| <= 1.
inline Synthetic random_kernel(std::mt19937_64& rng) {
    Synthetic s;
    const bool two_d = rng() % 2;
    std::set<Point> deps;
    const std::size_t want = 1 + rng() % (two_d ? 6 : 3);
    while (deps.size() < want) {
        const std::int64_t dt = 1;
        auto spatial = [&] { return static_cast<std::int64_t>(rng() % 3) - 1; };
        if (two_d)
            deps.insert(Point{dt, spatial(), spatial()});
        else
            deps.insert(Point{dt, spatial()});
    }
    s.kernel.name = "synthetic";
    s.kernel.dim = two_d ? 3 : 2;
    for (const Point& d : deps) s.kernel.deps.push_back({d});
    s.kernel.coeffs = {burstlab::Coefficient::parse("0.25")};
    s.kernel.dtype = burstlab::DataTypeSpec::fixed(18);
    auto size = [&](std::int64_t lo, std::int64_t hi) { return lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)); };
    if (two_d) {
        s.tiling = burstlab::TilingScheme::skewed_rect({size(2, 5), size(3, 7), size(3, 7)},
                                                       {{1, 0, 0}, {1, 1, 0}, {1, 0, 1}});
    } else {
        s.tiling = burstlab::TilingScheme::diamond(2 * size(2, 6), 2 * size(2, 6));
    }
    return s;
}

}  // namespace oracle
