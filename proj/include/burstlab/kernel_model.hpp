#pragma once
// Stencil kernels, tiling schemes and tile enumeration.
//
// The value space uses an identity producer map: iteration (t, x) produces the
// logical value (t, x). A dependence vector d means iteration q reads the value
// produced at q - d, so the value at p is consumed by the iterations p + d.

#include <burstlab/common.hpp>

#include <optional>
#include <string>
#include <vector>

namespace burstlab {

enum class NumberKind { Fixed, Float };

struct DataTypeSpec {
    NumberKind kind = NumberKind::Fixed;
    int total_bits = 18;
    int frac_bits = 10;
    bool is_signed = true;

    static DataTypeSpec fixed(int bits, std::optional<int> frac = std::nullopt, bool is_signed = true);
    static DataTypeSpec floating(int bits);

    /// Throws ConfigError when the invariants do not hold.
    void validate() const;

    /// Aligned container a padded word occupies: the next power of two, at least one byte.
    int container_bits() const;

    std::string str() const;  // "fixed:18:10" or "float:32"
    friend bool operator==(const DataTypeSpec&, const DataTypeSpec&) = default;
};

/// Parses "fixed:N", "fixed:N:frac", "ufixed:N:frac" or "float:N".
DataTypeSpec parse_dtype(const std::string& text);

/// Update coefficient, kept as written: either a decimal literal ("0.33")
/// or an exact rational ("1/3"). Rationals divide last, so "1/9" reproduces
/// the `sum / 9.0` form.
struct Coefficient {
    bool rational = false;
    double decimal = 1.0;
    std::int64_t numerator = 1;
    std::int64_t denominator = 1;
    std::string text = "1";

    static Coefficient parse(const std::string& text);
    double as_double() const { return rational ? double(numerator) / double(denominator) : decimal; }
};

struct DependenceVector {
    Point delta;
};

struct Kernel {
    std::string name;
    std::size_t dim = 0;  // time + space
    std::vector<DependenceVector> deps;
    // One entry: common factor applied to the operand sum (PolyBench style).
    // One entry per dependence: weighted sum.
    std::vector<Coefficient> coeffs;
    DataTypeSpec dtype;

    /// Throws ConfigError when deps are empty, duplicated, of the wrong
    /// length or not lexicographically positive.
    void validate() const;
};

enum class TilingKind { Diamond1D, SkewedRect };

/// Rectangular tiling of a transformed iteration space. Diamond tiling uses
/// the hyperplanes (t+i, t-i); skewed-rect applies a unimodular skew first.
struct TilingScheme {
    TilingKind kind = TilingKind::SkewedRect;
    std::vector<std::int64_t> sizes;
    std::vector<std::vector<std::int64_t>> skew;  // skewed-rect only; empty means identity

    static TilingScheme diamond(std::int64_t s1, std::int64_t s2);
    static TilingScheme skewed_rect(std::vector<std::int64_t> sizes,
                                    std::vector<std::vector<std::int64_t>> skew = {});

    std::size_t point_dims() const { return sizes.size(); }
    void validate() const;
    std::string str() const;
};

enum class InitKind { PolyBench, Constant, Random };

struct InitSpec {
    InitKind kind = InitKind::PolyBench;
    double value = 1.0;        // constant
    double low = 0.0;          // random
    double high = 1.0;         // random
    std::uint64_t seed = 42;   // random
};

struct ProblemInstance {
    std::int64_t time_steps = 1;
    std::vector<std::int64_t> spatial_sizes;
    InitSpec init;

    void validate(const Kernel& k) const;
};

// ---- tiling geometry -------------------------------------------------------

/// Coordinates of the point in the tiling hyperplane basis (before division).
std::vector<std::int64_t> hyperplane_coords(const Point& p, const TilingScheme& ts);

TileCoord tile_of(const Point& p, const TilingScheme& ts);

/// All points of a tile, lexicographically sorted. No domain clipping.
std::vector<Point> enumerate_tile_points(const TilingScheme& ts, const TileCoord& tc);

/// Point offset mapping tile 0 onto tile `tc`, or nullopt when tiles are not
/// translates of each other (diamond tiling with odd sizes).
std::optional<Point> tile_translation(const TilingScheme& ts, const TileCoord& tc);

/// Tile offsets (consumer - producer) of every inter-tile dependence leaving tile 0.
std::vector<TileCoord> tile_dependence_offsets(const TilingScheme& ts, const Kernel& k);

/// Throws IllegalTiling when some dependence points backwards in tile space.
void check_tiling_legal(const TilingScheme& ts, const Kernel& k);

/// All tiles holding a value point of the problem, in wavefront order:
/// ascending sum of tile coordinates, then lexicographic.
std::vector<TileCoord> legal_tile_schedule(const TilingScheme& ts, const ProblemInstance& pi,
                                           const Kernel& k);

/// Wavefront index of a tile under legal_tile_schedule.
std::int64_t wavefront_of(const TileCoord& tc);

// ---- problem domain --------------------------------------------------------

/// Number of storage planes in the original allocation (2 for A/B arrays,
/// 1 for in-place kernels).
int temporal_depth(const Kernel& k);

/// True when p is an iteration: 1 <= t <= T and interior in every spatial dim.
bool is_iteration(const Point& p, const ProblemInstance& pi);

/// True when p names a stored value: 0 <= t <= T and inside the arrays.
bool in_value_space(const Point& p, const ProblemInstance& pi);

// ---- presets ---------------------------------------------------------------

struct Preset {
    Kernel kernel;
    TilingScheme tiling;
    ProblemInstance problem;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
Preset make_preset(const std::string& name);

}  // namespace burstlab
