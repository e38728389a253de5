#include <burstlab/kernel_model.hpp>

#include <bit>
#include <charconv>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

namespace burstlab {

// ---- data types ------------------------------------------------------------

DataTypeSpec DataTypeSpec::fixed(int bits, std::optional<int> frac, bool is_signed) {
    DataTypeSpec d;
    d.kind = NumberKind::Fixed;
    d.total_bits = bits;
    d.frac_bits = frac.value_or(std::max(bits - 8, 0));
    d.is_signed = is_signed;
    return d;
}

DataTypeSpec DataTypeSpec::floating(int bits) {
    DataTypeSpec d;
    d.kind = NumberKind::Float;
    d.total_bits = bits;
    d.frac_bits = 0;
    d.is_signed = true;
    return d;
}

void DataTypeSpec::validate() const {
    if (total_bits < 2 || total_bits > 64)
        throw ConfigError("kernel.dtype.totalBits", "must be within [2, 64]");
    if (kind == NumberKind::Fixed) {
        if (frac_bits < 0 || frac_bits >= total_bits)
            throw ConfigError("kernel.dtype.fracBits", "must be within [0, totalBits)");
    } else if (total_bits != 32 && total_bits != 64) {
        throw ConfigError("kernel.dtype.totalBits", "float types are 32 or 64 bits");
    }
}

int DataTypeSpec::container_bits() const {
    return std::max(8, static_cast<int>(std::bit_ceil(static_cast<unsigned>(total_bits))));
}

std::string DataTypeSpec::str() const {
    if (kind == NumberKind::Float) return "float:" + std::to_string(total_bits);
    return std::string(is_signed ? "fixed:" : "ufixed:") + std::to_string(total_bits) + ":" +
           std::to_string(frac_bits);
}

namespace {

int parse_int(const std::string& s, const std::string& path) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError(path, "expected an integer, got '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

DataTypeSpec parse_dtype(const std::string& text) {
    auto parts = split(text, ':');
    DataTypeSpec d;
    if ((parts[0] == "fixed" || parts[0] == "ufixed") && (parts.size() == 2 || parts.size() == 3)) {
        int bits = parse_int(parts[1], "dtype");
        std::optional<int> frac;
        if (parts.size() == 3) frac = parse_int(parts[2], "dtype");
        d = DataTypeSpec::fixed(bits, frac, parts[0] == "fixed");
    } else if (parts[0] == "float" && parts.size() == 2) {
        d = DataTypeSpec::floating(parse_int(parts[1], "dtype"));
    } else {
        throw ConfigError("dtype", "expected fixed:N[:frac] or float:N, got '" + text + "'");
    }
    d.validate();
    return d;
}

Coefficient Coefficient::parse(const std::string& text) {
    Coefficient c;
    c.text = text;
    if (auto slash = text.find('/'); slash != std::string::npos) {
        c.rational = true;
        std::string num = text.substr(0, slash), den = text.substr(slash + 1);
        auto parse64 = [&](const std::string& s) {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
                throw ConfigError("kernel.coeffs", "bad rational '" + text + "'");
            return v;
        };
        c.numerator = num.empty() ? 1 : parse64(num);
        c.denominator = parse64(den);
        if (c.denominator == 0) throw ConfigError("kernel.coeffs", "zero denominator in '" + text + "'");
        if (c.denominator < 0) {
            c.denominator = -c.denominator;
            c.numerator = -c.numerator;
        }
        c.decimal = double(c.numerator) / double(c.denominator);
        return c;
    }
    try {
        std::size_t used = 0;
        c.decimal = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw ConfigError("kernel.coeffs", "bad coefficient '" + text + "'");
    }
    return c;
}

// ---- kernel ----------------------------------------------------------------

void Kernel::validate() const {
    if (dim < 2 || dim > kMaxDims) throw ConfigError("kernel.dim", "must be within [2, 4]");
    if (deps.empty()) throw ConfigError("kernel.deps", "at least one dependence is required");
    std::set<Point> seen;
    for (std::size_t k = 0; k < deps.size(); ++k) {
        const std::string path = "kernel.deps[" + std::to_string(k) + "]";
        const Point& d = deps[k].delta;
        if (d.size() != dim)
            throw ConfigError(path, "length " + std::to_string(d.size()) + " does not match dimensionality " +
                                        std::to_string(dim));
        if (d[0] < 0 || !(d > Point::zero(dim)))
            throw ConfigError(path, "dependence must be lexicographically positive");
        if (!seen.insert(d).second) throw ConfigError(path, "duplicate dependence " + d.str());
    }
    if (coeffs.size() != 1 && coeffs.size() != deps.size())
        throw ConfigError("kernel.coeffs", "expected one common factor or one coefficient per dependence");
    dtype.validate();
}

// ---- tiling ----------------------------------------------------------------

namespace {

using Matrix = std::vector<std::vector<std::int64_t>>;

Matrix identity(std::size_t n) {
    Matrix m(n, std::vector<std::int64_t>(n, 0));
    for (std::size_t k = 0; k < n; ++k) m[k][k] = 1;
    return m;
}

std::int64_t determinant(Matrix m) {
    // Bareiss fraction-free elimination; exact for integer matrices.
    const std::size_t n = m.size();
    std::int64_t sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t r = k + 1;
            while (r < n && m[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(m[k], m[r]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

Matrix minor_of(const Matrix& m, std::size_t row, std::size_t col) {
    Matrix out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i == row) continue;
        std::vector<std::int64_t> r;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (j != col) r.push_back(m[i][j]);
        out.push_back(std::move(r));
    }
    return out;
}

// Integer inverse of a unimodular matrix via the adjugate.
Matrix unimodular_inverse(const Matrix& m) {
    const std::size_t n = m.size();
    const std::int64_t det = determinant(m);
    Matrix inv(n, std::vector<std::int64_t>(n, 0));
    if (n == 1) {
        inv[0][0] = det;
        return inv;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            std::int64_t cof = determinant(minor_of(m, i, j));
            if ((i + j) % 2) cof = -cof;
            inv[j][i] = cof * det;  // det is +-1, so 1/det == det
        }
    return inv;
}

const Matrix& skew_of(const TilingScheme& ts, Matrix& scratch) {
    if (!ts.skew.empty()) return ts.skew;
    scratch = identity(ts.sizes.size());
    return scratch;
}

}  // namespace

TilingScheme TilingScheme::diamond(std::int64_t s1, std::int64_t s2) {
    TilingScheme ts;
    ts.kind = TilingKind::Diamond1D;
    ts.sizes = {s1, s2};
    return ts;
}

TilingScheme TilingScheme::skewed_rect(std::vector<std::int64_t> sizes, std::vector<std::vector<std::int64_t>> skew) {
    TilingScheme ts;
    ts.kind = TilingKind::SkewedRect;
    ts.sizes = std::move(sizes);
    ts.skew = std::move(skew);
    return ts;
}

void TilingScheme::validate() const {
    if (sizes.empty() || sizes.size() > kMaxDims) throw ConfigError("tiling.sizes", "must have 1 to 4 entries");
    for (std::size_t k = 0; k < sizes.size(); ++k)
        if (sizes[k] < 1) throw ConfigError("tiling.sizes[" + std::to_string(k) + "]", "must be >= 1");
    if (kind == TilingKind::Diamond1D) {
        if (sizes.size() != 2) throw ConfigError("tiling.sizes", "diamond tiling needs exactly 2 sizes");
        if (!skew.empty()) throw ConfigError("tiling.skew", "diamond tiling takes no skew");
        return;
    }
    if (skew.empty()) return;
    if (skew.size() != sizes.size()) throw ConfigError("tiling.skew", "must be square with one row per size");
    for (std::size_t r = 0; r < skew.size(); ++r)
        if (skew[r].size() != sizes.size())
            throw ConfigError("tiling.skew[" + std::to_string(r) + "]", "row length does not match sizes");
    const auto det = determinant(skew);
    if (det != 1 && det != -1) throw ConfigError("tiling.skew", "must be unimodular (determinant +-1)");
}

std::string TilingScheme::str() const {
    std::string s = kind == TilingKind::Diamond1D ? "diamond " : "skewed-rect ";
    for (std::size_t k = 0; k < sizes.size(); ++k) s += (k ? "x" : "") + std::to_string(sizes[k]);
    return s;
}

std::vector<std::int64_t> hyperplane_coords(const Point& p, const TilingScheme& ts) {
    if (p.size() != ts.point_dims())
        throw DimensionMismatch("point " + p.str() + " does not match tiling dimensionality " +
                                std::to_string(ts.point_dims()));
    if (ts.kind == TilingKind::Diamond1D) return {p[0] + p[1], p[0] - p[1]};
    Matrix scratch;
    const Matrix& s = skew_of(ts, scratch);
    std::vector<std::int64_t> y(p.size(), 0);
    for (std::size_t r = 0; r < p.size(); ++r)
        for (std::size_t c = 0; c < p.size(); ++c) y[r] += s[r][c] * p[c];
    return y;
}

TileCoord tile_of(const Point& p, const TilingScheme& ts) {
    const auto y = hyperplane_coords(p, ts);
    TileCoord tc(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) tc[k] = floor_div(y[k], ts.sizes[k]);
    return tc;
}

std::vector<Point> enumerate_tile_points(const TilingScheme& ts, const TileCoord& tc) {
    if (tc.size() != ts.sizes.size())
        throw DimensionMismatch("tile " + tc.str() + " does not match tiling dimensionality");
    const std::size_t n = ts.sizes.size();
    std::vector<Point> points;
    std::vector<std::int64_t> lo(n), y(n);
    for (std::size_t k = 0; k < n; ++k) lo[k] = tc[k] * ts.sizes[k];

    Matrix scratch, inv;
    if (ts.kind == TilingKind::SkewedRect) inv = unimodular_inverse(skew_of(ts, scratch));

    // Odometer over the hyperplane box.
    y = lo;
    for (;;) {
        if (ts.kind == TilingKind::Diamond1D) {
            if (((y[0] - y[1]) & 1) == 0) points.push_back(Point{(y[0] + y[1]) / 2, (y[0] - y[1]) / 2});
        } else {
            Point p(n);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) p[r] += inv[r][c] * y[c];
            points.push_back(p);
        }
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (++y[k] < lo[k] + ts.sizes[k]) break;
            y[k] = lo[k];
            if (k == 0) {
                std::sort(points.begin(), points.end());
                return points;
            }
        }
    }
}

std::optional<Point> tile_translation(const TilingScheme& ts, const TileCoord& tc) {
    if (tc.size() != ts.sizes.size()) throw DimensionMismatch("tile " + tc.str() + " does not match tiling");
    const std::size_t n = tc.size();
    std::vector<std::int64_t> shift(n);
    for (std::size_t k = 0; k < n; ++k) shift[k] = tc[k] * ts.sizes[k];
    if (ts.kind == TilingKind::Diamond1D) {
        if (((shift[0] + shift[1]) & 1) != 0) return std::nullopt;
        return Point{(shift[0] + shift[1]) / 2, (shift[0] - shift[1]) / 2};
    }
    Matrix scratch;
    const Matrix inv = unimodular_inverse(skew_of(ts, scratch));
    Point p(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) p[r] += inv[r][c] * shift[c];
    return p;
}

std::vector<TileCoord> tile_dependence_offsets(const TilingScheme& ts, const Kernel& k) {
    const TileCoord origin = TileCoord::zero(ts.sizes.size());
    std::set<TileCoord> offsets;
    for (const Point& p : enumerate_tile_points(ts, origin))
        for (const auto& d : k.deps) {
            TileCoord c = tile_of(p + d.delta, ts);
            if (c != origin) offsets.insert(c);
        }
    return {offsets.begin(), offsets.end()};
}

void check_tiling_legal(const TilingScheme& ts, const Kernel& k) {
    if (k.dim != ts.point_dims())
        throw DimensionMismatch("kernel " + k.name + " has " + std::to_string(k.dim) + " dims, tiling has " +
                                std::to_string(ts.point_dims()));
    for (const TileCoord& o : tile_dependence_offsets(ts, k))
        for (std::int64_t v : o)
            if (v < 0)
                throw IllegalTiling("dependence crosses tiles backwards: tile offset " + o.str() + " under " +
                                    ts.str());
}

std::int64_t wavefront_of(const TileCoord& tc) { return std::accumulate(tc.begin(), tc.end(), std::int64_t{0}); }

std::vector<TileCoord> legal_tile_schedule(const TilingScheme& ts, const ProblemInstance& pi, const Kernel& k) {
    check_tiling_legal(ts, k);
    pi.validate(k);
    std::unordered_set<TileCoord, IntVectorHash> tiles;
    const std::size_t n = k.dim;
    Point p(n);
    std::vector<std::int64_t> hi(n);
    hi[0] = pi.time_steps;
    for (std::size_t s = 1; s < n; ++s) hi[s] = pi.spatial_sizes[s - 1] - 1;
    for (;;) {
        tiles.insert(tile_of(p, ts));
        std::size_t d = n;
        bool done = true;
        while (d > 0) {
            --d;
            if (++p[d] <= hi[d]) {
                done = false;
                break;
            }
            p[d] = 0;
        }
        if (done) break;
    }
    std::vector<TileCoord> order(tiles.begin(), tiles.end());
    std::sort(order.begin(), order.end(), [](const TileCoord& a, const TileCoord& b) {
        auto wa = wavefront_of(a), wb = wavefront_of(b);
        return wa != wb ? wa < wb : a < b;
    });
    return order;
}

// ---- problem domain --------------------------------------------------------

void ProblemInstance::validate(const Kernel& k) const {
    if (time_steps < 0) throw ConfigError("problem.timeSteps", "must be >= 0");
    if (spatial_sizes.size() + 1 != k.dim)
        throw ConfigError("problem.spatialSizes", "expected " + std::to_string(k.dim - 1) + " entries");
    for (std::size_t s = 0; s < spatial_sizes.size(); ++s)
        if (spatial_sizes[s] < 1) throw ConfigError("problem.spatialSizes[" + std::to_string(s) + "]", "must be >= 1");
    if (init.kind == InitKind::Random && !(init.low <= init.high))
        throw ConfigError("problem.init", "random range must satisfy low <= high");
    // Iterations start at t = 1 and one cell inside the arrays, so reads
    // must stay within one step and one cell.
    for (std::size_t j = 0; j < k.deps.size(); ++j) {
        const Point& d = k.deps[j].delta;
        bool ok = d.size() == k.dim && d[0] >= 0 && d[0] <= 1;
        for (std::size_t s = 1; ok && s < d.size(); ++s) ok = d[s] >= -1 && d[s] <= 1;
        if (!ok)
            throw ConfigError("kernel.deps[" + std::to_string(j) + "]",
                              "reads " + d.str() + " reach outside the stored arrays (need 0 <= dt <= 1, |dx| <= 1)");
    }
}

int temporal_depth(const Kernel& k) {
    std::int64_t max_t = 0;
    bool in_place = false;
    for (const auto& d : k.deps) {
        max_t = std::max(max_t, d.delta[0]);
        in_place |= d.delta[0] == 0;
    }
    return static_cast<int>(in_place ? std::max<std::int64_t>(max_t, 1) : max_t + 1);
}

bool is_iteration(const Point& p, const ProblemInstance& pi) {
    if (p[0] < 1 || p[0] > pi.time_steps) return false;
    for (std::size_t s = 0; s < pi.spatial_sizes.size(); ++s)
        if (p[s + 1] < 1 || p[s + 1] > pi.spatial_sizes[s] - 2) return false;
    return true;
}

bool in_value_space(const Point& p, const ProblemInstance& pi) {
    if (p[0] < 0 || p[0] > pi.time_steps) return false;
    for (std::size_t s = 0; s < pi.spatial_sizes.size(); ++s)
        if (p[s + 1] < 0 || p[s + 1] >= pi.spatial_sizes[s]) return false;
    return true;
}

// ---- presets ---------------------------------------------------------------

std::vector<std::string> preset_names() { return {"jacobi-1d", "jacobi-2d", "seidel-2d"}; }

Preset make_preset(const std::string& name) {
    Preset p;
    auto deps = [](std::initializer_list<Point> list) {
        std::vector<DependenceVector> out;
        for (const auto& d : list) out.push_back({d});
        return out;
    };
    if (name == "jacobi-1d") {
        // B[i] = 0.33 * (A[i-1] + A[i] + A[i+1])
        p.kernel = {name, 2, deps({{1, 1}, {1, 0}, {1, -1}}), {Coefficient::parse("0.33")}, DataTypeSpec::fixed(18)};
        p.tiling = TilingScheme::diamond(6, 6);
        p.problem = {20, {40}, {}};
    } else if (name == "jacobi-2d") {
        // B[i][j] = 0.2 * (A[i][j] + A[i][j-1] + A[i][1+j] + A[1+i][j] + A[i-1][j])
        p.kernel = {name, 3, deps({{1, 0, 0}, {1, 0, 1}, {1, 0, -1}, {1, -1, 0}, {1, 1, 0}}),
                    {Coefficient::parse("0.2")}, DataTypeSpec::fixed(18)};
        p.tiling = TilingScheme::skewed_rect({4, 5, 7}, {{1, 0, 0}, {1, 1, 0}, {1, 0, 1}});
        p.problem = {12, {24, 24}, {}};
    } else if (name == "seidel-2d") {
        // A[i][j] = (A[i-1][j-1] + A[i-1][j] + A[i-1][j+1] + A[i][j-1] + A[i][j]
        //          + A[i][j+1] + A[i+1][j-1] + A[i+1][j] + A[i+1][j+1]) / 9.0
        p.kernel = {name,
                    3,
                    deps({{0, 1, 1},
                          {0, 1, 0},
                          {0, 1, -1},
                          {0, 0, 1},
                          {1, 0, 0},
                          {1, 0, -1},
                          {1, -1, 1},
                          {1, -1, 0},
                          {1, -1, -1}}),
                    {Coefficient::parse("1/9")},
                    DataTypeSpec::fixed(18)};
        p.tiling = TilingScheme::skewed_rect({4, 10, 10}, {{1, 0, 0}, {1, 1, 0}, {2, 1, 1}});
        p.problem = {8, {40, 40}, {}};
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    return p;
}

}  // namespace burstlab
