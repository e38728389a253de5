#pragma once
// Shared value types and error classes for the burstlab library.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace burstlab {

// Time plus up to three spatial dimensions.
inline constexpr std::size_t kMaxDims = 4;

/// Fixed-capacity integer vector. The tag keeps points and tile coordinates
/// from being mixed up at compile time.
template <typename Tag>
class IntVector {
public:
    IntVector() = default;

    explicit IntVector(std::size_t size) : size_(size) {
        if (size > kMaxDims) throw std::invalid_argument("IntVector: too many dimensions");
    }

    IntVector(std::initializer_list<std::int64_t> values) : IntVector(values.size()) {
        std::copy(values.begin(), values.end(), data_.begin());
    }

    template <typename Range>
    static IntVector from(const Range& range) {
        IntVector out(static_cast<std::size_t>(std::distance(std::begin(range), std::end(range))));
        std::size_t k = 0;
        for (auto v : range) out.data_[k++] = static_cast<std::int64_t>(v);
        return out;
    }

    static IntVector zero(std::size_t size) { return IntVector(size); }

    std::size_t size() const { return size_; }
    std::int64_t& operator[](std::size_t k) { return data_[k]; }
    std::int64_t operator[](std::size_t k) const { return data_[k]; }
    const std::int64_t* begin() const { return data_.data(); }
    const std::int64_t* end() const { return data_.data() + size_; }

    bool is_zero() const {
        return std::all_of(begin(), end(), [](std::int64_t v) { return v == 0; });
    }

    IntVector& operator+=(const IntVector& o) {
        check_same(o);
        for (std::size_t k = 0; k < size_; ++k) data_[k] += o.data_[k];
        return *this;
    }
    IntVector& operator-=(const IntVector& o) {
        check_same(o);
        for (std::size_t k = 0; k < size_; ++k) data_[k] -= o.data_[k];
        return *this;
    }
    friend IntVector operator+(IntVector a, const IntVector& b) { return a += b; }
    friend IntVector operator-(IntVector a, const IntVector& b) { return a -= b; }
    friend IntVector operator-(IntVector a) {
        for (std::size_t k = 0; k < a.size_; ++k) a.data_[k] = -a.data_[k];
        return a;
    }

    friend bool operator==(const IntVector& a, const IntVector& b) {
        return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
    }
    // Lexicographic; shorter vectors first when sizes differ.
    friend std::strong_ordering operator<=>(const IntVector& a, const IntVector& b) {
        if (a.size_ != b.size_) return a.size_ <=> b.size_;
        for (std::size_t k = 0; k < a.size_; ++k)
            if (auto c = a.data_[k] <=> b.data_[k]; c != 0) return c;
        return std::strong_ordering::equal;
    }

    std::string str() const {
        std::string s = "(";
        for (std::size_t k = 0; k < size_; ++k) {
            if (k) s += ',';
            s += std::to_string(data_[k]);
        }
        return s + ")";
    }

    std::size_t hash() const {
        std::size_t h = size_;
        for (std::size_t k = 0; k < size_; ++k)
            h ^= std::hash<std::int64_t>{}(data_[k]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

private:
    void check_same(const IntVector& o) const {
        if (o.size_ != size_) throw std::invalid_argument("IntVector: dimension mismatch");
    }

    std::array<std::int64_t, kMaxDims> data_{};
    std::size_t size_ = 0;
};

struct PointTag;
struct TileTag;

/// Iteration / value coordinates, time first. Also used for point offsets.
using Point = IntVector<PointTag>;
/// Tile-space coordinates (and offsets between tiles).
using TileCoord = IntVector<TileTag>;

struct IntVectorHash {
    template <typename Tag>
    std::size_t operator()(const IntVector<Tag>& v) const { return v.hash(); }
};

/// Floor division for signed integers.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

constexpr std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class IllegalTiling : public Error {
public:
    using Error::Error;
};

class TooManyMars : public Error {
public:
    using Error::Error;
};

class CorruptBlock : public Error {
public:
    using Error::Error;
};

class TruncatedStream : public Error {
public:
    using Error::Error;
};

/// Invalid configuration; `path` names the offending field (e.g. "kernel.deps[1]").
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace burstlab
