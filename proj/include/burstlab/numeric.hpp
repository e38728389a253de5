#pragma once
// Word-level arithmetic for the stencil update: N-bit fixed point or IEEE
// float/double, all values carried as raw N-bit patterns.

#include <burstlab/kernel_model.hpp>

#include <cstdint>
#include <span>

namespace burstlab {

using Word = std::uint64_t;

constexpr Word low_mask(int bits) { return bits >= 64 ? ~Word{0} : ((Word{1} << bits) - 1); }

class Arithmetic {
public:
    explicit Arithmetic(const Kernel& k);

    Word encode(double value) const;
    double decode(Word w) const;

    /// One stencil update; operands are in dependence order. Fixed point:
    /// wide sum, 2N-bit product, floor shift, saturation (counted).
    Word apply(std::span<const Word> operands, std::uint64_t* saturations = nullptr) const;

    const DataTypeSpec& dtype() const { return dtype_; }

private:
    Word apply_fixed(std::span<const Word> operands, std::uint64_t* saturations) const;
    template <typename F>
    Word apply_float(std::span<const Word> operands) const;
    Word saturate(__int128 v, std::uint64_t* saturations) const;
    __int128 to_signed(Word w) const;

    DataTypeSpec dtype_;
    std::vector<Coefficient> coeffs_;
    std::vector<__int128> fixed_coeffs_;  // decimal coefficients in Q format
    __int128 min_ = 0;
    __int128 max_ = 0;
};

}  // namespace burstlab
