#include <burstlab/numeric.hpp>

#include <bit>
#include <cmath>

namespace burstlab {

Arithmetic::Arithmetic(const Kernel& k) : dtype_(k.dtype), coeffs_(k.coeffs) {
    dtype_.validate();
    if (coeffs_.empty()) coeffs_.push_back(Coefficient::parse("1"));
    if (dtype_.kind == NumberKind::Fixed) {
        const int n = dtype_.total_bits;
        if (dtype_.is_signed) {
            min_ = -(__int128{1} << (n - 1));
            max_ = (__int128{1} << (n - 1)) - 1;
        } else {
            min_ = 0;
            max_ = (__int128{1} << n) - 1;
        }
        for (const auto& c : coeffs_)
            fixed_coeffs_.push_back(static_cast<__int128>(std::llround(std::ldexp(c.decimal, dtype_.frac_bits))));
    }
}

__int128 Arithmetic::to_signed(Word w) const {
    const int n = dtype_.total_bits;
    w &= low_mask(n);
    if (dtype_.is_signed && n < 64 && (w >> (n - 1)) & 1) return static_cast<__int128>(w) - (__int128{1} << n);
    if (dtype_.is_signed && n == 64) return static_cast<std::int64_t>(w);
    return static_cast<__int128>(w);
}

Word Arithmetic::saturate(__int128 v, std::uint64_t* saturations) const {
    if (v < min_ || v > max_) {
        if (saturations) ++*saturations;
        v = v < min_ ? min_ : max_;
    }
    return static_cast<Word>(v) & low_mask(dtype_.total_bits);
}

Word Arithmetic::encode(double value) const {
    if (dtype_.kind == NumberKind::Float) {
        if (dtype_.total_bits == 32) return std::bit_cast<std::uint32_t>(static_cast<float>(value));
        return std::bit_cast<std::uint64_t>(value);
    }
    const double scaled = std::nearbyint(std::ldexp(value, dtype_.frac_bits));
    const double lo = static_cast<double>(min_), hi = static_cast<double>(max_);
    if (scaled <= lo) return saturate(min_, nullptr);
    if (scaled >= hi) return saturate(max_, nullptr);
    return saturate(static_cast<__int128>(scaled), nullptr);
}

double Arithmetic::decode(Word w) const {
    if (dtype_.kind == NumberKind::Float) {
        if (dtype_.total_bits == 32) return std::bit_cast<float>(static_cast<std::uint32_t>(w));
        return std::bit_cast<double>(w);
    }
    return std::ldexp(static_cast<double>(to_signed(w)), -dtype_.frac_bits);
}

Word Arithmetic::apply(std::span<const Word> operands, std::uint64_t* saturations) const {
    if (dtype_.kind == NumberKind::Fixed) return apply_fixed(operands, saturations);
    if (dtype_.total_bits == 32) return apply_float<float>(operands);
    return apply_float<double>(operands);
}

namespace {

__int128 floor_div128(__int128 a, __int128 b) {
    __int128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Arithmetic shift right rounds toward negative infinity.
__int128 floor_shift(__int128 v, int shift) { return shift == 0 ? v : (v >> shift); }

}  // namespace

Word Arithmetic::apply_fixed(std::span<const Word> operands, std::uint64_t* saturations) const {
    const int frac = dtype_.frac_bits;
    auto scale = [&](__int128 v, std::size_t c) -> __int128 {
        const Coefficient& coeff = coeffs_[c];
        __int128 out = 0;
        if (coeff.rational) {
            if (__builtin_mul_overflow(v, static_cast<__int128>(coeff.numerator), &out)) {
                if (saturations) ++*saturations;
                return v < 0 ? min_ : max_;
            }
            return floor_div128(out, coeff.denominator);
        }
        if (__builtin_mul_overflow(v, fixed_coeffs_[c], &out)) {
            if (saturations) ++*saturations;
            return (v < 0) != (fixed_coeffs_[c] < 0) ? min_ : max_;
        }
        return floor_shift(out, frac);
    };

    if (coeffs_.size() == 1) {
        __int128 sum = 0;
        for (Word w : operands) sum += to_signed(w);
        return saturate(scale(sum, 0), saturations);
    }
    __int128 acc = 0;
    for (std::size_t k = 0; k < operands.size(); ++k) acc += scale(to_signed(operands[k]), k);
    return saturate(acc, saturations);
}

template <typename F>
Word Arithmetic::apply_float(std::span<const Word> operands) const {
    auto load = [&](Word w) -> F {
        if constexpr (sizeof(F) == 4)
            return std::bit_cast<float>(static_cast<std::uint32_t>(w));
        else
            return std::bit_cast<double>(w);
    };
    auto scale = [&](F v, const Coefficient& c) -> F {
        if (c.rational) return (v * static_cast<F>(c.numerator)) / static_cast<F>(c.denominator);
        return v * static_cast<F>(c.decimal);
    };
    F result{};
    if (coeffs_.size() == 1) {
        F sum{};
        bool first = true;
        for (Word w : operands) {
            sum = first ? load(w) : sum + load(w);
            first = false;
        }
        // PolyBench writes `0.33 * (...)` and `(...) / 9.0`; a unit numerator
        // is skipped so the rational form is a single division.
        const Coefficient& c = coeffs_[0];
        if (c.rational && c.numerator == 1)
            result = sum / static_cast<F>(c.denominator);
        else
            result = scale(sum, c);
    } else {
        bool first = true;
        for (std::size_t k = 0; k < operands.size(); ++k) {
            F term = scale(load(operands[k]), coeffs_[k]);
            result = first ? term : result + term;
            first = false;
        }
    }
    if constexpr (sizeof(F) == 4)
        return std::bit_cast<std::uint32_t>(result);
    else
        return std::bit_cast<std::uint64_t>(result);
}

}  // namespace burstlab
