#pragma once

// Cycle-controlled iterative approximate/accurate multiplication.
//
// Each cycle peels the leading one off both operands:
//   A = 2^Ka + A_R,  B = 2^Kb + B_R
//   A*B = A*2^Kb + B_R*2^Ka + A_R*B_R
// The first two terms are accumulated; the iteration continues on (A_R, B_R)
// until the cycle budget is exhausted or a residue reaches zero. The dropped
// tail A_R*B_R of the last cycle is the (non-negative) error.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pimsim {

inline constexpr unsigned kMaxOperandWidth = 16;

struct Operand {
    std::uint32_t value = 0;
    unsigned width = 8;

    // Throws Errc::InvalidOperand unless width in [1,16] and value < 2^width.
    static Operand make(std::uint32_t value, unsigned width);
};

struct Decomposition {
    unsigned k = 0;               // leading-one bit index
    std::uint32_t residue = 0;    // value - 2^k
};

struct CycleRecord {
    unsigned ka = 0;
    unsigned kb = 0;
    std::uint32_t a_residue = 0;
    std::uint32_t b_residue = 0;
    std::uint64_t term = 0;
    std::uint64_t partial_sum = 0;

    bool operator==(const CycleRecord&) const = default;
};

struct MultiplyTrace {
    unsigned cycles_used = 0;
    std::vector<CycleRecord> steps;
    std::uint64_t final_product = 0;
    std::uint64_t residual_error = 0;

    bool operator==(const MultiplyTrace&) const = default;
};

class CiaMode {
public:
    enum class Kind { Approximate, Accurate, Exact, Custom };

    static CiaMode approximate() { return CiaMode(Kind::Approximate, 3); }
    static CiaMode accurate() { return CiaMode(Kind::Accurate, 4); }
    static CiaMode exact() { return CiaMode(Kind::Exact, 0); }
    // Throws Errc::InvalidArgument for n == 0.
    static CiaMode custom(unsigned cycles);

    // Accepts "approx", "approximate", "accurate", "exact", "custom:N" or "N".
    static CiaMode parse(std::string_view text);

    Kind kind() const { return kind_; }

    // Exact mode resolves to the operand width, which bounds the set-bit count.
    unsigned cycle_budget(unsigned operand_width) const {
        return kind_ == Kind::Exact ? operand_width : cycles_;
    }

    std::string name() const;

    bool operator==(const CiaMode&) const = default;

private:
    CiaMode(Kind kind, unsigned cycles) : kind_(kind), cycles_(cycles) {}

    Kind kind_;
    unsigned cycles_;
};

// Throws Errc::ZeroOperand for x.value == 0.
Decomposition leading_one(Operand x);

MultiplyTrace cia2m_multiply(Operand a, Operand b, CiaMode mode);

std::uint64_t exact_multiply(Operand a, Operand b);

// Allocation-free kernel used by the exhaustive sweeps. Same recurrence as
// cia2m_multiply, without the per-cycle records.
struct ProductSummary {
    std::uint64_t product = 0;
    std::uint64_t residual_error = 0;
    unsigned cycles_used = 0;
};
ProductSummary cia2m_product(std::uint32_t a, std::uint32_t b, unsigned cycle_budget) noexcept;

struct SignedProduct {
    bool negative = false;
    MultiplyTrace magnitude;

    std::int64_t value() const {
        auto v = static_cast<std::int64_t>(magnitude.final_product);
        return negative ? -v : v;
    }
    std::int64_t residual_error() const {
        auto v = static_cast<std::int64_t>(magnitude.residual_error);
        return negative ? -v : v;
    }
};

// Sign-magnitude: |a|, |b| < 2^(width-1); sign is the XOR of operand signs and
// a zero result is always positive. Throws Errc::InvalidOperand on overflow.
SignedProduct signed_multiply(std::int32_t a, std::int32_t b, unsigned width, CiaMode mode);

}  // namespace pimsim
