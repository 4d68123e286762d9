#include "pimsim/cia2m.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdlib>

#include "pimsim/error.hpp"

namespace pimsim {

Operand Operand::make(std::uint32_t value, unsigned width) {
    if (width < 1 || width > kMaxOperandWidth) {
        throw Error(Errc::InvalidOperand, "operand width " + std::to_string(width) + " outside [1,16]");
    }
    if (value >> width) {
        throw Error(Errc::InvalidOperand,
                    "value " + std::to_string(value) + " does not fit in " + std::to_string(width) + " bits");
    }
    return Operand{value, width};
}

CiaMode CiaMode::custom(unsigned cycles) {
    if (cycles == 0) throw Error(Errc::InvalidArgument, "cycle budget must be >= 1");
    return CiaMode(Kind::Custom, cycles);
}

CiaMode CiaMode::parse(std::string_view text) {
    if (text == "approx" || text == "approximate") return approximate();
    if (text == "accurate") return accurate();
    if (text == "exact") return exact();
    std::string_view digits = text;
    if (digits.starts_with("custom:")) digits.remove_prefix(7);
    unsigned n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
        throw Error(Errc::InvalidArgument, "unknown mode '" + std::string(text) + "'");
    }
    return custom(n);
}

std::string CiaMode::name() const {
    switch (kind_) {
        case Kind::Approximate: return "approximate";
        case Kind::Accurate: return "accurate";
        case Kind::Exact: return "exact";
        case Kind::Custom: return "custom:" + std::to_string(cycles_);
    }
    return "unknown";
}

Decomposition leading_one(Operand x) {
    if (x.value == 0) throw Error(Errc::ZeroOperand, "leading one of zero is undefined");
    unsigned k = static_cast<unsigned>(std::bit_width(x.value)) - 1;
    return Decomposition{k, x.value - (std::uint32_t{1} << k)};
}

ProductSummary cia2m_product(std::uint32_t a, std::uint32_t b, unsigned cycle_budget) noexcept {
    ProductSummary out;
    if (a == 0 || b == 0) return out;
    while (out.cycles_used < cycle_budget) {
        unsigned ka = static_cast<unsigned>(std::bit_width(a)) - 1;
        unsigned kb = static_cast<unsigned>(std::bit_width(b)) - 1;
        std::uint32_t ar = a - (std::uint32_t{1} << ka);
        std::uint32_t br = b - (std::uint32_t{1} << kb);
        out.product += (std::uint64_t{a} << kb) + (std::uint64_t{br} << ka);
        ++out.cycles_used;
        a = ar;
        b = br;
        if (a == 0 || b == 0) break;
    }
    out.residual_error = std::uint64_t{a} * b;
    return out;
}

MultiplyTrace cia2m_multiply(Operand a, Operand b, CiaMode mode) {
    a = Operand::make(a.value, a.width);
    b = Operand::make(b.value, b.width);
    const unsigned budget = mode.cycle_budget(std::max(a.width, b.width));

    MultiplyTrace trace;
    if (a.value == 0 || b.value == 0) return trace;

    std::uint32_t ai = a.value;
    std::uint32_t bi = b.value;
    while (trace.cycles_used < budget) {
        auto [ka, ar] = leading_one(Operand{ai, a.width});
        auto [kb, br] = leading_one(Operand{bi, b.width});
        CycleRecord step;
        step.ka = ka;
        step.kb = kb;
        step.a_residue = ar;
        step.b_residue = br;
        step.term = (std::uint64_t{ai} << kb) + (std::uint64_t{br} << ka);
        trace.final_product += step.term;
        step.partial_sum = trace.final_product;
        trace.steps.push_back(step);
        ++trace.cycles_used;
        ai = ar;
        bi = br;
        if (ai == 0 || bi == 0) break;
    }
    trace.residual_error = std::uint64_t{ai} * bi;
    return trace;
}

std::uint64_t exact_multiply(Operand a, Operand b) {
    a = Operand::make(a.value, a.width);
    b = Operand::make(b.value, b.width);
    return std::uint64_t{a.value} * b.value;
}

SignedProduct signed_multiply(std::int32_t a, std::int32_t b, unsigned width, CiaMode mode) {
    if (width < 2 || width > kMaxOperandWidth) {
        throw Error(Errc::InvalidOperand, "signed width " + std::to_string(width) + " outside [2,16]");
    }
    const std::int64_t limit = std::int64_t{1} << (width - 1);
    if (std::llabs(a) >= limit || std::llabs(b) >= limit) {
        throw Error(Errc::InvalidOperand, "magnitude overflow for signed width " + std::to_string(width));
    }
    auto mag = [](std::int32_t v) { return static_cast<std::uint32_t>(v < 0 ? -std::int64_t{v} : v); };
    SignedProduct out;
    out.magnitude = cia2m_multiply(Operand{mag(a), width}, Operand{mag(b), width}, mode);
    out.negative = out.magnitude.final_product != 0 && ((a < 0) != (b < 0));
    return out;
}

}  // namespace pimsim
