#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "pimsim/cia2m.hpp"
#include "test_support.hpp"

using namespace pimsim;

namespace {

Operand op8(std::uint32_t v) { return Operand::make(v, 8); }

}  // namespace

TEST_CASE("leading_one splits off the highest power of two") {
    CHECK(leading_one(op8(1)).k == 0);
    CHECK(leading_one(op8(1)).residue == 0);
    auto d = leading_one(op8(0b10110000));
    CHECK(d.k == 7);
    CHECK(d.residue == 0b00110000);
    CHECK(leading_one(Operand::make(0x8001, 16)).k == 15);
    CHECK(code_of([] { leading_one(op8(0)); }) == Errc::ZeroOperand);
}

TEST_CASE("operand construction validates width and value") {
    CHECK(code_of([] { Operand::make(256, 8); }) == Errc::InvalidOperand);
    CHECK(code_of([] { Operand::make(1, 0); }) == Errc::InvalidOperand);
    CHECK(code_of([] { Operand::make(1, 17); }) == Errc::InvalidOperand);
    CHECK(Operand::make(65535, 16).value == 65535);
}

TEST_CASE("mode budgets and names") {
    CHECK(CiaMode::approximate().cycle_budget(8) == 3);
    CHECK(CiaMode::accurate().cycle_budget(8) == 4);
    CHECK(CiaMode::exact().cycle_budget(8) == 8);
    CHECK(CiaMode::exact().cycle_budget(12) == 12);
    CHECK(CiaMode::custom(5).cycle_budget(8) == 5);
    CHECK(CiaMode::parse("approx") == CiaMode::approximate());
    CHECK(CiaMode::parse("approximate") == CiaMode::approximate());
    CHECK(CiaMode::parse("custom:2") == CiaMode::custom(2));
    CHECK(CiaMode::parse("6") == CiaMode::custom(6));
    CHECK(CiaMode::custom(2).name() == "custom:2");
    CHECK(code_of([] { CiaMode::parse("fast"); }) == Errc::InvalidArgument);
    CHECK(code_of([] { CiaMode::custom(0); }) == Errc::InvalidArgument);
}

TEST_CASE("worked products for 255 x 255") {
    auto approx = cia2m_multiply(op8(255), op8(255), CiaMode::approximate());
    CHECK(approx.cycles_used == 3);
    CHECK(approx.final_product == 64064);
    CHECK(approx.residual_error == 961);

    auto acc = cia2m_multiply(op8(255), op8(255), CiaMode::accurate());
    CHECK(acc.final_product == 64800);
    CHECK(acc.residual_error == 225);

    auto exact = cia2m_multiply(op8(255), op8(255), CiaMode::exact());
    CHECK(exact.final_product == 65025);
    CHECK(exact.residual_error == 0);
}

TEST_CASE("single cycle on 3 x 3 leaves the residue product") {
    auto t = cia2m_multiply(op8(3), op8(3), CiaMode::custom(1));
    CHECK(t.final_product == 8);
    CHECK(t.residual_error == 1);
    REQUIRE(t.steps.size() == 1);
    CHECK(t.steps[0].ka == 1);
    CHECK(t.steps[0].kb == 1);
    CHECK(t.steps[0].term == 8);
}

TEST_CASE("cycle records follow the recurrence") {
    auto t = cia2m_multiply(op8(0b11010110), op8(0b01101101), CiaMode::exact());
    std::uint32_t a = 0b11010110;
    std::uint32_t b = 0b01101101;
    std::uint64_t sum = 0;
    for (const auto& s : t.steps) {
        CHECK(s.ka == std::bit_width(a) - 1);
        CHECK(s.kb == std::bit_width(b) - 1);
        const std::uint32_t br = b - (1u << s.kb);
        CHECK(s.term == (std::uint64_t{a} << s.kb) + (std::uint64_t{br} << s.ka));
        sum += s.term;
        CHECK(s.partial_sum == sum);
        a -= 1u << s.ka;
        b = br;
    }
    CHECK(t.final_product == 0b11010110u * 0b01101101u);
}

TEST_CASE("zero operands take no cycles") {
    auto t = cia2m_multiply(op8(0), op8(200), CiaMode::accurate());
    CHECK(t.cycles_used == 0);
    CHECK(t.final_product == 0);
    CHECK(t.residual_error == 0);
    CHECK(t.steps.empty());
}

TEST_CASE("early exit when a residue reaches zero") {
    auto t = cia2m_multiply(op8(64), op8(255), CiaMode::exact());
    CHECK(t.cycles_used == 1);
    CHECK(t.final_product == 64 * 255);
}

TEST_CASE("matches the strip-the-top-bits oracle on random 16-bit pairs") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::uint32_t> dist(0, 65535);
    for (int i = 0; i < 5000; ++i) {
        const std::uint32_t a = dist(rng);
        const std::uint32_t b = dist(rng);
        for (unsigned n = 1; n <= 16; ++n) {
            auto t = cia2m_multiply(Operand::make(a, 16), Operand::make(b, 16), CiaMode::custom(n));
            REQUIRE(t.final_product == oracle::approx_product(a, b, n));
            REQUIRE(t.final_product + t.residual_error == std::uint64_t{a} * b);
        }
    }
}

TEST_CASE("allocation-free product agrees with the traced path") {
    for (std::uint32_t a = 0; a < 256; a += 3) {
        for (std::uint32_t b = 0; b < 256; b += 5) {
            for (unsigned n = 1; n <= 8; ++n) {
                auto s = cia2m_product(a, b, n);
                auto t = cia2m_multiply(op8(a), op8(b), CiaMode::custom(n));
                REQUIRE(s.product == t.final_product);
                REQUIRE(s.residual_error == t.residual_error);
                REQUIRE(s.cycles_used == t.cycles_used);
            }
        }
    }
}

TEST_CASE("mixed operand widths use the wider width for exact mode") {
    auto t = cia2m_multiply(Operand::make(0xFFF, 12), op8(0xFF), CiaMode::exact());
    CHECK(t.final_product == 0xFFFull * 0xFF);
}

TEST_CASE("exact_multiply") {
    CHECK(exact_multiply(op8(255), op8(255)) == 65025);
    CHECK(exact_multiply(Operand::make(65535, 16), Operand::make(65535, 16)) == 4294836225ull);
}

TEST_CASE("signed products apply the sign to the magnitude product") {
    auto p = signed_multiply(-127, 127, 8, CiaMode::approximate());
    CHECK(p.negative);
    CHECK(p.value() == oracle::signed_approx(-127, 127, 3));
    CHECK(signed_multiply(-5, -6, 8, CiaMode::exact()).value() == 30);
    CHECK(signed_multiply(0, -6, 8, CiaMode::exact()).value() == 0);
    CHECK_FALSE(signed_multiply(0, -6, 8, CiaMode::exact()).negative);
    for (int a = -127; a <= 127; a += 7) {
        for (int b = -127; b <= 127; b += 11) {
            auto s = signed_multiply(a, b, 8, CiaMode::accurate());
            REQUIRE(s.value() == oracle::signed_approx(a, b, 4));
        }
    }
    CHECK(code_of([] { signed_multiply(128, 1, 8, CiaMode::exact()); }) == Errc::InvalidOperand);
    CHECK(code_of([] { signed_multiply(1, 1, 1, CiaMode::exact()); }) == Errc::InvalidOperand);
}
