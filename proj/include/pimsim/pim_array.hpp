#pragma once

// Bit-level functional model of the resource-shared PIM macro.
//
// Geometry (defaults): 256 cell rows x 64 columns = 16 Kb.
//   * Res-DPU: 8 vertically adjacent cells of one column sharing one 2T AND.
//     A DPU holds one weight of up to 8 bits, LSB in its lowest cell.
//   * DPU grid: 32 DPU rows x 64 columns. Each DPU row is driven by one
//     activation line, so a cycle presents 32 activations.
//   * Sub-bank (SBNK): 8 DPU rows x 4 DPU columns. The 4 columns of an SBNK
//     column share one adder-tree lane through a 4:1 mux, giving 16 lanes.
//   * Weights wider than 8 bits gang ceil(p/8) adjacent columns,
//     little-endian (bits 8..15 sit in the next column).
// One compute cycle therefore yields 32 x 16 = 512 one-bit dot products.
//
// Weights are addressed by WeightSlot {dpu_row, unit}; unit u occupies
// physical columns [u*G, u*G + G) with G = ceil(weight_precision / 8).
// Signed weights are stored sign-magnitude with the sign in bit p-1.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pimsim/cia2m.hpp"

namespace pimsim {

struct MacroConfig {
    std::size_t rows = 256;
    std::size_t columns = 64;
    unsigned weight_precision = 8;
    unsigned input_precision = 8;
    double clock_mhz = 333.0;

    static constexpr std::size_t kDpuCells = 8;
    static constexpr std::size_t kSbnkDpuRows = 8;
    static constexpr std::size_t kSbnkDpuCols = 4;

    // Throws Errc::GeometryMismatch / Errc::InvalidArgument.
    void validate() const;

    std::size_t capacity_bits() const { return rows * columns; }
    std::size_t dpu_rows() const { return rows / kDpuCells; }
    std::size_t lanes() const { return columns / kSbnkDpuCols; }
    std::size_t sbnk_rows() const { return dpu_rows() / kSbnkDpuRows; }
    std::size_t sbnk_cols() const { return lanes(); }
    std::size_t dot_products_per_cycle() const { return dpu_rows() * lanes(); }
    // Columns ganged per weight.
    std::size_t gang() const { return (weight_precision + 7) / 8; }
    std::size_t units() const { return columns / gang(); }
};

struct WeightSlot {
    std::size_t dpu_row = 0;
    std::size_t unit = 0;
};

struct ResDpu {
    std::uint8_t cells = 0;  // bit i = cell i
};

// 8 x 4 DPUs, indexed [dpu_row][dpu_col].
struct SubBank {
    ResDpu dpus[MacroConfig::kSbnkDpuRows][MacroConfig::kSbnkDpuCols];
};

// Row-major (activation row x column) one-bit AND products of one cycle.
struct CyclePartials {
    std::size_t rows = 0;
    std::size_t columns = 0;
    std::vector<std::uint8_t> bits;

    std::uint8_t at(std::size_t row, std::size_t col) const { return bits[row * columns + col]; }
};

unsigned and_compute(unsigned input_bit, unsigned weight_bit, bool pim_en);

class MacroState {
public:
    explicit MacroState(MacroConfig config = {});

    const MacroConfig& config() const { return config_; }

    bool pim_enabled() const { return pim_en_; }
    void set_pim_enable(bool on) { pim_en_ = on; }

    // Latches bits[i] into cell (start_row + i, column). Storage mode only.
    void write_weights(std::size_t column, std::span<const std::uint8_t> bits, std::size_t start_row = 0);
    std::vector<std::uint8_t> read_column(std::size_t column) const;
    std::uint8_t cell(std::size_t row, std::size_t column) const;

    void write_dpu(std::size_t dpu_row, std::size_t column, std::uint8_t pattern);
    ResDpu dpu(std::size_t dpu_row, std::size_t column) const;
    SubBank sub_bank(std::size_t sbnk_row, std::size_t sbnk_col) const;

    // Unsigned weight of weight_precision bits.
    void write_weight(WeightSlot slot, std::uint32_t value);
    std::uint32_t read_weight(WeightSlot slot) const;
    // Sign-magnitude, |value| < 2^(p-1).
    void write_signed_weight(WeightSlot slot, std::int32_t value);
    std::int32_t read_signed_weight(WeightSlot slot) const;

    std::size_t stored_ones() const;

    // Shared-AND evaluation of one cell of a weight: cell `bit` of the weight
    // at `slot` against the activation line of that DPU row.
    unsigned dpu_and(WeightSlot slot, unsigned bit, unsigned input_bit) const;

private:
    void check_slot(WeightSlot slot) const;
    void check_storage_mode() const;

    MacroConfig config_;
    bool pim_en_ = false;
    std::vector<std::uint8_t> cells_;
};

// Drives one activation bit per DPU row and selects cell `wordline` of every
// DPU. With PIM_en deasserted the outputs are all zero.
// Throws Errc::LengthMismatch when input_bits.size() != dpu_rows.
CyclePartials cycle_step(const MacroState& macro, std::span<const std::uint8_t> input_bits, unsigned wordline = 0);

// Runs the iterative schedule for activations[i] against the stored weight at
// slots[i]. The result is value-identical to
// cia2m_multiply(activations[i], Operand{weight, weight_precision}, mode).
// Throws Errc::ComputeDisabled, Errc::LengthMismatch, Errc::PrecisionMismatch.
std::vector<MultiplyTrace> bit_serial_mac(const MacroState& macro, std::span<const Operand> activations,
                                          std::span<const WeightSlot> slots, CiaMode mode);

// Sign-magnitude variant over weights written with write_signed_weight and
// activations with |a| < 2^(input_precision-1).
std::vector<SignedProduct> signed_bit_serial_mac(const MacroState& macro, std::span<const std::int32_t> activations,
                                                 std::span<const WeightSlot> slots, CiaMode mode);

struct ColumnMac {
    std::int64_t sum = 0;
    std::uint64_t macs = 0;
};

// Dot product of one weight unit (column group) against one activation per
// DPU row, reduced through the adder tree. Rows with row_enable[r] == 0 are
// gated off. activations.size() and row_enable.size() may not exceed dpu_rows.
ColumnMac column_mac(const MacroState& macro, std::size_t unit, std::span<const std::int32_t> activations,
                     std::span<const std::uint8_t> row_enable, CiaMode mode);

// Loads weight_precision-bit weights row-major into slots (dpu_row, unit) in
// batches, then evaluates the pairs. Convenience for elementwise checks.
std::vector<MultiplyTrace> run_pairs(MacroState& macro, std::span<const Operand> activations,
                                     std::span<const std::uint32_t> weights, CiaMode mode);

// Weight-image CSV: one line per cell row, comma-separated 0/1, one field per
// column. Throws Errc::GeometryMismatch / Errc::MalformedRow.
std::string weight_image_csv(const MacroState& macro);
void load_weight_image(MacroState& macro, const std::string& csv);

}  // namespace pimsim
