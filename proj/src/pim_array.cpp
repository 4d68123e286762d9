#include "pimsim/pim_array.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <sstream>

#include "pimsim/error.hpp"
#include "pimsim/trait_tree.hpp"

namespace pimsim {

void MacroConfig::validate() const {
    if (rows == 0 || rows % (kDpuCells * kSbnkDpuRows) != 0) {
        throw Error(Errc::GeometryMismatch, "rows must be a positive multiple of 64");
    }
    if (columns == 0 || columns % kSbnkDpuCols != 0) {
        throw Error(Errc::GeometryMismatch, "columns must be a positive multiple of 4");
    }
    if (weight_precision < 1 || weight_precision > kMaxOperandWidth || input_precision < 1 ||
        input_precision > kMaxOperandWidth) {
        throw Error(Errc::InvalidArgument, "precisions must lie in [1,16]");
    }
    if (gang() > columns) throw Error(Errc::GeometryMismatch, "weight precision needs more columns than available");
    if (!(clock_mhz > 0.0)) throw Error(Errc::InvalidArgument, "clock must be positive");
}

unsigned and_compute(unsigned input_bit, unsigned weight_bit, bool pim_en) {
    return pim_en ? ((input_bit & weight_bit) & 1u) : 0u;
}

MacroState::MacroState(MacroConfig config) : config_(config) {
    config_.validate();
    cells_.assign(config_.capacity_bits(), 0);
}

void MacroState::check_storage_mode() const {
    if (pim_en_) throw Error(Errc::WriteDuringCompute, "weights cannot be written while PIM_en is asserted");
}

void MacroState::check_slot(WeightSlot slot) const {
    if (slot.dpu_row >= config_.dpu_rows() || slot.unit >= config_.units()) {
        throw Error(Errc::AddressOutOfRange, "weight slot (" + std::to_string(slot.dpu_row) + "," +
                                                 std::to_string(slot.unit) + ") outside the array");
    }
}

void MacroState::write_weights(std::size_t column, std::span<const std::uint8_t> bits, std::size_t start_row) {
    check_storage_mode();
    if (column >= config_.columns || start_row > config_.rows || bits.size() > config_.rows - start_row) {
        throw Error(Errc::AddressOutOfRange, "column write outside the array");
    }
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] > 1) throw Error(Errc::InvalidArgument, "cell values must be 0 or 1");
        cells_[(start_row + i) * config_.columns + column] = bits[i];
    }
}

std::vector<std::uint8_t> MacroState::read_column(std::size_t column) const {
    if (column >= config_.columns) throw Error(Errc::AddressOutOfRange, "column outside the array");
    std::vector<std::uint8_t> out(config_.rows);
    for (std::size_t r = 0; r < config_.rows; ++r) out[r] = cells_[r * config_.columns + column];
    return out;
}

std::uint8_t MacroState::cell(std::size_t row, std::size_t column) const {
    if (row >= config_.rows || column >= config_.columns) throw Error(Errc::AddressOutOfRange, "cell outside the array");
    return cells_[row * config_.columns + column];
}

void MacroState::write_dpu(std::size_t dpu_row, std::size_t column, std::uint8_t pattern) {
    if (dpu_row >= config_.dpu_rows()) throw Error(Errc::AddressOutOfRange, "DPU row outside the array");
    std::uint8_t bits[MacroConfig::kDpuCells];
    for (std::size_t i = 0; i < MacroConfig::kDpuCells; ++i) bits[i] = (pattern >> i) & 1u;
    write_weights(column, bits, dpu_row * MacroConfig::kDpuCells);
}

ResDpu MacroState::dpu(std::size_t dpu_row, std::size_t column) const {
    if (dpu_row >= config_.dpu_rows()) throw Error(Errc::AddressOutOfRange, "DPU row outside the array");
    ResDpu d;
    for (std::size_t i = 0; i < MacroConfig::kDpuCells; ++i) {
        d.cells |= static_cast<std::uint8_t>(cell(dpu_row * MacroConfig::kDpuCells + i, column) << i);
    }
    return d;
}

SubBank MacroState::sub_bank(std::size_t sbnk_row, std::size_t sbnk_col) const {
    if (sbnk_row >= config_.sbnk_rows() || sbnk_col >= config_.sbnk_cols()) {
        throw Error(Errc::AddressOutOfRange, "sub-bank outside the array");
    }
    SubBank sb;
    for (std::size_t r = 0; r < MacroConfig::kSbnkDpuRows; ++r) {
        for (std::size_t c = 0; c < MacroConfig::kSbnkDpuCols; ++c) {
            sb.dpus[r][c] = dpu(sbnk_row * MacroConfig::kSbnkDpuRows + r, sbnk_col * MacroConfig::kSbnkDpuCols + c);
        }
    }
    return sb;
}

void MacroState::write_weight(WeightSlot slot, std::uint32_t value) {
    check_slot(slot);
    check_storage_mode();
    const unsigned p = config_.weight_precision;
    if (value >> p) throw Error(Errc::PrecisionMismatch, "weight does not fit the configured precision");
    const std::size_t base = slot.unit * config_.gang();
    for (std::size_t g = 0; g < config_.gang(); ++g) {
        std::uint8_t bits[MacroConfig::kDpuCells] = {};
        for (std::size_t i = 0; i < MacroConfig::kDpuCells; ++i) {
            std::size_t b = g * MacroConfig::kDpuCells + i;
            bits[i] = b < p ? static_cast<std::uint8_t>((value >> b) & 1u) : 0;
        }
        write_weights(base + g, bits, slot.dpu_row * MacroConfig::kDpuCells);
    }
}

std::uint32_t MacroState::read_weight(WeightSlot slot) const {
    check_slot(slot);
    std::uint32_t v = 0;
    const std::size_t base = slot.unit * config_.gang();
    for (unsigned b = 0; b < config_.weight_precision; ++b) {
        v |= std::uint32_t{cell(slot.dpu_row * MacroConfig::kDpuCells + b % 8, base + b / 8)} << b;
    }
    return v;
}

void MacroState::write_signed_weight(WeightSlot slot, std::int32_t value) {
    const unsigned p = config_.weight_precision;
    if (p < 2) throw Error(Errc::PrecisionMismatch, "signed weights need at least 2 bits");
    const std::uint32_t mag = static_cast<std::uint32_t>(value < 0 ? -static_cast<std::int64_t>(value) : value);
    if (mag >> (p - 1)) throw Error(Errc::PrecisionMismatch, "signed weight magnitude overflows precision");
    write_weight(slot, mag | (value < 0 ? (std::uint32_t{1} << (p - 1)) : 0u));
}

std::int32_t MacroState::read_signed_weight(WeightSlot slot) const {
    const unsigned p = config_.weight_precision;
    const std::uint32_t raw = read_weight(slot);
    const auto mag = static_cast<std::int32_t>(raw & ((std::uint32_t{1} << (p - 1)) - 1));
    return (raw >> (p - 1)) & 1u ? -mag : mag;
}

std::size_t MacroState::stored_ones() const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

unsigned MacroState::dpu_and(WeightSlot slot, unsigned bit, unsigned input_bit) const {
    check_slot(slot);
    if (bit >= config_.weight_precision) throw Error(Errc::AddressOutOfRange, "weight bit outside precision");
    const std::size_t row = slot.dpu_row * MacroConfig::kDpuCells + bit % 8;
    const std::size_t col = slot.unit * config_.gang() + bit / 8;
    return and_compute(input_bit, cells_[row * config_.columns + col], pim_en_);
}

CyclePartials cycle_step(const MacroState& macro, std::span<const std::uint8_t> input_bits, unsigned wordline) {
    const auto& cfg = macro.config();
    if (input_bits.size() != cfg.dpu_rows()) {
        throw Error(Errc::LengthMismatch, "expected " + std::to_string(cfg.dpu_rows()) + " input bits, got " +
                                              std::to_string(input_bits.size()));
    }
    if (wordline >= MacroConfig::kDpuCells) throw Error(Errc::AddressOutOfRange, "wordline outside the DPU");
    CyclePartials out;
    out.rows = cfg.dpu_rows();
    out.columns = cfg.columns;
    out.bits.resize(out.rows * out.columns);
    for (std::size_t r = 0; r < out.rows; ++r) {
        for (std::size_t c = 0; c < out.columns; ++c) {
            out.bits[r * out.columns + c] = static_cast<std::uint8_t>(
                and_compute(input_bits[r], macro.cell(r * MacroConfig::kDpuCells + wordline, c), macro.pim_enabled()));
        }
    }
    return out;
}

namespace {

// Controller-side view of one stored weight during a multiply: the active
// cell mask shrinks as leading ones are consumed.
class WeightSense {
public:
    WeightSense(const MacroState& macro, WeightSlot slot, unsigned magnitude_bits)
        : macro_(macro), slot_(slot), mask_(magnitude_bits >= 32 ? ~0u : (1u << magnitude_bits) - 1), bits_(magnitude_bits) {}

    // MSB-first leading-one detection over the active cells, sensed through
    // the shared AND with the activation line held high.
    std::optional<unsigned> leading_one() const {
        for (unsigned b = bits_; b-- > 0;) {
            if (((mask_ >> b) & 1u) && macro_.dpu_and(slot_, b, 1)) return b;
        }
        return std::nullopt;
    }

    std::uint32_t value() const {
        std::uint32_t v = 0;
        for (unsigned b = 0; b < bits_; ++b) {
            if ((mask_ >> b) & 1u) v |= macro_.dpu_and(slot_, b, 1) << b;
        }
        return v;
    }

    unsigned product_bit(unsigned cell, unsigned input_bit) const { return macro_.dpu_and(slot_, cell, input_bit); }

    void drop_from(unsigned k) { mask_ &= (1u << k) - 1; }
    std::uint32_t mask() const { return mask_; }
    unsigned bits() const { return bits_; }

private:
    const MacroState& macro_;
    WeightSlot slot_;
    std::uint32_t mask_;
    unsigned bits_;
};

MultiplyTrace serial_multiply(const MacroState& macro, WeightSlot slot, unsigned magnitude_bits, Operand a,
                              unsigned budget) {
    MultiplyTrace trace;
    WeightSense weight(macro, slot, magnitude_bits);
    auto kb = weight.leading_one();
    if (a.value == 0 || !kb) return trace;

    std::uint32_t ai = a.value;
    std::vector<trait::WeightedTerm> partials;
    while (trace.cycles_used < budget) {
        const unsigned ka = static_cast<unsigned>(std::bit_width(ai)) - 1;
        weight.drop_from(*kb);

        // A_i * 2^Kb: activation bits streamed against the weight's leading cell.
        partials.clear();
        for (unsigned j = 0; j < a.width; ++j) {
            partials.push_back({weight.product_bit(*kb, (ai >> j) & 1u), j + *kb});
        }
        // B_R * 2^Ka: the activation's leading bit against the residue cells.
        for (unsigned m = 0; m < weight.bits(); ++m) {
            if ((weight.mask() >> m) & 1u) partials.push_back({weight.product_bit(m, (ai >> ka) & 1u), m + ka});
        }

        CycleRecord step;
        step.ka = ka;
        step.kb = *kb;
        step.a_residue = ai - (std::uint32_t{1} << ka);
        step.b_residue = weight.value();
        step.term = static_cast<std::uint64_t>(trait::reduce(partials));
        trace.final_product += step.term;
        step.partial_sum = trace.final_product;
        trace.steps.push_back(step);
        ++trace.cycles_used;

        ai = step.a_residue;
        kb = weight.leading_one();
        if (ai == 0 || !kb) break;
    }
    trace.residual_error = std::uint64_t{ai} * weight.value();
    return trace;
}

void require_compute(const MacroState& macro) {
    if (!macro.pim_enabled()) throw Error(Errc::ComputeDisabled, "PIM_en must be asserted for compute");
}

}  // namespace

std::vector<MultiplyTrace> bit_serial_mac(const MacroState& macro, std::span<const Operand> activations,
                                          std::span<const WeightSlot> slots, CiaMode mode) {
    require_compute(macro);
    if (activations.size() != slots.size()) throw Error(Errc::LengthMismatch, "one slot per activation required");
    const auto& cfg = macro.config();
    std::vector<MultiplyTrace> out;
    out.reserve(activations.size());
    for (std::size_t i = 0; i < activations.size(); ++i) {
        const Operand a = activations[i];
        if (a.width > cfg.input_precision || (a.value >> a.width)) {
            throw Error(Errc::PrecisionMismatch, "activation exceeds the configured input precision");
        }
        const unsigned budget = mode.cycle_budget(std::max(a.width, cfg.weight_precision));
        out.push_back(serial_multiply(macro, slots[i], cfg.weight_precision, a, budget));
    }
    return out;
}

std::vector<SignedProduct> signed_bit_serial_mac(const MacroState& macro, std::span<const std::int32_t> activations,
                                                 std::span<const WeightSlot> slots, CiaMode mode) {
    require_compute(macro);
    if (activations.size() != slots.size()) throw Error(Errc::LengthMismatch, "one slot per activation required");
    const auto& cfg = macro.config();
    if (cfg.weight_precision < 2 || cfg.input_precision < 2) {
        throw Error(Errc::PrecisionMismatch, "signed operation needs precisions of at least 2 bits");
    }
    const unsigned width = std::max(cfg.input_precision, cfg.weight_precision);
    const std::int64_t limit = std::int64_t{1} << (cfg.input_precision - 1);
    std::vector<SignedProduct> out;
    out.reserve(activations.size());
    for (std::size_t i = 0; i < activations.size(); ++i) {
        const std::int64_t a = activations[i];
        if (a >= limit || -a >= limit) throw Error(Errc::PrecisionMismatch, "activation magnitude overflow");
        const auto mag = static_cast<std::uint32_t>(a < 0 ? -a : a);
        SignedProduct p;
        p.magnitude = serial_multiply(macro, slots[i], cfg.weight_precision - 1, Operand{mag, cfg.input_precision},
                                      mode.cycle_budget(width));
        const bool weight_negative = macro.dpu_and(slots[i], cfg.weight_precision - 1, 1) != 0;
        p.negative = p.magnitude.final_product != 0 && ((a < 0) != weight_negative);
        out.push_back(std::move(p));
    }
    return out;
}

ColumnMac column_mac(const MacroState& macro, std::size_t unit, std::span<const std::int32_t> activations,
                     std::span<const std::uint8_t> row_enable, CiaMode mode) {
    const auto& cfg = macro.config();
    if (activations.size() > cfg.dpu_rows() || row_enable.size() != activations.size()) {
        throw Error(Errc::LengthMismatch, "column activations must match enabled rows and fit the array");
    }
    std::vector<std::int32_t> acts;
    std::vector<WeightSlot> slots;
    for (std::size_t r = 0; r < activations.size(); ++r) {
        if (!row_enable[r]) continue;
        acts.push_back(activations[r]);
        slots.push_back(WeightSlot{r, unit});
    }
    ColumnMac out;
    out.macs = acts.size();
    if (acts.empty()) {
        require_compute(macro);
        return out;
    }
    const auto products = signed_bit_serial_mac(macro, acts, slots, mode);
    std::vector<trait::WeightedTerm> partials;
    partials.reserve(products.size());
    for (const auto& p : products) partials.push_back({p.value(), 0});
    out.sum = trait::reduce(partials);
    return out;
}

std::vector<MultiplyTrace> run_pairs(MacroState& macro, std::span<const Operand> activations,
                                     std::span<const std::uint32_t> weights, CiaMode mode) {
    if (activations.size() != weights.size()) throw Error(Errc::LengthMismatch, "one weight per activation required");
    const auto& cfg = macro.config();
    const std::size_t per_batch = cfg.dpu_rows() * cfg.units();
    std::vector<MultiplyTrace> out;
    out.reserve(activations.size());
    for (std::size_t start = 0; start < activations.size(); start += per_batch) {
        const std::size_t n = std::min(per_batch, activations.size() - start);
        std::vector<WeightSlot> slots(n);
        macro.set_pim_enable(false);
        for (std::size_t i = 0; i < n; ++i) {
            slots[i] = WeightSlot{i % cfg.dpu_rows(), i / cfg.dpu_rows()};
            macro.write_weight(slots[i], weights[start + i]);
        }
        macro.set_pim_enable(true);
        auto traces = bit_serial_mac(macro, activations.subspan(start, n), slots, mode);
        std::move(traces.begin(), traces.end(), std::back_inserter(out));
    }
    macro.set_pim_enable(false);
    return out;
}

std::string weight_image_csv(const MacroState& macro) {
    const auto& cfg = macro.config();
    std::string out;
    out.reserve(cfg.rows * cfg.columns * 2);
    for (std::size_t r = 0; r < cfg.rows; ++r) {
        for (std::size_t c = 0; c < cfg.columns; ++c) {
            if (c) out += ',';
            out += static_cast<char>('0' + macro.cell(r, c));
        }
        out += '\n';
    }
    return out;
}

void load_weight_image(MacroState& macro, const std::string& csv) {
    const auto& cfg = macro.config();
    std::istringstream in(csv);
    std::string line;
    std::vector<std::vector<std::uint8_t>> columns(cfg.columns, std::vector<std::uint8_t>(cfg.rows));
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row >= cfg.rows) throw Error(Errc::GeometryMismatch, "weight image has more than " + std::to_string(cfg.rows) + " rows");
        std::vector<std::string> fields;
        std::stringstream fs(line);
        for (std::string f; std::getline(fs, f, ',');) fields.push_back(f);
        if (line.back() == ',') fields.emplace_back();
        if (fields.size() != cfg.columns) {
            throw Error(Errc::GeometryMismatch, "line " + std::to_string(row + 1) + ": expected " +
                                                    std::to_string(cfg.columns) + " cells, got " +
                                                    std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < cfg.columns; ++c) {
            if (fields[c] != "0" && fields[c] != "1") {
                throw Error(Errc::MalformedRow, "line " + std::to_string(row + 1) + ": bad cell '" + fields[c] + "'");
            }
            columns[c][row] = static_cast<std::uint8_t>(fields[c][0] - '0');
        }
        ++row;
    }
    if (row != cfg.rows) {
        throw Error(Errc::GeometryMismatch, "weight image has " + std::to_string(row) + " rows, expected " +
                                                std::to_string(cfg.rows));
    }
    for (std::size_t c = 0; c < cfg.columns; ++c) macro.write_weights(c, columns[c]);
}

}  // namespace pimsim
