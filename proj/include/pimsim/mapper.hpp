#pragma once

// Layer-to-macro mapping.
//
// A filter of L = W*W*K weights is cut into column units of up to dpu_rows
// (32) weights, one weight per DPU, filling a unit top to bottom before the
// next (column-major). Units are packed lowest-index first into the
// macro's units (columns / gang); every full macro image is one pass.
// Activations are presented one per DPU row, so a unit computes a 32-term
// partial dot product that the adder tree reduces.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pimsim/cia2m.hpp"
#include "pimsim/pim_array.hpp"

namespace pimsim::map {

enum class LayerKind { Conv, FC };

struct LayerSpec {
    std::string name = "layer";
    LayerKind kind = LayerKind::FC;
    unsigned filter_width = 1;  // W
    unsigned depth = 1;         // K (input channels or FC inputs)
    unsigned filters = 1;       // n
    unsigned in_height = 1;
    unsigned in_width = 1;
    unsigned stride = 1;
    unsigned padding = 0;
    unsigned weight_bits = 8;
    unsigned act_bits = 8;

    static LayerSpec fc(std::string name, unsigned inputs, unsigned outputs, unsigned weight_bits = 8,
                        unsigned act_bits = 8);
    static LayerSpec conv(std::string name, unsigned filter_width, unsigned depth, unsigned filters,
                          unsigned in_height, unsigned in_width, unsigned stride = 1, unsigned padding = 0,
                          unsigned weight_bits = 8, unsigned act_bits = 8);

    // Throws Errc::InvalidArgument.
    void validate() const;

    std::size_t weights_per_filter() const { return std::size_t{filter_width} * filter_width * depth; }
    std::size_t total_weights() const { return weights_per_filter() * filters; }
    unsigned out_height() const;
    unsigned out_width() const;
    std::size_t output_positions() const { return std::size_t{out_height()} * out_width(); }
    std::uint64_t total_macs() const { return std::uint64_t{total_weights()} * output_positions(); }
    std::uint64_t weight_storage_bits() const { return std::uint64_t{total_weights()} * weight_bits; }

    bool operator==(const LayerSpec&) const = default;
};

enum class PruneGranularity { SubBank, PerWeight };

struct ColumnAssignment {
    unsigned filter = 0;
    unsigned unit_in_filter = 0;
    unsigned pass = 0;
    unsigned slot = 0;          // weight unit index within the macro
    std::size_t column = 0;     // first physical column
    unsigned rows_used = 0;     // occupied DPU rows

    bool operator==(const ColumnAssignment&) const = default;
};

struct MapOptions {
    // When false, a filter's units never straddle two passes.
    bool allow_filter_split = false;
};

struct MappingPlan {
    LayerSpec layer;
    CiaMode mode = CiaMode::exact();
    unsigned cycle_budget = 0;
    std::size_t macro_rows = 0;
    std::size_t macro_columns = 0;
    std::size_t gang = 1;
    std::size_t units_per_filter = 0;
    std::size_t units_per_pass = 0;
    std::uint64_t write_cycles_per_row = 1;  // cell-row write time in clock cycles
    bool filter_split = false;
    std::vector<ColumnAssignment> assignments;
    std::size_t passes = 0;
    std::size_t banks_required = 0;
    std::uint64_t compute_cycles = 0;
    std::uint64_t reload_cycles = 0;
    std::uint64_t cycles_total = 0;
    double pruned_fraction = 0.0;
    PruneGranularity granularity = PruneGranularity::PerWeight;
    std::vector<std::uint8_t> pruned;   // requested mask, filters x L; empty = none
    std::vector<std::uint8_t> skipped;  // weights actually gated off; empty = none
    std::uint64_t skipped_weights = 0;
    bool degenerate = false;            // nothing left to compute

    std::uint64_t analytic_macs() const { return layer.total_macs(); }
    std::uint64_t planned_macs() const {
        return (std::uint64_t{layer.total_weights()} - skipped_weights) * layer.output_positions();
    }
    bool is_skipped(std::size_t filter, std::size_t index) const {
        return !skipped.empty() && skipped[filter * layer.weights_per_filter() + index] != 0;
    }
};

// Column ganging follows the layer's weight_bits; the macro supplies rows,
// columns and clock. Throws Errc::OverCapacityFilter when a filter cannot
// fit a macro image and splitting is disabled.
MappingPlan map_layer(const LayerSpec& layer, const MacroConfig& macro, CiaMode mode, MapOptions options = {});

// mask: filters x L, 1 = pruned. Throws Errc::MaskShapeMismatch.
MappingPlan apply_pruning(MappingPlan plan, std::span<const std::uint8_t> mask,
                          PruneGranularity granularity = PruneGranularity::SubBank);

// Exactly round(fraction * count) ones at seeded random positions.
std::vector<std::uint8_t> random_mask(std::size_t count, double fraction, std::uint64_t seed);

// Prunes the round(fraction * count) smallest-magnitude weights; ties break
// toward the lower index.
std::vector<std::uint8_t> magnitude_mask(std::span<const std::int32_t> weights, double fraction);

enum class TraceOp { Write, Compute };

struct TraceStep {
    std::size_t phase = 0;
    TraceOp op = TraceOp::Write;
    std::size_t bank = 0;        // pass index
    std::size_t column = 0;      // first physical column of the unit
    std::uint64_t cycles = 0;
    std::uint64_t macs = 0;
    std::size_t assignment = 0;  // index into MappingPlan::assignments
};

struct ExecutionTrace {
    std::vector<TraceStep> steps;
    std::size_t phases = 0;

    std::uint64_t total_macs() const;
    // Phase duration is the longest step in it; phases run back to back.
    std::uint64_t total_cycles() const;
};

// Alternating write/compute phases, one pair per pass with surviving work.
// Throws Errc::GeometryMismatch if the macro does not match the plan.
ExecutionTrace schedule(const MappingPlan& plan, const MacroState& macro);

// `phase,op,bank,column,cycles` with LF endings.
std::string trace_csv(const ExecutionTrace& trace);

struct LayerOutput {
    std::vector<std::int64_t> values;  // positions x filters
    std::uint64_t macs = 0;
};

// Replays the trace on the macro. weights: filters x L (sign-magnitude
// range of weight_bits); patches: positions x L.
LayerOutput execute(const MappingPlan& plan, const ExecutionTrace& trace, MacroState& macro,
                    std::span<const std::int32_t> weights, std::span<const std::int32_t> patches);

// Reference: sum of signed_multiply over each dot product, with skipped
// weights treated as zero.
std::vector<std::int64_t> reference_layer(const MappingPlan& plan, std::span<const std::int32_t> weights,
                                          std::span<const std::int32_t> patches);

// Conv input (K x H x W, row-major) to positions x L patches with zero padding.
// FC layers take the input vector as a single patch.
std::vector<std::int32_t> im2col(const LayerSpec& layer, std::span<const std::int32_t> input);

struct WorkloadPlan {
    std::string name;
    std::vector<MappingPlan> layers;

    std::uint64_t compute_cycles() const;
    std::uint64_t cycles_total() const;
    std::uint64_t analytic_macs() const;
    std::uint64_t planned_macs() const;
    double pruned_fraction() const;  // weight-weighted over layers
};

// Canonical VGG-16 for 32x32x3 inputs (13 conv + 3 FC, padding 1).
std::vector<LayerSpec> vgg16_cifar10();

// Maps every layer (splitting filters as needed) and applies seeded
// per-weight random pruning at `pruning`.
WorkloadPlan plan_workload(std::string name, std::span<const LayerSpec> layers, const MacroConfig& macro,
                           CiaMode mode, double pruning, std::uint64_t seed);

nlohmann::json to_json(const LayerSpec& layer);
LayerSpec layer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MappingPlan& plan);
MappingPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WorkloadPlan& plan);
WorkloadPlan workload_from_json(const nlohmann::json& j);

}  // namespace pimsim::map
