#include "pimsim/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "pimsim/constants.hpp"
#include "pimsim/error.hpp"

namespace pimsim::map {
namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

MacroConfig geometry_for(const LayerSpec& layer, const MacroConfig& macro) {
    MacroConfig geo = macro;
    geo.weight_precision = layer.weight_bits;
    geo.validate();
    return geo;
}

std::uint64_t write_cycles_per_row(double clock_mhz) {
    const double cycles = constants::kWriteDelayPs * 1e-12 * clock_mhz * 1e6;
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(cycles)));
}

bool unit_active(const MappingPlan& plan, const ColumnAssignment& a, std::size_t rows) {
    for (std::size_t r = 0; r < a.rows_used; ++r) {
        if (!plan.is_skipped(a.filter, a.unit_in_filter * rows + r)) return true;
    }
    return false;
}

std::uint64_t unit_write_cycles(const MappingPlan& plan, const ColumnAssignment& a) {
    return std::uint64_t{a.rows_used} * MacroConfig::kDpuCells * plan.write_cycles_per_row;
}

std::uint64_t reload_cycles(const MappingPlan& plan) {
    const std::size_t rows = plan.macro_rows / MacroConfig::kDpuCells;
    std::vector<std::uint64_t> per_pass(plan.passes, 0);
    for (const auto& a : plan.assignments) {
        if (!unit_active(plan, a, rows)) continue;
        per_pass[a.pass] = std::max(per_pass[a.pass], unit_write_cycles(plan, a));
    }
    return std::accumulate(per_pass.begin(), per_pass.end(), std::uint64_t{0});
}

std::string bits_to_string(const std::vector<std::uint8_t>& bits) {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
    return s;
}

std::vector<std::uint8_t> string_to_bits(const std::string& s) {
    std::vector<std::uint8_t> bits(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw Error(Errc::InvalidArgument, "mask strings hold only 0/1");
        bits[i] = s[i] == '1';
    }
    return bits;
}

const char* kind_name(LayerKind k) { return k == LayerKind::Conv ? "conv" : "fc"; }

LayerKind parse_kind(const std::string& s) {
    if (s == "conv") return LayerKind::Conv;
    if (s == "fc") return LayerKind::FC;
    throw Error(Errc::InvalidArgument, "unknown layer kind '" + s + "'");
}

const char* granularity_name(PruneGranularity g) { return g == PruneGranularity::SubBank ? "sub_bank" : "per_weight"; }

PruneGranularity parse_granularity(const std::string& s) {
    if (s == "sub_bank") return PruneGranularity::SubBank;
    if (s == "per_weight") return PruneGranularity::PerWeight;
    throw Error(Errc::InvalidArgument, "unknown pruning granularity '" + s + "'");
}

}  // namespace

LayerSpec LayerSpec::fc(std::string name, unsigned inputs, unsigned outputs, unsigned weight_bits, unsigned act_bits) {
    LayerSpec l;
    l.name = std::move(name);
    l.kind = LayerKind::FC;
    l.depth = inputs;
    l.filters = outputs;
    l.weight_bits = weight_bits;
    l.act_bits = act_bits;
    return l;
}

LayerSpec LayerSpec::conv(std::string name, unsigned filter_width, unsigned depth, unsigned filters,
                          unsigned in_height, unsigned in_width, unsigned stride, unsigned padding,
                          unsigned weight_bits, unsigned act_bits) {
    LayerSpec l;
    l.name = std::move(name);
    l.kind = LayerKind::Conv;
    l.filter_width = filter_width;
    l.depth = depth;
    l.filters = filters;
    l.in_height = in_height;
    l.in_width = in_width;
    l.stride = stride;
    l.padding = padding;
    l.weight_bits = weight_bits;
    l.act_bits = act_bits;
    return l;
}

void LayerSpec::validate() const {
    if (filter_width < 1 || depth < 1 || filters < 1 || in_height < 1 || in_width < 1 || stride < 1) {
        throw Error(Errc::InvalidArgument, "layer '" + name + "': dimensions must be >= 1");
    }
    if (weight_bits < 1 || weight_bits > 16 || act_bits < 1 || act_bits > 16) {
        throw Error(Errc::InvalidArgument, "layer '" + name + "': precisions must lie in [1,16]");
    }
    if (kind == LayerKind::FC && (filter_width != 1 || in_height != 1 || in_width != 1 || padding != 0)) {
        throw Error(Errc::InvalidArgument, "layer '" + name + "': FC layers use W = 1 and 1x1 inputs");
    }
    if (in_height + 2 * padding < filter_width || in_width + 2 * padding < filter_width) {
        throw Error(Errc::InvalidArgument, "layer '" + name + "': filter larger than padded input");
    }
}

unsigned LayerSpec::out_height() const { return (in_height + 2 * padding - filter_width) / stride + 1; }
unsigned LayerSpec::out_width() const { return (in_width + 2 * padding - filter_width) / stride + 1; }

MappingPlan map_layer(const LayerSpec& layer, const MacroConfig& macro, CiaMode mode, MapOptions options) {
    layer.validate();
    const MacroConfig geo = geometry_for(layer, macro);
    const std::size_t rows = geo.dpu_rows();
    const std::size_t L = layer.weights_per_filter();

    MappingPlan plan;
    plan.layer = layer;
    plan.mode = mode;
    plan.cycle_budget = mode.cycle_budget(layer.act_bits);
    plan.macro_rows = geo.rows;
    plan.macro_columns = geo.columns;
    plan.gang = geo.gang();
    plan.units_per_filter = ceil_div(L, rows);
    plan.units_per_pass = geo.units();
    plan.write_cycles_per_row = write_cycles_per_row(geo.clock_mhz);
    plan.filter_split = options.allow_filter_split;

    if (!options.allow_filter_split && plan.units_per_filter > plan.units_per_pass) {
        throw Error(Errc::OverCapacityFilter,
                    "layer '" + layer.name + "': one filter needs " + std::to_string(plan.units_per_filter) +
                        " column units but a macro image holds " + std::to_string(plan.units_per_pass));
    }

    const std::size_t filters_per_pass =
        options.allow_filter_split ? 0 : plan.units_per_pass / plan.units_per_filter;
    for (unsigned f = 0; f < layer.filters; ++f) {
        for (unsigned u = 0; u < plan.units_per_filter; ++u) {
            ColumnAssignment a;
            a.filter = f;
            a.unit_in_filter = u;
            if (options.allow_filter_split) {
                const std::size_t g = std::size_t{f} * plan.units_per_filter + u;
                a.pass = static_cast<unsigned>(g / plan.units_per_pass);
                a.slot = static_cast<unsigned>(g % plan.units_per_pass);
            } else {
                a.pass = static_cast<unsigned>(f / filters_per_pass);
                a.slot = static_cast<unsigned>((f % filters_per_pass) * plan.units_per_filter + u);
            }
            a.column = a.slot * plan.gang;
            a.rows_used = static_cast<unsigned>(std::min(rows, L - std::size_t{u} * rows));
            plan.assignments.push_back(a);
        }
    }
    plan.passes = plan.assignments.back().pass + 1;
    plan.banks_required = plan.passes;
    plan.compute_cycles = std::uint64_t{plan.passes} * layer.output_positions() * plan.cycle_budget;
    plan.reload_cycles = reload_cycles(plan);
    plan.cycles_total = plan.compute_cycles + plan.reload_cycles;
    return plan;
}

MappingPlan apply_pruning(MappingPlan plan, std::span<const std::uint8_t> mask, PruneGranularity granularity) {
    const std::size_t total = plan.layer.total_weights();
    if (mask.size() != total) {
        throw Error(Errc::MaskShapeMismatch, "mask has " + std::to_string(mask.size()) + " entries, layer has " +
                                                 std::to_string(total) + " weights");
    }
    const std::size_t L = plan.layer.weights_per_filter();
    const std::size_t rows = plan.macro_rows / MacroConfig::kDpuCells;
    plan.granularity = granularity;
    plan.pruned.assign(mask.begin(), mask.end());
    for (auto& m : plan.pruned) m = m ? 1 : 0;
    plan.skipped.assign(total, 0);

    if (granularity == PruneGranularity::PerWeight) {
        plan.skipped = plan.pruned;
    } else {
        // Group = 8 DPU rows x 4 physical columns of one pass.
        std::map<std::tuple<unsigned, std::size_t, std::size_t>, std::vector<std::size_t>> groups;
        for (const auto& a : plan.assignments) {
            for (std::size_t r = 0; r < a.rows_used; ++r) {
                const std::size_t weight = std::size_t{a.filter} * L + a.unit_in_filter * rows + r;
                groups[{a.pass, r / MacroConfig::kSbnkDpuRows, a.column / MacroConfig::kSbnkDpuCols}].push_back(weight);
            }
        }
        for (const auto& [key, members] : groups) {
            const bool all_pruned =
                std::all_of(members.begin(), members.end(), [&](std::size_t w) { return plan.pruned[w] != 0; });
            if (all_pruned) {
                for (auto w : members) plan.skipped[w] = 1;
            }
        }
    }

    plan.skipped_weights = static_cast<std::uint64_t>(std::count(plan.skipped.begin(), plan.skipped.end(), 1));
    plan.pruned_fraction = static_cast<double>(plan.skipped_weights) / static_cast<double>(total);
    plan.degenerate = plan.skipped_weights == total;

    const std::uint64_t full = std::uint64_t{plan.passes} * plan.layer.output_positions() * plan.cycle_budget;
    const std::uint64_t surviving = total - plan.skipped_weights;
    plan.compute_cycles = (full * surviving + total - 1) / total;
    plan.reload_cycles = reload_cycles(plan);
    plan.cycles_total = plan.compute_cycles + plan.reload_cycles;
    return plan;
}

std::vector<std::uint8_t> random_mask(std::size_t count, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(Errc::InvalidArgument, "pruning fraction outside [0,1]");
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count)));
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with raw draws keeps the result library independent.
    for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    std::vector<std::uint8_t> mask(count, 0);
    for (std::size_t i = 0; i < k; ++i) mask[order[i]] = 1;
    return mask;
}

std::vector<std::uint8_t> magnitude_mask(std::span<const std::int32_t> weights, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(Errc::InvalidArgument, "pruning fraction outside [0,1]");
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(weights.size())));
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(weights[a]) < std::abs(weights[b]); });
    std::vector<std::uint8_t> mask(weights.size(), 0);
    for (std::size_t i = 0; i < k; ++i) mask[order[i]] = 1;
    return mask;
}

std::uint64_t ExecutionTrace::total_macs() const {
    std::uint64_t n = 0;
    for (const auto& s : steps) n += s.macs;
    return n;
}

std::uint64_t ExecutionTrace::total_cycles() const {
    std::vector<std::uint64_t> per_phase(phases, 0);
    for (const auto& s : steps) per_phase[s.phase] = std::max(per_phase[s.phase], s.cycles);
    return std::accumulate(per_phase.begin(), per_phase.end(), std::uint64_t{0});
}

ExecutionTrace schedule(const MappingPlan& plan, const MacroState& macro) {
    ExecutionTrace trace;
    if (plan.assignments.empty()) return trace;

    const auto& cfg = macro.config();
    if (cfg.rows != plan.macro_rows || cfg.columns != plan.macro_columns ||
        cfg.weight_precision != plan.layer.weight_bits || cfg.input_precision < plan.layer.act_bits) {
        throw Error(Errc::GeometryMismatch, "macro configuration does not match the plan for layer '" +
                                                plan.layer.name + "'");
    }
    const std::size_t rows = cfg.dpu_rows();
    const std::uint64_t positions = plan.layer.output_positions();

    for (std::size_t pass = 0; pass < plan.passes; ++pass) {
        std::vector<std::size_t> active;
        for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
            const auto& a = plan.assignments[i];
            if (a.pass == pass && unit_active(plan, a, rows)) active.push_back(i);
        }
        if (active.empty()) continue;
        const std::size_t write_phase = trace.phases++;
        const std::size_t compute_phase = trace.phases++;
        for (auto i : active) {
            const auto& a = plan.assignments[i];
            trace.steps.push_back(
                TraceStep{write_phase, TraceOp::Write, pass, a.column, unit_write_cycles(plan, a), 0, i});
        }
        for (auto i : active) {
            const auto& a = plan.assignments[i];
            std::uint64_t live = 0;
            for (std::size_t r = 0; r < a.rows_used; ++r) {
                if (!plan.is_skipped(a.filter, a.unit_in_filter * rows + r)) ++live;
            }
            trace.steps.push_back(TraceStep{compute_phase, TraceOp::Compute, pass, a.column,
                                            positions * plan.cycle_budget, live * positions, i});
        }
    }
    return trace;
}

std::string trace_csv(const ExecutionTrace& trace) {
    std::string out = "phase,op,bank,column,cycles\n";
    for (const auto& s : trace.steps) {
        out += std::to_string(s.phase);
        out += s.op == TraceOp::Write ? ",write_weights," : ",bit_serial_mac,";
        out += std::to_string(s.bank) + ',' + std::to_string(s.column) + ',' + std::to_string(s.cycles) + '\n';
    }
    return out;
}

LayerOutput execute(const MappingPlan& plan, const ExecutionTrace& trace, MacroState& macro,
                    std::span<const std::int32_t> weights, std::span<const std::int32_t> patches) {
    const std::size_t L = plan.layer.weights_per_filter();
    const std::size_t n = plan.layer.filters;
    const std::size_t positions = plan.layer.output_positions();
    if (weights.size() != n * L) throw Error(Errc::ShapeMismatch, "weights must be filters x W*W*K");
    if (patches.size() != positions * L) throw Error(Errc::ShapeMismatch, "patches must be positions x W*W*K");
    const std::size_t rows = macro.config().dpu_rows();

    LayerOutput out;
    out.values.assign(positions * n, 0);
    std::vector<std::int32_t> acts;
    std::vector<std::uint8_t> enable;
    for (const auto& step : trace.steps) {
        const auto& a = plan.assignments.at(step.assignment);
        const std::size_t first = std::size_t{a.filter} * L + std::size_t{a.unit_in_filter} * rows;
        if (step.op == TraceOp::Write) {
            macro.set_pim_enable(false);
            for (std::size_t r = 0; r < a.rows_used; ++r) {
                const bool pruned = !plan.pruned.empty() && plan.pruned[first + r];
                macro.write_signed_weight(WeightSlot{r, a.slot}, pruned ? 0 : weights[first + r]);
            }
            continue;
        }
        macro.set_pim_enable(true);
        enable.resize(a.rows_used);
        for (std::size_t r = 0; r < a.rows_used; ++r) enable[r] = plan.is_skipped(a.filter, a.unit_in_filter * rows + r) ? 0 : 1;
        for (std::size_t pos = 0; pos < positions; ++pos) {
            const std::int32_t* patch = patches.data() + pos * L + std::size_t{a.unit_in_filter} * rows;
            acts.assign(patch, patch + a.rows_used);
            const auto r = column_mac(macro, a.slot, acts, enable, plan.mode);
            out.values[pos * n + a.filter] += r.sum;
            out.macs += r.macs;
        }
    }
    macro.set_pim_enable(false);
    return out;
}

std::vector<std::int64_t> reference_layer(const MappingPlan& plan, std::span<const std::int32_t> weights,
                                          std::span<const std::int32_t> patches) {
    const std::size_t L = plan.layer.weights_per_filter();
    const std::size_t n = plan.layer.filters;
    const std::size_t positions = plan.layer.output_positions();
    if (weights.size() != n * L || patches.size() != positions * L) {
        throw Error(Errc::ShapeMismatch, "reference_layer operand shapes do not match the plan");
    }
    const unsigned width = std::max(plan.layer.weight_bits, plan.layer.act_bits);
    std::vector<std::int64_t> out(positions * n, 0);
    for (std::size_t pos = 0; pos < positions; ++pos) {
        for (std::size_t f = 0; f < n; ++f) {
            std::int64_t acc = 0;
            for (std::size_t i = 0; i < L; ++i) {
                if (!plan.pruned.empty() && plan.pruned[f * L + i]) continue;
                acc += signed_multiply(patches[pos * L + i], weights[f * L + i], width, plan.mode).value();
            }
            out[pos * n + f] = acc;
        }
    }
    return out;
}

std::vector<std::int32_t> im2col(const LayerSpec& layer, std::span<const std::int32_t> input) {
    const std::size_t K = layer.depth;
    const std::size_t H = layer.in_height;
    const std::size_t Wd = layer.in_width;
    if (input.size() != K * H * Wd) {
        throw Error(Errc::ShapeMismatch, "layer '" + layer.name + "' expects " + std::to_string(K * H * Wd) +
                                             " inputs, got " + std::to_string(input.size()));
    }
    const std::size_t W = layer.filter_width;
    const std::size_t L = layer.weights_per_filter();
    std::vector<std::int32_t> patches(layer.output_positions() * L, 0);
    std::size_t pos = 0;
    for (unsigned oy = 0; oy < layer.out_height(); ++oy) {
        for (unsigned ox = 0; ox < layer.out_width(); ++ox, ++pos) {
            for (std::size_t c = 0; c < K; ++c) {
                for (std::size_t ky = 0; ky < W; ++ky) {
                    for (std::size_t kx = 0; kx < W; ++kx) {
                        const long y = static_cast<long>(oy * layer.stride + ky) - layer.padding;
                        const long x = static_cast<long>(ox * layer.stride + kx) - layer.padding;
                        std::int32_t v = 0;
                        if (y >= 0 && x >= 0 && y < static_cast<long>(H) && x < static_cast<long>(Wd)) {
                            v = input[(c * H + static_cast<std::size_t>(y)) * Wd + static_cast<std::size_t>(x)];
                        }
                        patches[pos * L + (c * W + ky) * W + kx] = v;
                    }
                }
            }
        }
    }
    return patches;
}

std::uint64_t WorkloadPlan::compute_cycles() const {
    std::uint64_t n = 0;
    for (const auto& l : layers) n += l.compute_cycles;
    return n;
}

std::uint64_t WorkloadPlan::cycles_total() const {
    std::uint64_t n = 0;
    for (const auto& l : layers) n += l.cycles_total;
    return n;
}

std::uint64_t WorkloadPlan::analytic_macs() const {
    std::uint64_t n = 0;
    for (const auto& l : layers) n += l.analytic_macs();
    return n;
}

std::uint64_t WorkloadPlan::planned_macs() const {
    std::uint64_t n = 0;
    for (const auto& l : layers) n += l.planned_macs();
    return n;
}

double WorkloadPlan::pruned_fraction() const {
    std::uint64_t skipped = 0;
    std::uint64_t total = 0;
    for (const auto& l : layers) {
        skipped += l.skipped_weights;
        total += l.layer.total_weights();
    }
    return total ? static_cast<double>(skipped) / static_cast<double>(total) : 0.0;
}

std::vector<LayerSpec> vgg16_cifar10() {
    struct Block {
        unsigned channels;
        unsigned convs;
    };
    const Block blocks[] = {{64, 2}, {128, 2}, {256, 3}, {512, 3}, {512, 3}};
    std::vector<LayerSpec> layers;
    unsigned in_ch = 3;
    unsigned size = 32;
    unsigned idx = 1;
    for (const auto& b : blocks) {
        for (unsigned i = 0; i < b.convs; ++i) {
            layers.push_back(LayerSpec::conv("conv" + std::to_string(idx++), 3, in_ch, b.channels, size, size, 1, 1));
            in_ch = b.channels;
        }
        size /= 2;  // 2x2 max-pool, off-array
    }
    layers.push_back(LayerSpec::fc("fc1", 512, 512));
    layers.push_back(LayerSpec::fc("fc2", 512, 512));
    layers.push_back(LayerSpec::fc("fc3", 512, 10));
    return layers;
}

WorkloadPlan plan_workload(std::string name, std::span<const LayerSpec> layers, const MacroConfig& macro,
                           CiaMode mode, double pruning, std::uint64_t seed) {
    WorkloadPlan wp;
    wp.name = std::move(name);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto plan = map_layer(layers[i], macro, mode, MapOptions{true});
        if (pruning > 0.0) {
            auto mask = random_mask(layers[i].total_weights(), pruning, seed + i);
            plan = apply_pruning(std::move(plan), mask, PruneGranularity::PerWeight);
        }
        wp.layers.push_back(std::move(plan));
    }
    return wp;
}

nlohmann::json to_json(const LayerSpec& l) {
    return nlohmann::json{
        {"name", l.name},           {"kind", kind_name(l.kind)}, {"filter_width", l.filter_width},
        {"depth", l.depth},         {"filters", l.filters},      {"in_height", l.in_height},
        {"in_width", l.in_width},   {"stride", l.stride},        {"padding", l.padding},
        {"weight_bits", l.weight_bits}, {"act_bits", l.act_bits},
    };
}

LayerSpec layer_from_json(const nlohmann::json& j) {
    static const char* const kKeys[] = {"name",     "kind",   "filter_width", "depth",       "filters", "in_height",
                                        "in_width", "stride", "padding",      "weight_bits", "act_bits"};
    try {
        for (const auto& [key, value] : j.items()) {
            if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; }) ==
                std::end(kKeys)) {
                throw Error(Errc::InvalidArgument, "unknown layer key '" + key + "'");
            }
        }
        LayerSpec l;
        l.name = j.value("name", std::string("layer"));
        l.kind = parse_kind(j.at("kind").get<std::string>());
        l.filter_width = j.value("filter_width", 1u);
        l.depth = j.at("depth").get<unsigned>();
        l.filters = j.at("filters").get<unsigned>();
        l.in_height = j.value("in_height", 1u);
        l.in_width = j.value("in_width", 1u);
        l.stride = j.value("stride", 1u);
        l.padding = j.value("padding", 0u);
        l.weight_bits = j.value("weight_bits", 8u);
        l.act_bits = j.value("act_bits", 8u);
        l.validate();
        return l;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("bad layer JSON: ") + e.what());
    }
}

nlohmann::json to_json(const MappingPlan& p) {
    nlohmann::json assignments = nlohmann::json::array();
    for (const auto& a : p.assignments) {
        assignments.push_back({a.filter, a.unit_in_filter, a.pass, a.slot, a.column, a.rows_used});
    }
    return nlohmann::json{
        {"layer", to_json(p.layer)},
        {"mode", p.mode.name()},
        {"cycle_budget", p.cycle_budget},
        {"macro_rows", p.macro_rows},
        {"macro_columns", p.macro_columns},
        {"gang", p.gang},
        {"units_per_filter", p.units_per_filter},
        {"units_per_pass", p.units_per_pass},
        {"write_cycles_per_row", p.write_cycles_per_row},
        {"filter_split", p.filter_split},
        {"assignments", assignments},
        {"passes", p.passes},
        {"banks_required", p.banks_required},
        {"compute_cycles", p.compute_cycles},
        {"reload_cycles", p.reload_cycles},
        {"cycles_total", p.cycles_total},
        {"pruned_fraction", p.pruned_fraction},
        {"granularity", granularity_name(p.granularity)},
        {"pruned_mask", bits_to_string(p.pruned)},
        {"skipped_mask", bits_to_string(p.skipped)},
        {"skipped_weights", p.skipped_weights},
        {"degenerate", p.degenerate},
        {"analytic_macs", p.analytic_macs()},
        {"planned_macs", p.planned_macs()},
    };
}

MappingPlan plan_from_json(const nlohmann::json& j) {
    try {
        MappingPlan p;
        p.layer = layer_from_json(j.at("layer"));
        p.mode = CiaMode::parse(j.at("mode").get<std::string>());
        p.cycle_budget = j.at("cycle_budget").get<unsigned>();
        p.macro_rows = j.at("macro_rows").get<std::size_t>();
        p.macro_columns = j.at("macro_columns").get<std::size_t>();
        p.gang = j.at("gang").get<std::size_t>();
        p.units_per_filter = j.at("units_per_filter").get<std::size_t>();
        p.units_per_pass = j.at("units_per_pass").get<std::size_t>();
        p.write_cycles_per_row = j.value("write_cycles_per_row", std::uint64_t{1});
        p.filter_split = j.at("filter_split").get<bool>();
        for (const auto& a : j.at("assignments")) {
            ColumnAssignment c;
            c.filter = a.at(0).get<unsigned>();
            c.unit_in_filter = a.at(1).get<unsigned>();
            c.pass = a.at(2).get<unsigned>();
            c.slot = a.at(3).get<unsigned>();
            c.column = a.at(4).get<std::size_t>();
            c.rows_used = a.at(5).get<unsigned>();
            p.assignments.push_back(c);
        }
        p.passes = j.at("passes").get<std::size_t>();
        p.banks_required = j.at("banks_required").get<std::size_t>();
        p.compute_cycles = j.at("compute_cycles").get<std::uint64_t>();
        p.reload_cycles = j.at("reload_cycles").get<std::uint64_t>();
        p.cycles_total = j.at("cycles_total").get<std::uint64_t>();
        p.pruned_fraction = j.at("pruned_fraction").get<double>();
        p.granularity = parse_granularity(j.at("granularity").get<std::string>());
        p.pruned = string_to_bits(j.at("pruned_mask").get<std::string>());
        p.skipped = string_to_bits(j.at("skipped_mask").get<std::string>());
        p.skipped_weights = j.at("skipped_weights").get<std::uint64_t>();
        p.degenerate = j.at("degenerate").get<bool>();
        const std::size_t total = p.layer.total_weights();
        if ((!p.pruned.empty() && p.pruned.size() != total) || (!p.skipped.empty() && p.skipped.size() != total)) {
            throw Error(Errc::MaskShapeMismatch, "plan masks do not match the layer");
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("bad plan JSON: ") + e.what());
    }
}

nlohmann::json to_json(const WorkloadPlan& w) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : w.layers) layers.push_back(to_json(l));
    return nlohmann::json{
        {"name", w.name},
        {"layers", layers},
        {"compute_cycles", w.compute_cycles()},
        {"cycles_total", w.cycles_total()},
        {"analytic_macs", w.analytic_macs()},
        {"planned_macs", w.planned_macs()},
        {"pruned_fraction", w.pruned_fraction()},
    };
}

WorkloadPlan workload_from_json(const nlohmann::json& j) {
    try {
        WorkloadPlan w;
        if (j.contains("layers")) {
            w.name = j.value("name", std::string("workload"));
            for (const auto& l : j.at("layers")) w.layers.push_back(plan_from_json(l));
        } else {
            w.name = j.at("layer").value("name", std::string("layer"));
            w.layers.push_back(plan_from_json(j));
        }
        return w;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("bad workload JSON: ") + e.what());
    }
}

}  // namespace pimsim::map
