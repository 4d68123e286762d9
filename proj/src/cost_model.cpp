#include "pimsim/cost_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "pimsim/constants.hpp"
#include "pimsim/error.hpp"
#include "pimsim/trait_tree.hpp"

namespace pimsim::cost {
namespace {

constexpr auto kDerived = Provenance::DerivedFormula;
constexpr auto kCalibrated = Provenance::PaperCalibrated;

void add_throughput(CostReport& r, const MacroConfig& config, unsigned cycles, const std::string& prefix) {
    r.add(prefix + "cycles_per_op", cycles, "cycles", kDerived);
    r.add(prefix + "throughput_ops_per_s", reported_throughput(config, cycles), "ops/s", kDerived,
          "4 significant figures");
    r.add(prefix + "throughput_raw_ops_per_s", raw_throughput(config, cycles), "ops/s", kDerived);
}

const char* kUnitWarning =
    "throughput is in ops/s; the published figure for this value carries a TOPS label but is GOPS-scale";

}  // namespace

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::DerivedFormula: return "derived_formula";
        case Provenance::PaperCalibrated: return "paper_calibrated";
        case Provenance::Unset: break;
    }
    return "unset";
}

void CostReport::add(std::string name, double value, std::string unit, Provenance provenance, std::string note) {
    metrics.push_back(Metric{std::move(name), value, std::move(unit), provenance, std::move(note)});
}

const Metric* CostReport::find(std::string_view name) const {
    for (const auto& m : metrics) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

double CostReport::value(std::string_view name) const {
    if (const auto* m = find(name)) return m->value;
    throw Error(Errc::InvalidArgument, "no metric named '" + std::string(name) + "'");
}

bool CostReport::valid() const {
    return std::none_of(metrics.begin(), metrics.end(),
                        [](const Metric& m) { return m.provenance == Provenance::Unset; });
}

double round_sig(double value, int digits) {
    if (value == 0.0 || !std::isfinite(value)) return value;
    const int exponent = static_cast<int>(std::floor(std::log10(std::fabs(value))));
    const int decimals = digits - 1 - exponent;
    // Scale by an exact power of ten on the side that keeps the result exact.
    if (decimals >= 0) {
        const double f = std::pow(10.0, decimals);
        return std::round(value * f) / f;
    }
    const double f = std::pow(10.0, -decimals);
    return std::round(value / f) * f;
}

double raw_throughput(const MacroConfig& config, unsigned cycles_per_op) {
    config.validate();
    if (cycles_per_op == 0) throw Error(Errc::InvalidArgument, "cycles_per_op must be >= 1");
    return 2.0 * static_cast<double>(config.dot_products_per_cycle()) * config.clock_mhz * 1e6 / cycles_per_op;
}

double reported_throughput(const MacroConfig& config, unsigned cycles_per_op) {
    return round_sig(raw_throughput(config, cycles_per_op), 4);
}

CostReport throughput(const MacroConfig& config, unsigned cycles_per_op) {
    CostReport r;
    r.add("dot_products_per_cycle", static_cast<double>(config.dot_products_per_cycle()), "count", kDerived);
    r.add("clock_hz", config.clock_mhz * 1e6, "Hz", kDerived);
    add_throughput(r, config, cycles_per_op, "");
    r.warnings.push_back(kUnitWarning);
    return r;
}

CostReport throughput(const MacroConfig& config, CiaMode mode) {
    return throughput(config, mode.cycle_budget(config.input_precision));
}

double transistor_savings(double proposed, double baseline) {
    if (!(baseline > 0.0)) throw Error(Errc::InvalidArgument, "baseline transistor count must be > 0");
    return 100.0 * (baseline - proposed) / baseline;
}

double corner_delay(Corner corner) {
    switch (corner) {
        case Corner::FF: return 1.296;
        case Corner::TT: return 1.968;
        case Corner::SS: return 2.928;
    }
    throw Error(Errc::UnknownCorner, "unknown process corner");
}

std::string_view corner_name(Corner corner) {
    switch (corner) {
        case Corner::FF: return "FF";
        case Corner::TT: return "TT";
        case Corner::SS: return "SS";
    }
    return "unknown";
}

Corner parse_corner(std::string_view text) {
    std::string up(text);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (auto c : {Corner::FF, Corner::TT, Corner::SS}) {
        if (corner_name(c) == up) return c;
    }
    throw Error(Errc::UnknownCorner, "unknown process corner '" + std::string(text) + "'");
}

double macro_area_um2(const MacroConfig& config) {
    return static_cast<double>(config.capacity_bits()) * constants::kCellAreaUm2;
}

double bottom_up_power_w(const MacroConfig& config) {
    const double cells = static_cast<double>(config.capacity_bits()) * constants::kCellPowerNw * 1e-9;
    return cells / (1.0 - trait::TraitCalibration::static_power_share_pct / 100.0);
}

CostReport config_report(const MacroConfig& config) {
    config.validate();
    CostReport r;
    r.add("dot_products_per_cycle", static_cast<double>(config.dot_products_per_cycle()), "count", kDerived);
    r.add("clock_hz", config.clock_mhz * 1e6, "Hz", kDerived);
    add_throughput(r, config, 1, "1a1w_");
    add_throughput(r, config, CiaMode::accurate().cycle_budget(config.input_precision), "accurate_");
    r.add("capacity_bits", static_cast<double>(config.capacity_bits()), "bits", kDerived);
    r.add("cell_area_um2", macro_area_um2(config), "um^2", kDerived, "bit-cell array only");
    r.add("savings_vs_flex_dpu_pct",
          transistor_savings(constants::kTransistorsPerBitMult, constants::kFlexDpuTransistors), "%", kDerived);
    r.add("savings_vs_xnor_pct", transistor_savings(constants::kTransistorsPerBitMult, constants::kXnorTransistors),
          "%", kDerived, "published comparison states 48.5");
    r.add("savings_vs_nor_pct", transistor_savings(constants::kTransistorsPerBitMult, constants::kNorTransistors),
          "%", kDerived);
    for (auto c : {Corner::FF, Corner::TT, Corner::SS}) {
        r.add("compute_delay_" + std::string(corner_name(c)) + "_ns", corner_delay(c), "ns", kCalibrated);
    }
    const double power = bottom_up_power_w(config);
    r.add("bottom_up_power_w", power, "W", kDerived, "cell power x cells / (1 - adder tree share)");
    r.add("bottom_up_energy_eff_tops_per_w", reported_throughput(config, 1) / power / 1e12, "TOPS/W", kDerived,
          "1-cycle operation, secondary estimator");
    r.warnings.push_back(kUnitWarning);
    return r;
}

CostReport macro_summary(const MacroConfig& config, const map::WorkloadPlan& workload, CiaMode mode) {
    CostReport r = config_report(config);
    const unsigned cycles = mode.cycle_budget(config.input_precision);
    add_throughput(r, config, cycles, "mode_");

    r.empty_plan = workload.layers.empty();
    const double clock = config.clock_mhz * 1e6;
    const double pruned = workload.pruned_fraction();
    r.add("workload_layers", static_cast<double>(workload.layers.size()), "count", kDerived);
    r.add("utilized_cycles", static_cast<double>(workload.cycles_total()), "cycles", kDerived);
    r.add("compute_cycles", static_cast<double>(workload.compute_cycles()), "cycles", kDerived);
    r.add("analytic_macs", static_cast<double>(workload.analytic_macs()), "MACs", kDerived);
    r.add("executed_macs", static_cast<double>(workload.planned_macs()), "MACs", kDerived);
    r.add("pruned_fraction", pruned, "fraction", kDerived);
    const double dense_equiv = pruned < 1.0 ? raw_throughput(config, cycles) / (1.0 - pruned) : 0.0;
    r.add("pruning_scaled_ops_per_s", dense_equiv, "ops/s", kDerived, "mode throughput / (1 - pruned_fraction)");
    double effective = 0.0;
    double latency = 0.0;
    if (workload.cycles_total() > 0) {
        latency = static_cast<double>(workload.cycles_total()) / clock;
        effective = 2.0 * static_cast<double>(workload.analytic_macs()) / latency;
    }
    r.add("workload_latency_s", latency, "s", kDerived);
    r.add("workload_effective_ops_per_s", effective, "ops/s", kDerived, "dense-equivalent ops over plan cycles");

    r.add("throughput_tops", constants::kReportedThroughputTops, "TOPS", kCalibrated,
          "pruned VGG-16 / CIFAR-10 figure; not derivable from the scaling chain");
    r.add("throughput_tops_starred", constants::kReportedThroughputTopsStarred, "TOPS", kCalibrated);
    r.add("energy_eff_tops_per_w", constants::kReportedEnergyEffTopsPerW, "TOPS/W", kCalibrated,
          "pruned VGG-16 / CIFAR-10 figure");
    r.add("energy_eff_tops_per_w_starred", constants::kReportedEnergyEffTopsPerWStarred, "TOPS/W", kCalibrated);
    r.add("reported_pruning_fraction", constants::kReportedPruningFraction, "fraction", kCalibrated);

    if (r.empty_plan) {
        r.warnings.push_back("workload has no layers; cycle and MAC fields are zero");
    } else if (std::fabs(pruned - constants::kReportedPruningFraction) > 0.01) {
        r.warnings.push_back("workload pruning differs from the calibrated 0.30; calibrated fields do not apply");
    }
    return r;
}

nlohmann::json to_json(const CostReport& report) {
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& m : report.metrics) {
        nlohmann::json j{{"name", m.name},
                         {"value", m.value},
                         {"unit", m.unit},
                         {"provenance", std::string(provenance_name(m.provenance))}};
        if (!m.note.empty()) j["note"] = m.note;
        metrics.push_back(std::move(j));
    }
    return nlohmann::json{
        {"metrics", metrics},
        {"warnings", report.warnings},
        {"empty_plan", report.empty_plan},
        {"valid", report.valid()},
    };
}

}  // namespace pimsim::cost
