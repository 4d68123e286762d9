#pragma once

// Area / power / delay / throughput figures for a macro configuration.
//
// Every metric carries a provenance label: values computed from a formula
// over the configuration are `derived_formula`; figures that can only be
// taken from the silicon report are `paper_calibrated`.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pimsim/cia2m.hpp"
#include "pimsim/mapper.hpp"
#include "pimsim/pim_array.hpp"

namespace pimsim::cost {

enum class Provenance { Unset, DerivedFormula, PaperCalibrated };

std::string_view provenance_name(Provenance p);

struct Metric {
    std::string name;
    double value = 0.0;
    std::string unit;
    Provenance provenance = Provenance::Unset;
    std::string note;
};

struct CostReport {
    std::vector<Metric> metrics;  // insertion order is the output order
    std::vector<std::string> warnings;
    bool empty_plan = false;

    void add(std::string name, double value, std::string unit, Provenance provenance, std::string note = {});
    const Metric* find(std::string_view name) const;
    // Throws Errc::InvalidArgument for an unknown metric.
    double value(std::string_view name) const;
    // False if any metric lacks a provenance label.
    bool valid() const;
};

// Rounds to `digits` significant figures.
double round_sig(double value, int digits);

// 2 x dot_products_per_cycle x clock / cycles_per_op, unrounded.
// Throws Errc::InvalidArgument for cycles_per_op == 0 or an invalid config.
double raw_throughput(const MacroConfig& config, unsigned cycles_per_op);

// Reported figure: the raw value at 4 significant figures.
double reported_throughput(const MacroConfig& config, unsigned cycles_per_op);

CostReport throughput(const MacroConfig& config, unsigned cycles_per_op);
// cycles_per_op = mode.cycle_budget(config.input_precision).
CostReport throughput(const MacroConfig& config, CiaMode mode);

// 100 x (1 - proposed / baseline). Throws Errc::InvalidArgument for baseline <= 0.
double transistor_savings(double proposed, double baseline);

enum class Corner { FF, TT, SS };

double corner_delay(Corner corner);  // ns
std::string_view corner_name(Corner corner);
// Accepts FF / TT / SS (case-insensitive). Throws Errc::UnknownCorner.
Corner parse_corner(std::string_view text);

double macro_area_um2(const MacroConfig& config);
// Cell power over all cells, grossed up by the adder tree's static share.
double bottom_up_power_w(const MacroConfig& config);

// Configuration-only report: 1-cycle and accurate-mode throughput, area,
// bit-cell savings, corner delays and the bottom-up power estimate.
CostReport config_report(const MacroConfig& config);

// Workload report: the configuration figures, the plan's cycle counts and
// pruning scaling, and the calibrated efficiency endpoints.
CostReport macro_summary(const MacroConfig& config, const map::WorkloadPlan& workload, CiaMode mode);

nlohmann::json to_json(const CostReport& report);

}  // namespace pimsim::cost
