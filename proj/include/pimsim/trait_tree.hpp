#pragma once

// Transistor-reduced interspersed adder tree: a binary tree of ripple-carry
// adders whose full adders alternate between a power-gated 26T cell and a 7T
// cell. Both cells are logically exact full adders, so the functional
// reduction is pattern independent; the pattern only affects the structural
// tallies (transistors, area) and the attached electrical calibration.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace pimsim::trait {

enum class FaKind { FA7T, PG26T, FA28T, FA14T, IFA16T, FA12T };

unsigned transistor_count(FaKind kind);
// Known layout areas at 65 nm; empty for kinds without a reported figure.
std::optional<double> area_um2(FaKind kind);
std::string_view fa_name(FaKind kind);
FaKind parse_fa_kind(std::string_view name);

enum class Interspersion { Alternating, AllAccurate, AllReduced, Custom };

std::string_view interspersion_name(Interspersion p);
Interspersion parse_interspersion(std::string_view name);

struct AdderNode {
    unsigned level = 0;
    unsigned index = 0;
    unsigned input_width = 0;  // ripple chain length; output is input_width + 1 bits
    std::size_t first_fa = 0;  // offset into AdderTreeSpec::kinds, LSB first
};

struct AdderTreeSpec {
    unsigned leaf_count = 0;
    unsigned leaf_width = 1;
    Interspersion pattern = Interspersion::Alternating;
    std::vector<std::vector<AdderNode>> levels;
    std::vector<FaKind> kinds;  // one per full adder, level-major, node order, LSB first

    std::size_t node_count() const;
    std::size_t fa_count() const { return kinds.size(); }
    unsigned output_width() const;
    std::span<const FaKind> chain(const AdderNode& node) const {
        return std::span<const FaKind>(kinds).subspan(node.first_fa, node.input_width);
    }
};

// Throws Errc::InvalidArgument for leaf_count < 2, leaf_width outside [1,32],
// or a Custom pattern (use build_custom_tree).
AdderTreeSpec build_tree(unsigned leaf_count, Interspersion pattern, unsigned leaf_width = 1);

// Explicit per-FA kinds; mask length must equal the tree's FA count.
AdderTreeSpec build_custom_tree(unsigned leaf_count, std::vector<FaKind> mask, unsigned leaf_width = 1);

// Within each ripple chain, positions p with (p % period) >= period - reduced
// get FA7T and the rest PG26T. ratio_mask(spec, 1, 2) is the Alternating mask.
std::vector<FaKind> ratio_mask(const AdderTreeSpec& shape, unsigned reduced, unsigned period);

struct TreeTally {
    std::uint64_t total_transistors = 0;
    std::map<FaKind, std::uint64_t> per_kind_counts;
    double estimated_area_um2 = 0.0;
    bool area_complete = true;  // false when a kind without a known area is present

    std::uint64_t fa_count() const;
    double mean_transistors_per_fa() const;
    // Percentage reduction of this tally's transistors against the same FA
    // count built entirely from `baseline`.
    double transistor_reduction_pct(FaKind baseline) const;

    TreeTally& operator+=(const TreeTally& other);
};

TreeTally operator+(TreeTally a, const TreeTally& b);

TreeTally tally(const AdderTreeSpec& spec);

struct FaOutput {
    unsigned sum = 0;
    unsigned carry = 0;
};

// Logical full adder; identical truth table for every kind.
FaOutput full_add(FaKind kind, unsigned a, unsigned b, unsigned cin);

// Ripple-carry addition of two chain-width operands through the given cells.
std::uint64_t ripple_add(std::span<const FaKind> chain, std::uint64_t x, std::uint64_t y);

// Gate-level evaluation of the whole tree. leaves.size() == leaf_count and
// every leaf must fit in leaf_width bits.
std::uint64_t reduce_gate_level(const AdderTreeSpec& spec, std::span<const std::uint32_t> leaves);

struct WeightedTerm {
    std::int64_t value = 0;
    unsigned shift = 0;  // value contributes value * 2^shift
};

// Exact sum of weighted partials via pairwise tree reduction.
// Throws Errc::InvalidArgument on an empty list.
std::int64_t reduce(std::span<const WeightedTerm> partials);

nlohmann::json to_json(const AdderTreeSpec& spec);
AdderTreeSpec tree_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TreeTally& t);

// Reported electrical figures for the adder tree only (no accumulator stage).
// Percent improvements of the interspersed 7T/PG-26T tree.
struct TraitCalibration {
    static constexpr double power_gain_vs_fa28t_pct = 58.8;
    static constexpr double delay_gain_vs_fa28t_pct = 35.7;
    static constexpr double power_gain_vs_pg26t_pct = 34.0;
    static constexpr double delay_gain_vs_pg26t_pct = 8.4;
    static constexpr double power_gain_vs_7t_28t_pct = 24.3;
    static constexpr double delay_gain_vs_7t_28t_pct = 48.0;
    static constexpr double static_power_share_pct = 13.6;
    // Reported transistor reduction. A 1:1 alternation against all-PG26T
    // gives 36.5%, so this number is carried as-is and not reproduced.
    static constexpr double reported_transistor_reduction_pct = 21.35;
};

}  // namespace pimsim::trait
