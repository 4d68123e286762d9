#include "pimsim/trait_tree.hpp"

#include <algorithm>

#include "pimsim/error.hpp"

namespace pimsim::trait {
namespace {

struct KindInfo {
    FaKind kind;
    std::string_view name;
    unsigned transistors;
    double area;  // <= 0 when unknown
};

constexpr KindInfo kKinds[] = {
    {FaKind::FA7T, "FA7T", 7, 4.2},
    {FaKind::PG26T, "PG26T", 26, 15.63},
    {FaKind::FA28T, "FA28T", 28, 22.5},
    {FaKind::FA14T, "FA14T", 14, 0.0},
    {FaKind::IFA16T, "IFA16T", 16, 0.0},
    {FaKind::FA12T, "FA12T", 12, 0.0},
};

const KindInfo& info(FaKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k;
    }
    throw Error(Errc::InvalidArgument, "unknown full-adder kind");
}

// Lays out the RCA-of-RCAs shape; kinds are filled by the caller.
AdderTreeSpec shape(unsigned leaf_count, unsigned leaf_width) {
    if (leaf_count < 2) throw Error(Errc::InvalidArgument, "adder tree needs at least 2 leaves");
    if (leaf_width < 1 || leaf_width > 32) throw Error(Errc::InvalidArgument, "leaf width outside [1,32]");

    AdderTreeSpec spec;
    spec.leaf_count = leaf_count;
    spec.leaf_width = leaf_width;
    std::vector<unsigned> widths(leaf_count, leaf_width);
    std::size_t fa = 0;
    unsigned level = 0;
    while (widths.size() > 1) {
        std::vector<AdderNode> row;
        std::vector<unsigned> next;
        for (std::size_t i = 0; i + 1 < widths.size(); i += 2) {
            AdderNode node;
            node.level = level;
            node.index = static_cast<unsigned>(row.size());
            node.input_width = std::max(widths[i], widths[i + 1]);
            node.first_fa = fa;
            fa += node.input_width;
            row.push_back(node);
            next.push_back(node.input_width + 1);
        }
        if (widths.size() % 2) next.push_back(widths.back());
        spec.levels.push_back(std::move(row));
        widths = std::move(next);
        ++level;
    }
    spec.kinds.assign(fa, FaKind::PG26T);
    return spec;
}

}  // namespace

unsigned transistor_count(FaKind kind) { return info(kind).transistors; }

std::optional<double> area_um2(FaKind kind) {
    double a = info(kind).area;
    if (a <= 0.0) return std::nullopt;
    return a;
}

std::string_view fa_name(FaKind kind) { return info(kind).name; }

FaKind parse_fa_kind(std::string_view name) {
    for (const auto& k : kKinds) {
        if (k.name == name) return k.kind;
    }
    throw Error(Errc::InvalidArgument, "unknown full-adder kind '" + std::string(name) + "'");
}

std::string_view interspersion_name(Interspersion p) {
    switch (p) {
        case Interspersion::Alternating: return "alternating";
        case Interspersion::AllAccurate: return "all_accurate";
        case Interspersion::AllReduced: return "all_reduced";
        case Interspersion::Custom: return "custom";
    }
    return "unknown";
}

Interspersion parse_interspersion(std::string_view name) {
    for (auto p : {Interspersion::Alternating, Interspersion::AllAccurate, Interspersion::AllReduced,
                   Interspersion::Custom}) {
        if (interspersion_name(p) == name) return p;
    }
    throw Error(Errc::InvalidArgument, "unknown interspersion pattern '" + std::string(name) + "'");
}

std::size_t AdderTreeSpec::node_count() const {
    std::size_t n = 0;
    for (const auto& row : levels) n += row.size();
    return n;
}

unsigned AdderTreeSpec::output_width() const {
    if (levels.empty()) return leaf_width;
    return levels.back().front().input_width + 1;
}

std::vector<FaKind> ratio_mask(const AdderTreeSpec& spec, unsigned reduced, unsigned period) {
    if (period == 0 || reduced > period) throw Error(Errc::InvalidArgument, "ratio requires reduced <= period, period >= 1");
    std::vector<FaKind> mask(spec.fa_count(), FaKind::PG26T);
    for (const auto& row : spec.levels) {
        for (const auto& node : row) {
            for (unsigned p = 0; p < node.input_width; ++p) {
                if (p % period >= period - reduced) mask[node.first_fa + p] = FaKind::FA7T;
            }
        }
    }
    return mask;
}

AdderTreeSpec build_tree(unsigned leaf_count, Interspersion pattern, unsigned leaf_width) {
    AdderTreeSpec spec = shape(leaf_count, leaf_width);
    spec.pattern = pattern;
    switch (pattern) {
        case Interspersion::AllAccurate:
            std::fill(spec.kinds.begin(), spec.kinds.end(), FaKind::PG26T);
            break;
        case Interspersion::AllReduced:
            std::fill(spec.kinds.begin(), spec.kinds.end(), FaKind::FA7T);
            break;
        case Interspersion::Alternating:
            spec.kinds = ratio_mask(spec, 1, 2);
            break;
        case Interspersion::Custom:
            throw Error(Errc::InvalidArgument, "custom pattern requires an explicit mask");
    }
    return spec;
}

AdderTreeSpec build_custom_tree(unsigned leaf_count, std::vector<FaKind> mask, unsigned leaf_width) {
    AdderTreeSpec spec = shape(leaf_count, leaf_width);
    if (mask.size() != spec.fa_count()) {
        throw Error(Errc::LengthMismatch, "mask has " + std::to_string(mask.size()) + " entries, tree has " +
                                              std::to_string(spec.fa_count()) + " full adders");
    }
    spec.pattern = Interspersion::Custom;
    spec.kinds = std::move(mask);
    return spec;
}

std::uint64_t TreeTally::fa_count() const {
    std::uint64_t n = 0;
    for (const auto& [kind, count] : per_kind_counts) n += count;
    return n;
}

double TreeTally::mean_transistors_per_fa() const {
    auto n = fa_count();
    return n ? static_cast<double>(total_transistors) / static_cast<double>(n) : 0.0;
}

double TreeTally::transistor_reduction_pct(FaKind baseline) const {
    const double base = static_cast<double>(fa_count()) * transistor_count(baseline);
    if (base == 0.0) return 0.0;
    return 100.0 * (base - static_cast<double>(total_transistors)) / base;
}

TreeTally& TreeTally::operator+=(const TreeTally& other) {
    total_transistors += other.total_transistors;
    for (const auto& [kind, count] : other.per_kind_counts) per_kind_counts[kind] += count;
    estimated_area_um2 += other.estimated_area_um2;
    area_complete = area_complete && other.area_complete;
    return *this;
}

TreeTally operator+(TreeTally a, const TreeTally& b) { return a += b; }

TreeTally tally(const AdderTreeSpec& spec) {
    TreeTally t;
    for (FaKind k : spec.kinds) {
        ++t.per_kind_counts[k];
        t.total_transistors += transistor_count(k);
        if (auto a = area_um2(k)) {
            t.estimated_area_um2 += *a;
        } else {
            t.area_complete = false;
        }
    }
    return t;
}

FaOutput full_add(FaKind kind, unsigned a, unsigned b, unsigned cin) {
    (void)info(kind);
    a &= 1u;
    b &= 1u;
    cin &= 1u;
    return FaOutput{a ^ b ^ cin, (a & b) | (cin & (a ^ b))};
}

std::uint64_t ripple_add(std::span<const FaKind> chain, std::uint64_t x, std::uint64_t y) {
    std::uint64_t out = 0;
    unsigned carry = 0;
    for (std::size_t p = 0; p < chain.size(); ++p) {
        auto r = full_add(chain[p], static_cast<unsigned>(x >> p), static_cast<unsigned>(y >> p), carry);
        out |= std::uint64_t{r.sum} << p;
        carry = r.carry;
    }
    return out | (std::uint64_t{carry} << chain.size());
}

std::uint64_t reduce_gate_level(const AdderTreeSpec& spec, std::span<const std::uint32_t> leaves) {
    if (leaves.size() != spec.leaf_count) {
        throw Error(Errc::LengthMismatch, "expected " + std::to_string(spec.leaf_count) + " leaves");
    }
    std::vector<std::uint64_t> values;
    values.reserve(leaves.size());
    for (auto v : leaves) {
        if (spec.leaf_width < 32 && (v >> spec.leaf_width)) {
            throw Error(Errc::InvalidOperand, "leaf value exceeds leaf width");
        }
        values.push_back(v);
    }
    for (const auto& row : spec.levels) {
        std::vector<std::uint64_t> next;
        for (const auto& node : row) {
            next.push_back(ripple_add(spec.chain(node), values[2 * node.index], values[2 * node.index + 1]));
        }
        if (values.size() % 2) next.push_back(values.back());
        values = std::move(next);
    }
    return values.front();
}

std::int64_t reduce(std::span<const WeightedTerm> partials) {
    if (partials.empty()) throw Error(Errc::InvalidArgument, "reduce of an empty partial list");
    std::vector<std::int64_t> level;
    level.reserve(partials.size());
    for (const auto& p : partials) level.push_back(p.value * (std::int64_t{1} << p.shift));
    while (level.size() > 1) {
        std::vector<std::int64_t> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) next.push_back(level[i] + level[i + 1]);
        if (level.size() % 2) next.push_back(level.back());
        level = std::move(next);
    }
    return level.front();
}

nlohmann::json to_json(const AdderTreeSpec& spec) {
    nlohmann::json kinds = nlohmann::json::array();
    for (FaKind k : spec.kinds) kinds.push_back(std::string(fa_name(k)));
    return nlohmann::json{
        {"leaf_count", spec.leaf_count},
        {"leaf_width", spec.leaf_width},
        {"pattern", std::string(interspersion_name(spec.pattern))},
        {"kinds", kinds},
    };
}

AdderTreeSpec tree_from_json(const nlohmann::json& j) {
    try {
        const auto leaves = j.at("leaf_count").get<unsigned>();
        const auto width = j.value("leaf_width", 1u);
        const auto pattern = parse_interspersion(j.at("pattern").get<std::string>());
        AdderTreeSpec spec;
        if (pattern == Interspersion::Custom || j.contains("kinds")) {
            std::vector<FaKind> mask;
            for (const auto& k : j.at("kinds")) mask.push_back(parse_fa_kind(k.get<std::string>()));
            spec = build_custom_tree(leaves, std::move(mask), width);
            spec.pattern = pattern;
            if (pattern != Interspersion::Custom && spec.kinds != build_tree(leaves, pattern, width).kinds) {
                throw Error(Errc::InvalidArgument, "kind mask does not match the named pattern");
            }
        } else {
            spec = build_tree(leaves, pattern, width);
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("bad tree spec JSON: ") + e.what());
    }
}

nlohmann::json to_json(const TreeTally& t) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [kind, n] : t.per_kind_counts) counts[std::string(fa_name(kind))] = n;
    return nlohmann::json{
        {"total_transistors", t.total_transistors},
        {"per_kind_counts", counts},
        {"estimated_area_um2", t.estimated_area_um2},
        {"area_complete", t.area_complete},
        {"mean_transistors_per_fa", t.mean_transistors_per_fa()},
        {"reduction_vs_pg26t_pct", t.transistor_reduction_pct(FaKind::PG26T)},
        {"reduction_vs_fa28t_pct", t.transistor_reduction_pct(FaKind::FA28T)},
        {"reported_reduction_pct", TraitCalibration::reported_transistor_reduction_pct},
    };
}

}  // namespace pimsim::trait
