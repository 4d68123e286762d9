#include "pimsim/error_analysis.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "pimsim/error.hpp"
#include "pimsim/parallel.hpp"

namespace pimsim {
namespace {

struct Accumulator {
    std::uint64_t total = 0;
    std::uint64_t exact = 0;
    std::uint64_t sum_abs = 0;
    std::uint64_t max_abs = 0;
    double max_rel = 0.0;

    void add(std::uint32_t a, std::uint32_t b, unsigned budget) {
        const std::uint64_t exact_product = std::uint64_t{a} * b;
        const std::uint64_t err = exact_product - cia2m_product(a, b, budget).product;
        ++total;
        if (err == 0) ++exact;
        sum_abs += err;
        max_abs = std::max(max_abs, err);
        if (exact_product != 0) {
            max_rel = std::max(max_rel, static_cast<double>(err) / static_cast<double>(exact_product));
        }
    }

    void merge(const Accumulator& o) {
        total += o.total;
        exact += o.exact;
        sum_abs += o.sum_abs;
        max_abs = std::max(max_abs, o.max_abs);
        max_rel = std::max(max_rel, o.max_rel);
    }
};

void check_width(unsigned width, unsigned max_width) {
    if (width < 1) throw Error(Errc::InvalidArgument, "width must be >= 1");
    if (width > max_width) {
        throw Error(Errc::WidthTooLarge, "width " + std::to_string(width) + " exceeds " + std::to_string(max_width));
    }
}

ErrorStats finish(unsigned width, CiaMode mode, const Accumulator& acc) {
    ErrorStats s;
    s.mode = mode.name();
    s.cycle_budget = mode.cycle_budget(width);
    s.width = width;
    s.total_cases = acc.total;
    s.exact_cases = acc.exact;
    s.sum_abs_error = acc.sum_abs;
    s.mean_abs_error = acc.total ? static_cast<double>(acc.sum_abs) / static_cast<double>(acc.total) : 0.0;
    s.max_abs_error = acc.max_abs;
    s.max_rel_error = acc.max_rel;
    const double max_value = static_cast<double>((std::uint64_t{1} << width) - 1);
    s.nmed = s.mean_abs_error / (max_value * max_value);
    return s;
}

// Reduces per-chunk accumulators in chunk order.
template <typename Body>
Accumulator sweep(std::size_t count, unsigned threads, Body body) {
    threads = std::max(1u, threads);
    std::vector<Accumulator> parts(threads);
    parallel_chunks(count, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) body(parts[chunk], i);
    });
    Accumulator total;
    for (const auto& p : parts) total.merge(p);
    return total;
}

}  // namespace

std::uint64_t ErrorHistogram::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

ErrorStats exhaustive_stats(unsigned width, CiaMode mode, unsigned threads) {
    check_width(width, kMaxExhaustiveWidth);
    const unsigned budget = mode.cycle_budget(width);
    const std::uint32_t side = std::uint32_t{1} << width;
    auto acc = sweep(side, threads, [&](Accumulator& a, std::size_t i) {
        for (std::uint32_t b = 0; b < side; ++b) a.add(static_cast<std::uint32_t>(i), b, budget);
    });
    return finish(width, mode, acc);
}

ErrorStats stats_over_pairs(unsigned width, CiaMode mode, std::span<const OperandPair> pairs, unsigned threads) {
    check_width(width, kMaxOperandWidth);
    const unsigned budget = mode.cycle_budget(width);
    for (const auto& [a, b] : pairs) {
        if ((a >> width) || (b >> width)) {
            throw Error(Errc::InvalidOperand, "pair value does not fit in " + std::to_string(width) + " bits");
        }
    }
    auto acc = sweep(pairs.size(), threads, [&](Accumulator& a, std::size_t i) {
        a.add(pairs[i].first, pairs[i].second, budget);
    });
    return finish(width, mode, acc);
}

ErrorStats sampled_stats(unsigned width, CiaMode mode, std::uint64_t samples, std::uint64_t seed,
                         unsigned threads) {
    check_width(width, kMaxOperandWidth);
    if (samples < 1) throw Error(Errc::InvalidArgument, "samples must be >= 1");
    std::mt19937_64 rng(seed);
    const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
    std::vector<OperandPair> pairs(samples);
    for (auto& p : pairs) {
        p.first = static_cast<std::uint32_t>(rng() & mask);
        p.second = static_cast<std::uint32_t>(rng() & mask);
    }
    return stats_over_pairs(width, mode, pairs, threads);
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> error_distribution(unsigned width, CiaMode mode) {
    check_width(width, kMaxExhaustiveWidth);
    const unsigned budget = mode.cycle_budget(width);
    const std::uint32_t side = std::uint32_t{1} << width;
    std::map<std::uint64_t, std::uint64_t> freq;
    for (std::uint32_t a = 0; a < side; ++a) {
        for (std::uint32_t b = 0; b < side; ++b) ++freq[cia2m_product(a, b, budget).residual_error];
    }
    return {freq.begin(), freq.end()};
}

ErrorHistogram histogram(unsigned width, CiaMode mode, unsigned bins) {
    if (bins == 0) throw Error(Errc::InvalidArgument, "bins must be >= 1");
    const auto dist = error_distribution(width, mode);
    const std::uint64_t max_err = dist.empty() ? 0 : dist.back().first;
    const std::uint64_t bin_width = std::max<std::uint64_t>(1, (max_err + bins) / bins);  // ceil((max+1)/bins)

    ErrorHistogram h;
    h.bin_edges.resize(bins + 1);
    for (unsigned i = 0; i <= bins; ++i) h.bin_edges[i] = i * bin_width;
    h.counts.assign(bins, 0);
    for (const auto& [err, n] : dist) h.counts[std::min<std::uint64_t>(err / bin_width, bins - 1)] += n;
    return h;
}

std::string histogram_csv(const ErrorHistogram& hist) {
    std::string out = "error_bin_low,error_bin_high,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        out += std::to_string(hist.bin_edges[i]);
        out += ',';
        out += std::to_string(hist.bin_edges[i + 1]);
        out += ',';
        out += std::to_string(hist.counts[i]);
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const ErrorStats& s) {
    return nlohmann::json{
        {"mode", s.mode},
        {"cycle_budget", s.cycle_budget},
        {"width", s.width},
        {"total_cases", s.total_cases},
        {"exact_cases", s.exact_cases},
        {"sum_abs_error", s.sum_abs_error},
        {"mean_abs_error", s.mean_abs_error},
        {"max_abs_error", s.max_abs_error},
        {"max_rel_error", s.max_rel_error},
        {"nmed", s.nmed},
    };
}

}  // namespace pimsim
