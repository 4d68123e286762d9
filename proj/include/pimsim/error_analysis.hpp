#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pimsim/cia2m.hpp"

namespace pimsim {

inline constexpr unsigned kMaxExhaustiveWidth = 8;

// Error is the underestimate exact - approx, which is never negative.
struct ErrorStats {
    std::string mode;
    unsigned cycle_budget = 0;
    unsigned width = 0;
    std::uint64_t total_cases = 0;
    std::uint64_t exact_cases = 0;
    std::uint64_t sum_abs_error = 0;
    double mean_abs_error = 0.0;
    std::uint64_t max_abs_error = 0;
    double max_rel_error = 0.0;  // over pairs with a nonzero exact product
    double nmed = 0.0;           // mean_abs_error / (2^w - 1)^2

    bool operator==(const ErrorStats&) const = default;
};

struct ErrorHistogram {
    std::vector<std::uint64_t> bin_edges;  // bins + 1 entries, [low, high)
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const;
};

using OperandPair = std::pair<std::uint32_t, std::uint32_t>;

// Enumerates all 2^(2w) pairs. Throws Errc::WidthTooLarge for w > 8.
ErrorStats exhaustive_stats(unsigned width, CiaMode mode, unsigned threads = 1);

// Uniform pairs drawn from a seeded mt19937_64 (low `width` bits of each draw).
ErrorStats sampled_stats(unsigned width, CiaMode mode, std::uint64_t samples, std::uint64_t seed,
                         unsigned threads = 1);

// Same metric definitions over an explicit pair list.
ErrorStats stats_over_pairs(unsigned width, CiaMode mode, std::span<const OperandPair> pairs,
                            unsigned threads = 1);

// Equal-width integer bins over [0, max_error]; always emits `bins` rows.
ErrorHistogram histogram(unsigned width, CiaMode mode, unsigned bins);

// (error value, occurrences) for every distinct error, ascending by error.
std::vector<std::pair<std::uint64_t, std::uint64_t>> error_distribution(unsigned width, CiaMode mode);

// Header `error_bin_low,error_bin_high,count`, LF endings.
std::string histogram_csv(const ErrorHistogram& hist);

nlohmann::json to_json(const ErrorStats& stats);

}  // namespace pimsim
