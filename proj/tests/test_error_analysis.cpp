#include "doctest.h"

#include <numeric>

#include "oracles.hpp"
#include "pimsim/error_analysis.hpp"
#include "test_support.hpp"

using namespace pimsim;

TEST_CASE("exact mode has no error at any width up to 8") {
    for (unsigned w = 1; w <= 8; ++w) {
        auto s = exhaustive_stats(w, CiaMode::exact());
        CHECK(s.total_cases == (1ull << (2 * w)));
        CHECK(s.exact_cases == s.total_cases);
        CHECK(s.max_abs_error == 0);
        CHECK(s.mean_abs_error == 0.0);
    }
}

TEST_CASE("exhaustive stats agree with the brute-force oracle") {
    for (unsigned w : {4u, 6u, 8u}) {
        for (unsigned n = 1; n <= 4; ++n) {
            auto s = exhaustive_stats(w, CiaMode::custom(n));
            auto o = oracle::brute_stats(w, n);
            CHECK(s.total_cases == o.total);
            CHECK(s.exact_cases == o.exact);
            CHECK(s.sum_abs_error == o.sum_err);
            CHECK(s.max_abs_error == o.max_err);
            CHECK(s.mean_abs_error == doctest::Approx(o.mean_err).epsilon(1e-15));
        }
    }
}

TEST_CASE("exact-case count equals the popcount condition") {
    for (unsigned n = 1; n <= 4; ++n) {
        CHECK(exhaustive_stats(8, CiaMode::custom(n)).exact_cases == oracle::exact_count(8, n));
    }
}

TEST_CASE("error shrinks as the budget grows") {
    std::uint64_t prev = ~0ull;
    for (unsigned n = 1; n <= 8; ++n) {
        auto s = exhaustive_stats(8, CiaMode::custom(n));
        CHECK(s.sum_abs_error <= prev);
        prev = s.sum_abs_error;
    }
    CHECK(prev == 0);
}

TEST_CASE("worst case for the approximate mode is 255 x 255") {
    auto s = exhaustive_stats(8, CiaMode::approximate());
    CHECK(s.max_abs_error == 961);
    CHECK(s.nmed == doctest::Approx(s.mean_abs_error / (255.0 * 255.0)));
}

TEST_CASE("threaded enumeration is identical to single-threaded") {
    auto one = exhaustive_stats(8, CiaMode::approximate(), 1);
    auto four = exhaustive_stats(8, CiaMode::approximate(), 4);
    CHECK(one == four);
    auto s1 = sampled_stats(12, CiaMode::accurate(), 5000, 11, 1);
    auto s3 = sampled_stats(12, CiaMode::accurate(), 5000, 11, 3);
    CHECK(s1 == s3);
}

TEST_CASE("sampled stats are seed-deterministic") {
    auto a = sampled_stats(16, CiaMode::approximate(), 2000, 99);
    auto b = sampled_stats(16, CiaMode::approximate(), 2000, 99);
    auto c = sampled_stats(16, CiaMode::approximate(), 2000, 100);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.total_cases == 2000);
    CHECK(code_of([] { sampled_stats(8, CiaMode::exact(), 0, 1); }) == Errc::InvalidArgument);
}

TEST_CASE("stats over explicit pairs") {
    std::vector<OperandPair> pairs{{255, 255}, {3, 3}, {0, 9}};
    auto s = stats_over_pairs(8, CiaMode::custom(1), pairs);
    CHECK(s.total_cases == 3);
    CHECK(s.exact_cases == 1);
    CHECK(s.max_abs_error == 255u * 255u - oracle::approx_product(255, 255, 1));
    std::vector<OperandPair> bad{{256, 1}};
    CHECK(code_of([&] { stats_over_pairs(8, CiaMode::exact(), bad); }) == Errc::InvalidOperand);
}

TEST_CASE("widths above 8 are refused for enumeration") {
    CHECK(code_of([] { exhaustive_stats(9, CiaMode::exact()); }) == Errc::WidthTooLarge);
    CHECK(code_of([] { histogram(9, CiaMode::exact(), 4); }) == Errc::WidthTooLarge);
}

TEST_CASE("histogram conserves mass and peaks at zero error") {
    auto h = histogram(8, CiaMode::approximate(), 64);
    CHECK(h.counts.size() == 64);
    CHECK(h.bin_edges.size() == 65);
    CHECK(h.total() == 65536);
    CHECK(std::max_element(h.counts.begin(), h.counts.end()) == h.counts.begin());
    CHECK(h.bin_edges.front() == 0);
    CHECK(h.bin_edges.back() > 961);
}

TEST_CASE("exact-mode histogram holds everything in the zero bin") {
    auto h = histogram(8, CiaMode::exact(), 16);
    CHECK(h.counts.size() == 16);
    CHECK(h.counts[0] == 65536);
    CHECK(std::accumulate(h.counts.begin() + 1, h.counts.end(), std::uint64_t{0}) == 0);
}

TEST_CASE("error distribution sums to the pair count") {
    auto d = error_distribution(8, CiaMode::approximate());
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        total += d[i].second;
        if (i) CHECK(d[i].first > d[i - 1].first);
    }
    CHECK(total == 65536);
    CHECK(d.front().first == 0);
    CHECK(d.front().second == exhaustive_stats(8, CiaMode::approximate()).exact_cases);
}

TEST_CASE("histogram csv layout") {
    auto csv = histogram_csv(histogram(4, CiaMode::custom(1), 3));
    CHECK(csv.rfind("error_bin_low,error_bin_high,count\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("stats json carries every field") {
    auto j = to_json(exhaustive_stats(4, CiaMode::accurate()));
    for (const char* k : {"mode", "cycle_budget", "width", "total_cases", "exact_cases", "mean_abs_error",
                          "max_abs_error", "max_rel_error", "nmed"}) {
        CHECK(j.contains(k));
    }
    CHECK(j["mode"] == "accurate");
}
