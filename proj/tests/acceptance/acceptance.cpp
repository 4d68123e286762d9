// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "../layer_fixtures.hpp"
#include "../oracles.hpp"
#include "pimsim/cia2m.hpp"
#include "pimsim/cost_model.hpp"
#include "pimsim/error_analysis.hpp"
#include "pimsim/mapper.hpp"
#include "pimsim/nn_runtime.hpp"
#include "pimsim/pim_array.hpp"
#include "pimsim/trait_tree.hpp"

using namespace pimsim;

namespace {

// Frozen from the first exhaustive run, cross-checked by oracle::brute_stats.
constexpr std::uint64_t kGoldenApproxMaxError = 961;
constexpr double kGoldenApproxMeanError = 18.4295806884765625;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome ac1_exhaustive_exactness() {
    Outcome o;
    const auto t0 = Clock::now();
    auto s = exhaustive_stats(8, CiaMode::exact(), 1);
    const double dt = seconds_since(t0);
    o.require(s.total_cases == 65536, "total_cases != 65536");
    o.require(s.exact_cases == 65536, "error count " + std::to_string(65536 - s.exact_cases));
    std::uint64_t bad = 0;
    for (std::uint32_t a = 0; a < 256; ++a) {
        for (std::uint32_t b = 0; b < 256; ++b) {
            auto t = cia2m_multiply(Operand::make(a, 8), Operand::make(b, 8), CiaMode::exact());
            bad += t.final_product != std::uint64_t{a} * b;
        }
    }
    o.require(bad == 0, std::to_string(bad) + " traced mismatches");
    o.require(dt < 5.0, "took " + std::to_string(dt) + " s");
    if (o.pass) o.detail = "65536/65536 exact in " + std::to_string(dt) + " s";
    return o;
}

Outcome ac2_reconstruction() {
    Outcome o;
    const auto t0 = Clock::now();
    std::uint64_t checked = 0;
    for (unsigned n = 1; n <= 8; ++n) {
        for (std::uint32_t a = 0; a < 256; ++a) {
            for (std::uint32_t b = 0; b < 256; ++b) {
                auto t = cia2m_multiply(Operand::make(a, 8), Operand::make(b, 8), CiaMode::custom(n));
                const std::uint64_t p = std::uint64_t{a} * b;
                if (t.final_product + t.residual_error != p || t.final_product > p) {
                    o.require(false, "a=" + std::to_string(a) + " b=" + std::to_string(b) + " n=" + std::to_string(n));
                }
                ++checked;
            }
        }
    }
    const double dt = seconds_since(t0);
    o.require(dt < 60.0, "took " + std::to_string(dt) + " s");
    if (o.pass) o.detail = std::to_string(checked) + " (pair, budget) cases in " + std::to_string(dt) + " s";
    return o;
}

Outcome ac3_exactness_condition() {
    Outcome o;
    std::string counts;
    for (unsigned n = 1; n <= 4; ++n) {
        const auto got = exhaustive_stats(8, CiaMode::custom(n), 1).exact_cases;
        const auto want = oracle::exact_count(8, n);
        o.require(got == want, "n=" + std::to_string(n) + ": " + std::to_string(got) + " vs " + std::to_string(want));
        counts += (n > 1 ? " " : "") + std::to_string(got);
    }
    if (o.pass) o.detail = "exact_cases n=1..4: " + counts;
    return o;
}

Outcome ac4_error_histogram() {
    Outcome o;
    const auto mode = CiaMode::approximate();
    auto s = exhaustive_stats(8, mode, 1);
    auto brute = oracle::brute_stats(8, 3);
    o.require(s.max_abs_error == brute.max_err && s.sum_abs_error == brute.sum_err, "disagrees with brute force");
    o.require(s.max_abs_error == kGoldenApproxMaxError, "max error " + std::to_string(s.max_abs_error));
    o.require(s.mean_abs_error == kGoldenApproxMeanError, "mean error drifted from golden");
    auto h = histogram(8, mode, 64);
    o.require(h.total() == 65536, "histogram mass " + std::to_string(h.total()));
    const auto peak = std::max_element(h.counts.begin(), h.counts.end()) - h.counts.begin();
    o.require(peak == 0 && h.bin_edges[0] == 0, "histogram peak not at the zero-error bin");
    auto dist = error_distribution(8, mode);
    const auto mode_err =
        std::max_element(dist.begin(), dist.end(), [](auto& x, auto& y) { return x.second < y.second; })->first;
    o.require(mode_err == 0, "most frequent error is " + std::to_string(mode_err));
    if (o.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "mass 65536, peak at error 0, max %llu, mean %.17g",
                      static_cast<unsigned long long>(s.max_abs_error), s.mean_abs_error);
        o.detail = buf;
    }
    return o;
}

Outcome ac5_datapath() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::uint32_t> v(0, 255);
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<unsigned> cyc(1, 8);
    MacroState macro;
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto a = Operand::make(v(rng), 8);
        const std::uint32_t w = v(rng);
        CiaMode mode = CiaMode::exact();
        switch (pick(rng)) {
            case 0: mode = CiaMode::approximate(); break;
            case 1: mode = CiaMode::accurate(); break;
            case 2: mode = CiaMode::exact(); break;
            default: mode = CiaMode::custom(cyc(rng)); break;
        }
        const WeightSlot slot{static_cast<std::size_t>(i % 32), static_cast<std::size_t>((i / 32) % 64)};
        macro.set_pim_enable(false);
        macro.write_weight(slot, w);
        macro.set_pim_enable(true);
        std::array<Operand, 1> acts{a};
        std::array<WeightSlot, 1> slots{slot};
        auto got = bit_serial_mac(macro, acts, slots, mode);
        mismatches += got.size() != 1 || got[0] != cia2m_multiply(a, Operand::make(w, 8), mode);
    }
    const double dt = seconds_since(t0);
    o.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
    o.require(dt < 10.0, "took " + std::to_string(dt) + " s");
    if (o.pass) o.detail = "1000/1000 traces identical in " + std::to_string(dt) + " s";
    return o;
}

// Every 4-bit vector of 8 leaves, evaluated through per-node ripple-add
// tables built from each tree's own full-adder chains.
Outcome ac6_tree_invariance() {
    Outcome o;
    const auto t0 = Clock::now();
    const std::array<trait::Interspersion, 3> patterns{
        trait::Interspersion::AllAccurate, trait::Interspersion::AllReduced, trait::Interspersion::Alternating};
    struct Tables {
        std::array<std::vector<std::uint8_t>, 4> l0;  // 4-bit x 4-bit
        std::array<std::vector<std::uint8_t>, 2> l1;  // 5-bit x 5-bit
        std::vector<std::uint8_t> l2;                 // 6-bit x 6-bit
    };
    std::vector<Tables> tabs;
    auto table = [](std::span<const trait::FaKind> chain, unsigned bits) {
        std::vector<std::uint8_t> t(std::size_t{1} << (2 * bits));
        for (std::uint64_t x = 0; x < (1u << bits); ++x) {
            for (std::uint64_t y = 0; y < (1u << bits); ++y) {
                t[(x << bits) | y] = static_cast<std::uint8_t>(trait::ripple_add(chain, x, y));
            }
        }
        return t;
    };
    std::vector<trait::AdderTreeSpec> specs;
    for (auto p : patterns) {
        auto spec = trait::build_tree(8, p, 4);
        if (spec.levels.size() != 3 || spec.levels[0].size() != 4 || spec.levels[1].size() != 2 ||
            spec.levels[2].size() != 1) {
            o.require(false, "unexpected tree shape");
            return o;
        }
        Tables t;
        for (int i = 0; i < 4; ++i) t.l0[i] = table(spec.chain(spec.levels[0][i]), 4);
        for (int i = 0; i < 2; ++i) t.l1[i] = table(spec.chain(spec.levels[1][i]), 5);
        t.l2 = table(spec.chain(spec.levels[2][0]), 6);
        tabs.push_back(std::move(t));
        specs.push_back(std::move(spec));
    }

    std::atomic<std::uint64_t> differing{0}, wrong_sum{0}, visited{0};
    std::atomic<unsigned> next{0};
    auto worker = [&] {
        std::uint64_t diff = 0, wrong = 0, seen = 0;
        for (unsigned pa; (pa = next.fetch_add(1)) < 256;) {
            const unsigned sa = (pa >> 4) + (pa & 15);
            for (unsigned pb = 0; pb < 256; ++pb) {
                const unsigned sb = (pb >> 4) + (pb & 15);
                std::array<unsigned, 3> ab{};
                for (std::size_t k = 0; k < 3; ++k) {
                    ab[k] = tabs[k].l1[0][(unsigned{tabs[k].l0[0][pa]} << 5) | tabs[k].l0[1][pb]];
                }
                for (unsigned pc = 0; pc < 256; ++pc) {
                    const unsigned sc = (pc >> 4) + (pc & 15);
                    for (unsigned pd = 0; pd < 256; ++pd) {
                        const unsigned sd = (pd >> 4) + (pd & 15);
                        unsigned r[3];
                        for (std::size_t k = 0; k < 3; ++k) {
                            const auto& t = tabs[k];
                            const unsigned cd = t.l1[1][(unsigned{t.l0[2][pc]} << 5) | t.l0[3][pd]];
                            r[k] = t.l2[(ab[k] << 6) | cd];
                        }
                        diff += (r[0] != r[1]) | (r[0] != r[2]);
                        wrong += r[0] != sa + sb + sc + sd;
                        ++seen;
                    }
                }
            }
        }
        differing += diff;
        wrong_sum += wrong;
        visited += seen;
    };
    std::vector<std::thread> pool;
    const unsigned n = std::max(1u, std::min(16u, std::thread::hardware_concurrency()));
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Tie the tables back to full gate-level evaluation of each tree.
    std::mt19937 rng(6);
    std::uniform_int_distribution<std::uint32_t> d(0, 15);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::uint32_t> leaves(8);
        std::uint64_t sum = 0;
        for (auto& x : leaves) sum += (x = d(rng));
        for (const auto& s : specs) o.require(trait::reduce_gate_level(s, leaves) == sum, "gate-level sum");
    }

    o.require(visited == (std::uint64_t{1} << 32), "visited " + std::to_string(visited.load()));
    o.require(differing == 0, std::to_string(differing.load()) + " vectors differ across patterns");
    o.require(wrong_sum == 0, std::to_string(wrong_sum.load()) + " vectors reduce to the wrong sum");
    if (o.pass) o.detail = "2^32 vectors identical across 3 patterns in " + std::to_string(seconds_since(t0)) + " s";
    return o;
}

Outcome ac7_cost_arithmetic() {
    Outcome o;
    MacroConfig c;
    o.require(c.dot_products_per_cycle() == 512 && c.clock_mhz == 333.0, "default macro changed");
    o.require(cost::reported_throughput(c, 1) == 341e9, "1A1W throughput");
    o.require(cost::reported_throughput(c, 4) == 85.25e9, "4-cycle throughput");
    o.require(cost::transistor_savings(5.25, 8.75) == 40.0, "savings vs 8.75");
    const double vs10 = cost::transistor_savings(5.25, 10);
    o.require(std::abs(vs10 - 48.5) <= 2.0, "savings vs 10 outside tolerance");
    if (o.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "341e9 / 85.25e9 ops/s, savings 40.0%% and %.2f%% (reported 48.5%%)", vs10);
        o.detail = buf;
    }
    return o;
}

Outcome ac8_corners() {
    Outcome o;
    o.require(cost::corner_delay(cost::Corner::FF) == 1.296, "FF");
    o.require(cost::corner_delay(cost::Corner::TT) == 1.968, "TT");
    o.require(cost::corner_delay(cost::Corner::SS) == 2.928, "SS");
    if (o.pass) o.detail = "FF 1.296 / TT 1.968 / SS 2.928 ns";
    return o;
}

Outcome ac9_mapping_conservation() {
    Outcome o;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> frac(0.0, 0.6);
    const std::array<CiaMode, 3> modes{CiaMode::approximate(), CiaMode::accurate(), CiaMode::exact()};
    std::uint64_t total_macs = 0;
    for (int i = 0; i < 20; ++i) {
        auto l = fixture::random_layer(rng, i);
        const auto mode = modes[static_cast<std::size_t>(i) % modes.size()];
        auto plan = map::map_layer(l.spec, MacroConfig{}, mode, map::MapOptions{true});
        const auto mask = map::random_mask(l.spec.total_weights(), frac(rng), rng());
        plan = map::apply_pruning(plan, mask, map::PruneGranularity::PerWeight);
        MacroState macro;
        auto trace = map::schedule(plan, macro);
        auto patches = map::im2col(l.spec, l.input);
        auto out = map::execute(plan, trace, macro, l.weights, patches);
        const std::string tag = "layer " + std::to_string(i) + " (" + l.spec.name + ")";
        // (1 - skipped/total) * analytic, kept in integers.
        const std::uint64_t total = l.spec.total_weights();
        const std::uint64_t kept = (total - plan.skipped_weights) * plan.analytic_macs();
        o.require(plan.pruned_fraction ==
                      static_cast<double>(plan.skipped_weights) / static_cast<double>(total),
                  tag + ": pruned_fraction");
        o.require(trace.total_macs() * total == kept, tag + ": trace MACs");
        o.require(out.macs * total == kept, tag + ": executed MACs");
        o.require(out.values == fixture::direct_layer(l.spec, l.weights, l.input, plan.pruned, plan.cycle_budget),
                  tag + ": outputs differ from direct computation");
        total_macs += out.macs;
    }
    if (o.pass) o.detail = "20 layers, " + std::to_string(total_macs) + " MACs conserved, outputs identical";
    return o;
}

Outcome ac10_qor() {
    Outcome o;
    const std::string dir = PIMSIM_TEST_DATA;
    auto net = nn::load_weights_csv(dir + "/mlp_16_8_4.csv");
    auto in = nn::load_inputs_csv(dir + "/mlp_inputs.csv");
    auto exact = nn::run_network(net, in, CiaMode::exact(), 0.0);
    auto accurate = nn::run_network(net, in, CiaMode::accurate(), 0.0);
    auto approx = nn::run_network(net, in, CiaMode::approximate(), 0.0);
    const double me = exact.report.output_mse_vs_exact_int8;
    const double mc = accurate.report.output_mse_vs_exact_int8;
    const double ma = approx.report.output_mse_vs_exact_int8;
    o.require(me <= mc && mc <= ma, "MSE ordering violated");
    o.require(exact.report.top1_agreement_vs_exact_int8 == 1.0, "exact agreement != 1");
    for (auto mode : {CiaMode::exact(), CiaMode::accurate(), CiaMode::approximate()}) {
        auto a = nn::run_network(net, in, mode, 0.3, nn::RunOptions{1});
        auto b = nn::run_network(net, in, mode, 0.3, nn::RunOptions{4});
        o.require(nn::to_json(a.report).dump() == nn::to_json(b.report).dump(), mode.name() + " report not stable");
        o.require(nn::outputs_csv(a.result.outputs) == nn::outputs_csv(b.result.outputs),
                  mode.name() + " outputs not stable");
    }
    auto j = nn::to_json(approx.report);
    o.require(j.contains("reference") && j["reference"]["reproduced"] == false, "reference metadata missing");
    if (o.pass) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "MSE exact %.3g <= accurate %.3g <= approx %.3g, exact agreement 1.0", me, mc,
                      ma);
        o.detail = buf;
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
        {"AC-1 exhaustive exactness", ac1_exhaustive_exactness},
        {"AC-2 reconstruction identity", ac2_reconstruction},
        {"AC-3 exactness condition", ac3_exactness_condition},
        {"AC-4 error histogram and goldens", ac4_error_histogram},
        {"AC-5 datapath equivalence", ac5_datapath},
        {"AC-6 adder-tree pattern invariance", ac6_tree_invariance},
        {"AC-7 cost arithmetic", ac7_cost_arithmetic},
        {"AC-8 corner delays", ac8_corners},
        {"AC-9 mapping conservation", ac9_mapping_conservation},
        {"AC-10 QoR properties", ac10_qor},
    };
    int failed = 0;
    for (const auto& [name, fn] : checks) {
        Outcome r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        failed += !r.pass;
        std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(checks.size()) - failed, checks.size());
    return failed == 0 ? 0 : 1;
}
