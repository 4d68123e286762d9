#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "pimsim/cia2m.hpp"
#include "pimsim/cost_model.hpp"
#include "pimsim/error.hpp"
#include "pimsim/error_analysis.hpp"
#include "pimsim/mapper.hpp"
#include "pimsim/nn_runtime.hpp"
#include "pimsim/parallel.hpp"
#include "pimsim/pim_array.hpp"

namespace pimsim::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    MacroConfig macro;
    std::optional<std::string> mode;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double pruning = 0.0;
    bool pruning_set = false;
    std::string out;
};

template <typename T>
T get_key(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "macro") {
            if (!value.is_object()) throw UsageError("config key 'macro' must be an object");
            for (const auto& [mk, mv] : value.items()) {
                (void)mv;
                if (mk == "rows") {
                    cfg.macro.rows = get_key<std::size_t>(value, mk);
                } else if (mk == "columns") {
                    cfg.macro.columns = get_key<std::size_t>(value, mk);
                } else if (mk == "weight_precision") {
                    cfg.macro.weight_precision = get_key<unsigned>(value, mk);
                } else if (mk == "input_precision") {
                    cfg.macro.input_precision = get_key<unsigned>(value, mk);
                } else if (mk == "clock_mhz") {
                    cfg.macro.clock_mhz = get_key<double>(value, mk);
                } else {
                    throw UsageError("unknown config key 'macro." + mk + "'");
                }
            }
        } else if (key == "mode") {
            cfg.mode = get_key<std::string>(j, key);
        } else if (key == "seed") {
            cfg.seed = get_key<std::uint64_t>(j, key);
        } else if (key == "threads") {
            cfg.threads = std::max(1u, get_key<unsigned>(j, key));
        } else if (key == "pruning") {
            cfg.pruning = get_key<double>(j, key);
            cfg.pruning_set = true;
        } else if (key == "out") {
            cfg.out = get_key<std::string>(j, key);
        } else {
            throw UsageError("unknown config key '" + key + "'");
        }
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw UsageError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw Error(Errc::Io, "write to '" + path.string() + "' failed");
}

// Artifacts land in the --out directory; without it only the primary one
// is printed to stdout.
class Sink {
public:
    Sink(const std::string& dir, std::ostream& out) : dir_(dir), out_(out) {}

    void primary(const std::string& name, const std::string& content) {
        if (dir_.empty()) {
            out_ << content;
        } else {
            secondary(name, content);
        }
    }

    void secondary(const std::string& name, const std::string& content) {
        if (dir_.empty()) return;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw Error(Errc::Io, "cannot create '" + dir_ + "': " + ec.message());
        write_file(fs::path(dir_) / name, content);
    }

private:
    std::string dir_;
    std::ostream& out_;
};

CiaMode resolve_mode(const std::string& flag, const RunConfig& cfg, const char* fallback) {
    return CiaMode::parse(!flag.empty() ? flag : cfg.mode.value_or(fallback));
}

double resolve_pruning(const CLI::Option* opt, double flag, const RunConfig& cfg, double fallback) {
    if (opt->count()) return flag;
    return cfg.pruning_set ? cfg.pruning : fallback;
}

void check_pruning(double p) {
    if (!(p >= 0.0 && p < 1.0)) throw UsageError("--pruning must lie in [0,1)");
}

// ---- analyze-mult ----

struct AnalyzeArgs {
    unsigned width = 8;
    std::string mode;
    unsigned bins = 64;
    std::uint64_t samples = 0;
};

void cmd_analyze(const AnalyzeArgs& a, const RunConfig& cfg, Sink& sink) {
    const CiaMode mode = resolve_mode(a.mode, cfg, "approximate");
    if (a.bins == 0) throw UsageError("--bins must be >= 1");
    if (a.samples > 0) {
        const auto stats = sampled_stats(a.width, mode, a.samples, cfg.seed, cfg.threads);
        sink.primary("error_stats.json", dump(to_json(stats)));
        return;
    }
    const auto stats = exhaustive_stats(a.width, mode, cfg.threads);
    sink.primary("error_stats.json", dump(to_json(stats)));
    sink.secondary("error_histogram.csv", histogram_csv(histogram(a.width, mode, a.bins)));
}

// ---- simulate-macro ----

struct SimulateArgs {
    std::string pairs;
    std::string mode;
    unsigned width = 0;
};

bool parse_uint(const std::string& s, std::uint64_t& v) {
    if (s.empty() || s.size() > 12) return false;
    v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return true;
}

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

void cmd_simulate(const SimulateArgs& a, const RunConfig& cfg, Sink& sink) {
    const CiaMode mode = resolve_mode(a.mode, cfg, "approximate");
    MacroConfig mc = cfg.macro;
    const unsigned width = a.width ? a.width : mc.input_precision;
    if (width < 1 || width > kMaxOperandWidth) throw UsageError("--width must lie in [1,16]");
    mc.weight_precision = width;
    mc.input_precision = width;
    mc.validate();

    const std::string text = read_text(a.pairs);
    std::vector<Operand> acts;
    std::vector<std::uint32_t> weights;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty() || t[0] == '#') continue;
        if (first && (t == "a,b" || t == "a, b")) {
            first = false;
            continue;
        }
        first = false;
        const auto comma = t.find(',');
        std::uint64_t x = 0;
        std::uint64_t y = 0;
        if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos ||
            !parse_uint(strip(t.substr(0, comma)), x) || !parse_uint(strip(t.substr(comma + 1)), y)) {
            throw UsageError(a.pairs + ": row " + std::to_string(lineno) + ": expected 'a,b' unsigned integers, got '" +
                             t + "'");
        }
        if (x >> width || y >> width) {
            throw UsageError(a.pairs + ": row " + std::to_string(lineno) + ": operand exceeds " +
                             std::to_string(width) + " bits");
        }
        acts.push_back(Operand{static_cast<std::uint32_t>(x), width});
        weights.push_back(static_cast<std::uint32_t>(y));
    }

    MacroState macro(mc);
    const auto traces = run_pairs(macro, acts, weights, mode);
    std::string csv = "index,a,b,cycles,product,residual_error,core_product,equal\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto core = cia2m_multiply(acts[i], Operand{weights[i], width}, mode);
        const auto& t = traces[i];
        csv += std::to_string(i) + ',' + std::to_string(acts[i].value) + ',' + std::to_string(weights[i]) + ',' +
               std::to_string(t.cycles_used) + ',' + std::to_string(t.final_product) + ',' +
               std::to_string(t.residual_error) + ',' + std::to_string(core.final_product) + ',' +
               (t == core ? "true" : "false") + '\n';
    }
    sink.primary("simulate.csv", csv);
}

// ---- map ----

struct MapArgs {
    std::string layer;
    std::string workload;
    std::string mode;
    double pruning = 0.0;
    CLI::Option* pruning_opt = nullptr;
    std::string granularity = "sub_bank";
    bool split = false;
};

std::vector<map::LayerSpec> named_workload(const std::string& name) {
    if (name == "vgg16") return map::vgg16_cifar10();
    throw UsageError("unknown workload '" + name + "' (known: vgg16)");
}

void cmd_map(const MapArgs& a, const RunConfig& cfg, Sink& sink) {
    const CiaMode mode = resolve_mode(a.mode, cfg, "accurate");
    const double pruning = resolve_pruning(a.pruning_opt, a.pruning, cfg, 0.0);
    check_pruning(pruning);
    if (a.layer.empty() == a.workload.empty()) throw UsageError("give exactly one of --layer or --workload");

    std::vector<map::LayerSpec> layers;
    std::string name;
    bool single = false;
    if (!a.workload.empty()) {
        layers = named_workload(a.workload);
        name = a.workload;
    } else {
        const json j = read_json(a.layer);
        if (j.is_array()) {
            for (const auto& l : j) layers.push_back(map::layer_from_json(l));
            name = fs::path(a.layer).stem().string();
        } else {
            layers.push_back(map::layer_from_json(j));
            single = true;
        }
    }
    if (layers.empty()) throw UsageError("layer list is empty");

    if (!single) {
        const auto plan = map::plan_workload(name, layers, cfg.macro, mode, pruning, cfg.seed);
        sink.primary("plan.json", dump(to_json(plan)));
        return;
    }

    const auto& layer = layers.front();
    auto plan = map::map_layer(layer, cfg.macro, mode, map::MapOptions{a.split});
    if (a.granularity != "sub_bank" && a.granularity != "per_weight") {
        throw UsageError("--granularity must be sub_bank or per_weight");
    }
    if (pruning > 0.0) {
        const auto mask = map::random_mask(layer.total_weights(), pruning, cfg.seed);
        plan = map::apply_pruning(std::move(plan), mask,
                                  a.granularity == "sub_bank" ? map::PruneGranularity::SubBank
                                                              : map::PruneGranularity::PerWeight);
    }
    MacroConfig mc = cfg.macro;
    mc.weight_precision = layer.weight_bits;
    mc.input_precision = std::max(mc.input_precision, layer.act_bits);
    const auto trace = map::schedule(plan, MacroState(mc));
    sink.primary("plan.json", dump(to_json(plan)));
    sink.secondary("trace.csv", map::trace_csv(trace));
}

// ---- cost ----

struct CostArgs {
    std::string plan;
    std::string workload;
    std::string mode;
    double pruning = 0.0;
    CLI::Option* pruning_opt = nullptr;
    std::optional<double> clock_mhz;
};

void cmd_cost(const CostArgs& a, const RunConfig& cfg, Sink& sink) {
    MacroConfig mc = cfg.macro;
    if (a.clock_mhz) mc.clock_mhz = *a.clock_mhz;
    if (!(mc.clock_mhz > 0.0)) throw UsageError("clock must be > 0 MHz");
    mc.validate();
    const CiaMode mode = resolve_mode(a.mode, cfg, "accurate");
    if (!a.plan.empty() && !a.workload.empty()) throw UsageError("give at most one of --plan or --workload");

    cost::CostReport report;
    if (!a.plan.empty()) {
        report = cost::macro_summary(mc, map::workload_from_json(read_json(a.plan)), mode);
    } else if (!a.workload.empty()) {
        const double pruning = resolve_pruning(a.pruning_opt, a.pruning, cfg, 0.30);
        check_pruning(pruning);
        const auto layers = named_workload(a.workload);
        const auto plan = map::plan_workload(a.workload, layers, mc, mode, pruning, cfg.seed);
        report = cost::macro_summary(mc, plan, mode);
    } else {
        report = cost::config_report(mc);
    }
    sink.primary("cost_report.json", dump(cost::to_json(report)));
}

// ---- infer ----

struct InferArgs {
    std::string weights;
    std::string inputs;
    std::string mode;
    double pruning = 0.0;
    CLI::Option* pruning_opt = nullptr;
};

void cmd_infer(const InferArgs& a, const RunConfig& cfg, Sink& sink) {
    const CiaMode mode = resolve_mode(a.mode, cfg, "approximate");
    const double pruning = resolve_pruning(a.pruning_opt, a.pruning, cfg, 0.0);
    check_pruning(pruning);
    const auto net = nn::load_weights_csv(a.weights);
    const auto inputs = nn::load_inputs_csv(a.inputs);
    nn::RunOptions opts;
    opts.threads = cfg.threads;
    opts.act_bits = cfg.macro.input_precision;
    const auto run = nn::run_network(net, inputs, mode, pruning, opts);
    sink.primary("qor_report.json", dump(nn::to_json(run.report)));
    sink.secondary("outputs.csv", nn::outputs_csv(run.result.outputs));
}

bool is_usage(Errc code) {
    switch (code) {
        case Errc::Io:
        case Errc::EmptyFile:
        case Errc::WriteDuringCompute:
        case Errc::ComputeDisabled:
        case Errc::AddressOutOfRange:
        case Errc::LengthMismatch:
            return false;
        default:
            return true;
    }
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Functional simulator and cost model for a bit-serial approximate PIM macro", "pimsim"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 1;
    std::string out_dir;
    std::string config_path;
    unsigned threads = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Seed for every random draw")->capture_default_str();
    auto* out_opt = app.add_option("--out", out_dir, "Directory for output artifacts (default: primary to stdout)");
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads (capped by PIMSIM_THREADS)");

    AnalyzeArgs analyze;
    auto* c_analyze = app.add_subcommand("analyze-mult", "Exhaustive or sampled multiplier error statistics");
    c_analyze->add_option("--width", analyze.width, "Operand width in bits")->capture_default_str();
    c_analyze->add_option("--mode", analyze.mode, "approx | accurate | exact | custom:N");
    c_analyze->add_option("--bins", analyze.bins, "Histogram bins")->capture_default_str();
    c_analyze->add_option("--samples", analyze.samples, "Random pairs instead of full enumeration");

    SimulateArgs simulate;
    auto* c_sim = app.add_subcommand("simulate-macro", "Run operand pairs through the macro datapath");
    c_sim->add_option("--pairs", simulate.pairs, "CSV of a,b rows")->required();
    c_sim->add_option("--mode", simulate.mode, "approx | accurate | exact | custom:N");
    c_sim->add_option("--width", simulate.width, "Operand width (default: macro input precision)");

    MapArgs mapa;
    auto* c_map = app.add_subcommand("map", "Map a layer or workload onto the macro");
    c_map->add_option("--layer", mapa.layer, "Layer JSON (object or array)");
    c_map->add_option("--workload", mapa.workload, "Built-in workload: vgg16");
    c_map->add_option("--mode", mapa.mode, "approx | accurate | exact | custom:N");
    mapa.pruning_opt = c_map->add_option("--pruning", mapa.pruning, "Fraction of weights to prune");
    c_map->add_option("--granularity", mapa.granularity, "sub_bank | per_weight")->capture_default_str();
    c_map->add_flag("--split", mapa.split, "Allow a filter to span passes");

    CostArgs costa;
    auto* c_cost = app.add_subcommand("cost", "Throughput, area and efficiency report");
    c_cost->add_option("--plan", costa.plan, "Plan or workload JSON from `map`");
    c_cost->add_option("--workload", costa.workload, "Built-in workload: vgg16");
    c_cost->add_option("--mode", costa.mode, "approx | accurate | exact | custom:N");
    costa.pruning_opt = c_cost->add_option("--pruning", costa.pruning, "Pruning for --workload (default 0.30)");
    c_cost->add_option("--clock-mhz", costa.clock_mhz, "Clock override");

    InferArgs infer;
    auto* c_infer = app.add_subcommand("infer", "Quantized inference with a QoR report");
    c_infer->add_option("--weights", infer.weights, "Weight CSV")->required();
    c_infer->add_option("--inputs", infer.inputs, "Input CSV, one sample per row")->required();
    c_infer->add_option("--mode", infer.mode, "approx | accurate | exact | custom:N");
    infer.pruning_opt = c_infer->add_option("--pruning", infer.pruning, "Fraction of weights to prune per layer");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg;
        cfg.threads = default_thread_count();
        if (!config_path.empty()) apply_config_file(config_path, cfg);
        if (seed_opt->count()) cfg.seed = seed;
        if (out_opt->count()) cfg.out = out_dir;
        if (threads_opt->count()) cfg.threads = std::max(1u, threads);
        cfg.threads = std::min(cfg.threads, default_thread_count());

        Sink sink(cfg.out, out);
        if (c_analyze->parsed()) {
            cmd_analyze(analyze, cfg, sink);
        } else if (c_sim->parsed()) {
            cmd_simulate(simulate, cfg, sink);
        } else if (c_map->parsed()) {
            cmd_map(mapa, cfg, sink);
        } else if (c_cost->parsed()) {
            cmd_cost(costa, cfg, sink);
        } else if (c_infer->parsed()) {
            cmd_infer(infer, cfg, sink);
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return is_usage(e.code()) ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace pimsim::cli
