#include "pimsim/nn_runtime.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "pimsim/constants.hpp"
#include "pimsim/error.hpp"
#include "pimsim/parallel.hpp"

namespace pimsim::nn {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

bool parse_int(const std::string& text, long long& out) {
    const auto t = trim(text);
    if (t.empty()) return false;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
    return ec == std::errc{} && ptr == t.data() + t.size();
}

bool parse_real(const std::string& text, double& out) {
    const auto t = trim(text);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

std::vector<std::size_t> parse_shape(const std::string& text, const std::string& at) {
    std::vector<std::size_t> shape;
    for (const auto& part : split(trim(text), 'x')) {
        long long v = 0;
        if (!parse_int(part, v) || v < 1) throw Error(Errc::MalformedRow, at + ": bad shape '" + text + "'");
        shape.push_back(static_cast<std::size_t>(v));
    }
    if (shape.empty()) throw Error(Errc::MalformedRow, at + ": empty shape");
    return shape;
}

bool skippable(const std::string& line) {
    const auto t = trim(line);
    return t.empty() || t.rfind("//", 0) == 0;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct PendingLayer {
    Layer layer;
    std::size_t rows_expected = 0;
    std::size_t row_width = 0;
    std::size_t rows_seen = 0;
    std::size_t header_line = 0;
};

void finish_layer(Network& net, PendingLayer& p, const std::string& source) {
    if (p.rows_seen != p.rows_expected) {
        throw Error(Errc::ShapeMismatch, where(source, p.header_line) + ": layer '" + p.layer.name + "' declares " +
                                             std::to_string(p.rows_expected) + " rows, found " +
                                             std::to_string(p.rows_seen));
    }
    if (!p.layer.bias.empty() && p.layer.bias.size() != p.rows_expected) {
        throw Error(Errc::ShapeMismatch, where(source, p.header_line) + ": layer '" + p.layer.name +
                                             "' bias length does not match its outputs");
    }
    net.layers.push_back(std::move(p.layer));
}

struct LayerRun {
    map::LayerSpec spec;
    map::MappingPlan plan;
    MacroConfig config;
};

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    if (shape.empty()) return 0;
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += 'x';
        s += std::to_string(shape[i]);
    }
    return s;
}

QuantTensor quantize(std::span<const double> data, std::vector<std::size_t> shape, unsigned precision) {
    if (precision < 2 || precision > 16) throw Error(Errc::InvalidArgument, "precision must lie in [2,16]");
    if (shape_size(shape) != data.size()) throw Error(Errc::ShapeMismatch, "data does not match shape");
    double max_abs = 0.0;
    for (double x : data) {
        if (!std::isfinite(x)) throw Error(Errc::InvalidArgument, "cannot quantize a non-finite value");
        max_abs = std::max(max_abs, std::fabs(x));
    }
    const double qmax = static_cast<double>((1 << (precision - 1)) - 1);
    QuantTensor t;
    t.shape = std::move(shape);
    t.precision = precision;
    t.scale = max_abs > 0.0 ? max_abs / qmax : 1.0;
    t.data.reserve(data.size());
    for (double x : data) {
        // std::round is half away from zero.
        const double q = std::clamp(std::round(x / t.scale), -qmax, qmax);
        t.data.push_back(static_cast<std::int32_t>(q));
    }
    return t;
}

Network parse_weights_csv(const std::string& text, const std::string& source) {
    Network net;
    std::optional<PendingLayer> pending;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool any_content = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (skippable(line)) continue;
        any_content = true;
        const std::string at = where(source, lineno);
        const auto fields = split(trim(line), ',');

        if (fields[0] == "#input") {
            if (fields.size() != 2) throw Error(Errc::MalformedRow, at + ": expected #input,<shape>");
            if (!net.layers.empty() || pending) throw Error(Errc::MalformedRow, at + ": #input must precede layers");
            net.input_shape = parse_shape(fields[1], at);
            continue;
        }
        if (fields[0] == "#layer") {
            if (pending) finish_layer(net, *pending, source);
            pending.reset();
            if (fields.size() < 5) throw Error(Errc::MalformedRow, at + ": expected #layer,<name>,<kind>,<shape>,<scale>");
            PendingLayer p;
            p.header_line = lineno;
            p.layer.name = trim(fields[1]);
            const auto kind = trim(fields[2]);
            if (kind == "fc") {
                p.layer.kind = map::LayerKind::FC;
            } else if (kind == "conv") {
                p.layer.kind = map::LayerKind::Conv;
            } else {
                throw Error(Errc::MalformedRow, at + ": unknown layer kind '" + kind + "'");
            }
            auto shape = parse_shape(fields[3], at);
            if ((p.layer.kind == map::LayerKind::FC && shape.size() != 2) ||
                (p.layer.kind == map::LayerKind::Conv && (shape.size() != 4 || shape[2] != shape[3]))) {
                throw Error(Errc::ShapeMismatch, at + ": shape '" + fields[3] + "' does not fit a " + kind + " layer");
            }
            double scale = 0.0;
            if (!parse_real(fields[4], scale)) throw Error(Errc::MalformedRow, at + ": bad scale '" + fields[4] + "'");
            if (!(scale > 0.0)) throw Error(Errc::InvalidScale, at + ": scale must be > 0");
            p.layer.weights.scale = scale;
            for (std::size_t i = 5; i < fields.size(); ++i) {
                const auto kv = split(trim(fields[i]), '=');
                long long v = 0;
                if (kv.size() != 2 || !parse_int(kv[1], v) || v < 0) {
                    throw Error(Errc::MalformedRow, at + ": bad option '" + fields[i] + "'");
                }
                if (kv[0] == "stride" && v >= 1) {
                    p.layer.stride = static_cast<unsigned>(v);
                } else if (kv[0] == "padding") {
                    p.layer.padding = static_cast<unsigned>(v);
                } else if (kv[0] == "precision" && v >= 2 && v <= 16) {
                    p.layer.weights.precision = static_cast<unsigned>(v);
                } else {
                    throw Error(Errc::MalformedRow, at + ": bad option '" + fields[i] + "'");
                }
            }
            p.rows_expected = shape[0];
            p.row_width = shape_size(shape) / shape[0];
            p.layer.weights.shape = std::move(shape);
            p.layer.weights.data.reserve(shape_size(p.layer.weights.shape));
            pending = std::move(p);
            continue;
        }
        if (fields[0] == "#bias") {
            if (!pending || pending->rows_seen) throw Error(Errc::MalformedRow, at + ": #bias must follow #layer");
            for (std::size_t i = 1; i < fields.size(); ++i) {
                double v = 0.0;
                if (!parse_real(fields[i], v)) throw Error(Errc::MalformedRow, at + ": bad bias '" + fields[i] + "'");
                pending->layer.bias.push_back(v);
            }
            continue;
        }
        if (fields[0].rfind('#', 0) == 0) throw Error(Errc::MalformedRow, at + ": unknown directive '" + fields[0] + "'");
        if (!pending) throw Error(Errc::MalformedRow, at + ": data row before any #layer header");
        if (pending->rows_seen == pending->rows_expected) {
            throw Error(Errc::ShapeMismatch, at + ": layer '" + pending->layer.name + "' has more rows than declared");
        }
        if (fields.size() != pending->row_width) {
            throw Error(Errc::MalformedRow, at + ": expected " + std::to_string(pending->row_width) + " values, got " +
                                                std::to_string(fields.size()));
        }
        const long long limit = (1LL << (pending->layer.weights.precision - 1)) - 1;
        for (const auto& f : fields) {
            long long v = 0;
            if (!parse_int(f, v)) throw Error(Errc::MalformedRow, at + ": bad integer '" + f + "'");
            if (v < -limit || v > limit) throw Error(Errc::ShapeMismatch, at + ": weight " + f + " outside precision range");
            pending->layer.weights.data.push_back(static_cast<std::int32_t>(v));
        }
        ++pending->rows_seen;
    }
    if (!any_content) throw Error(Errc::EmptyFile, source + ": no layers");
    if (pending) finish_layer(net, *pending, source);
    if (net.layers.empty()) throw Error(Errc::EmptyFile, source + ": no layers");
    return net;
}

Network load_weights_csv(const std::filesystem::path& path) {
    return parse_weights_csv(read_file(path), path.string());
}

std::string weights_csv(const Network& net) {
    std::string out;
    if (!net.input_shape.empty()) out += "#input," + shape_string(net.input_shape) + "\n";
    for (const auto& l : net.layers) {
        out += "#layer," + l.name + (l.kind == map::LayerKind::Conv ? ",conv," : ",fc,") +
               shape_string(l.weights.shape) + "," + fmt_real(l.weights.scale);
        if (l.kind == map::LayerKind::Conv) {
            out += ",stride=" + std::to_string(l.stride) + ",padding=" + std::to_string(l.padding);
        }
        if (l.weights.precision != 8) out += ",precision=" + std::to_string(l.weights.precision);
        out += '\n';
        if (!l.bias.empty()) {
            out += "#bias";
            for (double b : l.bias) out += "," + fmt_real(b);
            out += '\n';
        }
        const std::size_t width = l.weights.size() / l.weights.shape[0];
        for (std::size_t r = 0; r < l.weights.shape[0]; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
                if (c) out += ',';
                out += std::to_string(l.weights.data[r * width + c]);
            }
            out += '\n';
        }
    }
    return out;
}

std::vector<std::vector<double>> parse_inputs_csv(const std::string& text, const std::string& source) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skippable(line)) continue;
        std::vector<double> row;
        for (const auto& f : split(trim(line), ',')) {
            double v = 0.0;
            if (!parse_real(f, v)) throw Error(Errc::MalformedRow, where(source, lineno) + ": bad value '" + f + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw Error(Errc::MalformedRow, where(source, lineno) + ": expected " +
                                                std::to_string(rows.front().size()) + " values, got " +
                                                std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<double>> load_inputs_csv(const std::filesystem::path& path) {
    return parse_inputs_csv(read_file(path), path.string());
}

nlohmann::json to_json(const QorReport& r) {
    return nlohmann::json{
        {"mode", r.mode.name()},
        {"baseline", "exact_int8"},
        {"batch", r.batch},
        {"top1_agreement_vs_exact_int8", r.top1_agreement_vs_exact_int8},
        {"output_mse_vs_exact_int8", r.output_mse_vs_exact_int8},
        {"pruning_requested", r.pruning_requested},
        {"pruned_fraction", r.pruned_fraction},
        {"pruned_weights", r.pruned_weights},
        {"total_weights", r.total_weights},
        {"executed_macs", r.executed_macs},
        {"analytic_macs", r.analytic_macs},
        {"qor_denominator", "exact INT8 at the same pruning (published QoR uses FP32)"},
        {"reference",
         {
             {"resnet18_cifar10_accuracy_pct", constants::kReportedResNet18AccuracyPct},
             {"vgg16_cifar10_accuracy_pct", constants::kReportedVgg16AccuracyPct},
             {"resnet18_fp32_accuracy_pct", constants::kReportedResNet18Fp32AccuracyPct},
             {"vgg16_fp32_accuracy_pct", constants::kReportedVgg16Fp32AccuracyPct},
             {"qor_pct", constants::kReportedQorPct},
             {"reproduced", false},
         }},
    };
}

RunResult forward(const Network& net, const std::vector<std::vector<double>>& inputs, CiaMode mode,
                  double pruning, RunOptions options) {
    if (net.layers.empty()) throw Error(Errc::InvalidArgument, "network has no layers");
    if (!(pruning >= 0.0 && pruning < 1.0)) throw Error(Errc::InvalidArgument, "pruning must lie in [0,1)");

    std::vector<std::size_t> shape = net.input_shape;
    if (shape.empty()) {
        const auto& first = net.layers.front();
        if (first.kind == map::LayerKind::Conv) {
            throw Error(Errc::DimensionMismatch, "conv front end needs an #input CxHxW declaration");
        }
        shape = {first.weights.shape[1]};
    }

    // Plan every layer up front; shapes chain through the network.
    std::vector<LayerRun> runs;
    RunResult result;
    for (const auto& l : net.layers) {
        LayerRun run;
        const auto& ws = l.weights.shape;
        if (l.kind == map::LayerKind::FC) {
            if (shape_size(shape) != ws[1]) {
                throw Error(Errc::DimensionMismatch, "layer '" + l.name + "' takes " + std::to_string(ws[1]) +
                                                         " inputs, previous output has " +
                                                         std::to_string(shape_size(shape)));
            }
            run.spec = map::LayerSpec::fc(l.name, static_cast<unsigned>(ws[1]), static_cast<unsigned>(ws[0]),
                                          l.weights.precision, options.act_bits);
        } else {
            if (shape.size() != 3 || shape[0] != ws[1]) {
                throw Error(Errc::DimensionMismatch, "layer '" + l.name + "' expects " + std::to_string(ws[1]) +
                                                         " input channels, previous output is " + shape_string(shape));
            }
            run.spec = map::LayerSpec::conv(l.name, static_cast<unsigned>(ws[2]), static_cast<unsigned>(ws[1]),
                                            static_cast<unsigned>(ws[0]), static_cast<unsigned>(shape[1]),
                                            static_cast<unsigned>(shape[2]), l.stride, l.padding,
                                            l.weights.precision, options.act_bits);
        }
        if (!l.bias.empty() && l.bias.size() != ws[0]) {
            throw Error(Errc::DimensionMismatch, "layer '" + l.name + "' bias length does not match its outputs");
        }
        run.config.weight_precision = l.weights.precision;
        run.config.input_precision = options.act_bits;
        run.plan = map::map_layer(run.spec, run.config, mode, map::MapOptions{true});
        const auto mask = map::magnitude_mask(l.weights.data, pruning);
        run.plan = map::apply_pruning(std::move(run.plan), mask, map::PruneGranularity::PerWeight);
        result.pruned_weights += run.plan.skipped_weights;
        result.total_weights += run.spec.total_weights();
        if (run.spec.kind == map::LayerKind::FC) {
            shape = {run.spec.filters};
        } else {
            shape = {run.spec.filters, run.spec.out_height(), run.spec.out_width()};
        }
        runs.push_back(std::move(run));
    }

    const std::size_t batch = inputs.size();
    const std::size_t in_size = net.input_shape.empty() ? net.layers.front().weights.shape[1]
                                                        : shape_size(net.input_shape);
    for (std::size_t b = 0; b < batch; ++b) {
        if (inputs[b].size() != in_size) {
            throw Error(Errc::DimensionMismatch, "sample " + std::to_string(b) + " has " +
                                                     std::to_string(inputs[b].size()) + " values, network takes " +
                                                     std::to_string(in_size));
        }
    }

    std::vector<std::vector<double>> acts = inputs;
    std::vector<std::uint64_t> macs(batch, 0);
    for (std::size_t li = 0; li < runs.size(); ++li) {
        const auto& run = runs[li];
        const auto& layer = net.layers[li];
        const bool last = li + 1 == runs.size();

        std::vector<double> flat;
        for (const auto& a : acts) flat.insert(flat.end(), a.begin(), a.end());
        const auto q = quantize(flat, {flat.size()}, options.act_bits);
        const double out_scale = q.scale * layer.weights.scale;

        const MacroState probe(run.config);
        const auto trace = map::schedule(run.plan, probe);
        const std::size_t per = std::size_t{run.spec.depth} * run.spec.in_height * run.spec.in_width;
        const std::size_t filters = run.spec.filters;
        const std::size_t positions = run.spec.output_positions();

        std::vector<std::vector<double>> next(batch);
        if (last) result.accumulators.assign(batch, {});
        parallel_chunks(batch, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            MacroState macro(run.config);
            for (std::size_t b = begin; b < end; ++b) {
                std::span<const std::int32_t> sample(q.data.data() + b * per, per);
                const auto patches = map::im2col(run.spec, sample);
                const auto out = map::execute(run.plan, trace, macro, layer.weights.data, patches);
                macs[b] += out.macs;
                // positions x filters -> channel-major
                std::vector<double> y(filters * positions);
                std::vector<std::int64_t> acc(filters * positions);
                for (std::size_t f = 0; f < filters; ++f) {
                    for (std::size_t p = 0; p < positions; ++p) {
                        const std::int64_t v = out.values[p * filters + f];
                        acc[f * positions + p] = v;
                        double r = static_cast<double>(v) * out_scale;
                        if (!layer.bias.empty()) r += layer.bias[f];
                        if (!last) r = std::max(r, 0.0);
                        y[f * positions + p] = r;
                    }
                }
                if (last) result.accumulators[b] = std::move(acc);
                next[b] = std::move(y);
            }
        });
        acts = std::move(next);
        result.analytic_macs += run.spec.total_macs() * batch;
    }
    for (auto m : macs) result.executed_macs += m;
    result.outputs = std::move(acts);
    return result;
}

NetworkRun run_network(const Network& net, const std::vector<std::vector<double>>& inputs, CiaMode mode,
                       double pruning, RunOptions options) {
    NetworkRun run;
    run.result = forward(net, inputs, mode, pruning, options);
    run.baseline = mode == CiaMode::exact() ? run.result : forward(net, inputs, CiaMode::exact(), pruning, options);

    auto& r = run.report;
    r.mode = mode;
    r.batch = inputs.size();
    r.pruning_requested = pruning;
    r.pruned_weights = run.result.pruned_weights;
    r.total_weights = run.result.total_weights;
    r.pruned_fraction = r.total_weights ? static_cast<double>(r.pruned_weights) / static_cast<double>(r.total_weights)
                                        : 0.0;
    r.executed_macs = run.result.executed_macs;
    r.analytic_macs = run.result.analytic_macs;

    std::size_t agree = 0;
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        const auto& y = run.result.outputs[b];
        const auto& ref = run.baseline.outputs[b];
        if (argmax(y) == argmax(ref)) ++agree;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double d = y[i] - ref[i];
            sq += d * d;
        }
        n += y.size();
    }
    r.top1_agreement_vs_exact_int8 = inputs.empty() ? 1.0 : static_cast<double>(agree) / inputs.size();
    r.output_mse_vs_exact_int8 = n ? sq / static_cast<double>(n) : 0.0;
    return run;
}

std::string outputs_csv(const std::vector<std::vector<double>>& outputs) {
    std::string out = "index";
    const std::size_t width = outputs.empty() ? 0 : outputs.front().size();
    for (std::size_t i = 0; i < width; ++i) out += ",y" + std::to_string(i);
    out += '\n';
    for (std::size_t b = 0; b < outputs.size(); ++b) {
        out += std::to_string(b);
        for (double v : outputs[b]) out += "," + fmt_real(v);
        out += '\n';
    }
    return out;
}

}  // namespace pimsim::nn
