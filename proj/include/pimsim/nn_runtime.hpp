#pragma once

// Quantized sequential inference with every multiply executed on the macro
// model.
//
// Weight CSV:
//   #input,16                          optional; CxHxW for conv front ends
//   #layer,fc1,fc,8x16,0.0123          name, kind (fc|conv), shape, scale
//   #layer,c1,conv,4x1x3x3,0.02,stride=1,padding=1
//   #bias,0.1,-0.2,...                 optional, one real per output, after #layer
//   12,-7,0,...                        shape[0] rows of integer weights
// FC shape is outputs x inputs; conv shape is filters x channels x k x k.
// Lines that are blank or start with `//` are ignored.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pimsim/cia2m.hpp"
#include "pimsim/mapper.hpp"

namespace pimsim::nn {

struct QuantTensor {
    std::vector<std::int32_t> data;
    double scale = 1.0;
    int zero_point = 0;
    std::vector<std::size_t> shape;
    unsigned precision = 8;

    std::size_t size() const { return data.size(); }
    double dequantize(std::size_t i) const { return static_cast<double>(data[i]) * scale; }
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

// Symmetric per-tensor: scale = max|x| / (2^(p-1) - 1), round half away from
// zero; an all-zero tensor gets scale 1. Throws Errc::InvalidArgument for
// non-finite input or precision outside [2,16].
QuantTensor quantize(std::span<const double> data, std::vector<std::size_t> shape, unsigned precision = 8);

struct Layer {
    std::string name;
    map::LayerKind kind = map::LayerKind::FC;
    QuantTensor weights;
    std::vector<double> bias;  // empty or one per output
    unsigned stride = 1;
    unsigned padding = 0;
};

struct Network {
    std::vector<std::size_t> input_shape;  // {C, H, W} or {N}; empty = take from first layer
    std::vector<Layer> layers;
};

// Throws Errc::Io, Errc::EmptyFile, Errc::MalformedRow (naming the line),
// Errc::ShapeMismatch, Errc::InvalidScale.
Network parse_weights_csv(const std::string& text, const std::string& source = "<memory>");
Network load_weights_csv(const std::filesystem::path& path);
std::string weights_csv(const Network& net);

// One sample per row; `//` comments and blank lines skipped.
std::vector<std::vector<double>> parse_inputs_csv(const std::string& text, const std::string& source = "<memory>");
std::vector<std::vector<double>> load_inputs_csv(const std::filesystem::path& path);

struct QorReport {
    CiaMode mode = CiaMode::exact();
    std::size_t batch = 0;
    double top1_agreement_vs_exact_int8 = 1.0;
    double output_mse_vs_exact_int8 = 0.0;
    double pruning_requested = 0.0;
    double pruned_fraction = 0.0;
    std::uint64_t pruned_weights = 0;
    std::uint64_t total_weights = 0;
    std::uint64_t executed_macs = 0;
    std::uint64_t analytic_macs = 0;
};

nlohmann::json to_json(const QorReport& report);

struct RunOptions {
    unsigned threads = 1;
    unsigned act_bits = 8;
};

struct RunResult {
    std::vector<std::vector<double>> outputs;             // dequantized, per sample
    std::vector<std::vector<std::int64_t>> accumulators;  // last layer, before scaling
    std::uint64_t executed_macs = 0;
    std::uint64_t analytic_macs = 0;
    std::uint64_t pruned_weights = 0;
    std::uint64_t total_weights = 0;
};

// Runs the network without a baseline comparison. Pruning zeroes the
// round(pruning * n) smallest-magnitude weights of each layer.
// Throws Errc::DimensionMismatch.
RunResult forward(const Network& net, const std::vector<std::vector<double>>& inputs, CiaMode mode,
                  double pruning, RunOptions options = {});

struct NetworkRun {
    RunResult result;
    RunResult baseline;  // mode Exact, same pruning
    QorReport report;
};

NetworkRun run_network(const Network& net, const std::vector<std::vector<double>>& inputs, CiaMode mode,
                       double pruning, RunOptions options = {});

// `index,y0,y1,...` rows with 17 significant digits.
std::string outputs_csv(const std::vector<std::vector<double>>& outputs);

}  // namespace pimsim::nn
