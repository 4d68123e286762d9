#pragma once

// Reported 65 nm figures for the 5.25T shared-AND bit-cell, the adder-tree
// cells and the macro. These are calibration inputs, not derived values.

namespace pimsim::constants {

inline constexpr double kTransistorsPerBitMult = 5.25;  // 5T latch + 2T AND shared by 8
inline constexpr double kCellAreaUm2 = 2.02;
inline constexpr double kCellPowerNw = 18.84;
inline constexpr double kReadDelayPs = 105.2;
inline constexpr double kWriteDelayPs = 157.8;
inline constexpr double kMonteCarloDelaySigmaPs = 11.77;

// Baseline bit-cells (transistors per 1-b multiply).
inline constexpr double kFlexDpuTransistors = 8.75;
inline constexpr double kXnorTransistors = 10.0;
inline constexpr double kNorTransistors = 12.0;
inline constexpr double kReportedSavingsVsFlexPct = 40.0;
inline constexpr double kReportedSavingsVsXnorPct = 48.5;
inline constexpr double kReportedSavingsVsNorPct = 56.0;

// Macro-level figures for the pruned VGG-16 / CIFAR-10 workload.
inline constexpr double kReportedThroughputTops = 0.43;
inline constexpr double kReportedThroughputTopsStarred = 1.72;
inline constexpr double kReportedEnergyEffTopsPerW = 87.22;
inline constexpr double kReportedEnergyEffTopsPerWStarred = 348.86;
inline constexpr double kReportedPruningFraction = 0.30;

// Network accuracies on CIFAR-10, kept as reference metadata.
inline constexpr double kReportedResNet18AccuracyPct = 90.1;
inline constexpr double kReportedVgg16AccuracyPct = 89.72;
inline constexpr double kReportedResNet18Fp32AccuracyPct = 93.2;
inline constexpr double kReportedVgg16Fp32AccuracyPct = 92.64;
inline constexpr double kReportedQorPct = 96.85;

// Supply range is recorded only.
inline constexpr double kVddMinV = 0.7;
inline constexpr double kVddMaxV = 1.2;

}  // namespace pimsim::constants
