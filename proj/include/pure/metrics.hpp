#pragma once

#include "pure/detector.hpp"
#include "pure/geometry.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace pure {

/// Annotated pupil for one frame; center is meaningful only when pupil_present.
struct GroundTruthFrame {
    std::int64_t frame_id = 0;
    bool pupil_present = false;
    Point2d center{-1.0, -1.0};

    friend bool operator==(const GroundTruthFrame&, const GroundTruthFrame&) = default;
};

enum class FrameClass { CTP, ITP, FP, TN, FN };

std::string_view to_string(FrameClass c);

/// Detector output paired with its annotation, before any confidence threshold.
struct FrameOutcome {
    bool estimate_present = false;
    double psi = 0.0;
    bool truth_present = false;
    double error = 0.0;  // centre distance in input pixels; valid when both are present
};

FrameOutcome evaluate_frame(const PupilResult& result, const GroundTruthFrame& truth);

/// An estimate counts as found iff present and psi >= threshold. Distance check is inclusive.
FrameClass classify(const FrameOutcome& outcome, double threshold, double radius);
FrameClass classify_frame(const PupilResult& result, double threshold, const GroundTruthFrame& truth,
                          double radius = 5.0);

struct ClassCounts {
    std::int64_t ctp = 0, itp = 0, fp = 0, tn = 0, fn = 0;

    std::int64_t tp() const { return ctp + itp; }
    std::int64_t total() const { return ctp + itp + fp + tn + fn; }
    void add(FrameClass c);
    ClassCounts& operator+=(const ClassCounts& o);
    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts count_classes(std::span<const FrameClass> classes);

/// Ratios with a zero denominator are reported as nullopt, never as 0 or 1.
struct Rates {
    std::optional<double> sensitivity;  // CTP / (TP + FN)
    std::optional<double> precision;    // CTP / (TP + FP)
    std::optional<double> specificity;  // TN / (TN + FP)
};

Rates rates(const ClassCounts& counts);

inline constexpr int kCurveMaxError = 15;

/// Fraction of truth-present frames whose found estimate lies within n pixels,
/// for n = 1..kCurveMaxError. nullopt entries when no frame has a pupil.
std::array<std::optional<double>, kCurveMaxError> detection_rate_curve(std::span<const FrameOutcome> frames,
                                                                       double threshold);

struct Summary {
    ClassCounts counts;
    Rates rates;
    std::array<std::optional<double>, kCurveMaxError> detection_rate{};
};

Summary summarize(std::span<const FrameOutcome> frames, double threshold, double radius);

/// (1 + beta^2) P S / (beta^2 P + S); 0 when both are 0.
double f_beta(double precision, double sensitivity, double beta);

struct SweepRow {
    double threshold = 0.0;
    ClassCounts counts;
    Rates rates;
    std::optional<double> f2;  // requires precision and sensitivity
};

struct Sweep {
    std::vector<SweepRow> rows;
    std::optional<std::size_t> best;  // highest F2, lowest threshold on ties
};

/// lo, lo + step, ..., up to hi (inclusive within half a step), rounded to 1e-10.
std::vector<double> make_thresholds(double lo, double hi, double step);

Sweep threshold_sweep(std::span<const FrameOutcome> frames, double radius, std::span<const double> thresholds);

/// Run statistics of the binary pupil signal (up = CTP, down = anything else).
/// Keeps run totals so results over several sequences merge associatively.
struct SignalStats {
    std::int64_t up_runs = 0, up_frames = 0;
    std::int64_t down_runs = 0, down_frames = 0;
    std::int64_t longest_up = 0;

    std::optional<double> mtbf() const;
    std::optional<double> mttr() const;
    /// e^{-1/MTBF}; nullopt without any up-run.
    std::optional<double> reliability() const;
    /// e^{-1/MTTR}; nullopt without any down-run.
    std::optional<double> insufficiency() const;

    SignalStats& operator+=(const SignalStats& o);
};

SignalStats signal_stats(std::span<const FrameClass> classes);

}  // namespace pure
