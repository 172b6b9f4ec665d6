#include "pure/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pure {

std::string_view to_string(FrameClass c) {
    switch (c) {
        case FrameClass::CTP: return "CTP";
        case FrameClass::ITP: return "ITP";
        case FrameClass::FP: return "FP";
        case FrameClass::TN: return "TN";
        case FrameClass::FN: return "FN";
    }
    return "?";
}

FrameOutcome evaluate_frame(const PupilResult& result, const GroundTruthFrame& truth) {
    FrameOutcome o;
    o.estimate_present = result.present;
    o.psi = result.confidence;
    o.truth_present = truth.pupil_present;
    if (result.present && truth.pupil_present) o.error = distance(result.center, truth.center);
    return o;
}

FrameClass classify(const FrameOutcome& o, double threshold, double radius) {
    const bool found = o.estimate_present && o.psi >= threshold;
    if (found) {
        if (!o.truth_present) return FrameClass::FP;
        return o.error <= radius ? FrameClass::CTP : FrameClass::ITP;
    }
    return o.truth_present ? FrameClass::FN : FrameClass::TN;
}

FrameClass classify_frame(const PupilResult& result, double threshold, const GroundTruthFrame& truth,
                          double radius) {
    return classify(evaluate_frame(result, truth), threshold, radius);
}

void ClassCounts::add(FrameClass c) {
    switch (c) {
        case FrameClass::CTP: ++ctp; break;
        case FrameClass::ITP: ++itp; break;
        case FrameClass::FP: ++fp; break;
        case FrameClass::TN: ++tn; break;
        case FrameClass::FN: ++fn; break;
    }
}

ClassCounts& ClassCounts::operator+=(const ClassCounts& o) {
    ctp += o.ctp;
    itp += o.itp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

ClassCounts count_classes(std::span<const FrameClass> classes) {
    ClassCounts c;
    for (const auto cls : classes) c.add(cls);
    return c;
}

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Rates rates(const ClassCounts& c) {
    return {ratio(c.ctp, c.tp() + c.fn), ratio(c.ctp, c.tp() + c.fp), ratio(c.tn, c.tn + c.fp)};
}

std::array<std::optional<double>, kCurveMaxError> detection_rate_curve(std::span<const FrameOutcome> frames,
                                                                       double threshold) {
    std::int64_t with_pupil = 0;
    std::array<std::int64_t, kCurveMaxError> hits{};
    for (const auto& f : frames) {
        if (!f.truth_present) continue;
        ++with_pupil;
        if (!f.estimate_present || f.psi < threshold) continue;
        for (int n = 1; n <= kCurveMaxError; ++n)
            if (f.error <= n) ++hits[static_cast<std::size_t>(n - 1)];
    }
    std::array<std::optional<double>, kCurveMaxError> curve{};
    for (std::size_t i = 0; i < curve.size(); ++i) curve[i] = ratio(hits[i], with_pupil);
    return curve;
}

Summary summarize(std::span<const FrameOutcome> frames, double threshold, double radius) {
    Summary s;
    for (const auto& f : frames) s.counts.add(classify(f, threshold, radius));
    s.rates = rates(s.counts);
    s.detection_rate = detection_rate_curve(frames, threshold);
    return s;
}

double f_beta(double precision, double sensitivity, double beta) {
    const double b2 = beta * beta;
    const double den = b2 * precision + sensitivity;
    if (den == 0.0) return 0.0;
    return (1.0 + b2) * precision * sensitivity / den;
}

std::vector<double> make_thresholds(double lo, double hi, double step) {
    std::vector<double> out;
    if (!(step > 0.0) || hi < lo) return out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 0.5));
    out.reserve(static_cast<std::size_t>(n + 1));
    for (long k = 0; k <= n; ++k) out.push_back(std::round((lo + k * step) * 1e10) / 1e10);
    return out;
}

Sweep threshold_sweep(std::span<const FrameOutcome> frames, double radius, std::span<const double> thresholds) {
    Sweep sweep;
    sweep.rows.reserve(thresholds.size());
    for (const double t : thresholds) {
        SweepRow row;
        row.threshold = t;
        for (const auto& f : frames) row.counts.add(classify(f, t, radius));
        row.rates = rates(row.counts);
        if (row.rates.precision && row.rates.sensitivity)
            row.f2 = f_beta(*row.rates.precision, *row.rates.sensitivity, 2.0);
        if (row.f2 && (!sweep.best || *row.f2 > *sweep.rows[*sweep.best].f2)) sweep.best = sweep.rows.size();
        sweep.rows.push_back(row);
    }
    return sweep;
}

std::optional<double> SignalStats::mtbf() const { return ratio(up_frames, up_runs); }
std::optional<double> SignalStats::mttr() const { return ratio(down_frames, down_runs); }

std::optional<double> SignalStats::reliability() const {
    const auto m = mtbf();
    if (!m) return std::nullopt;
    return std::exp(-1.0 / *m);
}

std::optional<double> SignalStats::insufficiency() const {
    const auto m = mttr();
    if (!m) return std::nullopt;
    return std::exp(-1.0 / *m);
}

SignalStats& SignalStats::operator+=(const SignalStats& o) {
    up_runs += o.up_runs;
    up_frames += o.up_frames;
    down_runs += o.down_runs;
    down_frames += o.down_frames;
    longest_up = std::max(longest_up, o.longest_up);
    return *this;
}

SignalStats signal_stats(std::span<const FrameClass> classes) {
    SignalStats s;
    std::int64_t run = 0;
    bool run_up = false;
    auto close_run = [&] {
        if (run == 0) return;
        if (run_up) {
            ++s.up_runs;
            s.up_frames += run;
            s.longest_up = std::max(s.longest_up, run);
        } else {
            ++s.down_runs;
            s.down_frames += run;
        }
    };
    for (const auto c : classes) {
        const bool up = c == FrameClass::CTP;
        if (run > 0 && up != run_up) {
            close_run();
            run = 0;
        }
        run_up = up;
        ++run;
    }
    close_run();
    return s;
}

}  // namespace pure
