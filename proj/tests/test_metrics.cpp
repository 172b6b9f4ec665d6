#include "pure/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using pure::ClassCounts;
using pure::FrameClass;
using pure::FrameOutcome;
using pure::GroundTruthFrame;
using pure::PupilResult;

namespace {

PupilResult estimate(double x, double y, double psi) {
    PupilResult r;
    r.present = true;
    r.center = {x, y};
    r.confidence = psi;
    return r;
}

GroundTruthFrame truth_at(double x, double y) { return {0, true, {x, y}}; }
GroundTruthFrame no_pupil() { return {0, false, {-1, -1}}; }

std::vector<FrameClass> repeat(std::initializer_list<std::pair<FrameClass, int>> runs) {
    std::vector<FrameClass> out;
    for (const auto& [c, n] : runs) out.insert(out.end(), n, c);
    return out;
}

std::vector<FrameOutcome> random_outcomes(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<FrameOutcome> out(n);
    for (auto& o : out) {
        o.truth_present = u(rng) < 0.8;
        o.estimate_present = u(rng) < 0.9;
        o.psi = o.estimate_present ? u(rng) : 0.0;
        o.error = 12 * u(rng);
    }
    return out;
}

}  // namespace

TEST(Classify, InclusiveRadius) {
    EXPECT_EQ(pure::classify_frame(estimate(100, 100, 0.8), 0.66, truth_at(103, 104)), FrameClass::CTP);
    EXPECT_EQ(pure::classify_frame(estimate(100, 100, 0.8), 0.66, truth_at(103, 104.01)), FrameClass::ITP);
    EXPECT_EQ(pure::classify_frame(estimate(100, 100, 0.8), 0.66, truth_at(103, 104), 4.99), FrameClass::ITP);
}

TEST(Classify, ThresholdedOutIsNotFound) {
    EXPECT_EQ(pure::classify_frame(estimate(10, 10, 0.5), 0.66, no_pupil()), FrameClass::TN);
    EXPECT_EQ(pure::classify_frame(estimate(10, 10, 0.5), 0.66, truth_at(10, 10)), FrameClass::FN);
    EXPECT_EQ(pure::classify_frame(estimate(10, 10, 0.66), 0.66, truth_at(10, 10)), FrameClass::CTP);
}

TEST(Classify, RemainingClasses) {
    EXPECT_EQ(pure::classify_frame(estimate(10, 10, 0.9), 0.66, no_pupil()), FrameClass::FP);
    EXPECT_EQ(pure::classify_frame(PupilResult{}, 0.0, no_pupil()), FrameClass::TN);
    EXPECT_EQ(pure::classify_frame(PupilResult{}, 0.0, truth_at(1, 1)), FrameClass::FN);
}

TEST(Classify, OutcomeCarriesError) {
    const auto o = pure::evaluate_frame(estimate(1, 2, 0.3), truth_at(4, 6));
    EXPECT_TRUE(o.estimate_present);
    EXPECT_TRUE(o.truth_present);
    EXPECT_DOUBLE_EQ(o.error, 5.0);
    EXPECT_DOUBLE_EQ(o.psi, 0.3);
}

TEST(Rates, Example) {
    const ClassCounts c{72, 8, 10, 0, 10};
    const auto r = pure::rates(c);
    EXPECT_DOUBLE_EQ(*r.sensitivity, 0.8);
    EXPECT_DOUBLE_EQ(*r.precision, 0.8);
    EXPECT_DOUBLE_EQ(*r.specificity, 0.0);
    // Without FP and TN there is nothing to be specific about.
    EXPECT_FALSE(pure::rates(ClassCounts{72, 8, 0, 0, 10}).specificity);
}

TEST(Rates, AllNegatives) {
    const auto r = pure::rates(ClassCounts{0, 0, 0, 25, 0});
    EXPECT_DOUBLE_EQ(*r.specificity, 1.0);
    EXPECT_FALSE(r.sensitivity);
    EXPECT_FALSE(r.precision);
}

TEST(Rates, CountsFromClasses) {
    const auto c = pure::count_classes(repeat({{FrameClass::CTP, 3}, {FrameClass::FN, 2}, {FrameClass::TN, 4}, {FrameClass::ITP, 1}}));
    EXPECT_EQ(c, (ClassCounts{3, 1, 0, 4, 2}));
    EXPECT_EQ(c.tp(), 4);
    EXPECT_EQ(c.total(), 10);
}

TEST(Curve, CountsWithinEachRadius) {
    std::vector<FrameOutcome> frames;
    for (const double e : {0.5, 1.0, 2.5, 7.0, 20.0}) frames.push_back({true, 0.9, true, e});
    frames.push_back({false, 0.0, true, 0.0});   // missed
    frames.push_back({true, 0.2, true, 0.0});    // below threshold
    frames.push_back({true, 0.9, false, 0.0});   // no pupil, not in the denominator
    const auto curve = pure::detection_rate_curve(frames, 0.5);
    EXPECT_DOUBLE_EQ(*curve[0], 2.0 / 7);
    EXPECT_DOUBLE_EQ(*curve[1], 2.0 / 7);
    EXPECT_DOUBLE_EQ(*curve[2], 3.0 / 7);
    EXPECT_DOUBLE_EQ(*curve[6], 4.0 / 7);
    EXPECT_DOUBLE_EQ(*curve[14], 4.0 / 7);
}

TEST(Curve, UndefinedWithoutPupils) {
    const std::vector<FrameOutcome> frames{{true, 0.9, false, 0.0}};
    for (const auto& v : pure::detection_rate_curve(frames, 0.0)) EXPECT_FALSE(v);
}

TEST(Curve, NonDecreasingAndBoundsSensitivity) {
    std::mt19937 rng(3);
    for (int t = 0; t < 100; ++t) {
        auto frames = random_outcomes(rng, 60);
        for (auto& f : frames) f.truth_present = true;
        const auto s = pure::summarize(frames, 0.0, 5.0);
        for (int n = 1; n < pure::kCurveMaxError; ++n) EXPECT_LE(*s.detection_rate[n - 1], *s.detection_rate[n]);
        // Every truth frame has a pupil, so sensitivity is CTP over all frames.
        EXPECT_LE(*s.rates.sensitivity, *s.detection_rate[4] + 1e-12);
        EXPECT_DOUBLE_EQ(*s.rates.sensitivity, *s.detection_rate[4]);
    }
}

TEST(FBeta, Examples) {
    EXPECT_NEAR(pure::f_beta(0.8, 0.7, 2), 0.7179, 1e-4);
    EXPECT_NEAR(pure::f_beta(0.8, 0.7, 2), 5 * 0.56 / 3.9, 1e-12);
    for (const double x : {0.1, 0.5, 0.93})
        for (const double b : {0.5, 1.0, 2.0, 3.0}) EXPECT_NEAR(pure::f_beta(x, x, b), x, 1e-12);
    EXPECT_EQ(pure::f_beta(0, 0, 2), 0.0);
    EXPECT_EQ(pure::f_beta(0, 0.5, 2), 0.0);
}

TEST(Sweep, HundredThresholds) {
    const auto th = pure::make_thresholds(0.0, 0.99, 0.01);
    ASSERT_EQ(th.size(), 100u);
    EXPECT_EQ(th.front(), 0.0);
    EXPECT_EQ(th[66], 0.66);
    EXPECT_EQ(th.back(), 0.99);
    std::mt19937 rng(1);
    const auto frames = random_outcomes(rng, 200);
    EXPECT_EQ(pure::threshold_sweep(frames, 5.0, th).rows.size(), 100u);
}

TEST(Sweep, SingleZeroThresholdIsSummary) {
    std::mt19937 rng(2);
    const auto frames = random_outcomes(rng, 150);
    const std::vector<double> zero{0.0};
    const auto sweep = pure::threshold_sweep(frames, 5.0, zero);
    const auto s = pure::summarize(frames, 0.0, 5.0);
    ASSERT_EQ(sweep.rows.size(), 1u);
    EXPECT_EQ(sweep.rows[0].counts, s.counts);
    EXPECT_EQ(sweep.rows[0].rates.sensitivity, s.rates.sensitivity);
    EXPECT_EQ(sweep.rows[0].rates.precision, s.rates.precision);
    EXPECT_EQ(sweep.rows[0].rates.specificity, s.rates.specificity);
}

TEST(Sweep, ConfidentCorpusRowsIdentical) {
    const std::vector<FrameOutcome> frames(40, FrameOutcome{true, 1.0, true, 1.0});
    const auto th = pure::make_thresholds(0.0, 0.99, 0.01);
    const auto sweep = pure::threshold_sweep(frames, 5.0, th);
    for (const auto& row : sweep.rows) {
        EXPECT_EQ(row.counts, sweep.rows[0].counts);
        EXPECT_EQ(row.counts.ctp, 40);
        EXPECT_DOUBLE_EQ(*row.f2, 1.0);
    }
    // Ties go to the lowest threshold.
    EXPECT_EQ(sweep.best, 0u);
}

TEST(Sweep, BestIsHighestF2) {
    std::mt19937 rng(9);
    for (int t = 0; t < 50; ++t) {
        const auto frames = random_outcomes(rng, 80);
        const auto th = pure::make_thresholds(0.0, 0.99, 0.01);
        const auto sweep = pure::threshold_sweep(frames, 5.0, th);
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
            const auto& row = sweep.rows[i];
            const auto& r = row.rates;
            ASSERT_EQ(row.f2.has_value(), r.precision && r.sensitivity);
            if (!row.f2) continue;
            EXPECT_NEAR(*row.f2, 5 * *r.precision * *r.sensitivity / (4 * *r.precision + *r.sensitivity + 1e-300), 1e-12);
            if (!best || *row.f2 > *sweep.rows[*best].f2) best = i;
        }
        EXPECT_EQ(sweep.best, best);
    }
}

TEST(Sweep, MonotoneInThreshold) {
    std::mt19937 rng(11);
    for (int t = 0; t < 50; ++t) {
        const auto frames = random_outcomes(rng, 120);
        const auto th = pure::make_thresholds(0.0, 0.99, 0.01);
        const auto sweep = pure::threshold_sweep(frames, 5.0, th);
        for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
            const auto& a = sweep.rows[i - 1].counts;
            const auto& b = sweep.rows[i].counts;
            EXPECT_LE(b.ctp, a.ctp);
            EXPECT_LE(b.itp, a.itp);
            EXPECT_LE(b.fp, a.fp);
            EXPECT_GE(b.tn, a.tn);
            EXPECT_GE(b.fn, a.fn);
            EXPECT_EQ(b.total(), static_cast<std::int64_t>(frames.size()));
        }
    }
}

TEST(Sweep, ClassPartition) {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const auto frames = random_outcomes(rng, 1 + t);
        const double th = u(rng), radius = 1 + 10 * u(rng);
        const auto s = pure::summarize(frames, th, radius);
        EXPECT_EQ(s.counts.total(), static_cast<std::int64_t>(frames.size()));
        std::int64_t truths = 0;
        for (const auto& f : frames) truths += f.truth_present;
        EXPECT_EQ(s.counts.tp() + s.counts.fn, truths);
    }
}

TEST(Signal, Alternating) {
    std::vector<FrameClass> a1;
    for (int i = 0; i < 10; ++i) a1.push_back(i % 2 ? FrameClass::FN : FrameClass::CTP);
    const auto s = pure::signal_stats(a1);
    EXPECT_DOUBLE_EQ(*s.mtbf(), 1.0);
    EXPECT_DOUBLE_EQ(*s.mttr(), 1.0);
    EXPECT_NEAR(*s.reliability(), std::exp(-1.0), 1e-12);
    EXPECT_NEAR(*s.insufficiency(), std::exp(-1.0), 1e-12);
}

TEST(Signal, HalfUpHalfDown) {
    const auto s = pure::signal_stats(repeat({{FrameClass::CTP, 5}, {FrameClass::ITP, 5}}));
    EXPECT_NEAR(*s.reliability(), std::exp(-1.0 / 5), 1e-12);
    EXPECT_NEAR(*s.insufficiency(), std::exp(-1.0 / 5), 1e-12);
}

TEST(Signal, AllUp) {
    const auto s = pure::signal_stats(repeat({{FrameClass::CTP, 12}}));
    EXPECT_NEAR(*s.reliability(), std::exp(-1.0 / 12), 1e-12);
    EXPECT_FALSE(s.insufficiency());
    EXPECT_FALSE(s.mttr());
    EXPECT_EQ(s.longest_up, 12);

    const auto down = pure::signal_stats(repeat({{FrameClass::TN, 3}, {FrameClass::FP, 4}}));
    EXPECT_FALSE(down.reliability());
    EXPECT_NEAR(*down.insufficiency(), std::exp(-1.0 / 7), 1e-12);
    EXPECT_FALSE(pure::signal_stats(std::vector<FrameClass>{}).mtbf());
}

TEST(Signal, OrderingOfTheTwoPatterns) {
    for (int L = 4; L <= 40; L += 2) {
        std::vector<FrameClass> a1, a2;
        for (int i = 0; i < L; ++i) {
            a1.push_back(i % 2 ? FrameClass::FN : FrameClass::CTP);
            a2.push_back(i < L / 2 ? FrameClass::CTP : FrameClass::FN);
        }
        const auto s1 = pure::signal_stats(a1), s2 = pure::signal_stats(a2);
        EXPECT_LT(*s1.reliability(), *s2.reliability());
        EXPECT_LT(*s1.insufficiency(), *s2.insufficiency());
    }
}

TEST(Signal, RangesAndMerge) {
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> cls(0, 4), len(0, 30);
    auto draw = [&] {
        std::vector<FrameClass> v(len(rng));
        for (auto& c : v) c = static_cast<FrameClass>(cls(rng));
        return v;
    };
    for (int t = 0; t < 300; ++t) {
        const auto a = draw(), b = draw(), c = draw();
        const auto sa = pure::signal_stats(a), sb = pure::signal_stats(b), sc = pure::signal_stats(c);
        for (const auto& [s, n] : {std::pair{sa, a.size()}, std::pair{sb, b.size()}, std::pair{sc, c.size()}}) {
            if (s.reliability()) {
                EXPECT_GT(*s.reliability(), 0.0);
                EXPECT_LE(*s.reliability(), 1.0);
            }
            if (s.insufficiency()) {
                EXPECT_GT(*s.insufficiency(), 0.0);
                EXPECT_LE(*s.insufficiency(), 1.0);
            }
            EXPECT_EQ(s.up_frames + s.down_frames, static_cast<std::int64_t>(n));
        }
        auto left = sa;
        left += sb;
        left += sc;
        auto bc = sb;
        bc += sc;
        auto right = sa;
        right += bc;
        EXPECT_EQ(left.up_runs, right.up_runs);
        EXPECT_EQ(left.down_runs, right.down_runs);
        EXPECT_EQ(left.up_frames, right.up_frames);
        EXPECT_EQ(left.down_frames, right.down_frames);
        EXPECT_EQ(left.longest_up, right.longest_up);
        EXPECT_EQ(left.mtbf(), right.mtbf());
        // Pooled: merging keeps every run of every sequence.
        EXPECT_EQ(left.up_runs, sa.up_runs + sb.up_runs + sc.up_runs);
    }
}
