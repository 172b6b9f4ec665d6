#include "pure/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pure {

double curvature_threshold() {
    const double half = 22.5 * std::numbers::pi / 180.0;
    return (1.0 - std::cos(half)) / std::sin(half);
}

SizeBounds compute_size_bounds(const WorkingConfig& cfg) {
    SizeBounds b;
    b.ec_max = std::hypot(static_cast<double>(cfg.width), static_cast<double>(cfg.height));
    b.ec_min = 2.0 / 3.0 * b.ec_max;
    b.pd_max = 0.29 * b.ec_max;
    b.pd_min = 0.07 * b.ec_min;
    return b;
}

std::string_view to_string(Rejection r) {
    switch (r) {
        case Rejection::TooFewPoints: return "TooFewPoints";
        case Rejection::DiameterOutOfBounds: return "DiameterOutOfBounds";
        case Rejection::TooStraight: return "TooStraight";
        case Rejection::FitFailed: return "FitFailed";
        case Rejection::CenterOutside: return "CenterOutside";
        case Rejection::TooEccentric: return "TooEccentric";
        case Rejection::BadFit: return "BadFit";
    }
    return "Unknown";
}

FilterResult filter_candidate(std::vector<Point2d> dominant, const SizeBounds& bounds, const DetectorConfig& cfg,
                              int width, int height) {
    if (dominant.size() < 5) return Rejection::TooFewPoints;

    if (!bounds.diameter_ok(max_pairwise_distance(dominant))) return Rejection::DiameterOutOfBounds;

    const MinRect rect = min_area_rect(dominant);
    if (rect.side_long <= 0.0 || rect.side_short / rect.side_long < cfg.curvature_ratio)
        return Rejection::TooStraight;

    const auto fitted = fit_ellipse(dominant);
    if (!fitted) return Rejection::FitFailed;
    const Ellipse& e = *fitted;
    if (e.center.x < 0.0 || e.center.y < 0.0 || e.center.x >= width || e.center.y >= height)
        return Rejection::CenterOutside;
    if (e.aspect_ratio() < cfg.curvature_ratio) return Rejection::TooEccentric;

    if (!mean_in_axes_rhombus(dominant, e)) return Rejection::BadFit;

    PupilCandidate c;
    c.points = std::move(dominant);
    c.ellipse = e;
    c.rho = e.aspect_ratio();
    return c;
}

FilterResult filter_segment(const RawSegment& seg, const SizeBounds& bounds, const DetectorConfig& cfg, int width,
                            int height) {
    // Dominant points are a subset of the chain, so these bounds carry over to them.
    if (seg.points.size() < 5) return Rejection::TooFewPoints;
    int x0 = width, y0 = height, x1 = -1, y1 = -1;
    for (const auto& p : seg.points) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    if (std::hypot(x1 - x0, y1 - y0) < bounds.pd_min) return Rejection::DiameterOutOfBounds;
    return filter_candidate(approximate_dominant_points(seg), bounds, cfg, width, height);
}

double angular_spread(std::span<const Point2d> pts, const Ellipse& e) {
    bool quadrant[4] = {false, false, false, false};
    for (const auto& p : pts) {
        const bool right = p.x - e.center.x >= 0.0;
        const bool below = p.y - e.center.y >= 0.0;
        quadrant[(right ? 1 : 0) + (below ? 2 : 0)] = true;
    }
    return std::count(std::begin(quadrant), std::end(quadrant), true) / 4.0;
}

double outline_contrast(const GrayImage& img, const Ellipse& e, const DetectorConfig& cfg) {
    const double half = cfg.contrast_half_length * 2.0 * e.b;
    int evaluated = 0;
    int supporting = 0;

    for (const Point2d& p : sample_outline(e, cfg.stride_deg)) {
        const Point2d radial = p - e.center;
        const double len = norm(radial);
        if (!(len > 0.0)) continue;
        const Point2d u = radial * (1.0 / len);

        const long px = std::lround(p.x), py = std::lround(p.y);
        const Point2d s = p - u * half;
        const Point2d t = p + u * half;
        const long sx = std::lround(s.x), sy = std::lround(s.y);
        const long tx = std::lround(t.x), ty = std::lround(t.y);
        if (!img.contains(static_cast<int>(sx), static_cast<int>(sy)) ||
            !img.contains(static_cast<int>(tx), static_cast<int>(ty)))
            continue;

        // Step along the dominant axis; pixels level with the outline point belong to neither half.
        const long dx = tx - sx, dy = ty - sy;
        const long steps = std::max(std::abs(dx), std::abs(dy));
        if (steps == 0) continue;
        const bool x_major = std::abs(dx) >= std::abs(dy);
        const long pivot = x_major ? px : py;
        const long dir = x_major ? (dx > 0 ? 1 : -1) : (dy > 0 ? 1 : -1);

        long inner_sum = 0, outer_sum = 0;
        int inner_n = 0, outer_n = 0;
        for (long i = 0; i <= steps; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(steps);
            const int x = static_cast<int>(std::lround(static_cast<double>(sx) + f * static_cast<double>(dx)));
            const int y = static_cast<int>(std::lround(static_cast<double>(sy) + f * static_cast<double>(dy)));
            const long along = (x_major ? x : y) - pivot;
            if (along * dir < 0) {
                inner_sum += img.at(x, y);
                ++inner_n;
            } else if (along * dir > 0) {
                outer_sum += img.at(x, y);
                ++outer_n;
            }
        }
        if (inner_n == 0 || outer_n == 0) continue;

        ++evaluated;
        const double inner = static_cast<double>(inner_sum) / inner_n;
        const double outer = static_cast<double>(outer_sum) / outer_n;
        if (cfg.bright_pupil ? inner > outer : inner < outer) ++supporting;
    }
    return evaluated == 0 ? 0.0 : static_cast<double>(supporting) / evaluated;
}

double confidence(const PupilCandidate& c, const SizeBounds& bounds, double gamma, const DetectorConfig& cfg) {
    if (!bounds.diameter_ok(2.0 * c.ellipse.a) || gamma < cfg.gamma_reject) return 0.0;
    return (c.rho + c.theta + gamma) / 3.0;
}

void score_candidate(PupilCandidate& c, const GrayImage& img, const SizeBounds& bounds, const DetectorConfig& cfg) {
    c.theta = angular_spread(c.points, c.ellipse);
    c.gamma = outline_contrast(img, c.ellipse, cfg);
    c.psi = confidence(c, bounds, c.gamma, cfg);
}

BoundingSquare bounding_square(std::span<const Point2d> pts) {
    if (pts.empty()) return {};
    double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double side = std::max(x1 - x0, y1 - y0);
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    return {cx - 0.5 * side, cy - 0.5 * side, cx + 0.5 * side, cy + 0.5 * side};
}

std::vector<PupilCandidate> combine_segments(std::span<const PupilCandidate> candidates, const GrayImage& img,
                                             const SizeBounds& bounds, const DetectorConfig& cfg) {
    std::vector<BoundingSquare> squares;
    squares.reserve(candidates.size());
    for (const auto& c : candidates) squares.push_back(bounding_square(c.points));

    std::vector<PupilCandidate> merged;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            const auto& si = squares[i];
            const auto& sj = squares[j];
            if (!si.intersects(sj) || si.contains(sj) || sj.contains(si)) continue;

            std::vector<Point2d> pts = candidates[i].points;
            pts.insert(pts.end(), candidates[j].points.begin(), candidates[j].points.end());
            auto result = filter_candidate(std::move(pts), bounds, cfg, img.width(), img.height());
            auto* c = std::get_if<PupilCandidate>(&result);
            if (!c) continue;
            score_candidate(*c, img, bounds, cfg);
            if (c->gamma > std::max(candidates[i].gamma, candidates[j].gamma)) merged.push_back(std::move(*c));
        }
    }
    return merged;
}

std::optional<std::size_t> select_pupil(std::span<const PupilCandidate> candidates, const DetectorConfig& cfg) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].psi > 0.0 && (!best || candidates[i].psi > candidates[*best].psi)) best = i;
    }
    if (!best) return std::nullopt;

    // The initial pick may be the iris; look for a strong concentric candidate inside it.
    const Ellipse& outer = candidates[*best].ellipse;
    const double radius = outer.a;
    std::optional<std::size_t> inner;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        if (c.psi <= 0.0) continue;
        if (distance(c.ellipse.center, outer.center) > radius) continue;
        if (!(2.0 * c.ellipse.a < radius)) continue;
        if (c.gamma < cfg.gamma_strong) continue;
        if (!inner || c.psi > candidates[*inner].psi) inner = i;
    }
    return inner ? inner : best;
}

DetectionTrace detect_traced(const GrayImage& img, const WorkingConfig& wcfg, const DetectorConfig& dcfg) {
    DetectionTrace trace;
    if (img.empty()) return trace;

    auto scaled = downscale(img, wcfg);
    trace.scale = scaled.scale;
    trace.working = normalize_min_max(scaled.image);
    const int w = trace.working.width(), h = trace.working.height();
    trace.bounds = compute_size_bounds({w, h});

    trace.edges = morph_manipulate(detect_edges(trace.working, dcfg.canny), dcfg.morph);
    trace.segments = extract_segments(trace.edges);

    for (const auto& seg : trace.segments) {
        auto result = filter_segment(seg, trace.bounds, dcfg, w, h);
        if (auto* c = std::get_if<PupilCandidate>(&result)) {
            score_candidate(*c, trace.working, trace.bounds, dcfg);
            trace.candidates.push_back(std::move(*c));
        }
    }
    trace.segment_candidates = trace.candidates.size();
    auto merged = combine_segments(trace.candidates, trace.working, trace.bounds, dcfg);
    std::move(merged.begin(), merged.end(), std::back_inserter(trace.candidates));

    trace.selected = select_pupil(trace.candidates, dcfg);
    if (trace.selected) {
        const auto& c = trace.candidates[*trace.selected];
        const double inv = 1.0 / trace.scale;
        auto& r = trace.result;
        r.present = true;
        r.ellipse = c.ellipse;
        r.ellipse.center = c.ellipse.center * inv;
        r.ellipse.a *= inv;
        r.ellipse.b *= inv;
        r.center = r.ellipse.center;
        r.confidence = c.psi;
    }
    return trace;
}

PupilResult detect(const GrayImage& img, const WorkingConfig& wcfg, const DetectorConfig& dcfg) {
    return detect_traced(img, wcfg, dcfg).result;
}

}  // namespace pure
