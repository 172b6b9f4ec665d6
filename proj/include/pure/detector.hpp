#pragma once

#include "pure/edges.hpp"
#include "pure/geometry.hpp"
#include "pure/image.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace pure {

/// Minor/major ratio of an ellipse whose axis extremities are inscribed in 45 degrees
/// of a circle: (1 - cos 22.5deg) / sin 22.5deg.
double curvature_threshold();

/// Expected eye-canthi distance and pupil diameter range, in working-size pixels.
struct SizeBounds {
    double ec_max = 0.0;
    double ec_min = 0.0;
    double pd_max = 0.0;
    double pd_min = 0.0;

    bool diameter_ok(double d) const { return d >= pd_min && d <= pd_max; }
};

/// ec_max is the working-size diagonal, ec_min two thirds of it; the pupil diameter
/// range follows from 8 mm / 2 mm pupils against a 27.6 mm palpebral fissure.
SizeBounds compute_size_bounds(const WorkingConfig& cfg);

struct DetectorConfig {
    double curvature_ratio = curvature_threshold();
    double gamma_reject = 0.5;       // outline contrast below this invalidates a candidate
    double gamma_strong = 2.0 / 3.0;  // required of inner candidates during iris refinement
    double contrast_half_length = 0.25;  // per side, as a fraction of the minor axis length
    bool bright_pupil = false;
    int stride_deg = 10;
    CannyParams canny;
    MorphParams morph;
};

struct PupilCandidate {
    std::vector<Point2d> points;  // dominant points
    Ellipse ellipse;
    double rho = 0.0;    // aspect ratio b / a
    double theta = 0.0;  // angular spread
    double gamma = 0.0;  // outline contrast
    double psi = 0.0;    // confidence
};

enum class Rejection {
    TooFewPoints,
    DiameterOutOfBounds,
    TooStraight,
    FitFailed,
    CenterOutside,
    TooEccentric,
    BadFit,
};

std::string_view to_string(Rejection r);

using FilterResult = std::variant<PupilCandidate, Rejection>;

/// Selection heuristics over a set of dominant points, in order:
/// cardinality, diameter bounds, curvature (min-rect side ratio), ellipse fit with
/// centre-in-image and aspect checks, and the mean-in-axes-rhombus fit check.
/// On success the candidate carries its ellipse and rho; theta/gamma/psi are zero.
FilterResult filter_candidate(std::vector<Point2d> dominant, const SizeBounds& bounds,
                              const DetectorConfig& cfg, int width, int height);

/// Dominant-point approximation of seg followed by filter_candidate.
FilterResult filter_segment(const RawSegment& seg, const SizeBounds& bounds, const DetectorConfig& cfg,
                            int width, int height);

/// Fraction of the four axis-aligned quadrants around e's centre holding a point.
double angular_spread(std::span<const Point2d> pts, const Ellipse& e);

/// Fraction of outline samples whose inner half-segment is darker than the outer one
/// (brighter when cfg.bright_pupil). Samples whose segment leaves the image are not counted.
double outline_contrast(const GrayImage& img, const Ellipse& e, const DetectorConfig& cfg);

/// Zero when the major diameter violates the size bounds or gamma < cfg.gamma_reject,
/// otherwise the mean of rho, theta and gamma.
double confidence(const PupilCandidate& c, const SizeBounds& bounds, double gamma, const DetectorConfig& cfg);

/// Fills theta, gamma and psi of a candidate that passed filter_candidate.
void score_candidate(PupilCandidate& c, const GrayImage& img, const SizeBounds& bounds, const DetectorConfig& cfg);

struct BoundingSquare {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    bool intersects(const BoundingSquare& o) const {
        return std::max(x0, o.x0) <= std::min(x1, o.x1) && std::max(y0, o.y0) <= std::min(y1, o.y1);
    }
    bool contains(const BoundingSquare& o) const {
        return x0 <= o.x0 && y0 <= o.y0 && o.x1 <= x1 && o.y1 <= y1;
    }
};

/// Up-right square concentric with the bounding box of pts, side = longer box side.
BoundingSquare bounding_square(std::span<const Point2d> pts);

/// Pairwise merges (i < j, lexicographic) of candidates whose bounding squares intersect
/// without one containing the other. A merge is kept only if it passes the heuristics
/// and its gamma strictly exceeds both parents'.
std::vector<PupilCandidate> combine_segments(std::span<const PupilCandidate> candidates, const GrayImage& img,
                                             const SizeBounds& bounds, const DetectorConfig& cfg);

/// Index of the chosen pupil: highest psi (earliest on ties), then replaced by the best
/// roughly concentric inner candidate if one exists. nullopt when every psi is zero.
std::optional<std::size_t> select_pupil(std::span<const PupilCandidate> candidates, const DetectorConfig& cfg);

struct PupilResult {
    bool present = false;
    Point2d center{-1.0, -1.0};  // input image coordinates
    Ellipse ellipse;             // input image coordinates
    double confidence = 0.0;
};

/// Intermediate products of one detection, for diagnostics and tests.
struct DetectionTrace {
    double scale = 1.0;
    GrayImage working;  // downscaled and normalised
    SizeBounds bounds;
    EdgeMap edges;      // after morphological manipulation
    std::vector<RawSegment> segments;
    std::vector<PupilCandidate> candidates;  // segment candidates, then merged ones
    std::size_t segment_candidates = 0;
    std::optional<std::size_t> selected;
    PupilResult result;
};

DetectionTrace detect_traced(const GrayImage& img, const WorkingConfig& wcfg, const DetectorConfig& dcfg);

/// Full pipeline; never throws on a valid image. Absent result carries psi = 0.
PupilResult detect(const GrayImage& img, const WorkingConfig& wcfg = {}, const DetectorConfig& dcfg = {});

}  // namespace pure
