#pragma once

#include "pure/edges.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace pure {

struct Point2d {
    double x = 0.0;
    double y = 0.0;

    Point2d operator+(const Point2d& o) const { return {x + o.x, y + o.y}; }
    Point2d operator-(const Point2d& o) const { return {x - o.x, y - o.y}; }
    Point2d operator*(double s) const { return {x * s, y * s}; }
    friend bool operator==(const Point2d&, const Point2d&) = default;
};

inline double dot(const Point2d& a, const Point2d& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2d& a, const Point2d& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Point2d& a) { return std::hypot(a.x, a.y); }
inline double distance(const Point2d& a, const Point2d& b) { return norm(a - b); }

/// Ellipse in centre / semi-axes / orientation form.
/// Invariant: a >= b > 0, angle of the major axis in [0, pi).
struct Ellipse {
    Point2d center;
    double a = 0.0;
    double b = 0.0;
    double angle = 0.0;

    Point2d major_dir() const { return {std::cos(angle), std::sin(angle)}; }
    Point2d minor_dir() const { return {-std::sin(angle), std::cos(angle)}; }
    double aspect_ratio() const { return b / a; }
    /// Implicit value ((p·u)/a)^2 + ((p·v)/b)^2 - 1; zero on the outline.
    double implicit(const Point2d& p) const;
};

struct MinRect {
    std::array<Point2d, 4> corners{};
    double side_short = 0.0;
    double side_long = 0.0;

    double area() const { return side_short * side_long; }
};

std::vector<Point2d> to_points(std::span<const Pixel> pixels);

/// Dominant points of a digital curve via Teh-Chin chain approximation with the
/// k-cosine significance measure. Three passes:
///   1. region of support k_i from chord length / perpendicular distance ratios;
///   2. non-maximum suppression of significance within +-k_i/2;
///   3. among neighbouring survivors with unit support, only the most significant
///      (earlier on ties) is kept.
/// Points with zero curvature over their support are never dominant. Open curves keep
/// both endpoints.
std::vector<Point2d> approximate_dominant_points(std::span<const Point2d> chain, bool closed);
std::vector<Point2d> approximate_dominant_points(const RawSegment& seg);

/// Largest distance between any two points ("segment diameter").
double max_pairwise_distance(std::span<const Point2d> pts);

/// Convex hull, counter-clockwise, collinear points removed.
std::vector<Point2d> convex_hull(std::span<const Point2d> pts);

/// Minimum-area enclosing rectangle via rotating calipers over the convex hull.
/// Degenerate inputs give side_short = 0.
MinRect min_area_rect(std::span<const Point2d> pts);

/// Direct least-squares ellipse fit (ellipse-specific constraint 4ac - b^2 = 1),
/// solved in the numerically stable partitioned form on centred, scaled data.
/// Returns nullopt when the system is singular or the best conic is not an ellipse.
std::optional<Ellipse> fit_ellipse(std::span<const Point2d> pts);

/// True iff the mean of pts lies in the quadrilateral spanned by the four axis
/// endpoints of e (boundary inclusive).
bool mean_in_axes_rhombus(std::span<const Point2d> pts, const Ellipse& e);

/// 360 / stride_deg points from the parametric form, starting on the major axis.
/// Throws std::invalid_argument unless stride_deg divides 360.
std::vector<Point2d> sample_outline(const Ellipse& e, int stride_deg);

}  // namespace pure
