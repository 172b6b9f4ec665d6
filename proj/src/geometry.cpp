#include "pure/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pure {

double Ellipse::implicit(const Point2d& p) const {
    const Point2d d = p - center;
    const double u = dot(d, major_dir()) / a;
    const double v = dot(d, minor_dir()) / b;
    return u * u + v * v - 1.0;
}

std::vector<Point2d> to_points(std::span<const Pixel> pixels) {
    std::vector<Point2d> out;
    out.reserve(pixels.size());
    for (const auto& p : pixels) out.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    return out;
}

// ---------------------------------------------------------------------------
// Dominant points

namespace {

constexpr double kSignificanceEps = 1e-9;

struct SupportPoint {
    int k = 0;              // region of support; 0 for open-curve endpoints
    double significance = 0.0;  // 1 + k-cosine, in [0, 2]; 0 means locally straight
};

}  // namespace

std::vector<Point2d> approximate_dominant_points(std::span<const Point2d> chain, bool closed) {
    const int n = static_cast<int>(chain.size());
    if (n <= 2) return {chain.begin(), chain.end()};

    auto at = [&](int i) -> const Point2d& { return chain[static_cast<std::size_t>(((i % n) + n) % n)]; };

    std::vector<SupportPoint> sp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int kmax = closed ? (n - 1) / 2 : std::min(i, n - 1 - i);
        if (kmax < 1) continue;

        // Pass 1: region of support.
        auto chord = [&](int k, double& len, double& dist) {
            const Point2d base = at(i + k) - at(i - k);
            len = norm(base);
            dist = len > 0.0 ? cross(base, at(i) - at(i - k)) / len : 0.0;
        };
        int k = 1;
        double lk = 0.0, dk = 0.0;
        chord(k, lk, dk);
        while (k < kmax) {
            if (lk <= 0.0 || dk == 0.0) break;
            double lk1 = 0.0, dk1 = 0.0;
            chord(k + 1, lk1, dk1);
            if (lk >= lk1) break;
            const double r = dk / lk, r1 = dk1 / lk1;
            if (dk > 0.0 ? r >= r1 : r <= r1) break;
            ++k;
            lk = lk1;
            dk = dk1;
        }
        sp[i].k = k;

        // k-cosine at the support boundary.
        if (dk != 0.0) {
            const Point2d fwd = at(i + k) - at(i);
            const Point2d bwd = at(i - k) - at(i);
            const double denom = norm(fwd) * norm(bwd);
            if (denom > 0.0) sp[i].significance = 1.0 + std::clamp(dot(fwd, bwd) / denom, -1.0, 1.0);
        }
    }

    // Pass 2: non-maximum suppression inside half the region of support.
    std::vector<char> keep(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        if (sp[i].k == 0) {
            keep[i] = 1;  // open-curve endpoint
            continue;
        }
        const double s = sp[i].significance;
        if (s <= kSignificanceEps) continue;
        bool maximal = true;
        for (int d = 1; d <= sp[i].k / 2 && maximal; ++d) {
            for (const int j : {i - d, i + d}) {
                if (!closed && (j < 0 || j >= n)) continue;
                const int jj = ((j % n) + n) % n;
                if (sp[jj].significance > s + kSignificanceEps) maximal = false;
            }
        }
        keep[i] = maximal ? 1 : 0;
    }

    // Pass 3: adjacent survivors with unit support compete; earlier wins ties.
    std::vector<char> final_keep = keep;
    for (int i = 0; i < n; ++i) {
        if (!keep[i] || sp[i].k != 1) continue;
        const double s = sp[i].significance;
        for (const int j : {i - 1, i + 1}) {
            if (!closed && (j < 0 || j >= n)) continue;
            const int jj = ((j % n) + n) % n;
            if (!keep[jj] || sp[jj].k == 0) continue;
            const double sj = sp[jj].significance;
            if (sj > s + kSignificanceEps || (std::abs(sj - s) <= kSignificanceEps && jj < i)) {
                final_keep[i] = 0;
            }
        }
    }

    std::vector<Point2d> out;
    for (int i = 0; i < n; ++i)
        if (final_keep[i]) out.push_back(chain[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<Point2d> approximate_dominant_points(const RawSegment& seg) {
    const auto pts = to_points(seg.points);
    return approximate_dominant_points(pts, seg.closed);
}

// ---------------------------------------------------------------------------
// Hull, diameter and minimum-area rectangle

double max_pairwise_distance(std::span<const Point2d> pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
            best = std::max(best, dx * dx + dy * dy);
        }
    return std::sqrt(best);
}

std::vector<Point2d> convex_hull(std::span<const Point2d> pts) {
    std::vector<Point2d> p(pts.begin(), pts.end());
    std::sort(p.begin(), p.end(), [](const Point2d& a, const Point2d& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return p;

    std::vector<Point2d> hull(2 * p.size());
    std::size_t k = 0;
    for (const auto& q : p) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], q - hull[k - 2]) <= 0) --k;
        hull[k++] = q;
    }
    for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = p[i];
    }
    hull.resize(k - 1);
    return hull;
}

MinRect min_area_rect(std::span<const Point2d> pts) {
    MinRect rect;
    if (pts.empty()) return rect;
    const auto hull = convex_hull(pts);
    if (hull.size() == 1) {
        rect.corners.fill(hull[0]);
        return rect;
    }
    if (hull.size() == 2) {
        rect.corners = {hull[0], hull[1], hull[1], hull[0]};
        rect.side_long = distance(hull[0], hull[1]);
        return rect;
    }

    const std::size_t h = hull.size();
    auto next = [h](std::size_t i) { return (i + 1) % h; };

    // Calipers: `far` is the vertex farthest from the current edge, `hi`/`lo` the
    // extreme vertices along the edge direction. All three only ever advance.
    std::size_t far = 1, hi = 1, lo = 0;
    double best_area = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < h; ++i) {
        const Point2d origin = hull[i];
        const Point2d edge = hull[next(i)] - origin;
        const double len = norm(edge);
        const Point2d u = edge * (1.0 / len);
        const Point2d nrm{-u.y, u.x};  // inward for a counter-clockwise hull

        while (dot(hull[next(hi)] - origin, u) > dot(hull[hi] - origin, u)) hi = next(hi);
        if (i == 0) far = hi;
        while (dot(hull[next(far)] - origin, nrm) > dot(hull[far] - origin, nrm)) far = next(far);
        if (i == 0) lo = far;
        while (dot(hull[next(lo)] - origin, u) < dot(hull[lo] - origin, u)) lo = next(lo);

        const double umax = dot(hull[hi] - origin, u);
        const double umin = dot(hull[lo] - origin, u);
        const double height = dot(hull[far] - origin, nrm);
        const double width = umax - umin;
        const double area = width * height;
        if (area < best_area) {
            best_area = area;
            rect.corners = {origin + u * umin, origin + u * umax, origin + u * umax + nrm * height,
                            origin + u * umin + nrm * height};
            rect.side_short = std::min(width, height);
            rect.side_long = std::max(width, height);
        }
    }
    return rect;
}

// ---------------------------------------------------------------------------
// Ellipse fitting

namespace {

struct Conic {
    double A, B, C, D, E, F;  // A x^2 + B xy + C y^2 + D x + E y + F = 0
};

std::optional<Ellipse> conic_to_ellipse(const Conic& q) {
    const double det = 4.0 * q.A * q.C - q.B * q.B;
    if (!(det > 0.0)) return std::nullopt;
    const double x0 = (q.B * q.E - 2.0 * q.C * q.D) / det;
    const double y0 = (q.B * q.D - 2.0 * q.A * q.E) / det;
    const double f0 = q.F + 0.5 * (q.D * x0 + q.E * y0);

    Eigen::Matrix2d m;
    m << q.A, 0.5 * q.B, 0.5 * q.B, q.C;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    const Eigen::Vector2d lambda = es.eigenvalues();
    const double s0 = -f0 / lambda(0);
    const double s1 = -f0 / lambda(1);
    if (!(s0 > 0.0) || !(s1 > 0.0)) return std::nullopt;

    // Major axis belongs to the eigenvalue of smaller magnitude.
    const int major = std::abs(lambda(0)) <= std::abs(lambda(1)) ? 0 : 1;
    const Eigen::Vector2d dir = es.eigenvectors().col(major);

    Ellipse e;
    e.center = {x0, y0};
    e.a = std::sqrt(major == 0 ? s0 : s1);
    e.b = std::sqrt(major == 0 ? s1 : s0);
    double angle = std::atan2(dir(1), dir(0));
    angle = std::fmod(angle, std::numbers::pi);
    if (angle < 0.0) angle += std::numbers::pi;
    if (angle >= std::numbers::pi) angle -= std::numbers::pi;
    e.angle = angle;
    if (!std::isfinite(e.a) || !std::isfinite(e.b) || !(e.b > 0.0)) return std::nullopt;
    return e;
}

}  // namespace

std::optional<Ellipse> fit_ellipse(std::span<const Point2d> pts) {
    const std::size_t n = pts.size();
    if (n < 5) return std::nullopt;

    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double spread = 0.0;
    for (const auto& p : pts) spread = std::max({spread, std::abs(p.x - mx), std::abs(p.y - my)});
    if (!(spread > 0.0)) return std::nullopt;

    Eigen::Matrix<double, Eigen::Dynamic, 3> d1(n, 3), d2(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (pts[i].x - mx) / spread;
        const double y = (pts[i].y - my) / spread;
        const auto r = static_cast<Eigen::Index>(i);
        d1.row(r) << x * x, x * y, y * y;
        d2.row(r) << x, y, 1.0;
    }
    const Eigen::Matrix3d s1 = d1.transpose() * d1;
    const Eigen::Matrix3d s2 = d1.transpose() * d2;
    const Eigen::Matrix3d s3 = d2.transpose() * d2;

    Eigen::FullPivLU<Eigen::Matrix3d> lu(s3);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::Matrix3d t = -lu.solve(s2.transpose());
    const Eigen::Matrix3d m = s1 + s2 * t;

    // Premultiply by the inverse of the quadratic-part constraint matrix.
    Eigen::Matrix3d reduced;
    reduced.row(0) = m.row(2) / 2.0;
    reduced.row(1) = -m.row(1);
    reduced.row(2) = m.row(0) / 2.0;

    const Eigen::EigenSolver<Eigen::Matrix3d> es(reduced);
    if (es.info() != Eigen::Success) return std::nullopt;

    std::optional<Eigen::Vector3d> best;
    double best_eval = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3d v = es.eigenvectors().col(k).real();
        const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
        if (!(cond > 0.0)) continue;
        const double ev = std::abs(es.eigenvalues()(k).real());
        if (ev < best_eval) {
            best_eval = ev;
            best = v;
        }
    }
    if (!best) return std::nullopt;

    const Eigen::Vector3d a1 = *best;
    const Eigen::Vector3d a2 = t * a1;
    auto e = conic_to_ellipse({a1(0), a1(1), a1(2), a2(0), a2(1), a2(2)});
    if (!e) return std::nullopt;

    e->center = {mx + e->center.x * spread, my + e->center.y * spread};
    e->a *= spread;
    e->b *= spread;
    return e;
}

bool mean_in_axes_rhombus(std::span<const Point2d> pts, const Ellipse& e) {
    if (pts.empty()) return false;
    Point2d mean;
    for (const auto& p : pts) mean = mean + p;
    mean = mean * (1.0 / static_cast<double>(pts.size()));
    const Point2d d = mean - e.center;
    // In the ellipse frame the axis-endpoint quadrilateral is |u|/a + |v|/b <= 1.
    const double u = std::abs(dot(d, e.major_dir())) / e.a;
    const double v = std::abs(dot(d, e.minor_dir())) / e.b;
    return u + v <= 1.0 + 1e-9;
}

std::vector<Point2d> sample_outline(const Ellipse& e, int stride_deg) {
    if (stride_deg <= 0 || 360 % stride_deg != 0)
        throw std::invalid_argument("sample_outline: stride must divide 360");
    const int n = 360 / stride_deg;
    const Point2d u = e.major_dir();
    const Point2d v = e.minor_dir();
    std::vector<Point2d> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double t = k * stride_deg * std::numbers::pi / 180.0;
        out.push_back(e.center + u * (e.a * std::cos(t)) + v * (e.b * std::sin(t)));
    }
    return out;
}

}  // namespace pure
