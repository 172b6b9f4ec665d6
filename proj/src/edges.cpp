#include "pure/edges.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <memory>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>

namespace pure {

namespace {

// Clockwise ring starting at the top-left neighbour.
constexpr std::array<int, 8> kRingDx = {-1, 0, 1, 1, 1, 0, -1, -1};
constexpr std::array<int, 8> kRingDy = {-1, -1, -1, 0, 1, 1, 1, 0};

// For each 8-bit ring occupancy, the number of 8-connected groups the set ring
// cells form among themselves (the centre pixel excluded).
std::array<std::uint8_t, 256> build_ring_components() {
    std::array<std::uint8_t, 256> table{};
    for (int m = 0; m < 256; ++m) {
        std::array<int, 8> parent{};
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int i) {
            while (parent[i] != i) i = parent[i] = parent[parent[i]];
            return i;
        };
        for (int i = 0; i < 8; ++i) {
            if (!(m >> i & 1)) continue;
            for (int j = i + 1; j < 8; ++j) {
                if (!(m >> j & 1)) continue;
                if (std::abs(kRingDx[i] - kRingDx[j]) <= 1 && std::abs(kRingDy[i] - kRingDy[j]) <= 1)
                    parent[find(i)] = find(j);
            }
        }
        int groups = 0;
        for (int i = 0; i < 8; ++i)
            if ((m >> i & 1) && find(i) == i) ++groups;
        table[m] = static_cast<std::uint8_t>(groups);
    }
    return table;
}

// Exactly one side neighbour together with both diagonals flanking it.
bool is_arm_tip(int m) {
    for (int k = 1; k < 8; k += 2) {
        if (m == ((1 << (k - 1)) | (1 << k) | (1 << ((k + 1) % 8)))) return true;
    }
    return false;
}

const std::array<std::uint8_t, 256>& ring_components() {
    static const auto table = build_ring_components();
    return table;
}

std::vector<float> gaussian_kernel(int size, double sigma) {
    std::vector<float> k(size);
    const int r = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - r;
        k[i] = static_cast<float>(std::exp(-d * d / (2.0 * sigma * sigma)));
        sum += k[i];
    }
    for (auto& v : k) v = static_cast<float>(v / sum);
    return k;
}

// Separable convolution with replicated borders.
std::vector<float> blur(const GrayImage& img, int size, double sigma) {
    const int w = img.width(), h = img.height();
    std::vector<float> out(static_cast<std::size_t>(w) * h);
    if (size <= 1 || sigma <= 0.0) {
        std::copy(img.pixels().begin(), img.pixels().end(), out.begin());
        return out;
    }
    const auto k = gaussian_kernel(size, sigma);
    const int r = size / 2;
    std::vector<float> tmp(out.size());
    std::vector<float> line(static_cast<std::size_t>(w) + 2 * r);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = img.row(y);
        std::fill(line.begin(), line.begin() + r, static_cast<float>(src[0]));
        std::copy(src, src + w, line.begin() + r);
        std::fill(line.begin() + r + w, line.end(), static_cast<float>(src[w - 1]));
        float* dst = tmp.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) dst[x] = k[0] * line[x];
        for (int i = 1; i < size; ++i)
            for (int x = 0; x < w; ++x) dst[x] += k[i] * line[x + i];
    }
    std::vector<const float*> rows(size);
    for (int y = 0; y < h; ++y) {
        for (int i = 0; i < size; ++i)
            rows[i] = tmp.data() + static_cast<std::size_t>(std::clamp(y + i - r, 0, h - 1)) * w;
        float* dst = out.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) dst[x] = k[0] * rows[0][x];
        for (int i = 1; i < size; ++i)
            for (int x = 0; x < w; ++x) dst[x] += k[i] * rows[i][x];
    }
    return out;
}

// A copy of a w x h plane with a one pixel frame, so 3x3 neighbourhoods need no checks.
template <typename T>
struct Framed {
    Framed(int w, int h) : stride(w + 2), data(static_cast<std::size_t>(w + 2) * (h + 2), T{}) {}
    std::size_t at(int x, int y) const { return static_cast<std::size_t>(y + 1) * stride + (x + 1); }
    int stride;
    std::vector<T> data;
};

// The rank-th smallest of non-negative floats. Their bit patterns sort like the
// values, so a histogram over the high bits narrows the search to one bucket.
float select_rank(const std::vector<float>& v, std::size_t rank) {
    constexpr int kShift = 20;
    std::vector<std::uint32_t> hist(std::size_t{1} << (32 - kShift), 0);
    for (const float f : v) ++hist[std::bit_cast<std::uint32_t>(f) >> kShift];
    std::uint32_t bucket = 0;
    std::size_t below = 0;
    while (below + hist[bucket] <= rank) below += hist[bucket++];
    std::vector<float> in_bucket;
    in_bucket.reserve(hist[bucket]);
    for (const float f : v)
        if (std::bit_cast<std::uint32_t>(f) >> kShift == bucket) in_bucket.push_back(f);
    const auto nth = in_bucket.begin() + static_cast<std::ptrdiff_t>(rank - below);
    std::nth_element(in_bucket.begin(), nth, in_bucket.end());
    return *nth;
}

}  // namespace

std::size_t EdgeMap::count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

int EdgeMap::neighbors(int x, int y) const {
    int n = 0;
    for (int i = 0; i < 8; ++i) n += get(x + kRingDx[i], y + kRingDy[i]) ? 1 : 0;
    return n;
}

EdgeMap detect_edges(const GrayImage& img, const CannyParams& params) {
    const int w = img.width(), h = img.height();
    EdgeMap edges(w, h);
    if (w == 0 || h == 0) return edges;

    const auto smooth = blur(img, params.blur_kernel, params.blur_sigma);
    Framed<float> sm(w, h);
    for (int y = -1; y <= h; ++y) {
        const float* src = smooth.data() + static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w;
        float* dst = sm.data.data() + sm.at(0, y);
        std::copy(src, src + w, dst);
        dst[-1] = src[0];
        dst[w] = src[w - 1];
    }

    const std::size_t n = smooth.size();
    const auto gx = std::make_unique_for_overwrite<float[]>(n);
    const auto gy = std::make_unique_for_overwrite<float[]>(n);
    Framed<float> mag(w, h);  // zero on the frame
    const std::ptrdiff_t ss = sm.stride;
    for (int y = 0; y < h; ++y) {
        const float* c = sm.data.data() + sm.at(0, y);
        float* rx = gx.get() + static_cast<std::size_t>(y) * w;
        float* ry = gy.get() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            rx[x] = (c[x + 1 - ss] + 2.f * c[x + 1] + c[x + 1 + ss]) - (c[x - 1 - ss] + 2.f * c[x - 1] + c[x - 1 + ss]);
            ry[x] = (c[x - 1 + ss] + 2.f * c[x + ss] + c[x + 1 + ss]) - (c[x - 1 - ss] + 2.f * c[x - ss] + c[x + 1 - ss]);
        }
        float* mrow = mag.data.data() + mag.at(0, y);
        for (int x = 0; x < w; ++x) mrow[x] = std::sqrt(rx[x] * rx[x] + ry[x] * ry[x]);
    }

    // Ignore float dust left by the smoothing of flat regions.
    std::vector<float> nonzero(n);
    std::size_t nonzero_count = 0;
    for (int y = 0; y < h; ++y) {
        const float* mrow = mag.data.data() + mag.at(0, y);
        for (int x = 0; x < w; ++x) {
            nonzero[nonzero_count] = mrow[x];
            nonzero_count += mrow[x] > 1e-3f;
        }
    }
    nonzero.resize(nonzero_count);
    if (nonzero.empty()) return edges;

    const std::size_t rank = std::min(
        nonzero.size() - 1,
        static_cast<std::size_t>(std::ceil(params.high_percentile * static_cast<double>(nonzero.size()))) - 1);
    const float high = select_rank(nonzero, rank);
    const float low = static_cast<float>(params.low_ratio) * high;

    // 0 = suppressed, 1 = weak, 2 = strong; the frame stays 0
    Framed<std::uint8_t> kind(w, h);
    constexpr float kTan22 = 0.41421356f;
    constexpr float kTan67 = 2.41421356f;
    const std::ptrdiff_t ms = mag.stride;
    // Neighbour offsets across the edge: horizontal, vertical, falling and rising diagonal.
    const std::array<std::ptrdiff_t, 4> across = {1, ms, ms + 1, ms - 1};
    for (int y = 0; y < h; ++y) {
        const float* m = mag.data.data() + mag.at(0, y);
        std::uint8_t* out = kind.data.data() + kind.at(0, y);
        const float* rx = gx.get() + static_cast<std::size_t>(y) * w;
        const float* ry = gy.get() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            // Written without branches: on noisy images they are unpredictable.
            const float v = m[x];
            const float ax = std::abs(rx[x]), ay = std::abs(ry[x]);
            const int steep = !(ay < kTan22 * ax);
            const int vertical = ay > kTan67 * ax;
            const int falling = (rx[x] > 0) == (ry[x] > 0);
            const int dir = steep * (vertical + (1 - vertical) * (3 - falling));
            const std::ptrdiff_t o = across[dir];
            // Strict on one side, non-strict on the other, so plateaus yield a single line.
            const bool peak = (v >= low) & (v > 1e-3f) & (v > m[x - o]) & (v >= m[x + o]);
            out[x] = static_cast<std::uint8_t>(peak * (1 + (v >= high)));
        }
    }

    const std::ptrdiff_t ks = kind.stride;
    const std::array<std::ptrdiff_t, 8> ring = {-ks - 1, -ks, -ks + 1, 1, ks + 1, ks, ks - 1, -1};
    std::vector<std::ptrdiff_t> stack;
    std::uint8_t* kd = kind.data.data();
    // Accepted pixels are marked 3 in place.
    for (int y = 0; y < h; ++y) {
        for (std::ptrdiff_t i = kind.at(0, y), end = i + w; i < end; ++i) {
            if (kd[i] != 2) continue;
            kd[i] = 3;
            stack.push_back(i);
            while (!stack.empty()) {
                const std::ptrdiff_t cur = stack.back();
                stack.pop_back();
                for (const auto o : ring) {
                    const std::ptrdiff_t j = cur + o;
                    if (kd[j] == 1 || kd[j] == 2) {
                        kd[j] = 3;
                        stack.push_back(j);
                    }
                }
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = kd + kind.at(0, y);
        std::uint8_t* dst = edges.mask.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) dst[x] = src[x] == 3;
    }
    return edges;
}

namespace {

// Set-bit counts of 8-bit ring masks; std::popcount is a library call without -mpopcnt.
constexpr auto kBitCount = [] {
    std::array<std::uint8_t, 256> t{};
    for (int m = 0; m < 256; ++m) t[m] = static_cast<std::uint8_t>(std::popcount(static_cast<unsigned>(m)));
    return t;
}();

/// Binary map with a cleared one pixel frame, addressed by flat index.
struct FramedMask {
    explicit FramedMask(const EdgeMap& e) : grid(e.width, e.height) {
        for (int y = 0; y < e.height; ++y)
            std::copy_n(e.mask.begin() + static_cast<std::ptrdiff_t>(y) * e.width, e.width,
                        grid.data.begin() + static_cast<std::ptrdiff_t>(grid.at(0, y)));
        const std::ptrdiff_t s = grid.stride;
        for (int k = 0; k < 8; ++k) ring[k] = kRingDy[k] * s + kRingDx[k];
    }
    void store(EdgeMap& e) const {
        for (int y = 0; y < e.height; ++y)
            std::copy_n(grid.data.begin() + static_cast<std::ptrdiff_t>(grid.at(0, y)), e.width,
                        e.mask.begin() + static_cast<std::ptrdiff_t>(y) * e.width);
    }
    int mask(std::ptrdiff_t i) const {
        const std::uint8_t* p = grid.data.data() + i;
        int m = 0;
        for (int k = 0; k < 8; ++k) m |= p[ring[k]] << k;
        return m;
    }
    int neighbors(std::ptrdiff_t i) const { return kBitCount[mask(i)]; }
    Pixel pixel(std::ptrdiff_t i) const {
        return {static_cast<int>(i % grid.stride), static_cast<int>(i / grid.stride)};
    }

    Framed<std::uint8_t> grid;
    std::array<std::ptrdiff_t, 8> ring{};
};

/// Follows a chain from pixel i through ring cell k0 for up to `steps` pixels.
void walk_chain(const FramedMask& e, std::ptrdiff_t i, int k0, int steps, std::vector<std::ptrdiff_t>& out) {
    out.clear();
    const std::uint8_t* g = e.grid.data.data();
    std::ptrdiff_t prev = i, cur = i + e.ring[k0];
    out.push_back(cur);
    while (static_cast<int>(out.size()) < steps) {
        bool advanced = false;
        for (const auto o : e.ring) {
            const std::ptrdiff_t n = cur + o;
            if (!g[n] || n == prev || n == i) continue;
            prev = cur;
            cur = n;
            advanced = true;
            break;
        }
        if (!advanced) return;
        out.push_back(cur);
    }
}

/// True when leg[skip..len) lies within tol of the line through its end points. The
/// first pixels are skipped because the smoothing rounds off every corner.
bool straight_leg(const FramedMask& e, const std::vector<std::ptrdiff_t>& chain, std::size_t len, double tol) {
    constexpr std::size_t skip = 2;
    if (chain.size() < len || len < skip + 2) return false;
    std::vector<Pixel> leg(len);
    for (std::size_t i = 0; i < len; ++i) leg[i] = e.pixel(chain[i]);
    const Pixel& p = leg[skip];
    const double dx = leg[len - 1].x - p.x, dy = leg[len - 1].y - p.y;
    const double n = std::hypot(dx, dy);
    for (std::size_t i = skip + 1; i + 1 < len; ++i) {
        if (std::abs((leg[i].x - p.x) * dy - (leg[i].y - p.y) * dx) > tol * n) return false;
    }
    return true;
}

void break_corners(FramedMask& e, int width, int height, const MorphParams& params) {
    if (params.corner_span <= 0) return;
    const double max_cos = std::cos(params.corner_max_angle_deg * std::numbers::pi / 180.0);
    const int span = params.corner_span;
    const int reach = std::max(span, params.straight_span);
    std::uint8_t* g = e.grid.data.data();
    std::vector<std::ptrdiff_t> cut;
    std::vector<std::ptrdiff_t> a, b;
    for (int y = 0; y < height; ++y) {
        for (std::ptrdiff_t i = e.grid.at(0, y), end = i + width; i < end; ++i) {
            if (!g[i]) continue;
            const int m = e.mask(i);
            if (kBitCount[m] != 2) continue;
            const int k0 = std::countr_zero(static_cast<unsigned>(m));
            const int k1 = std::countr_zero(static_cast<unsigned>(m >> (k0 + 1))) + k0 + 1;
            walk_chain(e, i, k0, reach, a);
            walk_chain(e, i, k1, reach, b);
            if (static_cast<int>(a.size()) < span || static_cast<int>(b.size()) < span) continue;
            if (a[span - 1] == b[span - 1]) continue;
            const Pixel pa = e.pixel(a[span - 1]);
            const Pixel pb = e.pixel(b[span - 1]);
            const Pixel c = e.pixel(i);
            const double ax = pa.x - c.x, ay = pa.y - c.y, bx = pb.x - c.x, by = pb.y - c.y;
            const double cs = (ax * bx + ay * by) / std::sqrt((ax * ax + ay * ay) * (bx * bx + by * by));
            if (cs <= max_cos) continue;
            // A sharp turn on a smooth curve (a small ellipse's vertex) bends both legs;
            // an orthogonal connection has at least one straight leg.
            const auto len = static_cast<std::size_t>(params.straight_span);
            if (len > 0 && !straight_leg(e, a, len, params.straight_tolerance) &&
                !straight_leg(e, b, len, params.straight_tolerance))
                continue;
            cut.push_back(i);
        }
    }
    for (const auto i : cut) g[i] = 0;
}

}  // namespace

EdgeMap morph_manipulate(const EdgeMap& input, const MorphParams& params) {
    FramedMask e(input);
    const auto& groups = ring_components();
    std::uint8_t* g = e.grid.data.data();
    const int w = input.width, h = input.height;

    for (int y = 0; y < h; ++y) {
        for (std::ptrdiff_t i = e.grid.at(0, y), end = i + w; i < end; ++i) {
            if (!g[i]) continue;
            const int m = e.mask(i);
            if (groups[m] != 1) continue;
            const int count = kBitCount[m];
            // The tip of a 4-connected arm (one side neighbour and its two flanking
            // diagonals) belongs to a junction; pass 2 handles it.
            if (count == 3 && is_arm_tip(m)) continue;
            if (count >= 3) {
                g[i] = 0;
                continue;
            }
            // A staircase corner: its two neighbours touch each other, and one of them
            // would otherwise look like a junction to the second pass.
            if (count == 2) {
                for (int k = 0; k < 8; ++k) {
                    if ((m >> k & 1) && e.neighbors(i + e.ring[k]) >= 3) {
                        g[i] = 0;
                        break;
                    }
                }
            }
        }
    }
    for (int y = 0; y < h; ++y) {
        for (std::ptrdiff_t i = e.grid.at(0, y), end = i + w; i < end; ++i) {
            if (!g[i] || e.neighbors(i) < 3) continue;
            // Clearing the whole neighbourhood detaches every branch, not just one.
            g[i] = 0;
            for (const auto o : e.ring) g[i + o] = 0;
        }
    }
    break_corners(e, w, h, params);
    EdgeMap out(w, h);
    e.store(out);
    return out;
}

std::vector<RawSegment> extract_segments(const EdgeMap& edges) {
    std::vector<RawSegment> segments;
    const FramedMask e(edges);
    const std::uint8_t* g = e.grid.data.data();
    // 1 = queued for the current component's gather, 2 = already traced.
    std::vector<std::uint8_t> state(e.grid.data.size(), 0);
    auto open_neighbors = [&](std::ptrdiff_t i) {
        int n = 0;
        for (const auto o : e.ring) n += g[i + o] && state[i + o] != 2;
        return n;
    };

    std::vector<std::ptrdiff_t> component;
    for (int y = 0; y < edges.height; ++y) {
        for (std::ptrdiff_t i0 = e.grid.at(0, y), end = i0 + edges.width; i0 < end; ++i0) {
            if (!g[i0] || state[i0]) continue;

            // Gather the component; BFS order is irrelevant, raster order is restored below.
            component.clear();
            component.push_back(i0);
            state[i0] = 1;
            for (std::size_t head = 0; head < component.size(); ++head) {
                for (const auto o : e.ring) {
                    const std::ptrdiff_t j = component[head] + o;
                    if (g[j] && !state[j]) {
                        state[j] = 1;
                        component.push_back(j);
                    }
                }
            }
            std::sort(component.begin(), component.end());

            // Normally one trace covers the component; the loop keeps the output a
            // partition even for maps that violate the thinness invariants.
            for (;;) {
                std::ptrdiff_t start = -1;
                bool has_endpoint = false;
                for (const auto i : component) {
                    if (state[i] == 2) continue;
                    if (start < 0) start = i;
                    if (open_neighbors(i) <= 1) {
                        start = i;
                        has_endpoint = true;
                        break;
                    }
                }
                if (start < 0) break;

                RawSegment seg;
                seg.points.reserve(component.size());
                std::ptrdiff_t cur = start;
                state[cur] = 2;
                seg.points.push_back(e.pixel(cur));
                for (;;) {
                    bool moved = false;
                    for (int k = 0; k < 8 && !moved; ++k) {
                        const std::ptrdiff_t j = cur + e.ring[k];
                        if (g[j] && state[j] != 2) {
                            cur = j;
                            state[j] = 2;
                            seg.points.push_back(e.pixel(cur));
                            moved = true;
                        }
                    }
                    if (!moved) break;
                }
                if (seg.points.size() < 2) continue;
                for (auto& p : seg.points) {
                    --p.x;
                    --p.y;
                }
                const Pixel& first = seg.points.front();
                const Pixel& last = seg.points.back();
                seg.closed = !has_endpoint && seg.points.size() >= 3 &&
                             std::abs(first.x - last.x) <= 1 && std::abs(first.y - last.y) <= 1;
                segments.push_back(std::move(seg));
            }
        }
    }
    return segments;
}

}  // namespace pure
