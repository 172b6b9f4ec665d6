#pragma once

#include "pure/image.hpp"

#include <cstdint>
#include <vector>

namespace pure {

/// Binary edge mask (0 = background, 1 = edge).
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), mask(static_cast<std::size_t>(w) * h, 0) {}

    bool get(int x, int y) const {
        return x >= 0 && y >= 0 && x < width && y < height &&
               mask[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set(int x, int y, bool on) { mask[static_cast<std::size_t>(y) * width + x] = on ? 1 : 0; }
    std::size_t count() const;
    /// Number of set pixels in the 8-neighbourhood of (x, y).
    int neighbors(int x, int y) const;

    friend bool operator==(const EdgeMap&, const EdgeMap&) = default;
};

struct CannyParams {
    int blur_kernel = 5;          // odd; 1 disables smoothing
    double blur_sigma = 1.25;
    double high_percentile = 0.70;  // of nonzero gradient magnitudes
    double low_ratio = 0.5;         // low = low_ratio * high
};

/// Gaussian smoothing, 3x3 Sobel gradients, non-maximum suppression and
/// hysteresis with percentile-adaptive thresholds.
EdgeMap detect_edges(const GrayImage& img, const CannyParams& params = {});

struct MorphParams {
    int corner_span = 4;                  // chain steps on each side of a corner test; 0 disables
    double corner_max_angle_deg = 125.0;  // sharper turns than this are candidates for a cut
    int straight_span = 0;                // a cut also needs one leg this long that is straight
    double straight_tolerance = 0.8;      // px from the leg's chord; straight_span 0 skips the check
};

/// Thins, straightens and breaks junctions so that every edge pixel has at most
/// two 8-neighbours and no 2x2 block is fully set.
///
/// Raster passes, top-left to bottom-right:
///   1. in place, a pixel is cleared when its neighbourhood stays 8-connected without
///      it and it either has three or more neighbours or is a staircase corner next
///      to such a pixel (thinning, straightening);
///   2. in place, a pixel still having three or more neighbours is a junction; it is
///      cleared together with its neighbours so that every branch comes loose;
///   3. on the result of pass 2, chain pixels where the curve turns sharply (legs of
///      corner_span steps meeting at less than corner_max_angle_deg) are cleared,
///      optionally only where one leg also runs straight for straight_span steps.
///      This separates connections such as an eyelid line meeting a contour.
/// Neighbour counts only decrease, so pass 2 alone guarantees the bound.
EdgeMap morph_manipulate(const EdgeMap& edges, const MorphParams& params = {});

struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Ordered 8-connected chain of edge pixels.
struct RawSegment {
    std::vector<Pixel> points;
    bool closed = false;
};

/// Traces every 8-connected component into an ordered chain. Open chains start at
/// their first endpoint in raster order; closed ones at their topmost-leftmost pixel.
/// Single-pixel components are dropped.
std::vector<RawSegment> extract_segments(const EdgeMap& edges);

}  // namespace pure
