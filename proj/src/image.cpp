#include "pure/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pure {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width < 0 || height < 0) throw std::invalid_argument("GrayImage: negative dimensions");
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) throw std::invalid_argument("GrayImage: negative dimensions");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("GrayImage: data length does not match width x height");
}

std::uint8_t GrayImage::clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y);
}

double scale_factor(int input_width, int input_height, const WorkingConfig& cfg) {
    const double sw = static_cast<double>(cfg.width) / input_width;
    const double sh = static_cast<double>(cfg.height) / input_height;
    return std::min({sw, sh, 1.0});
}

Downscaled downscale(const GrayImage& img, const WorkingConfig& cfg) {
    const double s = scale_factor(img.width(), img.height(), cfg);
    if (s >= 1.0) return {img, 1.0};

    const int out_w = std::max(1, static_cast<int>(std::lround(img.width() * s)));
    const int out_h = std::max(1, static_cast<int>(std::lround(img.height() * s)));
    GrayImage out(out_w, out_h);

    // Horizontal taps are identical for every row; precompute them.
    std::vector<int> x0(out_w), x1(out_w);
    std::vector<double> fx(out_w);
    for (int u = 0; u < out_w; ++u) {
        const double sx = std::min(u / s, static_cast<double>(img.width() - 1));
        x0[u] = static_cast<int>(sx);
        x1[u] = std::min(x0[u] + 1, img.width() - 1);
        fx[u] = sx - x0[u];
    }

    for (int v = 0; v < out_h; ++v) {
        const double sy = std::min(v / s, static_cast<double>(img.height() - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double fy = sy - y0;
        const std::uint8_t* r0 = img.row(y0);
        const std::uint8_t* r1 = img.row(y1);
        std::uint8_t* dst = out.row(v);
        for (int u = 0; u < out_w; ++u) {
            const double top = r0[x0[u]] + fx[u] * (r0[x1[u]] - r0[x0[u]]);
            const double bottom = r1[x0[u]] + fx[u] * (r1[x1[u]] - r1[x0[u]]);
            const double value = top + fy * (bottom - top);
            // value lies in [0, 255], so adding a half and truncating rounds half up.
            dst[u] = static_cast<std::uint8_t>(value + 0.5);
        }
    }
    return {std::move(out), s};
}

GrayImage normalize_min_max(const GrayImage& img) {
    const auto px = img.pixels();
    if (px.empty()) return img;
    const auto [lo_it, hi_it] = std::minmax_element(px.begin(), px.end());
    const int lo = *lo_it;
    const int hi = *hi_it;
    if (lo == hi) return GrayImage(img.width(), img.height(), 0);

    std::uint8_t lut[256] = {};
    for (int p = lo; p <= hi; ++p) {
        // std::lround rounds half away from zero.
        lut[p] = static_cast<std::uint8_t>(std::lround((p - lo) * 255.0 / (hi - lo)));
    }
    GrayImage out(img.width(), img.height());
    auto dst = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) dst[i] = lut[px[i]];
    return out;
}

}  // namespace pure
