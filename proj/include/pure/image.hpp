#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pure {

/// 8-bit single-channel raster, row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }

    std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    /// Clamped access; coordinates outside the raster read the nearest border pixel.
    std::uint8_t clamped(int x, int y) const;

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::span<const std::uint8_t> pixels() const { return data_; }
    std::span<std::uint8_t> pixels() { return data_; }
    const std::uint8_t* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }
    std::uint8_t* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Target resolution the detector operates at.
struct WorkingConfig {
    int width = 320;
    int height = 240;
};

/// Scale that fits an input into the working size without upscaling.
double scale_factor(int input_width, int input_height, const WorkingConfig& cfg);

struct Downscaled {
    GrayImage image;
    double scale = 1.0;
};

/// Bilinear downscale into the working size, aspect ratio preserved.
/// Output pixel (u, v) samples the input at (u / s, v / s) with edge clamping, so
/// working-size coordinates map back to the input by division by s.
Downscaled downscale(const GrayImage& img, const WorkingConfig& cfg);

/// Linear min-max stretch to [0, 255], rounding half away from zero.
/// A constant image maps to all zeros.
GrayImage normalize_min_max(const GrayImage& img);

}  // namespace pure
