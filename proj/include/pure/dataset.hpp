#pragma once

#include "pure/image.hpp"
#include "pure/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pure {

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Content is malformed or inconsistent. line is 1-based, 0 when not tied to a line.
struct FormatError : std::runtime_error {
    FormatError(const std::string& msg, int line = 0) : std::runtime_error(msg), line(line) {}
    int line;
};

/// Binary 8-bit PGM (P5). Comments in the header are accepted; maxval must be 255.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

/// PNG decoded to 8-bit gray (colour inputs are reduced by libpng's rgb-to-gray).
GrayImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayImage& img);

/// Dispatches on the extension (.pgm / .png).
GrayImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const GrayImage& img);

/// "000042.pgm" for (42, ".pgm").
std::string frame_filename(std::int64_t frame_id, const std::string& ext);

/// Rows `frame_id,x,y`; an optional header line; `-1,-1` marks a frame without pupil.
std::vector<GroundTruthFrame> parse_truth_csv(const std::string& text);
std::vector<GroundTruthFrame> read_truth_csv(const std::filesystem::path& path);
std::string format_truth_csv(std::span<const GroundTruthFrame> rows);
void write_truth_csv(const std::filesystem::path& path, std::span<const GroundTruthFrame> rows);

struct UseCaseFrame {
    std::filesystem::path image;
    GroundTruthFrame truth;
};

struct UseCase {
    std::string name;
    std::vector<UseCaseFrame> frames;  // strictly increasing frame_id
};

/// Reads `truth.csv` (or truth_file when given) and pairs each row with its image file.
/// Throws IoError when the directory or truth file is unreadable and FormatError on
/// malformed rows, duplicate ids, images without a row or rows without an image.
UseCase load_use_case(const std::filesystem::path& dir, const std::filesystem::path& truth_file = {});

/// Copies the frame images into dir under their canonical names and writes truth.csv.
void save_use_case(const std::filesystem::path& dir, const UseCase& uc);

struct ReflectionBlob {
    Point2d center;
    double radius = 0.0;
};

struct SynthSpec {
    int width = 640;
    int height = 480;
    Point2d pupil_center{320.0, 240.0};
    double pupil_a = 30.0;
    double pupil_b = 26.0;
    double pupil_angle = 0.0;  // radians, major axis from +x towards +y
    double iris_radius = 60.0;
    int pupil_intensity = 30;
    int iris_intensity = 110;
    int sclera_intensity = 200;
    int eyelid_intensity = 170;
    double occlusion = 0.0;  // fraction of the pupil height hidden from the top
    std::vector<ReflectionBlob> reflections;
    int reflection_intensity = 255;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;  // drives the noise only
};

struct SynthFrame {
    GrayImage image;
    GroundTruthFrame truth;
};

SynthFrame render_synthetic(const SynthSpec& spec, std::int64_t frame_id = 0);

enum class SynthProfile { Clean, Occluded, Hard, Negative };

SynthProfile parse_profile(const std::string& name);  // throws std::invalid_argument
std::string to_string(SynthProfile p);

struct SynthOptions {
    int width = 640;
    int height = 480;
    bool bright_pupil = false;  // pupil brighter than iris and sclera
};

/// Random spec drawn from a profile; the seed fully determines the result.
SynthSpec random_spec(SynthProfile profile, std::uint64_t seed, const SynthOptions& opt = {});

/// Specs for frame i = random_spec(profile, mix(seed, i)).
std::vector<SynthSpec> corpus_specs(SynthProfile profile, std::size_t count, std::uint64_t seed,
                                    const SynthOptions& opt = {});

}  // namespace pure
