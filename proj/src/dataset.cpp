#include "pure/dataset.hpp"

#include "rng.hpp"

#include <png.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>

namespace pure {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("cannot read " + path.string());
    return bytes;
}

void write_bytes(const fs::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("cannot write " + path.string());
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

GrayImage read_pgm(const fs::path& path) {
    const auto bytes = read_bytes(path);
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) { return FormatError(path.string() + ": " + what); };

    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto number = [&]() -> long {
        skip_space();
        long v = 0;
        std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1 << 24) throw fail("header value too large");
            ++pos;
        }
        if (pos == start) throw fail("bad PGM header");
        return v;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw fail("not a binary PGM (P5)");
    pos = 2;
    const long w = number(), h = number(), maxval = number();
    if (maxval != 255) throw fail("only 8-bit PGM is supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("bad PGM header");
    ++pos;
    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - pos < n) throw fail("truncated pixel data");
    return GrayImage(static_cast<int>(w), static_cast<int>(h),
                     std::vector<std::uint8_t>(bytes.begin() + static_cast<long>(pos),
                                               bytes.begin() + static_cast<long>(pos + n)));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

void write_pgm(const fs::path& path, const GrayImage& img) {
    const auto bytes = encode_pgm(img);
    write_bytes(path, bytes.data(), bytes.size());
}

GrayImage read_png(const fs::path& path) {
    const auto bytes = read_bytes(path);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw FormatError(path.string() + ": " + image.message);
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw FormatError(path.string() + ": " + msg);
    }
    return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

void write_png(const fs::path& path, const GrayImage& img) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(image, size, 0, img.pixels().data(), 0, nullptr))
        throw IoError(path.string() + ": " + image.message);
    std::vector<std::uint8_t> buf(size);
    if (!png_image_write_to_memory(&image, buf.data(), &size, 0, img.pixels().data(), 0, nullptr))
        throw IoError(path.string() + ": " + image.message);
    write_bytes(path, buf.data(), size);
}

GrayImage read_image(const fs::path& path) {
    const auto ext = lower(path.extension().string());
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png(path);
    throw FormatError(path.string() + ": unsupported image extension");
}

void write_image(const fs::path& path, const GrayImage& img) {
    const auto ext = lower(path.extension().string());
    if (ext == ".pgm") return write_pgm(path, img);
    if (ext == ".png") return write_png(path, img);
    throw FormatError(path.string() + ": unsupported image extension");
}

std::string frame_filename(std::int64_t frame_id, const std::string& ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06lld", static_cast<long long>(frame_id));
    return buf + ext;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::vector<GroundTruthFrame> parse_truth_csv(const std::string& text) {
    std::vector<GroundTruthFrame> rows;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool seen_content = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = trim(raw);
        if (line == 1 && s.starts_with("\xEF\xBB\xBF")) s = trim(s.substr(3));
        if (s.empty()) continue;

        std::string_view fields[3];
        int n = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = s.find(',', start);
            if (n < 3) fields[n] = s.substr(start, comma == std::string_view::npos ? s.npos : comma - start);
            ++n;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }

        GroundTruthFrame row;
        double x = 0.0, y = 0.0;
        const bool ok = n == 3 && parse_number(fields[0], row.frame_id) && parse_number(fields[1], x) &&
                        parse_number(fields[2], y);
        if (!ok) {
            const bool header = !seen_content && std::any_of(s.begin(), s.end(), [](char c) {
                return std::isalpha(static_cast<unsigned char>(c));
            });
            seen_content = true;
            if (header) continue;
            throw FormatError("truth.csv line " + std::to_string(line) + ": expected frame_id,x,y", line);
        }
        seen_content = true;
        if (row.frame_id < 0)
            throw FormatError("truth.csv line " + std::to_string(line) + ": negative frame id", line);
        if (!std::isfinite(x) || !std::isfinite(y))
            throw FormatError("truth.csv line " + std::to_string(line) + ": non-finite coordinate", line);
        if (x == -1.0 && y == -1.0) {
            row.pupil_present = false;
            row.center = {-1.0, -1.0};
        } else if (x < 0.0 || y < 0.0) {
            throw FormatError("truth.csv line " + std::to_string(line) + ": negative coordinate", line);
        } else {
            row.pupil_present = true;
            row.center = {x, y};
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<GroundTruthFrame> read_truth_csv(const fs::path& path) {
    const auto bytes = read_bytes(path);
    return parse_truth_csv(std::string(bytes.begin(), bytes.end()));
}

std::string format_truth_csv(std::span<const GroundTruthFrame> rows) {
    std::string out = "frame_id,x,y\n";
    for (const auto& r : rows) {
        out += std::to_string(r.frame_id);
        if (r.pupil_present)
            out += "," + format_double(r.center.x) + "," + format_double(r.center.y) + "\n";
        else
            out += ",-1,-1\n";
    }
    return out;
}

void write_truth_csv(const fs::path& path, std::span<const GroundTruthFrame> rows) {
    const auto text = format_truth_csv(rows);
    write_bytes(path, text.data(), text.size());
}

UseCase load_use_case(const fs::path& dir, const fs::path& truth_file) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());

    std::map<std::int64_t, fs::path> images;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = lower(entry.path().extension().string());
        if (ext != ".pgm" && ext != ".png") continue;
        const auto stem = entry.path().stem().string();
        std::int64_t id = 0;
        if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
            !parse_number(stem, id))
            continue;
        if (!images.emplace(id, entry.path()).second)
            throw FormatError("frame " + std::to_string(id) + ": more than one image file");
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());

    const fs::path truth_path = truth_file.empty() ? dir / "truth.csv" : truth_file;
    auto rows = read_truth_csv(truth_path);
    std::sort(rows.begin(), rows.end(),
              [](const GroundTruthFrame& a, const GroundTruthFrame& b) { return a.frame_id < b.frame_id; });

    UseCase uc;
    uc.name = fs::absolute(dir).lexically_normal().filename().string();
    if (uc.name.empty()) uc.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto id = rows[i].frame_id;
        if (i > 0 && rows[i - 1].frame_id == id)
            throw FormatError("frame " + std::to_string(id) + ": duplicate truth row");
        const auto it = images.find(id);
        if (it == images.end()) throw FormatError("frame " + std::to_string(id) + ": image not found");
        uc.frames.push_back({it->second, rows[i]});
        images.erase(it);
    }
    if (!images.empty())
        throw FormatError("frame " + std::to_string(images.begin()->first) + ": image has no truth row");
    return uc;
}

void save_use_case(const fs::path& dir, const UseCase& uc) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<GroundTruthFrame> rows;
    for (const auto& f : uc.frames) {
        const auto target = dir / frame_filename(f.truth.frame_id, lower(f.image.extension().string()));
        if (!fs::exists(target) || !fs::equivalent(f.image, target)) {
            const auto bytes = read_bytes(f.image);
            write_bytes(target, bytes.data(), bytes.size());
        }
        rows.push_back(f.truth);
    }
    write_truth_csv(dir / "truth.csv", rows);
}

namespace {

constexpr int kSuper = 4;

/// Fraction of the pixel's kSuper x kSuper subsamples satisfying inside(x, y).
template <class Inside>
double coverage(int px, int py, Inside&& inside) {
    int hits = 0;
    for (int j = 0; j < kSuper; ++j) {
        const double y = py - 0.5 + (j + 0.5) / kSuper;
        for (int i = 0; i < kSuper; ++i) {
            const double x = px - 0.5 + (i + 0.5) / kSuper;
            if (inside(x, y)) ++hits;
        }
    }
    return static_cast<double>(hits) / (kSuper * kSuper);
}

/// Blends target into canvas wherever inside() holds, restricted to a bounding box.
/// Pixels whose four corners agree are treated as fully in or out.
template <class Inside>
void paint(std::vector<double>& canvas, int w, int h, double x0, double y0, double x1, double y1, double target,
           Inside&& inside) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)) - 1);
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)) - 1);
    const int ix1 = std::min(w - 1, static_cast<int>(std::ceil(x1)) + 1);
    const int iy1 = std::min(h - 1, static_cast<int>(std::ceil(y1)) + 1);
    for (int y = iy0; y <= iy1; ++y) {
        for (int x = ix0; x <= ix1; ++x) {
            const int corners = inside(x - 0.5, y - 0.5) + inside(x + 0.5, y - 0.5) + inside(x - 0.5, y + 0.5) +
                                inside(x + 0.5, y + 0.5);
            double c = 0.0;
            if (corners == 4)
                c = 1.0;
            else if (corners > 0)
                c = coverage(x, y, inside);
            else if (inside(static_cast<double>(x), static_cast<double>(y)))
                c = coverage(x, y, inside);
            if (c <= 0.0) continue;
            double& v = canvas[static_cast<std::size_t>(y) * w + x];
            v = c == 1.0 ? target : v * (1.0 - c) + target * c;
        }
    }
}

}  // namespace

SynthFrame render_synthetic(const SynthSpec& spec, std::int64_t frame_id) {
    const int w = spec.width, h = spec.height;
    std::vector<double> canvas(static_cast<std::size_t>(w) * h, static_cast<double>(spec.sclera_intensity));

    const Point2d c = spec.pupil_center;
    const double r = spec.iris_radius;
    paint(canvas, w, h, c.x - r, c.y - r, c.x + r, c.y + r, spec.iris_intensity, [&](double x, double y) {
        const double dx = x - c.x, dy = y - c.y;
        return dx * dx + dy * dy <= r * r;
    });

    const double ca = std::cos(spec.pupil_angle), sa = std::sin(spec.pupil_angle);
    const double a = spec.pupil_a, b = spec.pupil_b;
    const double half_w = std::sqrt(a * a * ca * ca + b * b * sa * sa);
    const double half_h = std::sqrt(a * a * sa * sa + b * b * ca * ca);
    paint(canvas, w, h, c.x - half_w, c.y - half_h, c.x + half_w, c.y + half_h, spec.pupil_intensity,
          [&](double x, double y) {
              const double dx = x - c.x, dy = y - c.y;
              const double u = (dx * ca + dy * sa) / a;
              const double v = (-dx * sa + dy * ca) / b;
              return u * u + v * v <= 1.0;
          });

    for (const auto& blob : spec.reflections) {
        const double br = blob.radius;
        paint(canvas, w, h, blob.center.x - br, blob.center.y - br, blob.center.x + br, blob.center.y + br,
              spec.reflection_intensity, [&](double x, double y) {
                  const double dx = x - blob.center.x, dy = y - blob.center.y;
                  return dx * dx + dy * dy <= br * br;
              });
    }

    if (spec.occlusion > 0.0) {
        const double lid = c.y - half_h + spec.occlusion * 2.0 * half_h;
        paint(canvas, w, h, 0.0, 0.0, w, lid, spec.eyelid_intensity, [&](double, double y) { return y < lid; });
    }

    std::vector<std::uint8_t> pixels(canvas.size());
    if (spec.noise_sigma > 0.0) {
        detail::Rng rng(spec.seed);
        for (auto& v : canvas) v += spec.noise_sigma * rng.normal();
    }
    for (std::size_t i = 0; i < canvas.size(); ++i)
        pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(canvas[i]), 0L, 255L));

    SynthFrame out{GrayImage(w, h, std::move(pixels)), {}};
    out.truth.frame_id = frame_id;
    out.truth.pupil_present = spec.occlusion < 1.0;
    out.truth.center = out.truth.pupil_present ? c : Point2d{-1.0, -1.0};
    return out;
}

SynthProfile parse_profile(const std::string& name) {
    const auto n = lower(name);
    if (n == "clean") return SynthProfile::Clean;
    if (n == "occluded") return SynthProfile::Occluded;
    if (n == "hard") return SynthProfile::Hard;
    if (n == "negative") return SynthProfile::Negative;
    throw std::invalid_argument("unknown profile: " + name);
}

std::string to_string(SynthProfile p) {
    switch (p) {
        case SynthProfile::Clean: return "clean";
        case SynthProfile::Occluded: return "occluded";
        case SynthProfile::Hard: return "hard";
        case SynthProfile::Negative: return "negative";
    }
    return "unknown";
}

SynthSpec random_spec(SynthProfile profile, std::uint64_t seed, const SynthOptions& opt) {
    const int width = opt.width, height = opt.height;
    detail::Rng rng(seed);
    SynthSpec s;
    s.width = width;
    s.height = height;
    s.seed = detail::splitmix64(seed ^ 0x5eedULL);

    // Sizes are drawn relative to a 640x480 frame.
    const double unit = std::min(width / 640.0, height / 480.0);
    s.pupil_a = rng.uniform(22.0, 50.0) * unit;
    s.pupil_b = s.pupil_a * rng.uniform(0.7, 1.0);
    s.pupil_angle = rng.uniform(0.0, std::numbers::pi);
    // A ~12 mm iris against a 27.6 mm eye opening spanning 2/3 to all of the diagonal
    // gives a radius of 116..174 px at 640x480. Only the pupil dilates.
    s.iris_radius = rng.uniform(120.0, 160.0) * unit;
    const double margin = s.iris_radius + 10.0 * unit;
    s.pupil_center = {rng.uniform(margin, width - margin), rng.uniform(margin, height - margin)};

    s.pupil_intensity = rng.uniform_int(20, 50);
    s.iris_intensity = rng.uniform_int(90, 130);
    s.sclera_intensity = rng.uniform_int(180, 220);
    s.eyelid_intensity = rng.uniform_int(150, 200);
    if (opt.bright_pupil) {
        s.pupil_intensity = 255 - s.pupil_intensity;
        s.sclera_intensity -= 40;
    }
    s.noise_sigma = rng.uniform(0.0, 4.0);

    int blobs = 0;
    switch (profile) {
        case SynthProfile::Clean: break;
        case SynthProfile::Occluded:
            s.occlusion = rng.uniform(0.2, 0.5);
            blobs = rng.uniform_int(0, 1);
            break;
        case SynthProfile::Hard:
            s.occlusion = rng.uniform(0.0, 0.4);
            blobs = rng.uniform_int(1, 3);
            break;
        case SynthProfile::Negative:
            s.occlusion = 1.0;
            blobs = rng.uniform_int(0, 2);
            break;
    }
    for (int i = 0; i < blobs; ++i) {
        const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double d = rng.uniform(0.0, 1.2) * s.pupil_a;
        const double br = rng.uniform(3.0, 8.0) * unit;
        s.reflections.push_back({{s.pupil_center.x + d * std::cos(t), s.pupil_center.y + d * std::sin(t)}, br});
    }
    return s;
}

std::vector<SynthSpec> corpus_specs(SynthProfile profile, std::size_t count, std::uint64_t seed,
                                    const SynthOptions& opt) {
    std::vector<SynthSpec> specs;
    specs.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        specs.push_back(random_spec(profile, detail::splitmix64(seed) ^ detail::splitmix64(i + 1), opt));
    return specs;
}

}  // namespace pure
