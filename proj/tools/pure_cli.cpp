// Command-line front end: detect, benchmark, synth.

#include "pure/dataset.hpp"
#include "pure/detector.hpp"
#include "pure/metrics.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kFormat = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Timed {
    pure::PupilResult result;
    double ms = 0.0;
};

Timed timed_detect(const pure::GrayImage& img, const pure::WorkingConfig& w, const pure::DetectorConfig& d) {
    const auto t0 = std::chrono::steady_clock::now();
    Timed t{pure::detect(img, w, d), 0.0};
    t.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return t;
}

// ---------------------------------------------------------------- output

class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path, std::ios::trunc);
        if (!file_) throw pure::IoError("cannot write " + path);
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw pure::IoError("cannot write " + path.string());
    out << text;
    if (!out) throw pure::IoError("cannot write " + path.string());
}

// ---------------------------------------------------------------- detect

struct DetectOptions {
    std::string input;
    std::string out;
    std::string format = "csv";
    int working_width = 320;
    int working_height = 240;
    double threshold = 0.66;
    bool bright_pupil = false;
};

struct ImageEntry {
    std::int64_t frame_id;
    fs::path path;
};

std::vector<ImageEntry> list_images(const fs::path& input) {
    std::error_code ec;
    if (!fs::exists(input, ec)) throw pure::IoError("no such file or directory: " + input.string());
    std::vector<fs::path> files;
    if (fs::is_directory(input, ec)) {
        for (const auto& entry : fs::directory_iterator(input, ec)) {
            if (!entry.is_regular_file()) continue;
            auto ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
        }
        if (ec) throw pure::IoError("cannot list " + input.string());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(input);
    }

    std::vector<ImageEntry> out;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto stem = files[i].stem().string();
        std::int64_t id = static_cast<std::int64_t>(i);
        std::int64_t parsed = 0;
        const auto [ptr, perr] = std::from_chars(stem.data(), stem.data() + stem.size(), parsed);
        if (perr == std::errc{} && ptr == stem.data() + stem.size()) id = parsed;
        out.push_back({id, files[i]});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ImageEntry& a, const ImageEntry& b) { return a.frame_id < b.frame_id; });
    return out;
}

int cmd_detect(const DetectOptions& o) {
    const pure::WorkingConfig wcfg{o.working_width, o.working_height};
    pure::DetectorConfig dcfg;
    dcfg.bright_pupil = o.bright_pupil;

    const auto images = list_images(o.input);
    if (images.empty()) throw pure::FormatError("no images in " + o.input);

    json records = json::array();
    std::ostringstream csv;
    csv << "frame_id,present,x,y,a,b,angle,psi,elapsed_ms\n";
    for (const auto& entry : images) {
        const auto img = pure::read_image(entry.path);
        const auto t = timed_detect(img, wcfg, dcfg);
        const auto& r = t.result;
        const bool present = r.present && r.confidence >= o.threshold;
        const pure::Point2d c = present ? r.center : pure::Point2d{-1.0, -1.0};
        csv << entry.frame_id << ',' << (present ? 1 : 0) << ',' << num(c.x) << ',' << num(c.y) << ','
            << num(present ? r.ellipse.a : 0.0) << ',' << num(present ? r.ellipse.b : 0.0) << ','
            << num(present ? r.ellipse.angle : 0.0) << ',' << num(r.confidence) << ',' << num(t.ms) << '\n';
        records.push_back({{"frame_id", entry.frame_id},
                           {"present", present},
                           {"x", c.x},
                           {"y", c.y},
                           {"a", present ? r.ellipse.a : 0.0},
                           {"b", present ? r.ellipse.b : 0.0},
                           {"angle", present ? r.ellipse.angle : 0.0},
                           {"psi", r.confidence},
                           {"elapsed_ms", t.ms}});
    }

    Output out(o.out);
    if (o.format == "json")
        out.stream() << records.dump(2) << '\n';
    else
        out.stream() << csv.str();
    return kOk;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkOptions {
    std::vector<std::string> inputs;
    std::string truth;
    std::string out;
    std::string format = "json";
    std::string sweep = "0:0.99:0.01";
    int working_width = 320;
    int working_height = 240;
    double radius = 5.0;
    double threshold = 0.66;
    bool bright_pupil = false;
};

std::vector<double> parse_sweep(const std::string& spec) {
    double v[3];
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
        const auto colon = spec.find(':', start);
        if ((i < 2) == (colon == std::string::npos)) throw UsageError("--sweep expects lo:hi:step");
        const std::string part = spec.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v[i]);
        if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty())
            throw UsageError("--sweep expects lo:hi:step");
        start = colon + 1;
    }
    if (!(v[2] > 0.0) || v[1] < v[0]) throw UsageError("--sweep needs lo <= hi and step > 0");
    return pure::make_thresholds(v[0], v[1], v[2]);
}

struct FrameRecord {
    std::string use_case;
    pure::GroundTruthFrame truth;
    pure::PupilResult result;
    pure::FrameOutcome outcome;
    pure::FrameClass cls;
    double ms;
};

struct Runtime {
    double mean = 0.0, stddev = 0.0, p50 = 0.0, p90 = 0.0, p99 = 0.0, max = 0.0;
};

Runtime runtime_stats(std::vector<double> ms) {
    Runtime r;
    if (ms.empty()) return r;
    std::sort(ms.begin(), ms.end());
    double sum = 0.0;
    for (double v : ms) sum += v;
    r.mean = sum / ms.size();
    double sq = 0.0;
    for (double v : ms) sq += (v - r.mean) * (v - r.mean);
    r.stddev = std::sqrt(sq / ms.size());
    auto pct = [&](double p) {
        const auto rank = static_cast<std::size_t>(std::ceil(p * ms.size()));
        return ms[std::clamp<std::size_t>(rank, 1, ms.size()) - 1];
    };
    r.p50 = pct(0.50);
    r.p90 = pct(0.90);
    r.p99 = pct(0.99);
    r.max = ms.back();
    return r;
}

json group_json(const std::string& name, const std::vector<const FrameRecord*>& frames, double threshold,
                double radius, const pure::SignalStats& stats) {
    std::vector<pure::FrameOutcome> outcomes;
    std::vector<double> ms;
    for (const auto* f : frames) {
        outcomes.push_back(f->outcome);
        ms.push_back(f->ms);
    }
    const auto s = pure::summarize(outcomes, threshold, radius);
    const auto rt = runtime_stats(ms);
    json curve = json::array();
    for (const auto& v : s.detection_rate) curve.push_back(opt_json(v));
    return {{"name", name},
            {"frames", frames.size()},
            {"counts", {{"CTP", s.counts.ctp}, {"ITP", s.counts.itp}, {"FP", s.counts.fp}, {"TN", s.counts.tn},
                        {"FN", s.counts.fn}}},
            {"sensitivity", opt_json(s.rates.sensitivity)},
            {"precision", opt_json(s.rates.precision)},
            {"specificity", opt_json(s.rates.specificity)},
            {"detection_rate", curve},
            {"signal", {{"up_runs", stats.up_runs},
                        {"down_runs", stats.down_runs},
                        {"mtbf", opt_json(stats.mtbf())},
                        {"mttr", opt_json(stats.mttr())},
                        {"reliability", opt_json(stats.reliability())},
                        {"insufficiency", opt_json(stats.insufficiency())}}},
            {"runtime_ms", {{"mean", rt.mean},
                            {"stddev", rt.stddev},
                            {"p50", rt.p50},
                            {"p90", rt.p90},
                            {"p99", rt.p99},
                            {"max", rt.max}}}};
}

std::vector<fs::path> resolve_use_cases(const std::vector<std::string>& inputs) {
    std::vector<fs::path> dirs;
    for (const auto& in : inputs) {
        const fs::path p(in);
        std::error_code ec;
        if (!fs::is_directory(p, ec)) throw pure::IoError("not a directory: " + in);
        if (fs::exists(p / "truth.csv")) {
            dirs.push_back(p);
            continue;
        }
        // A corpus root: every subdirectory holding a truth file is one use case.
        std::vector<fs::path> subs;
        for (const auto& entry : fs::directory_iterator(p, ec))
            if (entry.is_directory() && fs::exists(entry.path() / "truth.csv")) subs.push_back(entry.path());
        if (subs.empty()) {
            if (fs::is_empty(p, ec)) throw pure::FormatError("use case " + in + " has no frames");
            throw pure::IoError("no truth.csv in " + in);
        }
        std::sort(subs.begin(), subs.end());
        dirs.insert(dirs.end(), subs.begin(), subs.end());
    }
    return dirs;
}

int cmd_benchmark(const BenchmarkOptions& o) {
    const auto thresholds = parse_sweep(o.sweep);
    if (!(o.radius > 0.0)) throw UsageError("--error-radius must be positive");
    const pure::WorkingConfig wcfg{o.working_width, o.working_height};
    pure::DetectorConfig dcfg;
    dcfg.bright_pupil = o.bright_pupil;

    std::vector<pure::UseCase> cases;
    if (!o.truth.empty()) {
        if (o.inputs.size() != 1) throw UsageError("--truth needs exactly one --input directory");
        cases.push_back(pure::load_use_case(o.inputs.front(), o.truth));
    } else {
        for (const auto& dir : resolve_use_cases(o.inputs)) cases.push_back(pure::load_use_case(dir));
    }

    std::vector<FrameRecord> records;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
    for (const auto& uc : cases) {
        if (uc.frames.empty()) throw pure::FormatError("use case " + uc.name + " has no frames");
        auto& idx = groups.emplace_back(uc.name, std::vector<std::size_t>{}).second;
        for (const auto& f : uc.frames) {
            const auto img = pure::read_image(f.image);
            const auto t = timed_detect(img, wcfg, dcfg);
            const auto outcome = pure::evaluate_frame(t.result, f.truth);
            idx.push_back(records.size());
            records.push_back(
                {uc.name, f.truth, t.result, outcome, pure::classify(outcome, o.threshold, o.radius), t.ms});
        }
    }

    json per_case = json::array();
    pure::SignalStats total_stats;
    std::vector<const FrameRecord*> all;
    for (const auto& [name, idx] : groups) {
        std::vector<const FrameRecord*> frames;
        std::vector<pure::FrameClass> classes;
        for (const auto i : idx) {
            frames.push_back(&records[i]);
            classes.push_back(records[i].cls);
        }
        const auto stats = pure::signal_stats(classes);
        total_stats += stats;
        all.insert(all.end(), frames.begin(), frames.end());
        per_case.push_back(group_json(name, frames, o.threshold, o.radius, stats));
    }

    std::vector<pure::FrameOutcome> outcomes;
    for (const auto& r : records) outcomes.push_back(r.outcome);
    const auto sweep = pure::threshold_sweep(outcomes, o.radius, thresholds);

    json sweep_rows = json::array();
    std::ostringstream sweep_csv;
    sweep_csv << "threshold,ctp,itp,fp,tn,fn,sensitivity,precision,specificity,f2\n";
    auto cell = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    for (const auto& row : sweep.rows) {
        sweep_rows.push_back({{"threshold", row.threshold},
                              {"sensitivity", opt_json(row.rates.sensitivity)},
                              {"precision", opt_json(row.rates.precision)},
                              {"specificity", opt_json(row.rates.specificity)},
                              {"f2", opt_json(row.f2)}});
        sweep_csv << num(row.threshold) << ',' << row.counts.ctp << ',' << row.counts.itp << ',' << row.counts.fp
                  << ',' << row.counts.tn << ',' << row.counts.fn << ',' << cell(row.rates.sensitivity) << ','
                  << cell(row.rates.precision) << ',' << cell(row.rates.specificity) << ',' << cell(row.f2) << '\n';
    }

    json report = {{"config", {{"working_width", o.working_width},
                               {"working_height", o.working_height},
                               {"error_radius", o.radius},
                               {"confidence_threshold", o.threshold},
                               {"bright_pupil", o.bright_pupil}}},
                   {"use_cases", per_case},
                   {"aggregate", group_json("aggregate", all, o.threshold, o.radius, total_stats)},
                   {"sweep", {{"rows", sweep_rows},
                              {"best_threshold", sweep.best ? json(sweep.rows[*sweep.best].threshold) : json(nullptr)},
                              {"best_f2", sweep.best ? json(*sweep.rows[*sweep.best].f2) : json(nullptr)}}}};

    std::ostringstream curve_csv;
    curve_csv << "use_case";
    for (int n = 1; n <= pure::kCurveMaxError; ++n) curve_csv << ",n" << n;
    curve_csv << '\n';
    auto curve_row = [&](const json& g) {
        curve_csv << g["name"].get<std::string>();
        for (const auto& v : g["detection_rate"]) curve_csv << ',' << (v.is_null() ? std::string() : num(v.get<double>()));
        curve_csv << '\n';
    };
    for (const auto& g : per_case) curve_row(g);
    curve_row(report["aggregate"]);

    std::ostringstream frames_csv;
    frames_csv << "use_case,frame_id,truth_present,truth_x,truth_y,present,x,y,psi,error,class,elapsed_ms\n";
    for (const auto& r : records) {
        frames_csv << r.use_case << ',' << r.truth.frame_id << ',' << (r.truth.pupil_present ? 1 : 0) << ','
                   << num(r.truth.center.x) << ',' << num(r.truth.center.y) << ',' << (r.result.present ? 1 : 0)
                   << ',' << num(r.result.center.x) << ',' << num(r.result.center.y) << ','
                   << num(r.result.confidence) << ',' << num(r.outcome.error) << ',' << pure::to_string(r.cls) << ','
                   << num(r.ms) << '\n';
    }

    if (!o.out.empty()) {
        const fs::path dir(o.out);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw pure::IoError("cannot create " + o.out);
        write_text(dir / "report.json", report.dump(2) + "\n");
        write_text(dir / "curve.csv", curve_csv.str());
        write_text(dir / "sweep.csv", sweep_csv.str());
        write_text(dir / "frames.csv", frames_csv.str());
    }
    if (o.format == "csv")
        std::cout << curve_csv.str();
    else
        std::cout << report.dump(2) << '\n';
    return kOk;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
    std::string out;
    std::string profile = "clean";
    std::string image_format = "pgm";
    std::uint64_t seed = 1;
    std::size_t count = 10;
    int width = 640;
    int height = 480;
    bool bright_pupil = false;
};

int cmd_synth(const SynthOptions& o) {
    pure::SynthProfile profile;
    try {
        profile = pure::parse_profile(o.profile);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw pure::IoError("cannot create " + o.out);

    const auto specs = pure::corpus_specs(profile, o.count, o.seed, {o.width, o.height, o.bright_pupil});
    std::vector<pure::GroundTruthFrame> truth;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto frame = pure::render_synthetic(specs[i], static_cast<std::int64_t>(i));
        pure::write_image(dir / pure::frame_filename(frame.truth.frame_id, "." + o.image_format), frame.image);
        truth.push_back(frame.truth);
    }
    pure::write_truth_csv(dir / "truth.csv", truth);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pupil detection: detect, benchmark, synth"};
    app.require_subcommand(1);

    DetectOptions det;
    auto* detect = app.add_subcommand("detect", "Detect pupils in an image or a directory of images");
    detect->add_option("--input", det.input, "Image file or directory")->required();
    detect->add_option("--out", det.out, "Output file (default: standard output)");
    detect->add_option("--format", det.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    detect->add_option("--working-width", det.working_width)->check(CLI::PositiveNumber)->capture_default_str();
    detect->add_option("--working-height", det.working_height)->check(CLI::PositiveNumber)->capture_default_str();
    detect->add_option("--confidence-threshold", det.threshold)->capture_default_str();
    detect->add_flag("--bright-pupil", det.bright_pupil);

    BenchmarkOptions bench;
    auto* benchmark = app.add_subcommand("benchmark", "Evaluate against ground truth and report metrics");
    benchmark->add_option("--input", bench.inputs, "Use-case directories or corpus roots")->required();
    benchmark->add_option("--truth", bench.truth, "Ground-truth CSV (single use case only)");
    benchmark->add_option("--out", bench.out, "Directory for report.json and CSV tables");
    benchmark->add_option("--format", bench.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    benchmark->add_option("--sweep", bench.sweep, "Threshold sweep lo:hi:step")->capture_default_str();
    benchmark->add_option("--working-width", bench.working_width)->check(CLI::PositiveNumber)->capture_default_str();
    benchmark->add_option("--working-height", bench.working_height)->check(CLI::PositiveNumber)->capture_default_str();
    benchmark->add_option("--error-radius", bench.radius)->capture_default_str();
    benchmark->add_option("--confidence-threshold", bench.threshold)->capture_default_str();
    benchmark->add_flag("--bright-pupil", bench.bright_pupil);

    SynthOptions syn;
    auto* synth = app.add_subcommand("synth", "Render a synthetic eye corpus");
    synth->add_option("--out", syn.out, "Output directory")->required();
    synth->add_option("--profile", syn.profile, "clean|occluded|hard|negative")->capture_default_str();
    synth->add_option("--seed", syn.seed)->capture_default_str();
    synth->add_option("--count", syn.count)->capture_default_str();
    synth->add_option("--width", syn.width)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--height", syn.height)->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--image-format", syn.image_format)->check(CLI::IsMember({"pgm", "png"}))->capture_default_str();
    synth->add_flag("--bright-pupil", syn.bright_pupil);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*detect) return cmd_detect(det);
        if (*benchmark) return cmd_benchmark(bench);
        if (*synth) return cmd_synth(syn);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const pure::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const pure::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFormat;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFormat;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
    return kUsage;
}
