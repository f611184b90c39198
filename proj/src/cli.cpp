#include "fgradar/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "fgradar/calibration.hpp"
#include "fgradar/errors.hpp"
#include "fgradar/formats.hpp"
#include "fgradar/imaging.hpp"
#include "fgradar/metrics.hpp"
#include "fgradar/run_config.hpp"
#include "fgradar/stream_sync.hpp"

namespace fgradar::cli {

namespace {

namespace fs = std::filesystem;

// Options shared by every subcommand.
struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;

    RunConfig load() const {
        RunConfig cfg = config.empty() ? RunConfig{} : RunConfig::load(config);
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        cfg.validate();
        return cfg;
    }
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "key=value configuration file");
    sub->add_option("--seed", c.seed, "random seed (overrides config)");
    sub->add_option("--threads", c.threads, "worker threads (1 = serial reference mode)");
    sub->add_option("--out", c.out, "output path or prefix");
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string meters(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void require_out(const Common& c) {
    if (c.out.empty()) throw CLI::ValidationError("--out", "an output path is required");
}

Vec3 parse_point(const std::string& text) {
    Vec3 p;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &p.x, &p.y, &p.z, &tail) != 3)
        throw CLI::ValidationError("--ref", "expected x,y,z or 'auto', got '" + text + "'");
    return p;
}

Axis parse_axis(const std::string& s) { return s == "vertical" ? Axis::Vertical : Axis::Horizontal; }

// ---------------------------------------------------------------------------------------------

int cmd_simulate(const Common& c, const std::string& scene_override, std::ostream& out) {
    require_out(c);
    const RunConfig cfg = c.load();
    Scene scene;
    const fs::path scene_path = scene_override.empty() ? cfg.scene : fs::path(scene_override);
    if (!scene_path.empty()) scene = formats::read_scene(scene_path);
    const ApertureGrid grid = make_aperture(cfg.aperture, cfg.channel_offsets());
    SimulationOptions opts;
    opts.noise_sigma = cfg.noise_sigma;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    const RawDataCube cube = simulate_cube(cfg.radar, scene, grid, opts);
    formats::write_cube(c.out, cube);
    out << "elements=" << cube.grid.element_count() << '\n' << "samples=" << cube.n_samples() << '\n';
    return kOk;
}

std::vector<ChannelError> random_errors(std::size_t n, std::uint64_t seed, bool on_bin, const RadarConfig& radar,
                                        std::size_t zero_pad) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> tau_dist(0.0, 1e-9);
    std::uniform_real_distribution<double> mag_dist(0.5, 2.0);
    std::uniform_real_distribution<double> phase_dist(-std::numbers::pi, std::numbers::pi);
    const double bin_tau = radar.fs / (static_cast<double>(radar.n_samples * zero_pad) * radar.slope());
    std::vector<ChannelError> errors(n);
    for (auto& e : errors) {
        e.tau = tau_dist(rng);
        const double mag = mag_dist(rng);
        e.alpha = std::polar(mag, phase_dist(rng));
        if (on_bin) e.tau = std::round(e.tau / bin_tau) * bin_tau;
    }
    return errors;
}

int cmd_inject(const Common& c, const std::string& cube_path, const std::string& errors_path, bool random, bool on_bin,
               const std::string& errors_out, std::ostream& out) {
    require_out(c);
    const RunConfig cfg = c.load();
    const RawDataCube cube = formats::read_cube(cube_path);
    std::vector<ChannelError> errors;
    if (!errors_path.empty()) {
        errors = formats::read_channel_errors(errors_path);
    } else if (random) {
        errors = random_errors(cube.n_channels(), cfg.seed, on_bin, cube.config, cfg.zero_pad);
    } else {
        throw CLI::ValidationError("inject", "either --errors FILE or --random is required");
    }
    formats::write_cube(c.out, inject_channel_error(cube, errors));
    if (!errors_out.empty()) formats::write_channel_errors(errors_out, errors);
    out << "channels=" << errors.size() << '\n';
    return kOk;
}

int cmd_sync(const Common& c, const std::string& poses_path, const std::string& frames_path, std::ostream& out) {
    require_out(c);
    const RunConfig cfg = c.load();
    const auto poses = formats::read_pose_stream(poses_path);
    const auto stream = formats::read_frame_stream(frames_path);
    const GridSpec grid = cfg.grid_spec();
    if (stream.n_channels != grid.channel_offsets.size() || stream.n_samples != grid.config.n_samples)
        throw ConfigError("frame stream dimensions do not match the configured channels/samples");
    const auto trimmed = trim_streams(poses, stream.frames);
    const auto targets = select_grid_poses(poses, grid);
    const AlignmentReport report = align(targets, trimmed);
    const RawDataCube cube = build_signal_matrix(report, targets, trimmed, grid);
    formats::write_cube(c.out, cube);
    out << "frames_in=" << stream.frames.size() << '\n'
        << "frames_trimmed=" << trimmed.size() << '\n'
        << "matched=" << report.frame_for_pose.size() << '\n'
        << "dropped_frames=" << report.dropped_frames << '\n'
        << "max_mismatch_s=" << meters(report.max_mismatch) << '\n';
    return kOk;
}

// Triangulates the dominant reflector from channel-0 range profiles over the whole aperture.
// Per-channel delays bias each channel's range; averaging across the array at every scan
// position leaves only their mean, which the phase-rate fit then sees as a common offset.
ReferenceEstimate triangulate_reference(const RawDataCube& cube, std::size_t zero_pad) {
    const std::size_t n_ch = cube.n_channels();
    std::vector<Vec3> positions;
    std::vector<double> ranges;
    for (std::size_t ix = 0; ix < cube.n_x(); ++ix) {
        for (std::size_t iy = 0; iy < cube.n_y(); ++iy) {
            Vec3 centroid{};
            double sum = 0.0;
            for (std::size_t ch = 0; ch < n_ch; ++ch) {
                centroid += cube.grid.at(ix, iy, ch).position;
                sum += range_profile(cube.element(ix, iy, ch), cube.config, zero_pad).peak_distance;
            }
            positions.push_back((1.0 / static_cast<double>(n_ch)) * centroid);
            ranges.push_back(sum / static_cast<double>(n_ch));
        }
    }
    return estimate_reference_point_planar(positions, ranges, +1);
}

int cmd_calibrate(const Common& c, const std::string& cube_path, const std::string& ref, const std::string& mode,
                  std::ostream& out) {
    require_out(c);
    const RunConfig cfg = c.load();
    const RawDataCube cube = formats::read_cube(cube_path);
    try {
        Vec3 point;
        if (ref == "auto") {
            const ReferenceEstimate est = triangulate_reference(cube, cfg.zero_pad);
            point = est.point;
            out << "ref_residual_m=" << meters(est.residual_rms) << '\n';
        } else {
            point = parse_point(ref);
        }
        // Measure at the scan position closest to the reference in the aperture plane.
        std::size_t best_ix = 0, best_iy = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t ix = 0; ix < cube.n_x(); ++ix) {
            for (std::size_t iy = 0; iy < cube.n_y(); ++iy) {
                const Vec3 p = cube.grid.at(ix, iy, 0).position;
                const double d = std::hypot(p.x - point.x, p.y - point.y);
                if (d < best) {
                    best = d;
                    best_ix = ix;
                    best_iy = iy;
                }
            }
        }
        std::vector<std::vector<cdouble>> measured, refs;
        for (std::size_t ch = 0; ch < cube.n_channels(); ++ch) {
            const auto s = cube.element(best_ix, best_iy, ch);
            measured.emplace_back(s.begin(), s.end());
            refs.push_back(reference_signal(cube.config, cube.grid.at(best_ix, best_iy, ch).position, point));
        }
        const RateEstimator est = mode == "joint" ? RateEstimator::Joint : RateEstimator::PerChannel;
        const CalibrationModel model = estimate_phase_rate(measured, refs, cube.config, cfg.zero_pad, est);
        formats::write_model(c.out, model);
        out << "ref_x=" << meters(point.x) << '\n' << "ref_y=" << meters(point.y) << '\n' << "ref_z=" << meters(point.z) << '\n';
        for (std::size_t l = 0; l < model.n_channels(); ++l) out << "f_hat_" << l << '=' << meters(model.f_hat[l]) << '\n';
    } catch (const NoPeakError&) {
        throw;
    } catch (const GeometryError& e) {
        throw NoPeakError(std::string("calibration failed: ") + e.what());
    }
    return kOk;
}

int cmd_compensate(const Common& c, const std::string& cube_path, const std::string& model_path, std::ostream& out) {
    require_out(c);
    const RawDataCube cube = formats::read_cube(cube_path);
    const CalibrationModel model = formats::read_model(model_path);
    formats::write_cube(c.out, compensate(cube, model));
    out << "channels=" << model.n_channels() << '\n';
    return kOk;
}

using GridSize = std::optional<std::pair<std::size_t, std::size_t>>;

// Same extent as the aperture, resampled to the requested pixel counts.
ImageGrid resized(ImageGrid g, const GridSize& size) {
    if (!size) return g;
    auto step = [](double pitch, std::size_t from, std::size_t to) {
        return to > 1 && from > 1 ? pitch * static_cast<double>(from - 1) / static_cast<double>(to - 1) : pitch;
    };
    g.pitch_x = step(g.pitch_x, g.nx, size->first);
    g.pitch_y = step(g.pitch_y, g.ny, size->second);
    g.nx = size->first;
    g.ny = size->second;
    return g;
}

ComplexImage form_image(const RawDataCube& cube, const std::string& method, double z0, const RunConfig& cfg,
                        const GridSize& size) {
    if (method == "bp") return backprojection_image(cube, resized(aperture_image_grid(cube), size), z0, cfg.threads);
    RmaOptions opts;
    opts.pad_x = cfg.pad_x;
    opts.pad_y = cfg.pad_y;
    opts.hann_window = cfg.hann;
    opts.threads = cfg.threads;
    return rma_image(cube, z0, opts);
}

int cmd_image(const Common& c, const std::string& cube_path, const std::string& method, std::optional<double> z0_override,
              const std::string& background, bool sg, const std::string& size_text, std::ostream& out) {
    require_out(c);
    GridSize size;
    if (!size_text.empty()) {
        if (method != "bp") throw CLI::ValidationError("--size", "only backprojection resamples the output grid");
        std::size_t nx = 0, ny = 0;
        char comma = 0, extra = 0;
        std::istringstream in(size_text);
        if (!(in >> nx >> comma >> ny) || comma != ',' || in >> extra || nx == 0 || ny == 0)
            throw CLI::ValidationError("--size", "expected NX,NY, got '" + size_text + "'");
        size = std::pair{nx, ny};
    }
    const RunConfig cfg = c.load();
    const double z0 = z0_override.value_or(cfg.z0);
    auto prepare = [&](const std::string& path) {
        RawDataCube cube = formats::read_cube(path);
        if (sg) cube = sg_filter_cube(cube, cfg.sg);
        return cube;
    };
    ComplexImage img = form_image(prepare(cube_path), method, z0, cfg, size);
    if (!background.empty()) img = background_subtract(img, form_image(prepare(background), method, z0, cfg, size));
    formats::write_image(c.out, img);
    const auto mag = magnitude_image(img);
    const auto [pix, piy] = peak_index(mag);
    out << "method=" << method << '\n'
        << "nx=" << img.nx() << '\n'
        << "ny=" << img.ny() << '\n'
        << "peak_ix=" << pix << '\n'
        << "peak_iy=" << piy << '\n'
        << "peak_x=" << meters(img.x_at(pix)) << '\n'
        << "peak_y=" << meters(img.y_at(piy)) << '\n'
        << "peak_magnitude=" << meters(mag(pix, piy)) << '\n';
    return kOk;
}

int cmd_profile(const Common& c, const std::string& image_prefix, const std::string& axis, std::ostream& out) {
    const ComplexImage img = formats::read_image(image_prefix);
    const BeamProfile prof = peak_profile(img, parse_axis(axis));
    if (!c.out.empty()) {
        std::ofstream f(c.out);
        if (!f) throw Error("cannot open output file: " + c.out);
        f << "# offset_m,amplitude\n";
        for (std::size_t i = 0; i < prof.offsets.size(); ++i)
            f << formats::format_double(prof.offsets[i]) << ',' << formats::format_double(prof.amplitudes[i]) << '\n';
    }
    out << "axis=" << axis << '\n'
        << "peak_ix=" << prof.peak_ix << '\n'
        << "peak_iy=" << prof.peak_iy << '\n'
        << "width_3db_m=" << meters(prof.width_3db) << '\n';
    return kOk;
}

struct MetricArgs {
    std::string image;
    std::string estimates;
    double truth = 0.0;
    std::string pred;
    std::string truth_map;
    std::string pred_mask;
    std::string truth_mask;
    double threshold_db = 3.0;
    std::string axis = "horizontal";
};

int cmd_metrics(const std::string& which, const MetricArgs& a, std::ostream& out) {
    if (which == "entropy") {
        const ComplexImage img = formats::read_image(a.image);
        out << "entropy=" << fixed6(image_entropy(magnitude_image(img))) << '\n';
    } else if (which == "cdf") {
        const auto values = formats::read_values(a.estimates);
        const ErrorCdf cdf = distance_error_cdf(values, a.truth);
        out << "n=" << cdf.errors.size() << '\n'
            << "median_m=" << meters(cdf.median) << '\n'
            << "max_m=" << meters(cdf.errors.back()) << '\n';
        for (double q : {0.25, 0.5, 0.75, 0.9}) {
            const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(cdf.errors.size()))) - 1;
            out << "p" << static_cast<int>(q * 100) << "_m=" << meters(cdf.errors[std::min(idx, cdf.errors.size() - 1)]) << '\n';
        }
    } else if (which == "depth") {
        DepthMap pred = formats::read_depth_map(a.pred);
        DepthMap truth = formats::read_depth_map(a.truth_map);
        if (!pred.same_shape(truth)) throw ShapeError("depth maps have different shapes");
        if (!a.pred_mask.empty()) formats::apply_mask_file(a.pred_mask, pred);
        if (!a.truth_mask.empty()) formats::apply_mask_file(a.truth_mask, truth);
        out << "# mask: both valid and truth in [0.3, 0.6] m; non-positive predictions count as delta failures\n";
        out << "rmse=" << fixed6(depth_rmse(pred, truth)) << '\n'
            << "mae=" << fixed6(depth_mae(pred, truth)) << '\n'
            << "delta_1.05=" << fixed6(threshold_delta(pred, truth, 1.05)) << '\n'
            << "delta_1.10=" << fixed6(threshold_delta(pred, truth, 1.10)) << '\n'
            << "delta_1.25=" << fixed6(threshold_delta(pred, truth, 1.25)) << '\n'
            << "loss_depth=" << fixed6(loss_depth(pred, truth)) << '\n';
        if (pred.height >= 2 && pred.width >= 2) {
            try {
                out << "loss_surface_normal=" << fixed6(loss_surface_normal(pred, truth)) << '\n';
            } catch (const DomainError&) {
                out << "loss_surface_normal=nan\n";
            }
        }
    } else if (which == "extent") {
        const ComplexImage img = formats::read_image(a.image);
        const Axis axis = parse_axis(a.axis);
        const double pitch = axis == Axis::Horizontal ? img.pitch_x : img.pitch_y;
        out << "extent_m=" << meters(estimate_extent(magnitude_image(img), pitch, a.threshold_db, axis)) << '\n';
    } else {
        throw CLI::ValidationError("metrics", "unknown metric '" + which + "'");
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Radar simulation, calibration and imaging toolkit", "fgradar"};
    app.require_subcommand(1);

    Common common;
    std::string scene, cube, errors_file, errors_out, poses, frames, ref = "auto", mode = "per-channel", model, method = "rma",
                                                                      background, image, axis = "horizontal", size;
    bool random = false, on_bin = false, sg = false;
    std::optional<double> z0;
    std::string metric;
    MetricArgs margs;

    auto* sim = app.add_subcommand("simulate", "synthesize a raw data cube from a scene");
    add_common(sim, common);
    sim->add_option("--scene", scene, "scene file (overrides config)");

    auto* inj = app.add_subcommand("inject", "apply per-channel gain and delay errors");
    add_common(inj, common);
    inj->add_option("--cube", cube)->required();
    inj->add_option("--errors", errors_file, "channel,alpha_re,alpha_im,tau_s per line");
    inj->add_flag("--random", random, "draw tau in [0,1] ns and |alpha| in [0.5,2] from --seed");
    inj->add_flag("--on-bin", on_bin, "snap random delays onto the calibration FFT grid");
    inj->add_option("--errors-out", errors_out, "write the applied errors");

    auto* syn = app.add_subcommand("sync", "align pose and frame streams into a cube");
    add_common(syn, common);
    syn->add_option("--poses", poses, "pose stream (t,x,y,z)")->required();
    syn->add_option("--frames", frames, "FGFR frame stream")->required();

    auto* cal = app.add_subcommand("calibrate", "estimate per-channel phase rates from a reference target");
    add_common(cal, common);
    cal->add_option("--cube", cube)->required();
    cal->add_option("--ref", ref, "reference point x,y,z or 'auto' to triangulate");
    cal->add_option("--mode", mode, "per-channel or joint")->check(CLI::IsMember({"per-channel", "joint"}));

    auto* cmp = app.add_subcommand("compensate", "remove a calibration model from a cube");
    add_common(cmp, common);
    cmp->add_option("--cube", cube)->required();
    cmp->add_option("--model", model)->required();

    auto* img = app.add_subcommand("image", "focus a cube into a complex image");
    add_common(img, common);
    img->add_option("--cube", cube)->required();
    img->add_option("--method", method)->check(CLI::IsMember({"rma", "bp"}));
    img->add_option("--z0", z0, "image plane (overrides config)");
    img->add_option("--background", background, "background cube to image and subtract");
    img->add_flag("--sg", sg, "apply the Savitzky-Golay band-pass to fast time first");
    img->add_option("--size", size, "backprojection output pixels NX,NY over the aperture extent");

    auto* prof = app.add_subcommand("profile", "beam profile through the image peak");
    add_common(prof, common);
    prof->add_option("--image", image, "image prefix (reads .csv and .meta)")->required();
    prof->add_option("--axis", axis)->check(CLI::IsMember({"horizontal", "vertical"}));

    auto* met = app.add_subcommand("metrics", "evaluation metrics");
    add_common(met, common);
    met->add_option("metric", metric, "entropy | cdf | depth | extent")
        ->required()
        ->check(CLI::IsMember({"entropy", "cdf", "depth", "extent"}));
    met->add_option("--image", margs.image, "image prefix");
    met->add_option("--estimates", margs.estimates, "file of distance estimates (m)");
    met->add_option("--truth", margs.truth, "true distance (m)");
    met->add_option("--pred", margs.pred, "predicted depth map");
    met->add_option("--truth-map", margs.truth_map, "ground-truth depth map");
    met->add_option("--pred-mask", margs.pred_mask, "0/1 validity mask for --pred");
    met->add_option("--truth-mask", margs.truth_mask, "0/1 validity mask for --truth-map");
    met->add_option("--threshold-db", margs.threshold_db, "drop below peak for extent crossings");
    met->add_option("--axis", margs.axis)->check(CLI::IsMember({"horizontal", "vertical"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*sim) return cmd_simulate(common, scene, out);
        if (*inj) return cmd_inject(common, cube, errors_file, random, on_bin, errors_out, out);
        if (*syn) return cmd_sync(common, poses, frames, out);
        if (*cal) return cmd_calibrate(common, cube, ref, mode, out);
        if (*cmp) return cmd_compensate(common, cube, model, out);
        if (*img) return cmd_image(common, cube, method, z0, background, sg, size, out);
        if (*prof) return cmd_profile(common, image, axis, out);
        if (*met) return cmd_metrics(metric, margs, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const MissingInputError& e) {
        err << "error: " << e.what() << '\n';
        return kMissingInput;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kMalformedInput;
    } catch (const NoPeakError& e) {
        err << "error: " << e.what() << '\n';
        return *cal ? kCalibrationFailure : kUsage;
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << '\n';
        return kShapeMismatch;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace fgradar::cli
