// Acceptance suite. One line per criterion: "[PASS] n name | details" or "[FAIL] ...".
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "fgradar/calibration.hpp"
#include "fgradar/cli.hpp"
#include "fgradar/errors.hpp"
#include "fgradar/formats.hpp"
#include "fgradar/imaging.hpp"
#include "fgradar/metrics.hpp"
#include "oracles.hpp"
#include "streams.hpp"
#include "test_dir.hpp"

using namespace fgradar;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " !" << what;
        }
    }
};

double max_rel(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return den > 0.0 ? num / den : num;
}

RawDataCube simulate(const RadarConfig& cfg, const ApertureSpec& spec, const std::vector<Vec3>& offsets,
                     const std::vector<PointScatterer>& pts) {
    Scene s;
    s.scatterers = pts;
    return simulate_cube(cfg, s, make_aperture(spec, offsets));
}

const std::vector<Vec3> kMono{{0.0, 0.0, 0.0}};

// ---------------------------------------------------------------------------------------------
// 1. RMA against the backprojection oracle.

Outcome oracle_equivalence() {
    Outcome o;
    const RadarConfig cfg = RadarConfig::with_samples(64);
    ApertureSpec spec;  // 41 x 21 at 2.4 mm
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> ux(0.02, 0.076), uy(0.012, 0.036), uz(0.22, 0.38), ph(-3.14159, 3.14159);

    const int scenes = 20;
    int peaks_ok = 0;
    double worst_ncc = 1.0, worst_time = 0.0;
    for (int s = 0; s < scenes; ++s) {
        const auto t0 = Clock::now();
        const Vec3 p{ux(rng), uy(rng), uz(rng)};
        const auto cube = simulate(cfg, spec, kMono, {{p, std::polar(1.0, ph(rng))}});
        const auto rma = magnitude_image(rma_image(cube, p.z));
        const auto bp = magnitude_image(backprojection_image(cube, aperture_image_grid(cube), p.z));
        worst_time = std::max(worst_time, seconds_since(t0));

        const auto [rx, ry] = peak_index(rma);
        const auto [bx, by] = peak_index(bp);
        if (std::abs(long(rx) - long(bx)) <= 1 && std::abs(long(ry) - long(by)) <= 1) ++peaks_ok;

        std::vector<double> a, b;
        for (long ix = long(bx) - 5; ix <= long(bx) + 5; ++ix)
            for (long iy = long(by) - 5; iy <= long(by) + 5; ++iy) {
                if (ix < 0 || iy < 0 || ix >= long(bp.nx) || iy >= long(bp.ny)) continue;
                a.push_back(rma(ix, iy));
                b.push_back(bp(ix, iy));
            }
        worst_ncc = std::min(worst_ncc, oracle::pearson(a, b));
    }
    o.require(peaks_ok == scenes, "peak disagreement");
    o.require(worst_ncc >= 0.98, "ncc below 0.98");
    o.require(worst_time <= 5.0, "scene slower than 5 s");
    o.detail << " scenes=" << scenes << " peaks_within_1px=" << peaks_ok << " min_ncc=" << worst_ncc
             << " max_scene_s=" << worst_time;
    return o;
}

// ---------------------------------------------------------------------------------------------
// 2. Calibration round trip on an 8-channel array.

Outcome calibration_round_trip() {
    Outcome o;
    const RadarConfig cfg = RadarConfig::with_samples(64);
    const std::size_t zero_pad = 8, n_fft = zero_pad * cfg.n_samples;
    const std::size_t n_ch = 8;
    const double spacing = cfg.wavelength() / 2.0;
    const auto offsets = linear_channel_offsets(n_ch, spacing);
    ApertureSpec spec;
    spec.n_x = 6;
    spec.n_y = 21;
    spec.pitch_x = n_ch * spacing;
    const double cx = 0.5 * (n_ch * spec.n_x - 1) * spacing, cy = 10 * spec.pitch_y;

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> utau(0.0, 1e-9), umag(0.5, 2.0), uph(-3.14159, 3.14159);
    const double bin_tau = cfg.fs / (static_cast<double>(n_fft) * cfg.slope());

    // Exact model, arbitrary delays.
    const auto two = simulate(cfg, spec, offsets, {{{cx - 0.03, cy - 0.01, 0.3}, {1.0, 0.0}}, {{cx + 0.025, cy + 0.012, 0.3}, {0.8, 0.3}}});
    double worst_exact = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ChannelError> e(n_ch);
        for (auto& x : e) x = {std::polar(umag(rng), uph(rng)), utau(rng)};
        const auto back = compensate(inject_channel_error(two, e), exact_model(e, cfg));
        worst_exact = std::max(worst_exact, max_rel(back.samples, two.samples));
    }
    o.require(worst_exact <= 1e-9, "exact-model residual");

    // Estimated model from a reference target, on-bin delays.
    std::vector<ChannelError> e(n_ch);
    std::vector<long> bins(n_ch);
    for (std::size_t l = 0; l < n_ch; ++l) {
        bins[l] = static_cast<long>(std::floor(utau(rng) / bin_tau));
        e[l] = {std::polar(umag(rng), uph(rng)), static_cast<double>(bins[l]) * bin_tau};
    }
    const Vec3 ref_point{cx, cy, 0.35};
    const auto ref_cube = inject_channel_error(simulate(cfg, spec, offsets, {{ref_point, {1.0, 0.0}}}), e);
    const std::size_t mx = spec.n_x / 2, my = spec.n_y / 2;
    std::vector<std::vector<cdouble>> measured, refs;
    for (std::size_t ch = 0; ch < n_ch; ++ch) {
        const auto s = ref_cube.element(mx, my, ch);
        measured.emplace_back(s.begin(), s.end());
        refs.push_back(reference_signal(cfg, ref_cube.grid.at(mx, my, ch).position, ref_point));
    }
    const auto model = estimate_phase_rate(measured, refs, cfg, zero_pad);
    bool rates_exact = true;
    double worst_rate_rel = 0.0;
    for (std::size_t l = 0; l < n_ch; ++l) {
        const double f_true = cfg.slope() * e[l].tau;
        rates_exact = rates_exact && model.f_hat[l] == phase_rate_bin_frequency(std::size_t(bins[l]), n_fft, cfg.fs);
        if (f_true != 0.0) worst_rate_rel = std::max(worst_rate_rel, std::abs(model.f_hat[l] - f_true) / f_true);
        else rates_exact = rates_exact && model.f_hat[l] == 0.0;
    }
    o.require(rates_exact && worst_rate_rel <= 1e-12, "on-bin rate not recovered");

    const auto bad = inject_channel_error(two, e);
    const auto fixed = compensate(bad, model);
    const auto m_clean = magnitude_image(rma_image(two, 0.3));
    const auto m_bad = magnitude_image(rma_image(bad, 0.3));
    const auto m_fixed = magnitude_image(rma_image(fixed, 0.3));
    const double peak_clean = *std::max_element(m_clean.data.begin(), m_clean.data.end());
    const double peak_fixed = *std::max_element(m_fixed.data.begin(), m_fixed.data.end());
    const double peak_bad = *std::max_element(m_bad.data.begin(), m_bad.data.end());
    const double h_bad = image_entropy(m_bad), h_fixed = image_entropy(m_fixed);
    o.require(peak_fixed >= 0.95 * peak_clean, "peak not restored");
    o.require(h_fixed < h_bad, "entropy did not decrease");
    o.require(peak_fixed >= peak_bad, "peak fell after compensation");
    o.detail << " exact_rel=" << worst_exact << " rates_on_grid=" << (rates_exact ? "yes" : "no")
             << " rate_rel=" << worst_rate_rel << " peak_ratio=" << peak_fixed / peak_clean << " peak_before_ratio=" << peak_bad / peak_clean << " entropy " << h_bad
             << " -> " << h_fixed;
    return o;
}

// ---------------------------------------------------------------------------------------------
// 3. Multilateration.

Outcome multilateration() {
    Outcome o;
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    auto random_poses = [&](std::size_t n) {
        std::vector<Vec3> p(n);
        for (auto& v : p) v = {u(rng), u(rng), 0.4 + u(rng)};
        return p;
    };
    const Vec3 truth{0.1, -0.2, 0.0};

    const auto poses = random_poses(20);
    std::vector<double> d;
    for (const auto& p : poses) d.push_back(distance(p, truth));
    const double exact_err = distance(estimate_reference_point(poses, d).point, truth);
    o.require(exact_err <= 1e-6, "noiseless error");

    std::normal_distribution<double> noise(0.0, 1e-3);
    std::vector<double> errs;
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_poses(100);
        std::vector<double> dn;
        for (const auto& v : p) dn.push_back(distance(v, truth) + noise(rng));
        errs.push_back(distance(estimate_reference_point(p, dn).point, truth));
    }
    std::sort(errs.begin(), errs.end());
    const double median = 0.5 * (errs[49] + errs[50]);
    o.require(median <= 5e-3, "noisy median");
    o.detail << " noiseless_err_m=" << exact_err << " noisy_median_m=" << median;
    return o;
}

// ---------------------------------------------------------------------------------------------
// 4. Stream synchronisation round trip through the on-disk stream formats.

Outcome synchronization() {
    Outcome o;
    const TestDir dir("acceptance_sync");
    const RadarConfig cfg = RadarConfig::with_samples(16);
    ApertureSpec spec;
    spec.n_x = 21;
    spec.n_y = 11;
    spec.frame_period = 1.0 / 80.0;
    spec.t_start = 1.5;
    const auto offsets = linear_channel_offsets(2, 1.2e-3);
    Scene scene;
    scene.scatterers.push_back({{0.02, 0.01, 0.25}, {1.0, 0.0}});
    SimulationOptions so;
    so.noise_sigma = 0.05;
    so.seed = 4;
    const auto cube = formats::decode_cube(formats::encode_cube(simulate_cube(cfg, scene, make_aperture(spec, offsets), so)));
    const GridSpec grid{spec, offsets, cfg};

    int identical = 0;
    const int trials = 10;
    double worst_mismatch = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(100 + t);
        const auto rec = streams::record(cube, spec, rng, 0.45, 1000.0, 1e-4);
        formats::write_pose_stream(dir / "poses.csv", rec.poses);
        formats::write_frame_stream(dir / "frames.fgfr", {2, cfg.n_samples, rec.frames});
        streams::Recording loaded;
        loaded.poses = formats::read_pose_stream(dir / "poses.csv");
        loaded.frames = formats::read_frame_stream(dir / "frames.fgfr").frames;
        AlignmentReport rep;
        const auto out = streams::reconstruct(loaded, grid, &rep);
        worst_mismatch = std::max(worst_mismatch, rep.max_mismatch);
        bool same = out.samples == rec.truth.samples;
        for (std::size_t e = 0; same && e < out.grid.element_count(); ++e) {
            const auto &a = out.grid.poses[e], &b = rec.truth.grid.poses[e];
            same = a.position == b.position && a.timestamp == b.timestamp && a.channel == b.channel;
        }
        if (same) ++identical;
    }
    o.require(identical == trials, "reconstruction differs");

    const std::vector<TimestampedPose> tie_poses{{{}, 0.5}, {{}, 1.0}};
    const std::vector<TimestampedFrame> tie_frames{{0.25, {}}, {0.75, {}}, {1.25, {}}};
    const auto tie = align(tie_poses, tie_frames);
    o.require(tie.frame_for_pose == std::vector<std::size_t>{0, 1}, "tie not resolved to earlier frame");
    o.detail << " bit_identical=" << identical << "/" << trials << " max_mismatch_s=" << worst_mismatch
             << " tie_choice=" << tie.frame_for_pose[0] << "," << tie.frame_for_pose[1];
    return o;
}

// ---------------------------------------------------------------------------------------------
// 5. Depth metrics against naive loops.

Outcome metric_oracles() {
    Outcome o;
    std::mt19937_64 rng(5);
    std::bernoulli_distribution drop(0.15);
    double worst = 0.0;
    bool delta_equal = true;
    for (int t = 0; t < 10; ++t) {
        auto truth = oracle::random_depth(rng, 8, 8, 0.25, 0.65);
        auto pred = oracle::random_depth(rng, 8, 8, 0.27, 0.63);
        for (std::size_t i = 0; i < 64; ++i) {
            truth.valid[i] = !drop(rng);
            pred.valid[i] = !drop(rng);
        }
        worst = std::max({worst, std::abs(depth_rmse(pred, truth) - oracle::rmse(pred, truth)),
                          std::abs(depth_mae(pred, truth) - oracle::mae(pred, truth)),
                          std::abs(loss_depth(pred, truth) - oracle::loss_depth(pred, truth)),
                          std::abs(loss_surface_normal(pred, truth) - oracle::loss_surface_normal(pred, truth))});
        for (double d : {1.05, 1.10, 1.25})
            delta_equal = delta_equal && std::abs(threshold_delta(pred, truth, d) - oracle::delta_percent(pred, truth, d)) <= 1e-12;
    }
    o.require(worst <= 1e-12, "metric differs from oracle");
    o.require(delta_equal, "delta differs from oracle");

    auto truth = oracle::random_depth(rng, 8, 8, 0.3, 0.6);
    DepthMap pred = truth;
    for (auto& v : pred.values) v *= 1.2;
    const double d110 = threshold_delta(pred, truth, 1.10), d125 = threshold_delta(pred, truth, 1.25);
    o.require(d110 == 0.0 && d125 == 100.0, "scaled-prediction deltas");
    o.detail << " max_abs_diff=" << worst << " delta_1.10=" << d110 << " delta_1.25=" << d125;
    return o;
}

// ---------------------------------------------------------------------------------------------
// 6. Cross-range resolution of a 0.4 m aperture at 0.6 m.

Outcome resolution() {
    Outcome o;
    const RadarConfig cfg = RadarConfig::with_samples(64);
    const double L = 0.4, z0 = 0.6;
    ApertureSpec spec;
    spec.n_x = 167;
    spec.n_y = 1;
    spec.pitch_x = L / 166.0;
    const Vec3 target{0.2, 0.0, z0};
    const auto cube = simulate(cfg, spec, kMono, {{target, {1.0, 0.0}}});

    ImageGrid g;
    g.nx = 301;
    g.ny = 1;
    g.pitch_x = 0.2e-3;
    g.pitch_y = 1e-3;
    g.origin_x = target.x - 150 * g.pitch_x;
    const auto img = backprojection_image(cube, g, z0);
    const auto prof = peak_profile(img, Axis::Horizontal);
    const double lambda = cfg.wavelength();
    const double nominal = lambda * z0 / (2 * L);
    const double rel = std::abs(prof.width_3db - nominal) / nominal;
    o.require(rel <= 0.30, "width outside 30% band");

    // Mainlobe: from the peak out to the first minimum on each side.
    const std::size_t pk = prof.peak_ix;
    std::size_t lo = pk, hi = pk;
    while (lo > 0 && prof.amplitudes[lo - 1] < prof.amplitudes[lo]) --lo;
    while (hi + 1 < prof.amplitudes.size() && prof.amplitudes[hi + 1] < prof.amplitudes[hi]) ++hi;
    std::vector<double> x(prof.offsets.begin() + lo, prof.offsets.begin() + hi + 1);
    std::vector<double> y(prof.amplitudes.begin() + lo, prof.amplitudes.begin() + hi + 1);
    auto sinc_abs = [](double u) { return u == 0.0 ? 1.0 : std::abs(std::sin(std::numbers::pi * u) / (std::numbers::pi * u)); };
    double best_w = 0.0, best_sse = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 4000; ++k) {
        const double w = nominal * 3.0 * k / 4000.0;
        double sps = 0, sss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double s = sinc_abs(x[i] / w);
            sps += y[i] * s;
            sss += s * s;
        }
        const double a = sps / sss;
        double sse = 0;
        for (std::size_t i = 0; i < x.size(); ++i) sse += std::pow(y[i] - a * sinc_abs(x[i] / w), 2);
        if (sse < best_sse) {
            best_sse = sse;
            best_w = w;
        }
    }
    std::vector<double> fit(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) fit[i] = sinc_abs(x[i] / best_w);
    const double ncc = oracle::pearson(y, fit);
    o.require(ncc >= 0.95, "sinc fit correlation");
    o.detail << " lambda_m=" << lambda << " nominal_m=" << nominal << " width_3db_m=" << prof.width_3db
             << " rel_dev=" << rel << " mainlobe_samples=" << x.size() << " sinc_ncc=" << ncc;
    return o;
}

// ---------------------------------------------------------------------------------------------
// 7. Diameter of a ring of point scatterers.

Outcome extent() {
    Outcome o;
    const RadarConfig cfg = RadarConfig::with_samples(64);
    ApertureSpec spec;
    spec.n_x = 81;
    spec.n_y = 81;
    const double z0 = 0.3, diameter = 0.12;
    const Vec3 c = spec.node(40, 40);
    std::vector<PointScatterer> ring;
    for (int k = 0; k < 64; ++k) {
        const double a = 2 * std::numbers::pi * k / 64.0;
        ring.push_back({{c.x + 0.5 * diameter * std::cos(a), c.y + 0.5 * diameter * std::sin(a), z0}, {1.0, 0.0}});
    }
    const auto img = rma_image(simulate(cfg, spec, kMono, ring), z0);
    const double est_h = estimate_extent(magnitude_image(img), img.pitch_x, 3.0, Axis::Horizontal);
    const double est_v = estimate_extent(magnitude_image(img), img.pitch_y, 3.0, Axis::Vertical);
    o.require(std::abs(est_h - diameter) <= 5e-3, "horizontal extent");
    o.require(std::abs(est_v - diameter) <= 5e-3, "vertical extent");
    o.detail << " threshold_db=3 horizontal_m=" << est_h << " vertical_m=" << est_v;
    return o;
}

// ---------------------------------------------------------------------------------------------
// 8. CLI determinism.

std::vector<std::pair<std::string, std::string>> run_pipeline(const fs::path& dir, const fs::path& cfg) {
    std::ostringstream sink;
    auto run = [&](std::vector<std::string> args) {
        std::ostringstream err;
        const int code = cli::run(args, sink, err);
        if (code != 0) throw std::runtime_error("cli failed: " + args[0] + ": " + err.str());
    };
    auto p = [&](const char* leaf) { return (dir / leaf).string(); };
    const std::string c = cfg.string();
    run({"simulate", "--config", c, "--seed", "77", "--out", p("cube.fgcb")});
    run({"inject", "--config", c, "--cube", p("cube.fgcb"), "--random", "--on-bin", "--seed", "78", "--errors-out",
         p("errors.csv"), "--out", p("bad.fgcb")});
    run({"calibrate", "--config", c, "--cube", p("bad.fgcb"), "--ref", "auto", "--out", p("model_auto.csv")});
    run({"calibrate", "--config", c, "--cube", p("bad.fgcb"), "--ref", "0.024,0.012,0.3", "--out", p("model.csv")});
    run({"compensate", "--cube", p("bad.fgcb"), "--model", p("model.csv"), "--out", p("fixed.fgcb")});
    run({"image", "--config", c, "--cube", p("fixed.fgcb"), "--method", "rma", "--sg", "--out", p("rma")});
    run({"image", "--config", c, "--cube", p("fixed.fgcb"), "--method", "bp", "--out", p("bp")});
    run({"profile", "--image", p("rma"), "--out", p("profile.csv")});
    run({"metrics", "entropy", "--image", p("rma")});
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        files.emplace_back(entry.path().filename().string(), std::string(std::istreambuf_iterator<char>(in), {}));
    }
    files.emplace_back("stdout", sink.str());
    std::sort(files.begin(), files.end());
    return files;
}

Outcome determinism() {
    Outcome o;
    const TestDir root("acceptance_determinism");
    fs::create_directories(root / "a");
    fs::create_directories(root / "b");
    std::ofstream(root / "scene.csv") << "0.024,0.012,0.3,1,0\n0.06,0.03,0.32,0.5,0.5\n";
    std::ofstream(root / "run.cfg") << "n_x=6\nn_y=11\nn_samples=64\nn_channels=4\nchannel_spacing=0.0024\n"
                                       "pitch_x=0.0096\nscene=scene.csv\nnoise_sigma=0.01\nz0=0.3\nthreads=1\n";
    try {
        const auto a = run_pipeline(root / "a", root / "run.cfg");
        const auto b = run_pipeline(root / "b", root / "run.cfg");
        std::size_t bytes = 0;
        for (const auto& f : a) bytes += f.second.size();
        o.require(a == b, "outputs differ between runs");
        o.detail << " files=" << a.size() << " bytes=" << bytes;
    } catch (const std::exception& e) {
        o.require(false, e.what());
    }
    return o;
}

// ---------------------------------------------------------------------------------------------
// 9. Full-size aperture performance and parallel agreement.

Outcome performance() {
    Outcome o;
    const RadarConfig cfg = RadarConfig::with_samples(256);
    ApertureSpec spec;
    spec.n_x = 161;
    spec.n_y = 84;
    const auto cube = simulate(cfg, spec, kMono,
                               {{{0.19, 0.1, 0.3}, {1.0, 0.0}}, {{0.1, 0.05, 0.35}, {0.7, 0.2}}, {{0.3, 0.15, 0.28}, {0.4, -0.4}}});
    RmaOptions serial;
    const auto t0 = Clock::now();
    const auto a = rma_image(cube, 0.3, serial);
    const double t_serial = seconds_since(t0);
    RmaOptions par;
    par.threads = 4;
    const auto t1 = Clock::now();
    const auto b = rma_image(cube, 0.3, par);
    const double t_par = seconds_since(t1);
    const double rel = max_rel(b.values.data, a.values.data);
    o.require(t_serial <= 30.0, "serial RMA slower than 30 s");
    o.require(rel <= 1e-9, "parallel result differs");
    o.detail << " grid=" << a.nx() << "x" << a.ny() << " serial_s=" << t_serial << " parallel4_s=" << t_par
             << " parallel_rel_diff=" << rel;
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence (RMA vs backprojection)", oracle_equivalence},
        {"calibration round trip", calibration_round_trip},
        {"multilateration", multilateration},
        {"synchronization round trip", synchronization},
        {"metric oracles", metric_oracles},
        {"resolution sanity", resolution},
        {"extent estimation", extent},
        {"determinism", determinism},
        {"performance envelope", performance},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome r;
        const auto t0 = Clock::now();
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r.require(false, std::string("exception: ") + e.what());
        }
        if (!r.pass) ++failed;
        std::printf("[%s] %zu %s |%s (%.2f s)\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    r.detail.str().c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed;
}
