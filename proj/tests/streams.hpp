#pragma once

// Turns a cube into the asynchronous pose and frame streams a scan would have recorded.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fgradar/stream_sync.hpp"

namespace streams {

using namespace fgradar;

struct Recording {
    RawDataCube truth;  ///< input cube with timestamps replaced by the jittered frame times
    std::vector<TimestampedPose> poses;
    std::vector<TimestampedFrame> frames;
};

/// Frames carry the cube samples at t_start + seq * frame_period plus uniform jitter of up to
/// `frame_jitter` periods. Poses sample the piecewise-linear serpentine path at `pose_rate` Hz
/// with timestamp jitter of up to `pose_jitter` seconds. Extra frames precede and follow the scan.
inline Recording record(const RawDataCube& cube, const ApertureSpec& spec, std::mt19937_64& rng,
                        double frame_jitter = 0.4, double pose_rate = 1000.0, double pose_jitter = 1e-4,
                        std::size_t extra_frames = 6) {
    const double period = spec.frame_period;
    const std::size_t nodes = spec.n_x * spec.n_y;
    std::vector<std::pair<std::size_t, std::size_t>> order(nodes);
    for (std::size_t ix = 0; ix < spec.n_x; ++ix)
        for (std::size_t iy = 0; iy < spec.n_y; ++iy) order[spec.scan_sequence(ix, iy)] = {ix, iy};

    Recording rec;
    rec.truth = cube;
    std::uniform_real_distribution<double> fj(-frame_jitter * period, frame_jitter * period);
    const std::size_t per_frame = cube.n_channels() * cube.n_samples();

    for (std::size_t e = 0; e < extra_frames; ++e) {
        TimestampedFrame f;
        f.timestamp = spec.t_start - static_cast<double>(extra_frames - e) * period + fj(rng);
        f.samples.assign(per_frame, cdouble{0.25, -0.5});
        rec.frames.push_back(std::move(f));
    }
    for (std::size_t s = 0; s < nodes; ++s) {
        const auto [ix, iy] = order[s];
        TimestampedFrame f;
        f.timestamp = spec.t_start + static_cast<double>(s) * period + fj(rng);
        for (std::size_t ch = 0; ch < cube.n_channels(); ++ch) {
            const auto src = cube.element(ix, iy, ch);
            f.samples.insert(f.samples.end(), src.begin(), src.end());
            rec.truth.grid.poses[cube.grid.index(ix, iy, ch)].timestamp = f.timestamp;
        }
        rec.frames.push_back(std::move(f));
    }
    for (std::size_t e = 0; e < extra_frames; ++e) {
        TimestampedFrame f;
        f.timestamp = spec.t_start + static_cast<double>(nodes + e) * period + fj(rng);
        f.samples.assign(per_frame, cdouble{-1.0, 0.125});
        rec.frames.push_back(std::move(f));
    }

    // Linear motion along the serpentine, extended along the first and last segments.
    auto path = [&](double t) {
        const double u = (t - spec.t_start) / period;
        const std::size_t last = nodes > 1 ? nodes - 2 : 0;
        const auto s = u <= 0.0 ? 0 : std::min(static_cast<std::size_t>(u), last);
        const std::size_t s1 = std::min(s + 1, nodes - 1);
        const double w = u - static_cast<double>(s);
        const Vec3 a = spec.node(order[s].first, order[s].second);
        const Vec3 b = spec.node(order[s1].first, order[s1].second);
        return a + w * (b - a);
    };
    std::uniform_real_distribution<double> pj(-pose_jitter, pose_jitter);
    const double t0 = spec.t_start - 2.0 * period;
    const double t1 = spec.t_start + static_cast<double>(nodes + 1) * period;
    const auto count = static_cast<std::size_t>((t1 - t0) * pose_rate);
    for (std::size_t i = 0; i <= count; ++i) {
        const double t = t0 + static_cast<double>(i) / pose_rate;
        rec.poses.push_back({path(t), t + pj(rng)});
    }
    return rec;
}

inline RawDataCube reconstruct(const Recording& rec, const GridSpec& grid, AlignmentReport* report_out = nullptr) {
    const auto trimmed = trim_streams(rec.poses, rec.frames);
    const auto targets = select_grid_poses(rec.poses, grid);
    const auto report = align(targets, trimmed);
    if (report_out) *report_out = report;
    return build_signal_matrix(report, targets, trimmed, grid);
}

}  // namespace streams
