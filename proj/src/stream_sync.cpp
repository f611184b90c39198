#include "fgradar/stream_sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include "fgradar/errors.hpp"

namespace fgradar {

namespace {

void check_sorted(std::span<const TimestampedPose> poses) {
    for (std::size_t i = 1; i < poses.size(); ++i) {
        if (!(poses[i].timestamp > poses[i - 1].timestamp))
            throw ConfigError("pose stream timestamps must be strictly increasing");
    }
}

void check_sorted(std::span<const TimestampedFrame> frames) {
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (!(frames[i].timestamp > frames[i - 1].timestamp))
            throw ConfigError("frame stream timestamps must be strictly increasing");
        if (frames[i].samples.size() != frames[0].samples.size())
            throw ConfigError("frame sample dimensions differ between frames");
    }
}

// Nearest grid node within a quarter pitch, if any.
std::optional<std::pair<std::size_t, std::size_t>> grid_cell(const ApertureSpec& ap, const Vec3& p) {
    const double fx = (p.x - ap.start.x) / ap.pitch_x;
    const double fy = (p.y - ap.start.y) / ap.pitch_y;
    const double rx = std::round(fx);
    const double ry = std::round(fy);
    if (rx < 0.0 || ry < 0.0 || rx >= static_cast<double>(ap.n_x) || ry >= static_cast<double>(ap.n_y))
        return std::nullopt;
    if (std::abs(fx - rx) > 0.25 || std::abs(fy - ry) > 0.25) return std::nullopt;
    return std::pair{static_cast<std::size_t>(rx), static_cast<std::size_t>(ry)};
}

std::string format_cells(const std::vector<std::pair<std::size_t, std::size_t>>& cells) {
    std::ostringstream os;
    const std::size_t shown = std::min<std::size_t>(cells.size(), 16);
    for (std::size_t i = 0; i < shown; ++i) {
        if (i) os << ", ";
        os << '(' << cells[i].first << ',' << cells[i].second << ')';
    }
    if (cells.size() > shown) os << ", ... (" << cells.size() << " total)";
    return os.str();
}

}  // namespace

std::vector<TimestampedFrame> trim_streams(std::span<const TimestampedPose> poses,
                                           std::span<const TimestampedFrame> frames) {
    if (poses.empty()) throw ConfigError("trim: empty pose stream");
    if (frames.empty()) throw ConfigError("trim: empty frame stream");
    check_sorted(poses);
    check_sorted(frames);
    const double t0 = poses.front().timestamp;
    const double t1 = poses.back().timestamp;
    std::vector<TimestampedFrame> out;
    for (const auto& f : frames) {
        if (f.timestamp >= t0 && f.timestamp <= t1) out.push_back(f);
    }
    return out;
}

AlignmentReport align(std::span<const TimestampedPose> target_poses,
                      std::span<const TimestampedFrame> frames) {
    if (frames.empty()) throw ConfigError("align: no frames");
    check_sorted(frames);

    AlignmentReport report;
    report.frame_for_pose.reserve(target_poses.size());
    std::vector<bool> used(frames.size(), false);
    for (const auto& pose : target_poses) {
        const double t = pose.timestamp;
        auto it = std::lower_bound(frames.begin(), frames.end(), t,
                                   [](const TimestampedFrame& f, double v) { return f.timestamp < v; });
        std::size_t idx = static_cast<std::size_t>(it - frames.begin());
        if (idx == frames.size()) {
            idx = frames.size() - 1;
        } else if (idx > 0) {
            const double before = t - frames[idx - 1].timestamp;
            const double after = frames[idx].timestamp - t;
            if (before <= after) idx -= 1;
        }
        report.frame_for_pose.push_back(idx);
        used[idx] = true;
        report.max_mismatch = std::max(report.max_mismatch, std::abs(frames[idx].timestamp - t));
    }
    report.dropped_frames = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
    return report;
}

std::vector<TimestampedPose> select_grid_poses(std::span<const TimestampedPose> pose_stream,
                                               const GridSpec& grid) {
    const ApertureSpec& ap = grid.aperture;
    const std::size_t cells = ap.n_x * ap.n_y;
    if (cells == 0) throw ConfigError("select_grid_poses: empty grid");
    std::vector<double> best(cells, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> pick(cells, pose_stream.size());
    for (std::size_t i = 0; i < pose_stream.size(); ++i) {
        const auto cell = grid_cell(ap, pose_stream[i].position);
        if (!cell) continue;
        const std::size_t c = cell->first * ap.n_y + cell->second;
        const double d = distance(pose_stream[i].position, ap.node(cell->first, cell->second));
        if (d < best[c]) {
            best[c] = d;
            pick[c] = i;
        }
    }
    std::vector<std::pair<std::size_t, std::size_t>> missing;
    std::vector<TimestampedPose> out;
    out.reserve(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        if (pick[c] == pose_stream.size()) {
            missing.emplace_back(c / ap.n_y, c % ap.n_y);
            continue;
        }
        out.push_back(pose_stream[pick[c]]);
    }
    if (!missing.empty())
        throw StructuralError("no pose reaches grid cells " + format_cells(missing));
    return out;
}

RawDataCube build_signal_matrix(const AlignmentReport& report,
                                std::span<const TimestampedPose> poses,
                                std::span<const TimestampedFrame> frames, const GridSpec& grid) {
    grid.config.validate();
    const ApertureSpec& ap = grid.aperture;
    const std::size_t n_ch = grid.channel_offsets.size();
    const std::size_t n_s = grid.config.n_samples;
    if (ap.n_x == 0 || ap.n_y == 0 || n_ch == 0) throw ConfigError("build: empty grid");
    if (report.frame_for_pose.size() != poses.size())
        throw ConfigError("build: alignment report does not match pose list");

    const std::size_t cells = ap.n_x * ap.n_y;
    std::vector<std::size_t> owner(cells, poses.size());
    std::vector<std::pair<std::size_t, std::size_t>> doubled;
    std::vector<std::size_t> outside;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        const auto cell = grid_cell(ap, poses[i].position);
        if (!cell) {
            outside.push_back(i);
            continue;
        }
        const std::size_t c = cell->first * ap.n_y + cell->second;
        if (owner[c] != poses.size()) {
            doubled.push_back(*cell);
        } else {
            owner[c] = i;
        }
        const std::size_t f = report.frame_for_pose[i];
        if (f >= frames.size()) throw ConfigError("build: frame index out of range");
        if (frames[f].samples.size() != n_ch * n_s)
            throw ConfigError("build: frame size does not match n_channels * n_samples");
    }
    std::vector<std::pair<std::size_t, std::size_t>> missing;
    for (std::size_t c = 0; c < cells; ++c) {
        if (owner[c] == poses.size()) missing.emplace_back(c / ap.n_y, c % ap.n_y);
    }
    if (!missing.empty() || !doubled.empty() || !outside.empty()) {
        std::ostringstream os;
        os << "signal matrix does not cover the grid exactly once:";
        if (!missing.empty()) os << " uncovered cells " << format_cells(missing) << ';';
        if (!doubled.empty()) os << " doubly covered cells " << format_cells(doubled) << ';';
        if (!outside.empty()) os << ' ' << outside.size() << " poses off the grid;";
        throw StructuralError(os.str());
    }

    RawDataCube cube;
    cube.config = grid.config;
    cube.grid.n_x = ap.n_x;
    cube.grid.n_y = ap.n_y;
    cube.grid.n_channels = n_ch;
    cube.grid.poses.resize(cube.grid.element_count());
    cube.samples.resize(cube.grid.element_count() * n_s);
    for (std::size_t ix = 0; ix < ap.n_x; ++ix) {
        for (std::size_t iy = 0; iy < ap.n_y; ++iy) {
            const std::size_t p = owner[ix * ap.n_y + iy];
            const auto& frame = frames[report.frame_for_pose[p]];
            const Vec3 node = ap.node(ix, iy);
            for (std::size_t ch = 0; ch < n_ch; ++ch) {
                const std::size_t el = cube.grid.index(ix, iy, ch);
                cube.grid.poses[el] = {node + grid.channel_offsets[ch], frame.timestamp,
                                       static_cast<std::uint32_t>(ch)};
                std::copy_n(frame.samples.begin() + static_cast<std::ptrdiff_t>(ch * n_s), n_s,
                            cube.element(el).begin());
            }
        }
    }
    return cube;
}

}  // namespace fgradar
