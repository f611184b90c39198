#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fgradar/signal_model.hpp"

namespace fgradar {

/// One sample of the robot position stream.
struct TimestampedPose {
    Vec3 position;
    double timestamp = 0.0;
};

/// One radar frame: all channels of one chirp, [channel][sample].
struct TimestampedFrame {
    double timestamp = 0.0;
    std::vector<cdouble> samples;
};

struct AlignmentReport {
    std::vector<std::size_t> frame_for_pose;  ///< pose index -> frame index
    std::size_t dropped_frames = 0;           ///< frames no pose selected
    double max_mismatch = 0.0;                ///< max |t_frame - t_pose| over matches (s)
};

/// Geometry the signal matrix is assembled onto.
struct GridSpec {
    ApertureSpec aperture;
    std::vector<Vec3> channel_offsets;
    RadarConfig config;
};

/// Frames with timestamps inside [first pose time, last pose time].
std::vector<TimestampedFrame> trim_streams(std::span<const TimestampedPose> poses,
                                           std::span<const TimestampedFrame> frames);

/// Nearest-timestamp match for every target pose; equidistant frames resolve to the earlier one.
AlignmentReport align(std::span<const TimestampedPose> target_poses,
                      std::span<const TimestampedFrame> frames);

/// For each grid node, the stream pose closest to it in space (within a quarter pitch).
/// Returned in node order [ix][iy]. Throws StructuralError naming unreached nodes.
std::vector<TimestampedPose> select_grid_poses(std::span<const TimestampedPose> pose_stream,
                                               const GridSpec& grid);

/// Places each matched frame at the grid cell its pose maps to. Cells are found by nearest node
/// within a quarter pitch. Cube positions are the node positions plus channel offsets; cube
/// timestamps are the matched frame timestamps.
RawDataCube build_signal_matrix(const AlignmentReport& report,
                                std::span<const TimestampedPose> poses,
                                std::span<const TimestampedFrame> frames, const GridSpec& grid);

}  // namespace fgradar
