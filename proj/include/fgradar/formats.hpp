#pragma once

// On-disk formats. Text readers skip blank lines and '#' comments. Binary formats are
// little-endian. Unopenable inputs raise MissingInputError; malformed contents raise FormatError.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fgradar/calibration.hpp"
#include "fgradar/image.hpp"
#include "fgradar/metrics.hpp"
#include "fgradar/signal_model.hpp"
#include "fgradar/stream_sync.hpp"

namespace fgradar::formats {

namespace fs = std::filesystem;

/// "x,y,z,re,im" per scatterer.
Scene read_scene(const fs::path& path);
void write_scene(const fs::path& path, const Scene& scene);

/// "x,y,z,t,channel" per virtual element.
std::vector<AperturePose> read_poses(const fs::path& path);
void write_poses(const fs::path& path, std::span<const AperturePose> poses);

/// "FGCB" cube: u16 version, u32 n_x n_y n_channels n_samples, six f64 config values
/// (f0, B, T, fs, n_samples, c), f64 (x, y, z, t) per element, f32 (I, Q) per sample.
void write_cube(const fs::path& path, const RawDataCube& cube);
RawDataCube read_cube(const fs::path& path);
std::vector<char> encode_cube(const RawDataCube& cube);
RawDataCube decode_cube(std::span<const char> bytes);

/// "t,x,y,z" per pose.
std::vector<TimestampedPose> read_pose_stream(const fs::path& path);
void write_pose_stream(const fs::path& path, std::span<const TimestampedPose> poses);

struct FrameStream {
    std::size_t n_channels = 0;
    std::size_t n_samples = 0;
    std::vector<TimestampedFrame> frames;
};

/// "FGFR": u32 n_frames, n_channels, n_samples, then per frame f64 timestamp and f32 (I, Q) samples.
FrameStream read_frame_stream(const fs::path& path);
void write_frame_stream(const fs::path& path, const FrameStream& stream);

/// "channel,f_hat_hz,alpha_re,alpha_im" per channel, channels in order from 0.
CalibrationModel read_model(const fs::path& path);
void write_model(const fs::path& path, const CalibrationModel& model);

/// "channel,alpha_re,alpha_im,tau_s" per channel.
std::vector<ChannelError> read_channel_errors(const fs::path& path);
void write_channel_errors(const fs::path& path, std::span<const ChannelError> errors);

/// Writes <prefix>.pgm (16-bit magnitude, min-max normalized, row iy, column ix),
/// <prefix>.csv ("re,im" per pixel in the same order) and <prefix>.meta (grid sidecar).
void write_image(const fs::path& prefix, const ComplexImage& img);
/// Reads the CSV and sidecar written by write_image.
ComplexImage read_image(const fs::path& prefix);
void write_pgm16(const fs::path& path, const Grid2D<double>& magnitudes);

/// Header "H W" followed by H rows of W values.
DepthMap read_depth_map(const fs::path& path);
void write_depth_map(const fs::path& path, const DepthMap& map);
/// Same layout with 0/1 entries; applied to map.valid. Shape mismatch raises ShapeError.
void apply_mask_file(const fs::path& path, DepthMap& map);

/// One real value per line (or comma/space separated).
std::vector<double> read_values(const fs::path& path);

/// Full-precision decimal rendering used by every text writer.
std::string format_double(double v);

}  // namespace fgradar::formats
