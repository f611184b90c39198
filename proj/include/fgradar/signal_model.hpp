#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fgradar/types.hpp"

namespace fgradar {

/// FMCW waveform and sampling parameters.
struct RadarConfig {
    double f0 = 61.8e9;         ///< chirp start frequency (Hz)
    double bandwidth = 3.6e9;   ///< swept bandwidth B (Hz)
    double duration = 256.0 / 4.4e6;  ///< chirp duration T (s)
    double fs = 4.4e6;          ///< complex sample rate (Hz)
    std::size_t n_samples = 256;
    double c = kSpeedOfLight;

    double slope() const { return bandwidth / duration; }
    double sample_time(std::size_t i) const { return static_cast<double>(i) / fs; }
    double wavelength() const { return c / f0; }

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    /// Defaults with T = n_samples / fs.
    static RadarConfig with_samples(std::size_t n_samples);
};

struct PointScatterer {
    Vec3 position;
    cdouble reflectivity{1.0, 0.0};
};

struct Scene {
    std::vector<PointScatterer> scatterers;
};

struct AperturePose {
    Vec3 position;
    double timestamp = 0.0;
    std::uint32_t channel = 0;
};

/// Virtual-element poses on an n_x x n_y scan grid with n_channels elements per grid position.
/// Poses are stored x-major: [ix][iy][channel].
struct ApertureGrid {
    std::size_t n_x = 0;
    std::size_t n_y = 0;
    std::size_t n_channels = 0;
    std::vector<AperturePose> poses;

    std::size_t index(std::size_t ix, std::size_t iy, std::size_t ch) const {
        return (ix * n_y + iy) * n_channels + ch;
    }
    const AperturePose& at(std::size_t ix, std::size_t iy, std::size_t ch) const {
        return poses[index(ix, iy, ch)];
    }
    std::size_t element_count() const { return n_x * n_y * n_channels; }
};

/// Regular planar scan described by its first node and pitches.
struct ApertureSpec {
    std::size_t n_x = 41;
    std::size_t n_y = 21;
    double pitch_x = 2.4e-3;
    double pitch_y = 2.4e-3;
    Vec3 start{};
    double frame_period = 0.0125;  ///< seconds between consecutive scan positions
    double t_start = 0.0;

    Vec3 node(std::size_t ix, std::size_t iy) const {
        return {start.x + static_cast<double>(ix) * pitch_x,
                start.y + static_cast<double>(iy) * pitch_y, start.z};
    }
    /// Position of (ix, iy) in the serpentine scan: rows along x, direction alternating per row.
    std::size_t scan_sequence(std::size_t ix, std::size_t iy) const {
        return iy * n_x + ((iy % 2 == 0) ? ix : n_x - 1 - ix);
    }
};

/// Per-channel element offsets: n channels spaced `spacing` along x, first at the origin.
std::vector<Vec3> linear_channel_offsets(std::size_t n, double spacing);

/// Builds the virtual-element grid; channel ch of node (ix, iy) sits at node + offsets[ch] and
/// carries the node's serpentine timestamp.
ApertureGrid make_aperture(const ApertureSpec& spec, std::span<const Vec3> channel_offsets);

struct RawDataCube {
    RadarConfig config;
    ApertureGrid grid;
    std::vector<cdouble> samples;  ///< [ix][iy][channel][sample]

    std::size_t n_x() const { return grid.n_x; }
    std::size_t n_y() const { return grid.n_y; }
    std::size_t n_channels() const { return grid.n_channels; }
    std::size_t n_samples() const { return config.n_samples; }

    std::span<cdouble> element(std::size_t flat_element) {
        return {samples.data() + flat_element * config.n_samples, config.n_samples};
    }
    std::span<const cdouble> element(std::size_t flat_element) const {
        return {samples.data() + flat_element * config.n_samples, config.n_samples};
    }
    std::span<const cdouble> element(std::size_t ix, std::size_t iy, std::size_t ch) const {
        return element(grid.index(ix, iy, ch));
    }

    /// Throws ConfigError on inconsistent dimensions or non-finite samples.
    void validate() const;
};

struct ChannelError {
    cdouble alpha{1.0, 0.0};  ///< residual complex gain
    double tau = 0.0;         ///< residual delay (s); phase rate is slope * tau
};

struct SimulationOptions {
    double noise_sigma = 0.0;  ///< per-component standard deviation of additive noise
    std::uint64_t seed = 0;
    bool include_rvp = false;  ///< keep the residual video phase term -0.5*K*tau^2
    unsigned threads = 1;
};

/// exp(j*2*pi*(f0*t + 0.5*K*t^2)), t in [0, T].
cdouble chirp_phase(const RadarConfig& cfg, double t);

/// One IF sample for a scatterer at range d: g * exp(j*2*pi*(f0 + K*t)*tau), tau = 2d/c.
cdouble if_sample(const RadarConfig& cfg, double t, double d, cdouble g, bool include_rvp = false);

/// Fast-time wavenumbers k_i = 2*pi*(f0 + K*i/fs)/c.
std::vector<double> wavenumber_samples(const RadarConfig& cfg);

/// Superposes every scatterer at every virtual element, then adds circular Gaussian noise.
/// Noise is drawn serially in element order, so the result does not depend on `threads`.
RawDataCube simulate_cube(const RadarConfig& cfg, const Scene& scene, const ApertureGrid& poses,
                          const SimulationOptions& opts = {});

/// Multiplies channel l by alpha_l * exp(j*2*pi*K*tau_l*t). Returns a new cube.
RawDataCube inject_channel_error(const RawDataCube& cube, std::span<const ChannelError> errors);

}  // namespace fgradar
