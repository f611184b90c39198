#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fgradar/calibration.hpp"
#include "fgradar/imaging.hpp"
#include "fgradar/signal_model.hpp"
#include "fgradar/stream_sync.hpp"

namespace fgradar {

/// Flat key=value pipeline configuration. Unset keys keep the desk-scale defaults below.
struct RunConfig {
    RadarConfig radar = RadarConfig::with_samples(256);
    ApertureSpec aperture;
    std::size_t n_channels = 1;
    double channel_spacing = 0.0;  ///< 0 selects half the start-frequency wavelength
    double z0 = 0.3;
    std::filesystem::path scene;   ///< empty: no scatterers
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::size_t zero_pad = 8;
    SgParams sg;
    unsigned threads = 1;
    std::size_t pad_x = 0;
    std::size_t pad_y = 0;
    bool hann = false;

    std::vector<Vec3> channel_offsets() const;
    GridSpec grid_spec() const;

    /// Throws ConfigError on invalid values.
    void validate() const;

    /// Applies key=value lines ('#' comments). Unknown keys raise ConfigError.
    static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
    static RunConfig load(const std::filesystem::path& path);
};

}  // namespace fgradar
