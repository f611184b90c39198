#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fgradar/image.hpp"
#include "fgradar/signal_model.hpp"

namespace fgradar {

struct RangeProfile {
    std::vector<double> magnitude;  ///< |FFT| of the zero-padded fast-time vector
    std::size_t peak_bin = 0;
    double peak_distance = 0.0;     ///< meters
    double bin_spacing = 0.0;       ///< meters per bin
};

/// Beat-frequency range profile; bin b maps to d = b * fs * c / (2 * K * N_fft).
RangeProfile range_profile(std::span<const cdouble> fast_time, const RadarConfig& cfg,
                           std::size_t zero_pad = 8);

struct ReferenceEstimate {
    Vec3 point;
    double residual_rms = 0.0;  ///< RMS of |pose - point| - d_k (m)
};

/// Multilateration: pairwise-difference linear least squares followed by one Gauss-Newton step.
/// Needs >= 4 poses spanning three dimensions; degenerate geometry throws GeometryError.
ReferenceEstimate estimate_reference_point(std::span<const Vec3> poses, std::span<const double> distances);

/// Multilateration for poses lying in one plane z = const (a scanned aperture). The in-plane
/// coordinates come from the linearised system; the out-of-plane offset is recovered from the
/// ranges and placed on the side given by `side` (+1 above, -1 below). Followed by one
/// Gauss-Newton step. Collinear poses throw GeometryError.
ReferenceEstimate estimate_reference_point_planar(std::span<const Vec3> poses,
                                                  std::span<const double> distances, int side = +1);

/// Centered moving average with windows shrunk at the ends.
std::vector<double> average_adjacent_distances(std::span<const double> distances, std::size_t window);

/// Unit-gain IF samples for a point target at `point` seen from `pose`.
std::vector<cdouble> reference_signal(const RadarConfig& cfg, const Vec3& pose, const Vec3& point);

struct CalibrationModel {
    std::vector<double> f_hat;     ///< per-channel phase rate (Hz)
    std::vector<cdouble> alpha;    ///< per-channel complex gain

    std::size_t n_channels() const { return f_hat.size(); }
    static CalibrationModel identity(std::size_t n_channels);
};

enum class RateEstimator {
    PerChannel,  ///< f_l = argmax |W_l(f)|
    Joint,       ///< one f for all channels, argmax sum_l |W_l(f)|^2
};

/// Frequency grid of the zero-padded FFT used by estimate_phase_rate, signed (Hz).
double phase_rate_bin_frequency(std::size_t bin, std::size_t n_fft, double fs);

/// W_l = FFT(measured_l * conj(reference_l)) zero-padded by `zero_pad`; rates from the peak,
/// gains from the mean residual after removing the ramp.
CalibrationModel estimate_phase_rate(std::span<const std::vector<cdouble>> measured,
                                     std::span<const std::vector<cdouble>> references,
                                     const RadarConfig& cfg, std::size_t zero_pad = 8,
                                     RateEstimator mode = RateEstimator::PerChannel);

/// Same, with one reference shared by every channel.
CalibrationModel estimate_phase_rate(std::span<const std::vector<cdouble>> measured,
                                     std::span<const cdouble> reference, const RadarConfig& cfg,
                                     std::size_t zero_pad = 8,
                                     RateEstimator mode = RateEstimator::PerChannel);

/// Model that exactly undoes `errors`.
CalibrationModel exact_model(std::span<const ChannelError> errors, const RadarConfig& cfg);

/// Multiplies channel l by exp(-j*2*pi*f_l*t) / alpha_l.
RawDataCube compensate(const RawDataCube& cube, const CalibrationModel& model);

struct SgParams {
    std::size_t short_window = 11;
    std::size_t long_window = 101;
    std::size_t order = 3;

    /// Windows clamped to `length` and forced odd; order lowered below the short window.
    SgParams clamped_to(std::size_t length) const;
};

/// Least-squares local polynomial smoothing of a real sequence; windows truncated at the ends.
std::vector<double> sg_smooth(std::span<const double> signal, std::size_t window, std::size_t order);

/// Band-pass: SG_smooth(short) - SG_smooth(long), applied to I and Q independently.
std::vector<cdouble> sg_filter(std::span<const cdouble> signal, std::size_t short_window,
                               std::size_t long_window, std::size_t order);

/// sg_filter applied to every fast-time vector of the cube.
RawDataCube sg_filter_cube(const RawDataCube& cube, const SgParams& params);

/// Element-wise difference of two images on the same grid.
ComplexImage background_subtract(const ComplexImage& scene, const ComplexImage& background);

}  // namespace fgradar
