#include "fgradar/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fgradar/errors.hpp"
#include "fgradar/fft.hpp"

namespace fgradar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cdouble unit_phasor(double cycles) { return std::polar(1.0, kTwoPi * (cycles - std::floor(cycles))); }

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

bool all_zero(std::span<const cdouble> v) {
    return std::all_of(v.begin(), v.end(), [](const cdouble& z) { return z == cdouble{}; });
}

// One Gauss-Newton step on sum_k (|p - x_k| - d_k)^2; returns refined point and RMS residual.
ReferenceEstimate gauss_newton_step(std::span<const Vec3> poses, std::span<const double> d, Vec3 p) {
    const auto n = static_cast<Eigen::Index>(poses.size());
    Eigen::MatrixXd jac(n, 3);
    Eigen::VectorXd res(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Vec3 diff = p - poses[k];
        const double r = diff.norm();
        res(k) = r - d[k];
        if (r > 0.0) {
            jac.row(k) << diff.x / r, diff.y / r, diff.z / r;
        } else {
            jac.row(k).setZero();
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // Skip directions the geometry cannot observe (e.g. height when the target is in-plane).
    svd.setThreshold(1e-9);
    const Eigen::Vector3d step = svd.solve(-res);
    p = p + Vec3{step(0), step(1), step(2)};

    double ss = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double r = distance(p, poses[k]) - d[k];
        ss += r * r;
    }
    return {p, std::sqrt(ss / static_cast<double>(n))};
}

void check_multilateration_input(std::span<const Vec3> poses, std::span<const double> distances,
                                 std::size_t min_poses) {
    if (poses.size() != distances.size())
        throw ConfigError("multilateration: pose and distance counts differ");
    if (poses.size() < min_poses)
        throw GeometryError("multilateration: at least " + std::to_string(min_poses) + " poses required");
    for (double d : distances) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("multilateration: invalid distance");
    }
}

}  // namespace

RangeProfile range_profile(std::span<const cdouble> fast_time, const RadarConfig& cfg,
                           std::size_t zero_pad) {
    cfg.validate();
    if (zero_pad < 1) throw ConfigError("range_profile: zero_pad must be >= 1");
    if (fast_time.empty() || all_zero(fast_time)) throw NoPeakError("range_profile: all-zero input");
    const std::size_t n_fft = fast_time.size() * zero_pad;
    std::vector<cdouble> spec(n_fft);
    fft::forward_padded(fast_time, spec);

    RangeProfile out;
    out.magnitude.resize(n_fft);
    std::transform(spec.begin(), spec.end(), out.magnitude.begin(), [](const cdouble& z) { return std::abs(z); });
    out.peak_bin = argmax(out.magnitude);
    if (!(out.magnitude[out.peak_bin] > 0.0)) throw NoPeakError("range_profile: no peak");
    out.bin_spacing = cfg.fs * cfg.c / (2.0 * cfg.slope() * static_cast<double>(n_fft));
    out.peak_distance = static_cast<double>(out.peak_bin) * out.bin_spacing;
    return out;
}

ReferenceEstimate estimate_reference_point(std::span<const Vec3> poses, std::span<const double> distances) {
    check_multilateration_input(poses, distances, 4);
    const auto rows = static_cast<Eigen::Index>(poses.size() - 1);
    Eigen::MatrixXd a(rows, 3);
    Eigen::VectorXd b(rows);
    const Vec3& p0 = poses[0];
    const double d0 = distances[0];
    for (Eigen::Index k = 0; k < rows; ++k) {
        const Vec3& pk = poses[static_cast<std::size_t>(k) + 1];
        const double dk = distances[static_cast<std::size_t>(k) + 1];
        a.row(k) << 2.0 * (pk.x - p0.x), 2.0 * (pk.y - p0.y), 2.0 * (pk.z - p0.z);
        b(k) = pk.dot(pk) - p0.dot(p0) - dk * dk + d0 * d0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(2) / sv(0) < 1e-9)
        throw GeometryError("multilateration: rank-deficient geometry (collinear or coplanar poses)");
    const Eigen::Vector3d x = svd.solve(b);
    return gauss_newton_step(poses, distances, {x(0), x(1), x(2)});
}

ReferenceEstimate estimate_reference_point_planar(std::span<const Vec3> poses,
                                                  std::span<const double> distances, int side) {
    check_multilateration_input(poses, distances, 3);
    const double z_plane = poses[0].z;
    double scale = 0.0;
    for (const auto& p : poses) scale = std::max({scale, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
    for (const auto& p : poses) {
        if (std::abs(p.z - z_plane) > 1e-9 * std::max(1.0, scale))
            throw GeometryError("multilateration: poses are not coplanar in z");
    }
    const auto rows = static_cast<Eigen::Index>(poses.size() - 1);
    Eigen::MatrixXd a(rows, 2);
    Eigen::VectorXd b(rows);
    const Vec3& p0 = poses[0];
    const double d0 = distances[0];
    for (Eigen::Index k = 0; k < rows; ++k) {
        const Vec3& pk = poses[static_cast<std::size_t>(k) + 1];
        const double dk = distances[static_cast<std::size_t>(k) + 1];
        a.row(k) << 2.0 * (pk.x - p0.x), 2.0 * (pk.y - p0.y);
        b(k) = pk.x * pk.x + pk.y * pk.y - p0.x * p0.x - p0.y * p0.y - dk * dk + d0 * d0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(1) / sv(0) < 1e-9)
        throw GeometryError("multilateration: collinear poses");
    const Eigen::Vector2d xy = svd.solve(b);

    double h2 = 0.0;
    for (std::size_t k = 0; k < poses.size(); ++k) {
        const double dx = poses[k].x - xy(0);
        const double dy = poses[k].y - xy(1);
        h2 += distances[k] * distances[k] - dx * dx - dy * dy;
    }
    h2 = std::max(0.0, h2 / static_cast<double>(poses.size()));
    const double sign = side >= 0 ? 1.0 : -1.0;
    return gauss_newton_step(poses, distances, {xy(0), xy(1), z_plane + sign * std::sqrt(h2)});
}

std::vector<double> average_adjacent_distances(std::span<const double> distances, std::size_t window) {
    if (distances.empty()) throw ConfigError("average_adjacent_distances: empty list");
    if (window % 2 == 0 || window > distances.size())
        throw ConfigError("average_adjacent_distances: window must be odd and <= list length");
    const std::size_t half = window / 2;
    const std::size_t n = distances.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        double sum = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) sum += distances[j];
        out[i] = sum / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::vector<cdouble> reference_signal(const RadarConfig& cfg, const Vec3& pose, const Vec3& point) {
    cfg.validate();
    const double d = distance(pose, point);
    std::vector<cdouble> out(cfg.n_samples);
    for (std::size_t i = 0; i < cfg.n_samples; ++i) out[i] = if_sample(cfg, cfg.sample_time(i), d, 1.0);
    return out;
}

CalibrationModel CalibrationModel::identity(std::size_t n_channels) {
    return {std::vector<double>(n_channels, 0.0), std::vector<cdouble>(n_channels, cdouble{1.0, 0.0})};
}

double phase_rate_bin_frequency(std::size_t bin, std::size_t n_fft, double fs) {
    const auto b = static_cast<double>(bin);
    const auto n = static_cast<double>(n_fft);
    return (bin < n_fft / 2 ? b : b - n) * fs / n;
}

CalibrationModel estimate_phase_rate(std::span<const std::vector<cdouble>> measured,
                                     std::span<const std::vector<cdouble>> references,
                                     const RadarConfig& cfg, std::size_t zero_pad, RateEstimator mode) {
    cfg.validate();
    if (zero_pad < 1) throw ConfigError("estimate_phase_rate: zero_pad must be >= 1");
    if (measured.empty()) throw ConfigError("estimate_phase_rate: no channels");
    if (references.size() != measured.size())
        throw ConfigError("estimate_phase_rate: one reference per channel required");
    const std::size_t n = measured[0].size();
    if (n == 0) throw ConfigError("estimate_phase_rate: empty channel");
    for (std::size_t l = 0; l < measured.size(); ++l) {
        if (measured[l].size() != n || references[l].size() != n)
            throw ConfigError("estimate_phase_rate: channel and reference lengths differ");
        if (all_zero(references[l])) throw DomainError("estimate_phase_rate: zero reference signal");
    }

    const std::size_t n_fft = n * zero_pad;
    const fft::Plan plan(n_fft, fft::Direction::Forward);
    std::vector<std::vector<cdouble>> products(measured.size(), std::vector<cdouble>(n));
    std::vector<std::vector<double>> power(measured.size(), std::vector<double>(n_fft));
    std::vector<cdouble> buf(n_fft);
    for (std::size_t l = 0; l < measured.size(); ++l) {
        for (std::size_t i = 0; i < n; ++i) products[l][i] = measured[l][i] * std::conj(references[l][i]);
        std::copy(products[l].begin(), products[l].end(), buf.begin());
        std::fill(buf.begin() + static_cast<std::ptrdiff_t>(n), buf.end(), cdouble{});
        plan.execute(buf);
        for (std::size_t m = 0; m < n_fft; ++m) power[l][m] = std::norm(buf[m]);
    }

    std::vector<std::size_t> bins(measured.size());
    if (mode == RateEstimator::Joint) {
        std::vector<double> total(n_fft, 0.0);
        for (const auto& p : power)
            for (std::size_t m = 0; m < n_fft; ++m) total[m] += p[m];
        const std::size_t b = argmax(total);
        if (!(total[b] > 0.0)) throw NoPeakError("estimate_phase_rate: measured data is all zero");
        std::fill(bins.begin(), bins.end(), b);
    } else {
        for (std::size_t l = 0; l < measured.size(); ++l) {
            bins[l] = argmax(power[l]);
            if (!(power[l][bins[l]] > 0.0))
                throw NoPeakError("estimate_phase_rate: channel " + std::to_string(l) + " is all zero");
        }
    }

    CalibrationModel model;
    model.f_hat.resize(measured.size());
    model.alpha.resize(measured.size());
    for (std::size_t l = 0; l < measured.size(); ++l) {
        const double f = phase_rate_bin_frequency(bins[l], n_fft, cfg.fs);
        cdouble acc{};
        double ref_power = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += products[l][i] * unit_phasor(-f * cfg.sample_time(i));
            ref_power += std::norm(references[l][i]);
        }
        model.f_hat[l] = f;
        model.alpha[l] = acc / ref_power;
    }
    return model;
}

CalibrationModel estimate_phase_rate(std::span<const std::vector<cdouble>> measured,
                                     std::span<const cdouble> reference, const RadarConfig& cfg,
                                     std::size_t zero_pad, RateEstimator mode) {
    std::vector<std::vector<cdouble>> refs(measured.size(),
                                           std::vector<cdouble>(reference.begin(), reference.end()));
    return estimate_phase_rate(measured, refs, cfg, zero_pad, mode);
}

CalibrationModel exact_model(std::span<const ChannelError> errors, const RadarConfig& cfg) {
    CalibrationModel model;
    for (const auto& e : errors) {
        model.f_hat.push_back(cfg.slope() * e.tau);
        model.alpha.push_back(e.alpha);
    }
    return model;
}

RawDataCube compensate(const RawDataCube& cube, const CalibrationModel& model) {
    if (model.f_hat.size() != cube.n_channels() || model.alpha.size() != cube.n_channels())
        throw ConfigError("compensate: model channel count does not match cube");
    for (const auto& a : model.alpha) {
        if (!(std::abs(a) > 0.0) || !std::isfinite(std::abs(a)))
            throw ConfigError("compensate: model gain must be finite and non-zero");
    }
    const std::size_t n = cube.n_samples();
    std::vector<std::vector<cdouble>> factors(cube.n_channels(), std::vector<cdouble>(n));
    for (std::size_t ch = 0; ch < cube.n_channels(); ++ch) {
        for (std::size_t i = 0; i < n; ++i)
            factors[ch][i] = unit_phasor(-model.f_hat[ch] * cube.config.sample_time(i)) / model.alpha[ch];
    }
    RawDataCube out = cube;
    for (std::size_t el = 0; el < cube.grid.element_count(); ++el) {
        const auto& f = factors[el % cube.n_channels()];
        auto s = out.element(el);
        for (std::size_t i = 0; i < n; ++i) s[i] *= f[i];
    }
    return out;
}

ComplexImage background_subtract(const ComplexImage& scene, const ComplexImage& background) {
    if (!scene.same_grid(background)) throw ShapeError("background_subtract: image grids differ");
    ComplexImage out = scene;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values.data[i] -= background.values.data[i];
    return out;
}

}  // namespace fgradar
