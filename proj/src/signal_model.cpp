#include "fgradar/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fgradar/errors.hpp"
#include "fgradar/parallel.hpp"

namespace fgradar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(j*2*pi*cycles) with the integer part of `cycles` removed first.
cdouble unit_phasor(double cycles) {
    const double frac = cycles - std::floor(cycles);
    return std::polar(1.0, kTwoPi * frac);
}

// Fractional part of a*b, keeping the rounding error of the product.
double frac_product(double a, double b) {
    const double p = a * b;
    const double err = std::fma(a, b, -p);
    return (p - std::floor(p)) + err;
}

}  // namespace

void RadarConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("radar config: " + what); };
    if (!(std::isfinite(f0) && f0 >= 0.0)) fail("f0 must be finite and non-negative");
    if (!(bandwidth > 0.0 && std::isfinite(bandwidth))) fail("bandwidth must be positive");
    if (!(duration > 0.0 && std::isfinite(duration))) fail("chirp duration must be positive");
    if (!(fs > 0.0 && std::isfinite(fs))) fail("sample rate must be positive");
    if (n_samples < 2) fail("n_samples must be at least 2");
    if (!(c > 0.0 && std::isfinite(c))) fail("propagation speed must be positive");
    const double k = slope();
    if (!(std::isfinite(k) && k > 0.0)) fail("slope B/T must be finite and positive");
    // Allow for rounding when T was derived as n/fs.
    if (static_cast<double>(n_samples) / fs > duration * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "samples do not fit in the chirp (n/fs = " << static_cast<double>(n_samples) / fs
           << " s > T = " << duration << " s)";
        fail(os.str());
    }
}

RadarConfig RadarConfig::with_samples(std::size_t n) {
    RadarConfig cfg;
    cfg.n_samples = n;
    cfg.duration = static_cast<double>(n) / cfg.fs;
    return cfg;
}

std::vector<Vec3> linear_channel_offsets(std::size_t n, double spacing) {
    std::vector<Vec3> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {static_cast<double>(i) * spacing, 0.0, 0.0};
    return out;
}

ApertureGrid make_aperture(const ApertureSpec& spec, std::span<const Vec3> channel_offsets) {
    if (spec.n_x == 0 || spec.n_y == 0 || channel_offsets.empty())
        throw ConfigError("aperture: empty pose grid");
    ApertureGrid grid;
    grid.n_x = spec.n_x;
    grid.n_y = spec.n_y;
    grid.n_channels = channel_offsets.size();
    grid.poses.resize(grid.element_count());
    for (std::size_t ix = 0; ix < spec.n_x; ++ix) {
        for (std::size_t iy = 0; iy < spec.n_y; ++iy) {
            const Vec3 node = spec.node(ix, iy);
            const double t =
                spec.t_start + static_cast<double>(spec.scan_sequence(ix, iy)) * spec.frame_period;
            for (std::size_t ch = 0; ch < grid.n_channels; ++ch) {
                grid.poses[grid.index(ix, iy, ch)] = {node + channel_offsets[ch], t,
                                                      static_cast<std::uint32_t>(ch)};
            }
        }
    }
    return grid;
}

void RawDataCube::validate() const {
    config.validate();
    if (grid.poses.size() != grid.element_count())
        throw ConfigError("cube: pose count does not match n_x * n_y * n_channels");
    if (samples.size() != grid.element_count() * config.n_samples)
        throw ConfigError("cube: sample count does not match dimensions");
    for (const auto& p : grid.poses) {
        if (!p.position.finite() || !std::isfinite(p.timestamp))
            throw ConfigError("cube: non-finite pose");
        if (p.channel >= grid.n_channels) throw ConfigError("cube: pose channel out of range");
    }
    for (const auto& s : samples) {
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw ConfigError("cube: non-finite sample");
    }
}

cdouble chirp_phase(const RadarConfig& cfg, double t) {
    if (!(t >= 0.0 && t <= cfg.duration)) throw DomainError("chirp_phase: t outside [0, T]");
    return unit_phasor(frac_product(cfg.f0, t) + frac_product(0.5 * cfg.slope() * t, t));
}

cdouble if_sample(const RadarConfig& cfg, double t, double d, cdouble g, bool include_rvp) {
    if (!(d >= 0.0)) throw DomainError("if_sample: negative distance");
    if (!(t >= 0.0 && t <= cfg.duration)) throw DomainError("if_sample: t outside [0, T]");
    const double tau = 2.0 * d / cfg.c;
    const double k = cfg.slope();
    double cycles = cfg.f0 * tau + k * t * tau;
    if (include_rvp) cycles -= 0.5 * k * tau * tau;
    return g * unit_phasor(cycles);
}

std::vector<double> wavenumber_samples(const RadarConfig& cfg) {
    cfg.validate();
    std::vector<double> k(cfg.n_samples);
    const double slope = cfg.slope();
    for (std::size_t i = 0; i < cfg.n_samples; ++i)
        k[i] = kTwoPi * (cfg.f0 + slope * cfg.sample_time(i)) / cfg.c;
    return k;
}

RawDataCube simulate_cube(const RadarConfig& cfg, const Scene& scene, const ApertureGrid& poses,
                          const SimulationOptions& opts) {
    cfg.validate();
    if (poses.poses.empty() || poses.element_count() == 0)
        throw ConfigError("simulate: empty pose grid");
    if (poses.poses.size() != poses.element_count())
        throw ConfigError("simulate: pose count does not match grid dimensions");
    if (!(opts.noise_sigma >= 0.0)) throw ConfigError("simulate: noise_sigma must be >= 0");
    for (const auto& s : scene.scatterers) {
        if (!s.position.finite() || !std::isfinite(std::abs(s.reflectivity)))
            throw ConfigError("simulate: non-finite scatterer");
    }

    RawDataCube cube;
    cube.config = cfg;
    cube.grid = poses;
    cube.samples.assign(poses.element_count() * cfg.n_samples, cdouble{});

    const std::size_t n = cfg.n_samples;
    parallel_chunks(poses.element_count(), opts.threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t el = b; el < e; ++el) {
            auto out = cube.element(el);
            const Vec3& p = poses.poses[el].position;
            for (const auto& s : scene.scatterers) {
                const double d = distance(p, s.position);
                for (std::size_t i = 0; i < n; ++i)
                    out[i] += if_sample(cfg, cfg.sample_time(i), d, s.reflectivity, opts.include_rvp);
            }
        }
    });

    if (opts.noise_sigma > 0.0) {
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> gauss(0.0, opts.noise_sigma);
        for (auto& v : cube.samples) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            v += cdouble{re, im};
        }
    }
    return cube;
}

RawDataCube inject_channel_error(const RawDataCube& cube, std::span<const ChannelError> errors) {
    if (errors.size() != cube.n_channels())
        throw ConfigError("inject: expected one channel error per channel");
    for (const auto& e : errors) {
        if (!(std::abs(e.alpha) > 0.0) || !std::isfinite(e.tau))
            throw ConfigError("inject: channel error needs |alpha| > 0 and finite tau");
    }
    RawDataCube out = cube;
    const double k = cube.config.slope();
    const std::size_t n = cube.n_samples();
    // Per-channel multiplier depends only on fast time.
    std::vector<std::vector<cdouble>> factors(errors.size(), std::vector<cdouble>(n));
    for (std::size_t ch = 0; ch < errors.size(); ++ch) {
        for (std::size_t i = 0; i < n; ++i)
            factors[ch][i] = errors[ch].alpha * unit_phasor(k * errors[ch].tau * cube.config.sample_time(i));
    }
    for (std::size_t el = 0; el < cube.grid.element_count(); ++el) {
        const auto& f = factors[el % cube.n_channels()];
        auto s = out.element(el);
        for (std::size_t i = 0; i < n; ++i) s[i] *= f[i];
    }
    return out;
}

}  // namespace fgradar
