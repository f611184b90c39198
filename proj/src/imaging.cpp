#include "fgradar/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fgradar/errors.hpp"
#include "fgradar/fft.hpp"
#include "fgradar/parallel.hpp"

namespace fgradar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

struct AxisNodes {
    double origin = 0.0;
    double pitch = 0.0;
    std::size_t count = 0;
};

// Clusters coordinates closer than `tol` and checks that cluster centers are evenly spaced.
AxisNodes uniform_axis(std::vector<double> coords, const char* name) {
    constexpr double tol = 1e-7;
    std::sort(coords.begin(), coords.end());
    std::vector<double> centers;
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (cnt > 0 && coords[i] - coords[i - 1] > tol) {
            centers.push_back(sum / static_cast<double>(cnt));
            sum = 0.0;
            cnt = 0;
        }
        sum += coords[i];
        ++cnt;
    }
    centers.push_back(sum / static_cast<double>(cnt));

    AxisNodes axis;
    axis.origin = centers.front();
    axis.count = centers.size();
    if (centers.size() == 1) return axis;
    axis.pitch = (centers.back() - centers.front()) / static_cast<double>(centers.size() - 1);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double expect = axis.origin + static_cast<double>(i) * axis.pitch;
        if (std::abs(centers[i] - expect) > std::max(tol, 1e-3 * axis.pitch))
            throw GeometryError(std::string("aperture is not uniform along ") + name);
    }
    return axis;
}

// Reduced-argument exp(j*phase) for large phases.
cdouble phasor(double radians) {
    const double r = std::remainder(radians, kTwoPi);
    return {std::cos(r), std::sin(r)};
}

std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1));
    return w;
}

// Signed DFT wavenumbers 2*pi*m / (n*pitch).
std::vector<double> spatial_wavenumbers(std::size_t n, double pitch) {
    std::vector<double> k(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double ms = m < (n + 1) / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
        k[m] = kTwoPi * ms / (static_cast<double>(n) * pitch);
    }
    return k;
}

}  // namespace

bool ComplexImage::same_grid(const ComplexImage& o) const {
    return values.same_shape(o.values) && close_rel(origin_x, o.origin_x) && close_rel(origin_y, o.origin_y) &&
           close_rel(pitch_x, o.pitch_x) && close_rel(pitch_y, o.pitch_y) && close_rel(plane_z, o.plane_z);
}

UniformAperture fold_aperture(const RawDataCube& cube) {
    cube.validate();
    const auto& poses = cube.grid.poses;
    const double z = poses.front().position.z;
    std::vector<double> xs, ys;
    xs.reserve(poses.size());
    ys.reserve(poses.size());
    for (const auto& p : poses) {
        if (std::abs(p.position.z - z) > 1e-7) throw GeometryError("aperture elements are not in one z plane");
        xs.push_back(p.position.x);
        ys.push_back(p.position.y);
    }
    const AxisNodes ax = uniform_axis(std::move(xs), "x");
    const AxisNodes ay = uniform_axis(std::move(ys), "y");

    UniformAperture out;
    out.nx = ax.count;
    out.ny = ay.count;
    out.origin_x = ax.origin;
    out.origin_y = ay.origin;
    // A single row or column has no pitch of its own; borrow the other axis or half a wavelength.
    const double fallback = ax.pitch > 0 ? ax.pitch : (ay.pitch > 0 ? ay.pitch : 0.5 * cube.config.wavelength());
    out.pitch_x = ax.pitch > 0 ? ax.pitch : fallback;
    out.pitch_y = ay.pitch > 0 ? ay.pitch : fallback;
    out.plane_z = z;

    const std::size_t n = cube.n_samples();
    out.samples.assign(out.nx * out.ny * n, cdouble{});
    std::vector<std::size_t> hits(out.nx * out.ny, 0);
    for (std::size_t el = 0; el < poses.size(); ++el) {
        const auto ix = static_cast<std::size_t>(std::llround((poses[el].position.x - ax.origin) / out.pitch_x));
        const auto iy = static_cast<std::size_t>(std::llround((poses[el].position.y - ay.origin) / out.pitch_y));
        const std::size_t node = ix * out.ny + iy;
        auto src = cube.element(el);
        for (std::size_t i = 0; i < n; ++i) out.samples[node * n + i] += src[i];
        ++hits[node];
    }
    for (std::size_t node = 0; node < hits.size(); ++node) {
        if (hits[node] == 0)
            throw GeometryError("aperture grid has an uncovered node at (" + std::to_string(node / out.ny) + "," +
                                std::to_string(node % out.ny) + ")");
        if (hits[node] > 1) {
            const double inv = 1.0 / static_cast<double>(hits[node]);
            for (std::size_t i = 0; i < n; ++i) out.samples[node * n + i] *= inv;
        }
    }
    return out;
}

ImageGrid aperture_image_grid(const RawDataCube& cube) {
    const UniformAperture ap = fold_aperture(cube);
    return {ap.nx, ap.ny, ap.origin_x, ap.origin_y, ap.pitch_x, ap.pitch_y};
}

ComplexImage rma_image(const RawDataCube& cube, double z0, const RmaOptions& opts) {
    if (!(z0 > 0.0) || !std::isfinite(z0)) throw DomainError("rma_image: z0 must be positive");
    const UniformAperture ap = fold_aperture(cube);
    const double range = z0 - ap.plane_z;
    if (!(range > 0.0)) throw DomainError("rma_image: image plane must lie beyond the aperture plane");

    const std::size_t px = opts.pad_x ? opts.pad_x : next_pow2(2 * ap.nx);
    const std::size_t py = opts.pad_y ? opts.pad_y : next_pow2(2 * ap.ny);
    if (px < ap.nx || py < ap.ny) throw ConfigError("rma_image: padding smaller than the aperture");

    const std::vector<double> ks = wavenumber_samples(cube.config);
    const std::size_t n = ks.size();
    const std::vector<double> kx = spatial_wavenumbers(px, ap.pitch_x);
    const std::vector<double> ky = spatial_wavenumbers(py, ap.pitch_y);
    std::vector<double> wx(ap.nx, 1.0), wy(ap.ny, 1.0);
    if (opts.hann_window) {
        wx = hann(ap.nx);
        wy = hann(ap.ny);
    }

    const fft::Plan forward(px, py, fft::Direction::Forward);
    const fft::Plan inverse(px, py, fft::Direction::Inverse);
    const double norm = 1.0 / static_cast<double>(px * py);

    const std::size_t chunks = chunk_count(n, opts.threads);
    std::vector<std::vector<cdouble>> partial(chunks, std::vector<cdouble>(ap.nx * ap.ny));
    parallel_chunks(n, opts.threads, [&](std::size_t chunk, std::size_t b, std::size_t e) {
        std::vector<cdouble> buf(px * py);
        auto& acc = partial[chunk];
        for (std::size_t s = b; s < e; ++s) {
            std::fill(buf.begin(), buf.end(), cdouble{});
            for (std::size_t ix = 0; ix < ap.nx; ++ix)
                for (std::size_t iy = 0; iy < ap.ny; ++iy)
                    buf[ix * py + iy] = ap.samples[(ix * ap.ny + iy) * n + s] * (wx[ix] * wy[iy]);
            forward.execute(buf);
            const double four_k2 = 4.0 * ks[s] * ks[s];
            for (std::size_t mx = 0; mx < px; ++mx) {
                const double rem = four_k2 - kx[mx] * kx[mx];
                for (std::size_t my = 0; my < py; ++my) {
                    const double kz2 = rem - ky[my] * ky[my];
                    cdouble& v = buf[mx * py + my];
                    v = kz2 > 0.0 ? v * phasor(-std::sqrt(kz2) * range) : cdouble{};
                }
            }
            inverse.execute(buf);
            for (std::size_t ix = 0; ix < ap.nx; ++ix)
                for (std::size_t iy = 0; iy < ap.ny; ++iy) acc[ix * ap.ny + iy] += buf[ix * py + iy] * norm;
        }
    });

    ComplexImage img;
    img.values = Grid2D<cdouble>(ap.nx, ap.ny);
    for (const auto& part : partial)
        for (std::size_t i = 0; i < part.size(); ++i) img.values.data[i] += part[i];
    img.origin_x = ap.origin_x;
    img.origin_y = ap.origin_y;
    img.pitch_x = ap.pitch_x;
    img.pitch_y = ap.pitch_y;
    img.plane_z = z0;
    return img;
}

ComplexImage backprojection_image(const RawDataCube& cube, const ImageGrid& grid, double z0, unsigned threads) {
    cube.validate();
    if (!std::isfinite(z0)) throw DomainError("backprojection_image: z0 must be finite");
    if (!(grid.pitch_x > 0.0 && grid.pitch_y > 0.0)) throw ConfigError("backprojection_image: pitch must be positive");

    const std::vector<double> ks = wavenumber_samples(cube.config);
    const std::size_t n = ks.size();
    // k_i is affine in i, so exp(-j*2*k_i*d) is a geometric sequence.
    const double dk = ks[1] - ks[0];

    ComplexImage img;
    img.values = Grid2D<cdouble>(grid.nx, grid.ny);
    img.origin_x = grid.origin_x;
    img.origin_y = grid.origin_y;
    img.pitch_x = grid.pitch_x;
    img.pitch_y = grid.pitch_y;
    img.plane_z = z0;

    const auto& poses = cube.grid.poses;
    parallel_chunks(grid.nx, threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t ix = b; ix < e; ++ix) {
            for (std::size_t iy = 0; iy < grid.ny; ++iy) {
                const Vec3 pixel{img.x_at(ix), img.y_at(iy), z0};
                cdouble acc{};
                for (std::size_t el = 0; el < poses.size(); ++el) {
                    const double d = distance(poses[el].position, pixel);
                    cdouble rot = phasor(-2.0 * ks[0] * d);
                    const cdouble step = phasor(-2.0 * dk * d);
                    const auto r = cube.element(el);
                    for (std::size_t i = 0; i < n; ++i) {
                        acc += r[i] * rot;
                        rot *= step;
                    }
                }
                img.values(ix, iy) = acc;
            }
        }
    });
    return img;
}

Grid2D<double> magnitude_image(const ComplexImage& img) {
    Grid2D<double> out(img.nx(), img.ny());
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::abs(img.values.data[i]);
    return out;
}

std::pair<std::size_t, std::size_t> peak_index(const Grid2D<double>& magnitudes) {
    if (magnitudes.size() == 0) throw NoPeakError("empty image");
    const auto it = std::max_element(magnitudes.data.begin(), magnitudes.data.end());
    const auto flat = static_cast<std::size_t>(it - magnitudes.data.begin());
    return {flat / magnitudes.ny, flat % magnitudes.ny};
}

BeamProfile peak_profile(const ComplexImage& img, Axis axis) {
    const Grid2D<double> mag = magnitude_image(img);
    if (mag.size() == 0) throw NoPeakError("peak_profile: empty image");
    const auto [lo_it, hi_it] = std::minmax_element(mag.data.begin(), mag.data.end());
    if (!(*hi_it > *lo_it)) throw NoPeakError("peak_profile: flat image");

    const auto [pix, piy] = peak_index(mag);
    const double peak = mag(pix, piy);
    const bool horiz = axis == Axis::Horizontal;
    const std::size_t len = horiz ? mag.nx : mag.ny;
    const std::size_t center = horiz ? pix : piy;
    const double pitch = horiz ? img.pitch_x : img.pitch_y;

    BeamProfile prof;
    prof.peak_ix = pix;
    prof.peak_iy = piy;
    prof.offsets.resize(len);
    prof.amplitudes.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
        prof.offsets[i] = (static_cast<double>(i) - static_cast<double>(center)) * pitch;
        prof.amplitudes[i] = (horiz ? mag(i, piy) : mag(pix, i)) / peak;
    }

    const double level = 1.0 / std::numbers::sqrt2;
    const auto& a = prof.amplitudes;
    double left = 0.0, right = 0.0;
    bool found_left = false, found_right = false;
    for (std::size_t i = center; i > 0; --i) {
        if (a[i - 1] < level) {
            const double frac = (a[i] - level) / (a[i] - a[i - 1]);
            left = prof.offsets[i] - frac * pitch;
            found_left = true;
            break;
        }
    }
    for (std::size_t i = center; i + 1 < len; ++i) {
        if (a[i + 1] < level) {
            const double frac = (a[i] - level) / (a[i] - a[i + 1]);
            right = prof.offsets[i] + frac * pitch;
            found_right = true;
            break;
        }
    }
    if (!found_left || !found_right) throw NoPeakError("peak_profile: mainlobe does not fall below -3 dB inside the image");
    prof.width_3db = right - left;
    return prof;
}

}  // namespace fgradar
