#include "fgradar/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fgradar/errors.hpp"

namespace fgradar {

namespace {

void check_pair(const DepthMap& pred, const DepthMap& truth) {
    if (!pred.same_shape(truth)) throw ShapeError("depth maps have different shapes");
    if (pred.values.size() != pred.height * pred.width || truth.values.size() != truth.height * truth.width ||
        pred.valid.size() != pred.values.size() || truth.valid.size() != truth.values.size())
        throw ShapeError("depth map storage does not match its dimensions");
}

// Masked (pred, truth) pairs; throws when the mask is empty.
template <typename Fn>
std::size_t for_each_masked(const DepthMap& pred, const DepthMap& truth, Fn&& fn) {
    const auto mask = evaluation_mask(pred, truth);
    std::size_t count = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        fn(pred.values[i], truth.values[i]);
        ++count;
    }
    if (count == 0) throw DomainError("depth metric: no valid pixels");
    return count;
}

}  // namespace

std::vector<bool> evaluation_mask(const DepthMap& pred, const DepthMap& truth) {
    check_pair(pred, truth);
    std::vector<bool> mask(truth.values.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double t = truth.values[i];
        mask[i] = pred.valid[i] && truth.valid[i] && t >= kMinValidDepth && t <= kMaxValidDepth &&
                  std::isfinite(pred.values[i]);
    }
    return mask;
}

double image_entropy(std::span<const double> magnitudes) {
    double total = 0.0;
    for (double m : magnitudes) total += m * m;
    if (!(total > 0.0)) throw DomainError("image_entropy: image has no energy");
    double h = 0.0;
    for (double m : magnitudes) {
        const double p = m * m / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double ErrorCdf::cdf(double e) const {
    if (errors.empty()) return 0.0;
    const auto it = std::upper_bound(errors.begin(), errors.end(), e);
    return static_cast<double>(it - errors.begin()) / static_cast<double>(errors.size());
}

ErrorCdf distance_error_cdf(std::span<const double> estimates, double truth) {
    if (estimates.empty()) throw ConfigError("distance_error_cdf: no estimates");
    ErrorCdf out;
    out.errors.reserve(estimates.size());
    for (double e : estimates) out.errors.push_back(std::abs(e - truth));
    std::sort(out.errors.begin(), out.errors.end());
    const std::size_t n = out.errors.size();
    out.median = n % 2 == 1 ? out.errors[n / 2] : 0.5 * (out.errors[n / 2 - 1] + out.errors[n / 2]);
    return out;
}

double estimate_extent(const Grid2D<double>& magnitudes, double pitch, double threshold_db, Axis axis) {
    if (!(pitch > 0.0)) throw ConfigError("estimate_extent: pitch must be positive");
    if (!(threshold_db >= 0.0)) throw ConfigError("estimate_extent: threshold must be a non-negative dB drop");
    if (magnitudes.size() == 0) throw NoPeakError("estimate_extent: empty image");
    const double peak = *std::max_element(magnitudes.data.begin(), magnitudes.data.end());
    if (!(peak > 0.0)) throw NoPeakError("estimate_extent: image has no positive peak");
    const double level = peak * std::pow(10.0, -threshold_db / 20.0);

    double wsum = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t ix = 0; ix < magnitudes.nx; ++ix) {
        for (std::size_t iy = 0; iy < magnitudes.ny; ++iy) {
            const double m = magnitudes(ix, iy);
            if (m < level) continue;
            wsum += m * m;
            cx += m * m * static_cast<double>(ix);
            cy += m * m * static_cast<double>(iy);
        }
    }
    const bool horiz = axis == Axis::Horizontal;
    const auto line = static_cast<std::size_t>(std::llround(horiz ? cy / wsum : cx / wsum));
    const std::size_t len = horiz ? magnitudes.nx : magnitudes.ny;
    auto at = [&](std::size_t i) { return horiz ? magnitudes(i, line) : magnitudes(line, i); };

    std::size_t first = len, last = 0;
    for (std::size_t i = 0; i < len; ++i) {
        if (at(i) >= level) {
            first = std::min(first, i);
            last = i;
        }
    }
    if (first == len) throw NoPeakError("estimate_extent: centroid line never reaches the threshold");
    if (first == 0 || last + 1 == len)
        throw NoPeakError("estimate_extent: no crossing inside the image (threshold below the floor?)");
    const double left = static_cast<double>(first) - (at(first) - level) / (at(first) - at(first - 1));
    const double right = static_cast<double>(last) + (at(last) - level) / (at(last) - at(last + 1));
    return (right - left) * pitch;
}

double depth_rmse(const DepthMap& pred, const DepthMap& truth) {
    double ss = 0.0;
    const std::size_t n = for_each_masked(pred, truth, [&](double p, double t) { ss += (p - t) * (p - t); });
    return std::sqrt(ss / static_cast<double>(n));
}

double depth_mae(const DepthMap& pred, const DepthMap& truth) {
    double sa = 0.0;
    const std::size_t n = for_each_masked(pred, truth, [&](double p, double t) { sa += std::abs(p - t); });
    return sa / static_cast<double>(n);
}

double threshold_delta(const DepthMap& pred, const DepthMap& truth, double delta) {
    if (!(delta > 1.0)) throw DomainError("threshold_delta: delta must exceed 1");
    std::size_t hits = 0;
    const std::size_t n = for_each_masked(pred, truth, [&](double p, double t) {
        if (p > 0.0 && std::max(p / t, t / p) < delta) ++hits;
    });
    return 100.0 * static_cast<double>(hits) / static_cast<double>(n);
}

double loss_depth(const DepthMap& pred, const DepthMap& truth) {
    double ss = 0.0;
    for_each_masked(pred, truth, [&](double p, double t) { ss += (p - t) * (p - t); });
    return ss;
}

double loss_surface_normal(const DepthMap& pred, const DepthMap& truth) {
    const auto mask = evaluation_mask(pred, truth);
    if (pred.height < 2 || pred.width < 2) throw ShapeError("loss_surface_normal: maps must be at least 2x2");
    const std::size_t w = pred.width;
    auto normal = [](const DepthMap& m, std::size_t r, std::size_t c) {
        const double dw = m.at(r, c + 1) - m.at(r, c);
        const double dh = m.at(r + 1, c) - m.at(r, c);
        const Vec3 tw{1.0, 0.0, dw};
        const Vec3 th{0.0, 1.0, dh};
        return th.cross(tw);
    };
    double loss = 0.0;
    std::size_t used = 0;
    for (std::size_t r = 0; r + 1 < pred.height; ++r) {
        for (std::size_t c = 0; c + 1 < pred.width; ++c) {
            if (!mask[r * w + c] || !mask[r * w + c + 1] || !mask[(r + 1) * w + c]) continue;
            const Vec3 np = normal(pred, r, c);
            const Vec3 nt = normal(truth, r, c);
            const double denom = std::sqrt(np.dot(np) * nt.dot(nt));
            if (!(denom > 0.0)) continue;
            loss += 1.0 - np.dot(nt) / denom;
            ++used;
        }
    }
    if (used == 0) throw DomainError("loss_surface_normal: no pixels with valid gradients");
    return loss;
}

double kl_standard_normal(std::span<const double> mu, std::span<const double> sigma) {
    if (mu.size() != sigma.size()) throw ShapeError("kl_standard_normal: mu and sigma lengths differ");
    double kl = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw DomainError("kl_standard_normal: sigma must be positive");
        const double s2 = sigma[i] * sigma[i];
        kl += mu[i] * mu[i] + s2 - std::log(s2) - 1.0;
    }
    return 0.5 * kl;
}

double combined_loss(double l_d, double l_kl, double l_sn, double alpha, double beta) {
    return l_d + alpha * l_kl + beta * l_sn;
}

}  // namespace fgradar
