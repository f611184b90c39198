#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fgradar/imaging.hpp"
#include "fgradar/types.hpp"

namespace fgradar {

/// H x W depth grid in meters, row-major (r * W + c), with a validity mask.
struct DepthMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;
    std::vector<bool> valid;

    DepthMap() = default;
    DepthMap(std::size_t h, std::size_t w, double fill = 0.0)
        : height(h), width(w), values(h * w, fill), valid(h * w, true) {}

    double& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
    bool same_shape(const DepthMap& o) const { return height == o.height && width == o.width; }
};

/// Depth values outside this range (m) are treated as invalid truth.
inline constexpr double kMinValidDepth = 0.3;
inline constexpr double kMaxValidDepth = 0.6;

/// Pixels both maps mark valid and whose truth lies in [0.3, 0.6] m.
std::vector<bool> evaluation_mask(const DepthMap& pred, const DepthMap& truth);

/// Energy-normalized Shannon entropy in nats: p_i = m_i^2 / sum m^2, H = -sum p ln p.
double image_entropy(std::span<const double> magnitudes);
inline double image_entropy(const Grid2D<double>& magnitudes) { return image_entropy(magnitudes.data); }

struct ErrorCdf {
    std::vector<double> errors;  ///< ascending |estimate - truth|
    double median = 0.0;

    /// Fraction of errors <= e.
    double cdf(double e) const;
};

ErrorCdf distance_error_cdf(std::span<const double> estimates, double truth);

/// Distance between the outermost crossings of (peak - threshold_db) along the line through the
/// intensity centroid of the pixels above that level. Crossings are linearly interpolated.
double estimate_extent(const Grid2D<double>& magnitudes, double pitch, double threshold_db, Axis axis);

double depth_rmse(const DepthMap& pred, const DepthMap& truth);
double depth_mae(const DepthMap& pred, const DepthMap& truth);
/// Percentage of masked pixels with max(pred/truth, truth/pred) < delta; pred <= 0 fails.
double threshold_delta(const DepthMap& pred, const DepthMap& truth, double delta);

/// Sum of squared depth differences over the mask.
double loss_depth(const DepthMap& pred, const DepthMap& truth);

/// Sum over pixels of 1 - cos(n_pred, n_truth), n = t_h x t_w from forward differences.
/// Pixels whose right or lower neighbour is outside the mask are skipped.
double loss_surface_normal(const DepthMap& pred, const DepthMap& truth);

/// KL divergence of N(mu, diag(sigma^2)) from N(0, I).
double kl_standard_normal(std::span<const double> mu, std::span<const double> sigma);

inline constexpr double kDefaultKlWeight = 0.1;
inline constexpr double kDefaultNormalWeight = 0.01;

/// l_d + alpha * l_kl + beta * l_sn.
double combined_loss(double l_d, double l_kl, double l_sn, double alpha = kDefaultKlWeight,
                     double beta = kDefaultNormalWeight);

}  // namespace fgradar
