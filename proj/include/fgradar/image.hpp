#pragma once

#include "fgradar/types.hpp"

namespace fgradar {

/// Complex reflectivity on a regular grid in the plane z = plane_z.
/// Pixel (ix, iy) sits at (origin_x + ix * pitch_x, origin_y + iy * pitch_y).
struct ComplexImage {
    Grid2D<cdouble> values;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pitch_x = 1.0;
    double pitch_y = 1.0;
    double plane_z = 0.0;

    std::size_t nx() const { return values.nx; }
    std::size_t ny() const { return values.ny; }
    double x_at(std::size_t ix) const { return origin_x + static_cast<double>(ix) * pitch_x; }
    double y_at(std::size_t iy) const { return origin_y + static_cast<double>(iy) * pitch_y; }

    /// Same dimensions, origin, pitch and plane (to 1e-12 relative).
    bool same_grid(const ComplexImage& o) const;
};

/// Output grid for image formation.
struct ImageGrid {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pitch_x = 1.0;
    double pitch_y = 1.0;
};

}  // namespace fgradar
