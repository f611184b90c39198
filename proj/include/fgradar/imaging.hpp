#pragma once

#include <cstddef>
#include <vector>

#include "fgradar/image.hpp"
#include "fgradar/signal_model.hpp"

namespace fgradar {

/// Cube data resampled onto one uniform planar grid of virtual elements.
///
/// Every element of the cube is snapped to the node it sits on; elements sharing a node are
/// averaged coherently. Colocated channels therefore collapse to one node per scan position,
/// while channels with distinct offsets interleave into a finer grid.
struct UniformAperture {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pitch_x = 0.0;
    double pitch_y = 0.0;
    double plane_z = 0.0;
    std::vector<cdouble> samples;  ///< [ix][iy][sample]
};

/// Throws GeometryError when the elements do not form a fully covered uniform rectangular grid.
UniformAperture fold_aperture(const RawDataCube& cube);

/// Output grid matching the folded aperture (used as the default backprojection grid).
ImageGrid aperture_image_grid(const RawDataCube& cube);

struct RmaOptions {
    std::size_t pad_x = 0;  ///< 0 selects the next power of two >= 2 * nx
    std::size_t pad_y = 0;
    bool hann_window = false;
    unsigned threads = 1;
};

/// Range migration focusing at plane z0: per wavenumber, 2-D FFT over the aperture, k_z phase
/// compensation exp(-j*k_z*(z0 - z_aperture)) with evanescent cells zeroed, inverse FFT,
/// accumulation over k. The result covers the aperture extent at the aperture pitch.
ComplexImage rma_image(const RawDataCube& cube, double z0, const RmaOptions& opts = {});

/// Matched-filter image: sum over elements and samples of r * exp(-j*2*k_i*d).
ComplexImage backprojection_image(const RawDataCube& cube, const ImageGrid& grid, double z0,
                                  unsigned threads = 1);

Grid2D<double> magnitude_image(const ComplexImage& img);

enum class Axis { Horizontal, Vertical };

struct BeamProfile {
    std::vector<double> offsets;     ///< meters from the peak along the axis
    std::vector<double> amplitudes;  ///< normalized so the peak is 1
    double width_3db = 0.0;          ///< meters
    std::size_t peak_ix = 0;
    std::size_t peak_iy = 0;
};

/// Slice through the global magnitude peak with its 3 dB width (linear interpolation at 1/sqrt(2)).
BeamProfile peak_profile(const ComplexImage& img, Axis axis);

/// Index (ix, iy) of the largest magnitude.
std::pair<std::size_t, std::size_t> peak_index(const Grid2D<double>& magnitudes);

}  // namespace fgradar
