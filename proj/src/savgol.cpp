#include <Eigen/Dense>

#include <algorithm>

#include "fgradar/calibration.hpp"
#include "fgradar/errors.hpp"

namespace fgradar {

namespace {

// Weights w such that sum_j w[j] * s[lo + j] is the value at `center` of the least-squares
// polynomial of degree `order` through s[lo..hi].
Eigen::VectorXd sg_weights(std::ptrdiff_t lo, std::ptrdiff_t hi, std::ptrdiff_t center, std::size_t order) {
    const Eigen::Index len = hi - lo + 1;
    const Eigen::Index deg = std::min<Eigen::Index>(static_cast<Eigen::Index>(order), len - 1);
    const double scale = std::max<double>(1.0, static_cast<double>(len - 1) / 2.0);
    Eigen::MatrixXd vander(len, deg + 1);
    for (Eigen::Index r = 0; r < len; ++r) {
        const double u = static_cast<double>(lo + r - center) / scale;
        double pw = 1.0;
        for (Eigen::Index c = 0; c <= deg; ++c) {
            vander(r, c) = pw;
            pw *= u;
        }
    }
    // Value at u = 0 is the constant coefficient: e0^T (V^T V)^-1 V^T.
    const Eigen::MatrixXd gram = vander.transpose() * vander;
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(deg + 1);
    e0(0) = 1.0;
    const Eigen::VectorXd g = gram.ldlt().solve(e0);
    return vander * g;
}

void check_window(std::size_t length, std::size_t window, std::size_t order) {
    if (window % 2 == 0) throw ConfigError("sg: window length must be odd");
    if (window > length) throw ConfigError("sg: window longer than the signal");
    if (order >= window) throw ConfigError("sg: polynomial order must be below the window length");
}

// Smoothing weights for every output position of a length-n signal.
class SgTable {
  public:
    SgTable(std::size_t n, std::size_t window, std::size_t order)
        : n_(static_cast<std::ptrdiff_t>(n)), half_(static_cast<std::ptrdiff_t>(window / 2)) {
        check_window(n, window, order);
        interior_ = sg_weights(-half_, half_, 0, order);
        for (std::ptrdiff_t i = 0; i < n_; ++i) {
            if (i - half_ >= 0 && i + half_ < n_) continue;
            edges_.emplace_back(i, sg_weights(lo(i), hi(i), i, order));
        }
    }

    void apply(std::span<const double> in, std::span<double> out) const {
        std::size_t e = 0;
        for (std::ptrdiff_t i = 0; i < n_; ++i) {
            const Eigen::VectorXd* w = &interior_;
            if (e < edges_.size() && edges_[e].first == i) w = &edges_[e++].second;
            double acc = 0.0;
            const std::ptrdiff_t l = lo(i);
            for (std::ptrdiff_t j = l; j <= hi(i); ++j) acc += (*w)(j - l) * in[static_cast<std::size_t>(j)];
            out[static_cast<std::size_t>(i)] = acc;
        }
    }

  private:
    std::ptrdiff_t lo(std::ptrdiff_t i) const { return std::max<std::ptrdiff_t>(0, i - half_); }
    std::ptrdiff_t hi(std::ptrdiff_t i) const { return std::min<std::ptrdiff_t>(n_ - 1, i + half_); }

    std::ptrdiff_t n_;
    std::ptrdiff_t half_;
    Eigen::VectorXd interior_;
    std::vector<std::pair<std::ptrdiff_t, Eigen::VectorXd>> edges_;
};

// short - long smoothing of I and Q.
std::vector<cdouble> band_pass(std::span<const cdouble> signal, const SgTable& short_table,
                               const SgTable& long_table) {
    const std::size_t n = signal.size();
    std::vector<double> re(n), im(n), a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = signal[i].real();
        im[i] = signal[i].imag();
    }
    std::vector<cdouble> out(n);
    short_table.apply(re, a);
    long_table.apply(re, b);
    for (std::size_t i = 0; i < n; ++i) out[i].real(a[i] - b[i]);
    short_table.apply(im, a);
    long_table.apply(im, b);
    for (std::size_t i = 0; i < n; ++i) out[i].imag(a[i] - b[i]);
    return out;
}

void check_band(std::size_t length, std::size_t short_window, std::size_t long_window, std::size_t order) {
    if (short_window % 2 == 0 || long_window % 2 == 0) throw ConfigError("sg_filter: windows must be odd");
    if (!(order < short_window && short_window <= long_window && long_window <= length))
        throw ConfigError("sg_filter: need order < short_window <= long_window <= length");
}

}  // namespace

SgParams SgParams::clamped_to(std::size_t length) const {
    SgParams p = *this;
    auto make_odd = [](std::size_t w) { return w % 2 == 0 ? (w > 0 ? w - 1 : 1) : w; };
    p.long_window = make_odd(std::min(p.long_window, std::max<std::size_t>(length, 1)));
    p.short_window = make_odd(std::min(p.short_window, p.long_window));
    if (p.order >= p.short_window) p.order = p.short_window - 1;
    return p;
}

std::vector<double> sg_smooth(std::span<const double> signal, std::size_t window, std::size_t order) {
    const SgTable table(signal.size(), window, order);
    std::vector<double> out(signal.size());
    table.apply(signal, out);
    return out;
}

std::vector<cdouble> sg_filter(std::span<const cdouble> signal, std::size_t short_window,
                               std::size_t long_window, std::size_t order) {
    check_band(signal.size(), short_window, long_window, order);
    return band_pass(signal, SgTable(signal.size(), short_window, order),
                     SgTable(signal.size(), long_window, order));
}

RawDataCube sg_filter_cube(const RawDataCube& cube, const SgParams& params) {
    const SgParams p = params.clamped_to(cube.n_samples());
    check_band(cube.n_samples(), p.short_window, p.long_window, p.order);
    const SgTable short_table(cube.n_samples(), p.short_window, p.order);
    const SgTable long_table(cube.n_samples(), p.long_window, p.order);
    RawDataCube out = cube;
    for (std::size_t el = 0; el < cube.grid.element_count(); ++el) {
        const auto filtered = band_pass(cube.element(el), short_table, long_table);
        std::copy(filtered.begin(), filtered.end(), out.element(el).begin());
    }
    return out;
}

}  // namespace fgradar
