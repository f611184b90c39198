#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace fgradar {

using cdouble = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Dense 2-D grid stored x-major: element (ix, iy) lives at ix * ny + iy.
template <typename T>
struct Grid2D {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<T> data;

    Grid2D() = default;
    Grid2D(std::size_t nx_, std::size_t ny_, T fill = T{}) : nx(nx_), ny(ny_), data(nx_ * ny_, fill) {}

    T& operator()(std::size_t ix, std::size_t iy) { return data[ix * ny + iy]; }
    const T& operator()(std::size_t ix, std::size_t iy) const { return data[ix * ny + iy]; }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Grid2D& o) const { return nx == o.nx && ny == o.ny; }
};

}  // namespace fgradar
