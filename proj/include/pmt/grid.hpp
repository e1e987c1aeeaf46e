#pragma once

#include "pmt/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace pmt {

/// Voxel index triple; i runs along x, j along y, k along z.
struct Index3 {
    std::size_t i = 0, j = 0, k = 0;
    friend bool operator==(const Index3&, const Index3&) = default;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }

/// Regular transverse sampling times an arbitrary increasing list of planes.
/// Coordinates: x = x_min + i*x_step, y = y_min + j*y_step, z = z_planes[k].
class Grid3 {
public:
    Grid3() = default;
    Grid3(std::size_t nx, std::size_t ny, double x_step, double y_step, double x_min, double y_min,
          std::vector<double> z_planes)
        : nx_(nx), ny_(ny), x_step_(x_step), y_step_(y_step), x_min_(x_min), y_min_(y_min),
          z_(std::move(z_planes)) {
        if (nx_ == 0 || ny_ == 0) throw ConfigError("grid needs nx, ny >= 1");
        if (!(x_step_ > 0) || !(y_step_ > 0)) throw ConfigError("grid steps must be positive");
        if (z_.empty()) throw ConfigError("grid needs at least one z plane");
        for (std::size_t k = 1; k < z_.size(); ++k)
            if (!(z_[k] > z_[k - 1])) throw ConfigError("z planes must be strictly increasing");
    }

    /// Planes z_first, z_first + z_step, ... up to and including z_last.
    static std::vector<double> uniform_planes(double z_first, double z_last, double z_step) {
        if (!(z_step > 0)) throw ConfigError("z step must be positive");
        const auto n = static_cast<std::size_t>(std::floor((z_last - z_first) / z_step + 1e-9)) + 1;
        std::vector<double> z(n);
        for (std::size_t k = 0; k < n; ++k) z[k] = z_first + static_cast<double>(k) * z_step;
        return z;
    }

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t nz() const { return z_.size(); }
    std::size_t size() const { return nx_ * ny_ * z_.size(); }
    double x_step() const { return x_step_; }
    double y_step() const { return y_step_; }
    double x_min() const { return x_min_; }
    double y_min() const { return y_min_; }
    std::span<const double> z_planes() const { return z_; }

    double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * x_step_; }
    double y(std::size_t j) const { return y_min_ + static_cast<double>(j) * y_step_; }
    double z(std::size_t k) const { return z_[k]; }
    Vec3 coordinate(Index3 v) const { return {x(v.i), y(v.j), z(v.k)}; }

    /// Linear offset with k outermost and i innermost.
    std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const { return (k * ny_ + j) * nx_ + i; }
    std::size_t offset(Index3 v) const { return offset(v.i, v.j, v.k); }
    Index3 unravel(std::size_t off) const {
        return {off % nx_, (off / nx_) % ny_, off / (nx_ * ny_)};
    }

    /// Nearest voxel to p, clamped into the grid.
    Index3 nearest_index(Vec3 p) const {
        auto axis = [](double v, double lo, double step, std::size_t n) {
            const double t = std::round((v - lo) / step);
            return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(n - 1)));
        };
        Index3 r{axis(p.x, x_min_, x_step_, nx_), axis(p.y, y_min_, y_step_, ny_), 0};
        const auto it = std::lower_bound(z_.begin(), z_.end(), p.z);
        if (it == z_.end()) {
            r.k = z_.size() - 1;
        } else if (it == z_.begin()) {
            r.k = 0;
        } else {
            const auto k = static_cast<std::size_t>(it - z_.begin());
            r.k = (p.z - z_[k - 1] <= z_[k] - p.z) ? k - 1 : k;
        }
        return r;
    }

    bool contains(Vec3 p) const {
        return p.x >= x_min_ && p.x <= x(nx_ - 1) && p.y >= y_min_ && p.y <= y(ny_ - 1) && p.z >= z_.front() &&
               p.z <= z_.back();
    }

    /// True when the plane spacing is constant to within tol (relative to the spacing).
    bool uniform_z(double tol = 1e-6) const {
        if (z_.size() < 2) return true;
        const double dz = z_[1] - z_[0];
        for (std::size_t k = 2; k < z_.size(); ++k)
            if (std::abs((z_[k] - z_[k - 1]) - dz) > tol * dz) return false;
        return true;
    }
    double z_step() const { return z_.size() < 2 ? 0.0 : z_[1] - z_[0]; }

    friend bool operator==(const Grid3&, const Grid3&) = default;

private:
    std::size_t nx_ = 1, ny_ = 1;
    double x_step_ = 1, y_step_ = 1, x_min_ = 0, y_min_ = 0;
    std::vector<double> z_{0.0};
};

/// Dense scalar field laid out like Grid3::offset.
struct Field3 {
    std::size_t nx = 0, ny = 0, nz = 0;
    std::vector<double> values;

    Field3() = default;
    Field3(std::size_t nx_, std::size_t ny_, std::size_t nz_, double fill = 0.0)
        : nx(nx_), ny(ny_), nz(nz_), values(nx_ * ny_ * nz_, fill) {}

    std::size_t size() const { return values.size(); }
    std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const { return (k * ny + j) * nx + i; }
    double& operator()(std::size_t i, std::size_t j, std::size_t k) { return values[offset(i, j, k)]; }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const { return values[offset(i, j, k)]; }

    std::span<double> plane(std::size_t k) { return {values.data() + k * nx * ny, nx * ny}; }
    std::span<const double> plane(std::size_t k) const { return {values.data() + k * nx * ny, nx * ny}; }
};

}  // namespace pmt
