#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace splatreg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Thrown for precondition violations on caller-supplied values.
class InvalidInput : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A point at or behind the camera plane was projected.
class BehindCamera : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Malformed input file; offset is the byte position where parsing failed.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

/// Row-major H×W raster of T. Row index first everywhere in this library.
template <typename T>
class Raster {
  public:
    Raster() = default;
    Raster(int height, int width, T fill = T{})
        : height_(height), width_(width), data_(checked_size(height, width), fill) {}

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T &operator()(int row, int col) { return data_[index(row, col)]; }
    const T &operator()(int row, int col) const { return data_[index(row, col)]; }

    bool contains(int row, int col) const noexcept {
        return row >= 0 && col >= 0 && row < height_ && col < width_;
    }

    std::vector<T> &data() noexcept { return data_; }
    const std::vector<T> &data() const noexcept { return data_; }

    bool operator==(const Raster &other) const = default;

  private:
    static std::size_t checked_size(int height, int width) {
        if (height < 0 || width < 0) {
            throw InvalidInput("raster dimensions must be non-negative");
        }
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

/// H×W×3 linear RGB image.
class ImageBuffer {
  public:
    ImageBuffer() = default;
    ImageBuffer(int height, int width, const Vec3 &fill = Vec3::Zero())
        : pixels_(height, width, fill) {}

    int height() const noexcept { return pixels_.height(); }
    int width() const noexcept { return pixels_.width(); }

    Vec3 &operator()(int row, int col) { return pixels_(row, col); }
    const Vec3 &operator()(int row, int col) const { return pixels_(row, col); }

    const Raster<Vec3> &pixels() const noexcept { return pixels_; }
    Raster<Vec3> &pixels() noexcept { return pixels_; }

    bool all_finite() const {
        for (const auto &px : pixels_.data()) {
            if (!px.allFinite()) return false;
        }
        return true;
    }

    bool operator==(const ImageBuffer &other) const { return pixels_ == other.pixels_; }

  private:
    Raster<Vec3> pixels_;
};

struct Gaussian {
    Vec3 mu = Vec3::Zero();
    double opacity = 1.0;
    Vec3 scale = Vec3::Ones();
    // w, x, y, z
    Eigen::Vector4d rotation{1.0, 0.0, 0.0, 0.0};
    Vec3 color = Vec3::Zero();
    double opacity3d = 1.0;
    std::optional<Vec3> normal;
};

/// Throws InvalidInput when g breaks a Gaussian invariant.
inline void validate(const Gaussian &g) {
    if (!g.mu.allFinite() || !g.color.allFinite()) throw InvalidInput("non-finite Gaussian field");
    if (std::abs(g.rotation.norm() - 1.0) > 1e-6) throw InvalidInput("rotation is not a unit quaternion");
    if (!(g.scale.array() > 0.0).all() || !g.scale.allFinite()) throw InvalidInput("scale must be positive");
    if (!(g.opacity >= 0.0 && g.opacity <= 1.0)) throw InvalidInput("opacity outside [0,1]");
    if (!(g.opacity3d >= 0.0 && g.opacity3d <= 1.0)) throw InvalidInput("opacity3d outside [0,1]");
    if (g.normal && std::abs(g.normal->norm() - 1.0) > 1e-6) throw InvalidInput("normal is not unit length");
}

struct Provenance {
    int view = 0;
    int row = 0;
    int col = 0;

    bool operator==(const Provenance &) const = default;
};

struct Scene {
    std::vector<Gaussian> gaussians;
    // Empty, or one entry per Gaussian.
    std::vector<Provenance> provenance;
    // Unrecognized top-level fields from a loaded file, as (key, raw JSON text).
    std::vector<std::pair<std::string, std::string>> extras;

    std::size_t size() const noexcept { return gaussians.size(); }
    bool has_provenance() const noexcept { return !provenance.empty() && provenance.size() == gaussians.size(); }
};

/// Pinhole camera. Pixel coordinates are continuous with the origin at the
/// top-left image corner, so the center of pixel (row, col) is (col + 0.5, row + 0.5).
struct Camera {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    Mat3 rotation_wc = Mat3::Identity();
    Vec3 translation_wc = Vec3::Zero();
    int width = 1;
    int height = 1;

    Vec3 center() const { return -rotation_wc.transpose() * translation_wc; }
    Vec3 to_camera(const Vec3 &world) const { return rotation_wc * world + translation_wc; }
    Vec3 to_world(const Vec3 &cam) const { return rotation_wc.transpose() * (cam - translation_wc); }

    /// Same pose and principal point, focal lengths multiplied by zoom.
    Camera zoomed(double zoom) const {
        Camera out = *this;
        out.fx *= zoom;
        out.fy *= zoom;
        return out;
    }
};

inline void validate(const Camera &cam) {
    if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) throw InvalidInput("focal lengths must be positive");
    if (cam.width <= 0 || cam.height <= 0) throw InvalidInput("image dimensions must be positive");
    const Mat3 rrt = cam.rotation_wc * cam.rotation_wc.transpose();
    if (!rrt.isApprox(Mat3::Identity(), 1e-6) || std::abs(cam.rotation_wc.determinant() - 1.0) > 1e-6) {
        throw InvalidInput("rotation_wc is not a proper rotation");
    }
    if (!cam.translation_wc.allFinite() || !std::isfinite(cam.cx) || !std::isfinite(cam.cy)) {
        throw InvalidInput("non-finite camera parameter");
    }
}

inline constexpr double kInvalidDepth = 0.0;

inline bool is_valid_depth(double d) noexcept { return std::isfinite(d) && d > 0.0; }

struct DepthMap {
    Raster<double> values;
    Camera camera;

    bool valid(int row, int col) const { return values.contains(row, col) && is_valid_depth(values(row, col)); }
};

inline Vec2 pixel_center(int row, int col) { return {col + 0.5, row + 0.5}; }

} // namespace splatreg
