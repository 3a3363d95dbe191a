#pragma once

#include "splatreg/types.hpp"

namespace splatreg {

inline constexpr double kMinDepth = 1e-6;

/// Rotation matrix for quaternion (w, x, y, z). The input is renormalized;
/// q and -q give the same matrix.
inline Mat3 quat_to_rotation(const Eigen::Vector4d &q) {
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("zero-norm quaternion");
    const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
    Mat3 r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return r;
}

/// Inverse of quat_to_rotation up to sign; returns w >= 0.
inline Eigen::Vector4d rotation_to_quat(const Mat3 &r) {
    Eigen::Quaterniond q(r);
    q.normalize();
    Eigen::Vector4d out(q.w(), q.x(), q.y(), q.z());
    if (out[0] < 0.0) out = -out;
    return out;
}

struct Projection {
    Vec2 pixel;
    double depth;
};

inline Projection project(const Camera &cam, const Vec3 &world, double min_depth = kMinDepth) {
    const Vec3 p = cam.to_camera(world);
    if (!(p.z() > min_depth)) throw BehindCamera("point is behind the camera");
    return {{cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy}, p.z()};
}

/// World point at camera-frame depth along the ray through `pixel`.
inline Vec3 backproject(const Camera &cam, const Vec2 &pixel, double depth) {
    if (!(depth > 0.0) || !std::isfinite(depth)) throw InvalidInput("backproject requires positive depth");
    const Vec3 p((pixel.x() - cam.cx) / cam.fx * depth, (pixel.y() - cam.cy) / cam.fy * depth, depth);
    return cam.to_world(p);
}

/// Unit world-space direction of the ray through `pixel`.
inline Vec3 pixel_ray_direction(const Camera &cam, const Vec2 &pixel) {
    const Vec3 d_cam((pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy, 1.0);
    return (cam.rotation_wc.transpose() * d_cam).normalized();
}

} // namespace splatreg
