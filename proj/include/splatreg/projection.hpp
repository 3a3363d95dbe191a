#pragma once

#include "splatreg/geometry.hpp"
#include "splatreg/parallel.hpp"
#include "splatreg/types.hpp"

#include <Eigen/Eigenvalues>

#include <optional>
#include <vector>

namespace splatreg {

/// Screen-space footprint of one Gaussian.
struct Splat2D {
    Vec2 mean2d = Vec2::Zero();
    Mat2 cov2d = Mat2::Identity();
    Mat2 conic = Mat2::Identity(); // cov2d inverse
    double depth = 0.0;
    int gaussian_index = 0;
    double radius = 0.0;
};

struct ProjectionOptions {
    // Added to both diagonal entries of the projected covariance (pixel²).
    double dilation = 0.3;
    // Footprint radius in standard deviations of the major axis; at least 3.
    double cutoff_sigma = 3.0;
    double min_depth = kMinDepth;
    // Drop splats whose footprint box misses the image.
    bool cull_offscreen = true;
};

/// R diag(s²) Rᵀ.
inline Mat3 covariance3d(const Vec3 &scale, const Eigen::Vector4d &rotation) {
    if (!(scale.array() > 0.0).all() || !scale.allFinite()) throw InvalidInput("scale must be positive");
    const Mat3 r = quat_to_rotation(rotation);
    return r * scale.array().square().matrix().asDiagonal() * r.transpose();
}

/// Largest eigenvalue of a symmetric 2×2 matrix; throws unless SPD.
inline double max_eigenvalue_spd(const Mat2 &cov) {
    if (!cov.allFinite() || std::abs(cov(0, 1) - cov(1, 0)) > 1e-9 * (1.0 + cov.cwiseAbs().maxCoeff())) {
        throw InvalidInput("covariance must be finite and symmetric");
    }
    const double mid = 0.5 * (cov(0, 0) + cov(1, 1));
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    const double disc = std::sqrt(std::max(0.0, mid * mid - det));
    const double lo = mid - disc;
    if (!(lo > 0.0) || !(det > 0.0)) throw InvalidInput("covariance is not positive definite");
    return mid + disc;
}

/// cutoff_sigma · √(largest eigenvalue); 3σ by default.
inline double footprint_radius(const Mat2 &cov2d, double cutoff_sigma = 3.0) {
    return cutoff_sigma * std::sqrt(max_eigenvalue_spd(cov2d));
}

/// Pinhole Jacobian of (fx·x/z, fy·y/z) at camera-frame point t.
inline Eigen::Matrix<double, 2, 3> projection_jacobian(const Camera &cam, const Vec3 &t) {
    Eigen::Matrix<double, 2, 3> j;
    const double iz = 1.0 / t.z();
    j << cam.fx * iz, 0.0, -cam.fx * t.x() * iz * iz, 0.0, cam.fy * iz, -cam.fy * t.y() * iz * iz;
    return j;
}

/// EWA projection of g. Returns nullopt when g is behind the camera or its
/// footprint misses the image.
inline std::optional<Splat2D> project_gaussian(const Gaussian &g, int index, const Camera &cam,
                                               const ProjectionOptions &opts = {}) {
    const Vec3 t = cam.to_camera(g.mu);
    if (!(t.z() > opts.min_depth)) return std::nullopt;
    const auto j = projection_jacobian(cam, t);
    const Eigen::Matrix<double, 2, 3> jw = j * cam.rotation_wc;
    Mat2 cov = jw * covariance3d(g.scale, g.rotation) * jw.transpose();
    cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
    cov(0, 0) += opts.dilation;
    cov(1, 1) += opts.dilation;

    Splat2D s;
    s.mean2d = {cam.fx * t.x() / t.z() + cam.cx, cam.fy * t.y() / t.z() + cam.cy};
    s.cov2d = cov;
    s.depth = t.z();
    s.gaussian_index = index;
    const double det = cov.determinant();
    if (!(det > 0.0) || !std::isfinite(det)) return std::nullopt;
    s.conic = cov.inverse();
    s.radius = footprint_radius(cov, opts.cutoff_sigma);
    if (opts.cull_offscreen && (s.mean2d.x() + s.radius < 0.0 || s.mean2d.x() - s.radius > cam.width || s.mean2d.y() + s.radius < 0.0 ||
        s.mean2d.y() - s.radius > cam.height)) {
        return std::nullopt;
    }
    return s;
}

/// Non-culled splats in Gaussian order, independent of thread count.
inline std::vector<Splat2D> project_scene(const Scene &scene, const Camera &cam, const ProjectionOptions &opts = {},
                                          int threads = 1) {
    const int n = static_cast<int>(scene.size());
    std::vector<std::optional<Splat2D>> slots(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int i) { slots[i] = project_gaussian(scene.gaussians[i], i, cam, opts); });
    std::vector<Splat2D> out;
    out.reserve(slots.size());
    for (auto &s : slots)
        if (s) out.push_back(*s);
    return out;
}

} // namespace splatreg
