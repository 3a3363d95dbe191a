#pragma once

#include "splatreg/geometry.hpp"
#include "splatreg/rasterizer.hpp"
#include "splatreg/types.hpp"

#include <optional>
#include <vector>

namespace splatreg {

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();
};

/// Ray through the center of pixel (row, col), starting at the camera center.
inline Ray pixel_ray(const Camera &cam, int row, int col) {
    return {cam.center(), pixel_ray_direction(cam, pixel_center(row, col))};
}

enum class NormalFrame { Camera, World };

struct NormalMap {
    Raster<Vec3> normals;
    Raster<std::uint8_t> valid;
    NormalFrame frame = NormalFrame::Camera;
};

/// Per-pixel normals from central differences of the back-projected
/// 4-neighbourhood, in the depth map's camera frame and oriented toward the
/// camera. Border pixels and pixels with an invalid neighbour are invalid.
inline NormalMap normal_from_depth(const DepthMap &depth) {
    const int h = depth.values.height(), w = depth.values.width();
    NormalMap out{Raster<Vec3>(h, w, Vec3::Zero()), Raster<std::uint8_t>(h, w, 0), NormalFrame::Camera};
    const Camera &cam = depth.camera;
    auto point = [&](int r, int c) {
        const double z = depth.values(r, c);
        return Vec3((c + 0.5 - cam.cx) / cam.fx * z, (r + 0.5 - cam.cy) / cam.fy * z, z);
    };
    for (int r = 1; r + 1 < h; ++r) {
        for (int c = 1; c + 1 < w; ++c) {
            if (!depth.valid(r, c) || !depth.valid(r, c - 1) || !depth.valid(r, c + 1) || !depth.valid(r - 1, c) ||
                !depth.valid(r + 1, c)) {
                continue;
            }
            const Vec3 du = point(r, c + 1) - point(r, c - 1);
            const Vec3 dv = point(r + 1, c) - point(r - 1, c);
            Vec3 n = du.cross(dv);
            const double len = n.norm();
            if (!(len > 0.0) || !std::isfinite(len)) continue;
            n /= len;
            if (n.dot(-point(r, c)) < 0.0) n = -n;
            out.normals(r, c) = n;
            out.valid(r, c) = 1;
        }
    }
    return out;
}

/// Same map expressed in world coordinates.
inline NormalMap to_world(const NormalMap &map, const Camera &cam) {
    if (map.frame == NormalFrame::World) return map;
    NormalMap out = map;
    const Mat3 rt = cam.rotation_wc.transpose();
    for (auto &n : out.normals.data()) n = rt * n;
    out.frame = NormalFrame::World;
    return out;
}

struct RayPlaneHit {
    Vec3 point;
    double t;
};

inline constexpr double kParallelEpsilon = 1e-6;

/// Intersection of `ray` with the plane through `mu` with normal `n`.
/// nullopt when the ray is parallel to the plane or the hit is not in front.
inline std::optional<RayPlaneHit> ray_plane_intersect(const Ray &ray, const Vec3 &mu, const Vec3 &n,
                                                      double parallel_eps = kParallelEpsilon) {
    const double denom = n.dot(ray.direction);
    if (!(std::abs(denom) >= parallel_eps)) return std::nullopt;
    const double t = n.dot(mu - ray.origin) / denom;
    if (!(t > 0.0)) return std::nullopt;
    return RayPlaneHit{ray.origin + t * ray.direction, t};
}

/// Squared Mahalanobis distance of x from g under R diag(s²) Rᵀ.
inline double mahalanobis2(const Gaussian &g, const Vec3 &x, Vec3 *local_scaled = nullptr) {
    const Vec3 inv_s = g.scale.cwiseInverse();
    if (!inv_s.allFinite() || !(g.scale.array() > 0.0).all() ||
        !(g.scale.array().square() > 0.0).all()) {
        throw InvalidInput("degenerate Gaussian covariance");
    }
    const Vec3 y = quat_to_rotation(g.rotation).transpose() * (x - g.mu);
    const Vec3 z = y.cwiseProduct(inv_s);
    if (local_scaled) *local_scaled = z;
    return z.squaredNorm();
}

/// Unnormalized falloff exp(-½ (x-μ)ᵀ Σ⁻¹ (x-μ)).
inline double eval_gaussian3d(const Gaussian &g, const Vec3 &x) { return std::exp(-0.5 * mahalanobis2(g, x)); }

/// One normal per Gaussian: the stored normal when present, otherwise the
/// world-frame normal map entry of the source view at the provenance pixel.
inline std::vector<Vec3> resolve_normals(const Scene &scene, const std::vector<NormalMap> &world_maps = {}) {
    std::vector<Vec3> out;
    out.reserve(scene.size());
    for (std::size_t j = 0; j < scene.size(); ++j) {
        const auto &g = scene.gaussians[j];
        if (g.normal) {
            out.push_back(*g.normal);
            continue;
        }
        if (scene.has_provenance()) {
            const auto &p = scene.provenance[j];
            if (p.view >= 0 && p.view < static_cast<int>(world_maps.size())) {
                const auto &m = world_maps[static_cast<std::size_t>(p.view)];
                if (m.frame != NormalFrame::World) throw InvalidInput("normal maps must be in world frame");
                if (m.valid.contains(p.row, p.col) && m.valid(p.row, p.col)) {
                    out.push_back(m.normals(p.row, p.col));
                    continue;
                }
            }
        }
        throw InvalidInput("Gaussian " + std::to_string(j) + " has no normal");
    }
    return out;
}

/// Auxiliary branch: each candidate Gaussian (2D footprint ellipse covering the pixel)
/// is sampled at the intersection of the pixel ray with its own plane, with
/// alpha = opacity3d · falloff. Compositing follows the 2D rasterizer's
/// front-to-back splat order.
inline RenderOutput render3d(const Scene &scene, const std::vector<Vec3> &normals, const Camera &cam,
                             const RenderOptions &opts = {}) {
    if (normals.size() != scene.size()) throw InvalidInput("render3d needs one normal per Gaussian");
    const auto view = prepare_view(scene, cam, opts, true);
    RenderOutput out(cam.height, cam.width, opts.background);
    const Vec3 origin = cam.center();
    parallel_for(cam.height, opts.threads, [&](int row) {
        for (int col = 0; col < cam.width; ++col) {
            const Vec2 p = pixel_center(row, col);
            const Ray ray{origin, pixel_ray_direction(cam, p)};
            PixelCompositor px;
            for (int idx : view.candidates(row, col)) {
                const auto &s = view.splats[static_cast<std::size_t>(idx)];
                if (!inside_footprint(s, p, opts.projection.cutoff_sigma)) continue;
                const auto j = static_cast<std::size_t>(s.gaussian_index);
                const auto &g = scene.gaussians[j];
                const auto hit = ray_plane_intersect(ray, g.mu, normals[j]);
                if (!hit) continue;
                const double e = opts.alpha_exponents.empty() ? 1.0 : opts.alpha_exponents[j];
                px.add(g.opacity3d * eval_gaussian3d(g, hit->point), g.color, opts, e);
                if (px.done) break;
            }
            px.store(out, row, col, opts.background);
        }
    });
    return out;
}

} // namespace splatreg
