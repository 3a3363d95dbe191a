#pragma once

#include "splatreg/geometry.hpp"
#include "splatreg/reg3d.hpp"
#include "splatreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

namespace splatreg {

struct GaussianGenOptions {
    double opacity = 0.8;
    // Isotropic scale = scale_factor · depth / fx (one pixel footprint at 1).
    double scale_factor = 1.0;
    int view_index = 0;
};

namespace detail {

// Nearest valid entry of `map` to (r, c) by Chebyshev rings, scanning each ring
// in row-major order.
inline std::optional<Vec3> nearest_valid_normal(const NormalMap &map, int r, int c) {
    const int h = map.valid.height(), w = map.valid.width();
    const int max_ring = std::max(h, w);
    for (int ring = 0; ring < max_ring; ++ring) {
        for (int rr = r - ring; rr <= r + ring; ++rr) {
            for (int cc = c - ring; cc <= c + ring; ++cc) {
                if (std::max(std::abs(rr - r), std::abs(cc - c)) != ring) continue;
                if (map.valid.contains(rr, cc) && map.valid(rr, cc)) return map.normals(rr, cc);
            }
        }
    }
    return std::nullopt;
}

} // namespace detail

/// One Gaussian per valid depth pixel, centered on the back-projected pixel
/// center. Normals come from normal_from_depth; pixels without one (borders,
/// holes) borrow the nearest valid normal, or face along the optical axis.
inline Scene depth_to_gaussians(const DepthMap &depth, const ImageBuffer &color, const GaussianGenOptions &opts = {}) {
    const int h = depth.values.height(), w = depth.values.width();
    if (color.height() != h || color.width() != w) throw InvalidInput("color and depth dimensions differ");
    if (depth.camera.height != h || depth.camera.width != w) throw InvalidInput("depth map does not match its camera");
    if (!(opts.opacity >= 0.0 && opts.opacity <= 1.0)) throw InvalidInput("opacity outside [0,1]");
    if (!(opts.scale_factor > 0.0)) throw InvalidInput("scale factor must be positive");
    const NormalMap normals = to_world(normal_from_depth(depth), depth.camera);
    const Vec3 facing = depth.camera.rotation_wc.transpose() * Vec3(0.0, 0.0, -1.0);

    Scene scene;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!depth.valid(r, c)) continue;
            const double z = depth.values(r, c);
            Gaussian g;
            g.mu = backproject(depth.camera, pixel_center(r, c), z);
            g.opacity = opts.opacity;
            g.opacity3d = opts.opacity;
            g.scale = Vec3::Constant(opts.scale_factor * z / depth.camera.fx);
            g.color = color(r, c);
            g.normal = detail::nearest_valid_normal(normals, r, c).value_or(facing);
            scene.gaussians.push_back(std::move(g));
            scene.provenance.push_back({opts.view_index, r, c});
        }
    }
    return scene;
}

/// Each Gaussian repeated `copies` times consecutively; copy k is attributed
/// to view k. A scene without provenance stays without it.
inline Scene duplicate_scene(const Scene &scene, int copies) {
    if (copies < 1) throw InvalidInput("copies must be at least 1");
    Scene out;
    out.extras = scene.extras;
    out.gaussians.reserve(scene.size() * static_cast<std::size_t>(copies));
    const bool prov = scene.has_provenance();
    for (std::size_t j = 0; j < scene.size(); ++j) {
        for (int k = 0; k < copies; ++k) {
            out.gaussians.push_back(scene.gaussians[j]);
            if (prov) out.provenance.push_back({k, scene.provenance[j].row, scene.provenance[j].col});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Textured plane scenes

enum class TextureKind { Checkerboard, ValueNoise };

struct TextureSpec {
    TextureKind kind = TextureKind::ValueNoise;
    std::uint32_t seed = 1;
    // Cells per scene unit on the plane.
    double frequency = 4.0;
};

struct PlaneSpec {
    double depth = 2.0;
    // Rotation of the plane about the world x-axis, degrees.
    double tilt_deg = 0.0;
};

struct ViewRigSpec {
    int count = 1;
    int height = 32;
    int width = 32;
    double focal = 32.0;
    // Angular spread of the camera arc around the plane center, degrees.
    double arc_deg = 6.0;
};

struct PlaneViews {
    std::vector<Camera> cameras;
    std::vector<DepthMap> depths;
    std::vector<ImageBuffer> images;
};

namespace detail {

inline std::uint32_t hash2(std::int64_t x, std::int64_t y, std::uint32_t seed) {
    std::uint64_t h = static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL ^
                      (static_cast<std::uint64_t>(y) + 0x632BE59BD9B4E019ULL + seed * 0x94D049BB133111EBULL);
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 29;
    h *= 0x94D049BB133111EBULL;
    h ^= h >> 32;
    return static_cast<std::uint32_t>(h);
}

inline double lattice(std::int64_t x, std::int64_t y, std::uint32_t seed) {
    return static_cast<double>(hash2(x, y, seed)) / 4294967295.0;
}

} // namespace detail

/// Plane-local RGB texture at coordinates (u, v), values in [0.15, 0.85].
inline Vec3 texture_color(const TextureSpec &tex, double u, double v) {
    const double x = u * tex.frequency, y = v * tex.frequency;
    if (tex.kind == TextureKind::Checkerboard) {
        const bool odd = ((static_cast<std::int64_t>(std::floor(x)) + static_cast<std::int64_t>(std::floor(y))) & 1) != 0;
        return odd ? Vec3(0.8, 0.75, 0.7) : Vec3(0.2, 0.25, 0.3);
    }
    const auto x0 = static_cast<std::int64_t>(std::floor(x)), y0 = static_cast<std::int64_t>(std::floor(y));
    const double fx = x - std::floor(x), fy = y - std::floor(y);
    const double sx = fx * fx * (3.0 - 2.0 * fx), sy = fy * fy * (3.0 - 2.0 * fy);
    Vec3 out;
    for (int ch = 0; ch < 3; ++ch) {
        const auto s = tex.seed * 3u + static_cast<std::uint32_t>(ch);
        const double a = detail::lattice(x0, y0, s), b = detail::lattice(x0 + 1, y0, s);
        const double c = detail::lattice(x0, y0 + 1, s), d = detail::lattice(x0 + 1, y0 + 1, s);
        const double top = a + (b - a) * sx, bottom = c + (d - c) * sx;
        out[ch] = 0.15 + 0.7 * (top + (bottom - top) * sy);
    }
    return out;
}

/// The plane's center point, unit normal (facing the origin side) and in-plane axes.
struct PlaneFrame {
    Vec3 center;
    Vec3 normal;
    Vec3 axis_u;
    Vec3 axis_v;
};

inline PlaneFrame plane_frame(const PlaneSpec &plane) {
    const double a = plane.tilt_deg * std::numbers::pi / 180.0;
    const Mat3 rx = Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix();
    return {Vec3(0.0, 0.0, plane.depth), rx * Vec3(0.0, 0.0, -1.0), Vec3::UnitX(), rx * Vec3::UnitY()};
}

/// Camera on an arc of radius `plane.depth` around the plane center at
/// azimuth `angle_deg` about the world y-axis, looking at the center.
inline Camera arc_camera(const PlaneSpec &plane, const ViewRigSpec &rig, double angle_deg) {
    const double a = angle_deg * std::numbers::pi / 180.0;
    const Vec3 target(0.0, 0.0, plane.depth);
    const Vec3 center = target + plane.depth * Vec3(std::sin(a), 0.0, -std::cos(a));
    Mat3 r_cw;
    const Vec3 forward = (target - center).normalized();
    const Vec3 down = Vec3::UnitY();
    r_cw.col(0) = down.cross(forward).normalized();
    r_cw.col(1) = down;
    r_cw.col(2) = forward;
    Camera cam;
    cam.fx = cam.fy = rig.focal;
    cam.cx = 0.5 * rig.width;
    cam.cy = 0.5 * rig.height;
    cam.width = rig.width;
    cam.height = rig.height;
    cam.rotation_wc = r_cw.transpose();
    cam.translation_wc = -cam.rotation_wc * center;
    return cam;
}

/// Azimuths of `count` cameras spread evenly over the arc; a single camera sits at 0.
inline std::vector<double> arc_angles(int count, double arc_deg) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
        out.push_back(count == 1 ? 0.0 : -0.5 * arc_deg + arc_deg * k / (count - 1));
    }
    return out;
}

/// Exact depth and texture image of the plane seen by `cam`. Pixels whose
/// ray misses the plane get kInvalidDepth and black.
inline std::pair<DepthMap, ImageBuffer> render_plane(const PlaneSpec &plane, const TextureSpec &tex, const Camera &cam) {
    const PlaneFrame f = plane_frame(plane);
    DepthMap depth{Raster<double>(cam.height, cam.width, kInvalidDepth), cam};
    ImageBuffer image(cam.height, cam.width);
    const Vec3 origin = cam.center();
    for (int r = 0; r < cam.height; ++r) {
        for (int c = 0; c < cam.width; ++c) {
            const Ray ray{origin, pixel_ray_direction(cam, pixel_center(r, c))};
            const auto hit = ray_plane_intersect(ray, f.center, f.normal);
            if (!hit) continue;
            const double z = cam.to_camera(hit->point).z();
            if (!(z > kMinDepth)) continue;
            depth.values(r, c) = z;
            const Vec3 rel = hit->point - f.center;
            image(r, c) = texture_color(tex, rel.dot(f.axis_u), rel.dot(f.axis_v));
        }
    }
    return {std::move(depth), std::move(image)};
}

/// `rig.count` cameras on an arc around a textured plane, with exact depth
/// maps and texture images.
inline PlaneViews make_plane_views(const ViewRigSpec &rig, const PlaneSpec &plane, const TextureSpec &tex) {
    if (rig.count < 1) throw InvalidInput("view count must be at least 1");
    if (rig.width <= 0 || rig.height <= 0 || !(rig.focal > 0.0)) throw InvalidInput("invalid view rig");
    PlaneViews out;
    for (double angle : arc_angles(rig.count, rig.arc_deg)) {
        Camera cam = arc_camera(plane, rig, angle);
        auto [depth, image] = render_plane(plane, tex, cam);
        out.cameras.push_back(cam);
        out.depths.push_back(std::move(depth));
        out.images.push_back(std::move(image));
    }
    return out;
}

/// Gaussians from every view of `views`, provenance view k for view k.
inline Scene gaussians_from_views(const PlaneViews &views, const GaussianGenOptions &opts = {}) {
    Scene scene;
    for (std::size_t k = 0; k < views.depths.size(); ++k) {
        GaussianGenOptions o = opts;
        o.view_index = static_cast<int>(k);
        Scene part = depth_to_gaussians(views.depths[k], views.images[k], o);
        scene.gaussians.insert(scene.gaussians.end(), part.gaussians.begin(), part.gaussians.end());
        scene.provenance.insert(scene.provenance.end(), part.provenance.begin(), part.provenance.end());
    }
    return scene;
}

} // namespace splatreg
