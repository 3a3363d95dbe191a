#pragma once

#include "splatreg/geometry.hpp"
#include "splatreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace splatreg {

/// Opacity ceiling shared by compositing and normalization.
inline constexpr double kAlphaMax = 0.999;

struct NormalizationConfig {
    // Reference overlap count whose accumulated weight is preserved.
    double m_ref = 1.0;
    // Relative depth threshold of the multi-view consistency test.
    double tau = 0.5;
};

inline void validate(const NormalizationConfig &c) {
    if (!(c.m_ref > 0.0)) throw InvalidInput("m_ref must be positive");
    if (!(c.tau > 0.0 && c.tau < 1.0)) throw InvalidInput("tau must lie in (0, 1)");
}

/// 1 - (1 - alpha)^exponent, the per-Gaussian alpha that keeps the accumulated
/// weight of `1/exponent`-fold duplicates equal to that of one copy.
inline double alpha_with_exponent(double alpha, double exponent) {
    if (exponent == 1.0) return alpha;
    return -std::expm1(exponent * std::log1p(-alpha));
}

/// Alpha normalization: 1 - (1 - alpha)^(m_ref / m_tilde). Inputs at or above
/// 1 are clamped to kAlphaMax first.
inline double alpha_normalize(double alpha, double m_ref, int m_tilde) {
    if (m_tilde < 1) throw InvalidInput("overlap count must be at least 1");
    if (!(m_ref > 0.0)) throw InvalidInput("m_ref must be positive");
    if (!(alpha >= 0.0)) throw InvalidInput("alpha must be non-negative");
    alpha = std::min(alpha, kAlphaMax);
    return alpha_with_exponent(alpha, m_ref / static_cast<double>(m_tilde));
}

// ---------------------------------------------------------------------------
// Multi-view depth consistency

/// Per-view raster of overlap counts.
struct CountMap {
    Raster<int> counts;
    int view_index = 0;
};

/// Result of expressing a source depth map in a target camera's frame.
struct DepthWarp {
    // Source-view grid: camera-frame z of each source point in the target
    // frame, or kInvalidDepth for invalid source pixels.
    Raster<double> depth_in_target;
    // Source-view grid: target pixel (row, col) hit by each source point, or (-1, -1).
    Raster<Eigen::Vector2i> target_pixel;
    // Target-view grid: z-buffered (nearest) warped depth; kInvalidDepth where nothing landed.
    Raster<double> forward_depth;
};

/// Back-projects every valid pixel of `source` and expresses it in `target`'s
/// frame. Points behind the target camera or outside its image are left out of
/// `forward_depth` and `target_pixel`.
inline DepthWarp warp_depth(const DepthMap &source, const Camera &target) {
    const int h = source.values.height(), w = source.values.width();
    DepthWarp out{Raster<double>(h, w, kInvalidDepth), Raster<Eigen::Vector2i>(h, w, Eigen::Vector2i(-1, -1)),
                  Raster<double>(target.height, target.width, kInvalidDepth)};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!source.valid(r, c)) continue;
            const Vec3 world = backproject(source.camera, pixel_center(r, c), source.values(r, c));
            const Vec3 local = target.to_camera(world);
            out.depth_in_target(r, c) = local.z();
            if (!(local.z() > kMinDepth)) continue;
            const double u = target.fx * local.x() / local.z() + target.cx;
            const double v = target.fy * local.y() / local.z() + target.cy;
            const int tc = static_cast<int>(std::floor(u));
            const int tr = static_cast<int>(std::floor(v));
            if (!out.forward_depth.contains(tr, tc)) continue;
            out.target_pixel(r, c) = {tr, tc};
            double &slot = out.forward_depth(tr, tc);
            if (!is_valid_depth(slot) || local.z() < slot) slot = local.z();
        }
    }
    return out;
}

/// |a - b| / (a + b) <= tau.
inline bool depths_consistent(double a, double b, double tau) {
    return std::abs(a - b) / (a + b) <= tau;
}

/// Overlap counts for view `view_i`: at each valid pixel p, the number of views
/// k whose depth, expressed in view i's frame and sampled (nearest neighbour) at
/// the pixel p̂ of view k that p reprojects to, agrees with Dⁱ(p) under the
/// relative test. View i always counts itself.
inline CountMap count_map(const std::vector<DepthMap> &depths, int view_i, const NormalizationConfig &config) {
    validate(config);
    if (view_i < 0 || view_i >= static_cast<int>(depths.size())) throw InvalidInput("view index out of range");
    const DepthMap &di = depths[static_cast<std::size_t>(view_i)];
    const int h = di.values.height(), w = di.values.width();
    if (h != di.camera.height || w != di.camera.width) throw InvalidInput("depth map does not match its camera");

    std::vector<Raster<double>> warped(depths.size());
    for (std::size_t k = 0; k < depths.size(); ++k) {
        if (static_cast<int>(k) == view_i) continue;
        const auto &dk = depths[k];
        if (dk.values.height() != dk.camera.height || dk.values.width() != dk.camera.width) {
            throw InvalidInput("depth map does not match its camera");
        }
        warped[k] = warp_depth(dk, di.camera).depth_in_target;
    }

    CountMap out{Raster<int>(h, w, 0), view_i};
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!di.valid(r, c)) continue;
            const double d = di.values(r, c);
            const Vec3 world = backproject(di.camera, pixel_center(r, c), d);
            int count = 1;
            for (std::size_t k = 0; k < depths.size(); ++k) {
                if (static_cast<int>(k) == view_i) continue;
                const Camera &ck = depths[k].camera;
                const Vec3 local = ck.to_camera(world);
                if (!(local.z() > kMinDepth)) continue;
                const int kc = static_cast<int>(std::floor(ck.fx * local.x() / local.z() + ck.cx));
                const int kr = static_cast<int>(std::floor(ck.fy * local.y() / local.z() + ck.cy));
                if (!depths[k].valid(kr, kc)) continue;
                const double dki = warped[k](kr, kc);
                if (is_valid_depth(dki) && depths_consistent(d, dki, config.tau)) ++count;
            }
            out.counts(r, c) = count;
        }
    }
    return out;
}

inline std::vector<CountMap> count_maps(const std::vector<DepthMap> &depths, const NormalizationConfig &config) {
    std::vector<CountMap> out;
    out.reserve(depths.size());
    for (int i = 0; i < static_cast<int>(depths.size()); ++i) out.push_back(count_map(depths, i, config));
    return out;
}

/// m̃ⱼ read from the count map of each Gaussian's source view at its source
/// pixel, floored at 1.
inline std::vector<int> per_gaussian_counts(const Scene &scene, const std::vector<CountMap> &maps) {
    if (!scene.has_provenance()) {
        if (scene.gaussians.empty()) return {};
        throw InvalidInput("per-Gaussian counts need provenance");
    }
    std::vector<int> out;
    out.reserve(scene.size());
    for (const auto &p : scene.provenance) {
        const CountMap *map = nullptr;
        for (const auto &m : maps) {
            if (m.view_index == p.view) {
                map = &m;
                break;
            }
        }
        if (!map) throw InvalidInput("no count map for source view " + std::to_string(p.view));
        if (!map->counts.contains(p.row, p.col)) throw InvalidInput("provenance pixel outside its count map");
        out.push_back(std::max(1, map->counts(p.row, p.col)));
    }
    return out;
}

/// Opacity-rewrite normalization: each opacity becomes
/// alpha_normalize(opacity, m_ref, m̃ⱼ). Exact at the Gaussian mean only, since
/// the falloff multiplies opacity before compositing; see
/// normalization_exponents for the per-pixel form.
inline Scene normalize_scene(const Scene &scene, const std::vector<int> &counts, const NormalizationConfig &config) {
    if (counts.size() != scene.size()) throw InvalidInput("counts and gaussians differ in length");
    if (!(config.m_ref > 0.0)) throw InvalidInput("m_ref must be positive");
    Scene out = scene;
    for (std::size_t j = 0; j < out.size(); ++j) {
        out.gaussians[j].opacity = alpha_normalize(out.gaussians[j].opacity, config.m_ref, counts[j]);
    }
    return out;
}

/// Per-Gaussian exponents m_ref / m̃ⱼ for the rasterizer's exact mode, which
/// normalizes the per-pixel alpha instead of the opacity.
inline std::vector<double> normalization_exponents(const std::vector<int> &counts, const NormalizationConfig &config) {
    if (!(config.m_ref > 0.0)) throw InvalidInput("m_ref must be positive");
    std::vector<double> out;
    out.reserve(counts.size());
    for (int m : counts) {
        if (m < 1) throw InvalidInput("overlap count must be at least 1");
        out.push_back(config.m_ref / static_cast<double>(m));
    }
    return out;
}

} // namespace splatreg
