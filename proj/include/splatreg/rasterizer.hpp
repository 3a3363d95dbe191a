#pragma once

#include "splatreg/alphanorm.hpp"
#include "splatreg/parallel.hpp"
#include "splatreg/projection.hpp"
#include "splatreg/types.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace splatreg {

struct RenderOptions {
    ProjectionOptions projection;
    double alpha_min = 1.0 / 255.0;
    double alpha_max = kAlphaMax;
    // Compositing stops once transmittance falls below this.
    double t_stop = 1e-4;
    Vec3 background = Vec3::Zero();
    int tile_size = 16;
    int threads = 1;
    // Exact alpha normalization: when non-empty, one exponent m_ref / m̃ⱼ per
    // Gaussian applied to the clamped per-pixel alpha. The alpha_min test uses
    // the alpha before normalization so the support of each Gaussian is unchanged.
    std::vector<double> alpha_exponents;
};

struct RenderOutput {
    ImageBuffer color;
    Raster<double> weight_sum;
    Raster<int> contrib_count;
    Raster<double> final_transmittance;

    RenderOutput() = default;
    RenderOutput(int height, int width, const Vec3 &background)
        : color(height, width, background), weight_sum(height, width, 0.0), contrib_count(height, width, 0),
          final_transmittance(height, width, 1.0) {}
};

/// Front-to-back order of `splats`: ascending depth, ties by gaussian_index.
inline std::vector<int> depth_sort_indices(std::span<const Splat2D> splats) {
    for (const auto &s : splats) {
        if (std::isnan(s.depth)) throw InvalidInput("NaN splat depth");
    }
    std::vector<int> order(splats.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto &sa = splats[static_cast<std::size_t>(a)];
        const auto &sb = splats[static_cast<std::size_t>(b)];
        if (sa.depth != sb.depth) return sa.depth < sb.depth;
        return sa.gaussian_index < sb.gaussian_index;
    });
    return order;
}

/// Splats of one view in compositing order, optionally binned into tiles.
struct SplatView {
    std::vector<Splat2D> splats; // front to back
    int tile_size = 0;           // 0 when not binned
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<std::vector<int>> tiles; // indices into splats, front to back
    std::vector<int> all;                // 0..n-1 when not binned

    std::span<const int> candidates(int row, int col) const {
        if (tile_size == 0) return all;
        return tiles[static_cast<std::size_t>((row / tile_size) * tiles_x + col / tile_size)];
    }
};

/// Projects, sorts and (with tiled = true) bins the scene for `cam`.
inline SplatView prepare_view(const Scene &scene, const Camera &cam, const RenderOptions &opts, bool tiled) {
    validate(cam);
    if (!opts.alpha_exponents.empty() && opts.alpha_exponents.size() != scene.size()) {
        throw InvalidInput("alpha_exponents must have one entry per Gaussian");
    }
    ProjectionOptions popts = opts.projection;
    if (!tiled) popts.cull_offscreen = false;
    auto projected = project_scene(scene, cam, popts, opts.threads);
    const auto order = depth_sort_indices(projected);
    SplatView view;
    view.splats.reserve(projected.size());
    for (int i : order) view.splats.push_back(projected[static_cast<std::size_t>(i)]);

    if (!tiled) {
        view.all.resize(view.splats.size());
        std::iota(view.all.begin(), view.all.end(), 0);
        return view;
    }
    if (opts.tile_size <= 0) throw InvalidInput("tile size must be positive");
    view.tile_size = opts.tile_size;
    view.tiles_x = (cam.width + opts.tile_size - 1) / opts.tile_size;
    view.tiles_y = (cam.height + opts.tile_size - 1) / opts.tile_size;
    view.tiles.resize(static_cast<std::size_t>(view.tiles_x * view.tiles_y));
    for (int i = 0; i < static_cast<int>(view.splats.size()); ++i) {
        const auto &s = view.splats[static_cast<std::size_t>(i)];
        const auto tile_of = [&](double v, int tiles) {
            return std::clamp(static_cast<int>(std::floor(v / opts.tile_size)), 0, tiles - 1);
        };
        const int x0 = tile_of(s.mean2d.x() - s.radius, view.tiles_x);
        const int x1 = tile_of(s.mean2d.x() + s.radius, view.tiles_x);
        const int y0 = tile_of(s.mean2d.y() - s.radius, view.tiles_y);
        const int y1 = tile_of(s.mean2d.y() + s.radius, view.tiles_y);
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx) view.tiles[static_cast<std::size_t>(ty * view.tiles_x + tx)].push_back(i);
    }
    return view;
}

/// Unclamped o·exp(-½ dᵀ conic d) at pixel position p. The footprint cutoff
/// acts at tile granularity: every pixel of a tile the footprint box touches
/// evaluates the Gaussian exactly.
inline double splat_alpha(const Splat2D &s, double opacity, const Vec2 &p) {
    const Vec2 d = p - s.mean2d;
    return opacity * std::exp(-0.5 * d.dot(s.conic * d));
}

/// Whether pixel position p lies inside the splat's cutoff ellipse.
inline bool inside_footprint(const Splat2D &s, const Vec2 &p, double cutoff_sigma) {
    const Vec2 d = p - s.mean2d;
    return d.dot(s.conic * d) <= cutoff_sigma * cutoff_sigma;
}

/// Front-to-back compositing state for one pixel.
struct PixelCompositor {
    double transmittance = 1.0;
    double weight = 0.0;
    int count = 0;
    Vec3 color = Vec3::Zero();
    bool done = false;

    /// Clamps alpha to [0, alpha_max], skips it below alpha_min, applies the
    /// optional exponent, and composites. Returns the alpha used, or a negative
    /// value when skipped.
    double add(double raw_alpha, const Vec3 &c, const RenderOptions &opts, double exponent = 1.0) {
        double alpha = std::min(raw_alpha, opts.alpha_max);
        if (!(alpha >= opts.alpha_min)) return -1.0;
        if (exponent != 1.0) alpha = alpha_with_exponent(alpha, exponent);
        const double w = alpha * transmittance;
        color += w * c;
        weight += w;
        transmittance *= 1.0 - alpha;
        ++count;
        if (transmittance < opts.t_stop) done = true;
        return alpha;
    }

    void store(RenderOutput &out, int row, int col, const Vec3 &background) const {
        out.color(row, col) = color + transmittance * background;
        out.weight_sum(row, col) = weight;
        out.contrib_count(row, col) = count;
        out.final_transmittance(row, col) = transmittance;
    }
};

namespace detail {

inline RenderOutput composite(const Scene &scene, const Camera &cam, const RenderOptions &opts, const SplatView &view) {
    RenderOutput out(cam.height, cam.width, opts.background);
    const bool exact_norm = !opts.alpha_exponents.empty();
    parallel_for(cam.height, opts.threads, [&](int row) {
        for (int col = 0; col < cam.width; ++col) {
            const Vec2 p = pixel_center(row, col);
            PixelCompositor px;
            for (int idx : view.candidates(row, col)) {
                const auto &s = view.splats[static_cast<std::size_t>(idx)];
                const auto &g = scene.gaussians[static_cast<std::size_t>(s.gaussian_index)];
                const double e = exact_norm ? opts.alpha_exponents[static_cast<std::size_t>(s.gaussian_index)] : 1.0;
                px.add(splat_alpha(s, g.opacity, p), g.color, opts, e);
                if (px.done) break;
            }
            px.store(out, row, col, opts.background);
        }
    });
    return out;
}

} // namespace detail

/// Tiled alpha compositing of the scene's 2D splats.
inline RenderOutput render(const Scene &scene, const Camera &cam, const RenderOptions &opts = {}) {
    const auto view = prepare_view(scene, cam, opts, true);
    return detail::composite(scene, cam, opts, view);
}

/// Oracle: every splat in front of the camera evaluated at every pixel, no tiles or offscreen culling.
inline RenderOutput render_reference(const Scene &scene, const Camera &cam, const RenderOptions &opts = {}) {
    const auto view = prepare_view(scene, cam, opts, false);
    return detail::composite(scene, cam, opts, view);
}

} // namespace splatreg
