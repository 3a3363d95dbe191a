#pragma once

#include "splatreg/rasterizer.hpp"
#include "splatreg/types.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace splatreg {

/// Any image-pair distance; stands in for a learned perceptual metric.
using PerceptualFn = std::function<double(const ImageBuffer &, const ImageBuffer &)>;

struct LossConfig {
    double lambda = 0.05; // weight of the 3D-sampling term
    double beta = 0.05;   // weight of the perceptual term
    PerceptualFn perceptual; // disabled when empty
};

inline void validate(const LossConfig &c) {
    if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw InvalidInput("lambda must lie in [0, 1]");
    if (!(c.beta >= 0.0)) throw InvalidInput("beta must be non-negative");
}

inline void require_same_shape(const ImageBuffer &a, const ImageBuffer &b) {
    if (a.height() != b.height() || a.width() != b.width()) throw InvalidInput("image shapes differ");
}

/// Mean over all H·W·3 entries of the squared difference.
inline double mse(const ImageBuffer &a, const ImageBuffer &b) {
    require_same_shape(a, b);
    const auto &pa = a.pixels().data();
    const auto &pb = b.pixels().data();
    if (pa.empty()) throw InvalidInput("mse of empty images");
    double sum = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) sum += (pa[i] - pb[i]).squaredNorm();
    return sum / (3.0 * static_cast<double>(pa.size()));
}

/// MSE plus beta times the perceptual term, when one is configured.
inline double image_loss(const ImageBuffer &rendered, const ImageBuffer &gt, const LossConfig &config) {
    double l = mse(rendered, gt);
    if (config.perceptual) {
        const double p = config.perceptual(rendered, gt);
        if (!std::isfinite(p) || p < 0.0) throw InvalidInput("perceptual term must be finite and non-negative");
        l += config.beta * p;
    }
    return l;
}

inline double loss3d(const ImageBuffer &rendered3d, const ImageBuffer &gt, const LossConfig &config) {
    return image_loss(rendered3d, gt, config);
}

inline double loss2d(const ImageBuffer &rendered2d, const ImageBuffer &gt, const LossConfig &config) {
    return image_loss(rendered2d, gt, config);
}

/// (1 - lambda) L2D + lambda L3D; the branch with zero weight is not evaluated.
inline double combine_losses(double l2d, double l3d, double lambda) {
    if (lambda == 0.0) return l2d;
    if (lambda == 1.0) return l3d;
    return (1.0 - lambda) * l2d + lambda * l3d;
}

inline double total_loss(const ImageBuffer &rendered2d, const ImageBuffer &rendered3d, const ImageBuffer &gt,
                         const LossConfig &config) {
    validate(config);
    const double l2d = config.lambda == 1.0 ? 0.0 : loss2d(rendered2d, gt, config);
    const double l3d = config.lambda == 0.0 ? 0.0 : loss3d(rendered3d, gt, config);
    return combine_losses(l2d, l3d, config.lambda);
}

inline constexpr double kPsnrCap = 99.0;

inline double psnr(const ImageBuffer &a, const ImageBuffer &b, double peak = 1.0, double cap = kPsnrCap) {
    const double m = mse(a, b);
    if (m == 0.0) return cap;
    return std::min(cap, 10.0 * std::log10(peak * peak / m));
}

namespace detail {

inline std::vector<double> gaussian_window_1d(int radius, double sigma) {
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        w[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += w[static_cast<std::size_t>(i + radius)];
    }
    for (auto &v : w) v /= sum;
    return w;
}

// Separable filter over the valid region: output is (h - 2r) × (w - 2r).
inline Raster<double> filter_valid(const Raster<double> &in, const std::vector<double> &k) {
    const int r = static_cast<int>(k.size() / 2);
    const int h = in.height(), w = in.width();
    Raster<double> tmp(h, w - 2 * r);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w - 2 * r; ++x) {
            double s = 0.0;
            for (int i = 0; i <= 2 * r; ++i) s += k[static_cast<std::size_t>(i)] * in(y, x + i);
            tmp(y, x) = s;
        }
    Raster<double> out(h - 2 * r, w - 2 * r);
    for (int y = 0; y < h - 2 * r; ++y)
        for (int x = 0; x < w - 2 * r; ++x) {
            double s = 0.0;
            for (int i = 0; i <= 2 * r; ++i) s += k[static_cast<std::size_t>(i)] * tmp(y + i, x);
            out(y, x) = s;
        }
    return out;
}

} // namespace detail

/// Single-scale SSIM with an 11×11 Gaussian window (σ = 1.5), k1 = 0.01,
/// k2 = 0.03 and unit data range, averaged over valid window positions and
/// then over channels.
inline double ssim(const ImageBuffer &a, const ImageBuffer &b) {
    require_same_shape(a, b);
    constexpr int radius = 5;
    if (a.height() < 2 * radius + 1 || a.width() < 2 * radius + 1) {
        throw InvalidInput("images smaller than the 11x11 SSIM window");
    }
    const auto k = detail::gaussian_window_1d(radius, 1.5);
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double total = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
        Raster<double> x(a.height(), a.width()), y(a.height(), a.width()), xx = x, yy = x, xy = x;
        for (int r = 0; r < a.height(); ++r)
            for (int c = 0; c < a.width(); ++c) {
                const double u = a(r, c)[ch], v = b(r, c)[ch];
                x(r, c) = u;
                y(r, c) = v;
                xx(r, c) = u * u;
                yy(r, c) = v * v;
                xy(r, c) = u * v;
            }
        const auto mx = detail::filter_valid(x, k), my = detail::filter_valid(y, k);
        const auto sxx = detail::filter_valid(xx, k), syy = detail::filter_valid(yy, k),
                   sxy = detail::filter_valid(xy, k);
        double sum = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double ux = mx.data()[i], uy = my.data()[i];
            const double vx = sxx.data()[i] - ux * ux, vy = syy.data()[i] - uy * uy, cxy = sxy.data()[i] - ux * uy;
            sum += ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
        }
        total += sum / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

/// Fraction of pixels whose accumulated weight is below w_thresh.
inline double hole_fraction(const RenderOutput &out, double w_thresh = 0.5) {
    const auto &w = out.weight_sum.data();
    if (w.empty()) return 0.0;
    std::size_t holes = 0;
    for (double v : w)
        if (v < w_thresh) ++holes;
    return static_cast<double>(holes) / static_cast<double>(w.size());
}

struct Metrics {
    double psnr = 0.0;
    double ssim = 0.0;
    double mse = 0.0;
    double hole_fraction = 0.0;
};

inline Metrics evaluate(const RenderOutput &out, const ImageBuffer &gt, double w_thresh = 0.5) {
    Metrics m;
    m.mse = mse(out.color, gt);
    m.psnr = psnr(out.color, gt);
    m.ssim = ssim(out.color, gt);
    m.hole_fraction = hole_fraction(out, w_thresh);
    return m;
}

} // namespace splatreg
