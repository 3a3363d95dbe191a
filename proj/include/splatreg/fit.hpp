#pragma once

#include "splatreg/io.hpp"
#include "splatreg/loss.hpp"
#include "splatreg/rasterizer.hpp"
#include "splatreg/reg3d.hpp"
#include "splatreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace splatreg {

/// Gradient of a loss with respect to one Gaussian's optimizable parameters.
/// Scales are log-parameterized; opacities are logit-parameterized.
struct GaussianGrad {
    Vec3 log_scale = Vec3::Zero();
    double logit_opacity = 0.0;
    Vec3 color = Vec3::Zero();
    Vec3 mu = Vec3::Zero();
    double logit_opacity3d = 0.0;

    GaussianGrad &operator+=(const GaussianGrad &o) {
        log_scale += o.log_scale;
        logit_opacity += o.logit_opacity;
        color += o.color;
        mu += o.mu;
        logit_opacity3d += o.logit_opacity3d;
        return *this;
    }
    GaussianGrad &operator*=(double k) {
        log_scale *= k;
        logit_opacity *= k;
        color *= k;
        mu *= k;
        logit_opacity3d *= k;
        return *this;
    }
};

using SceneGrad = std::vector<GaussianGrad>;

/// Which 2D-branch parameters receive gradient. The 3D branch only ever
/// reaches log-scale and logit-opacity3d.
struct GradSelection {
    bool scale = true;
    bool opacity = true;
    bool color = true;
    bool mu = false;
};

enum class GradientMode { Analytic, FiniteDifference };

struct GradResult {
    double loss = 0.0;
    RenderOutput render;
    SceneGrad grad;
};

namespace detail {

struct Contribution {
    int gaussian = 0;
    double alpha = 0.0;       // value used in compositing
    double transmittance = 0.0; // before this contribution
    GaussianGrad dalpha;      // d alpha / d params
};

// Back-to-front pass over one pixel's contributions. dl_dc is dLoss/dColor.
inline void backprop_pixel(const std::vector<Contribution> &list, const Scene &scene, const Vec3 &background,
                           const Vec3 &dl_dc, bool color_grad, std::vector<std::pair<int, GaussianGrad>> &sink) {
    Vec3 behind = background;
    for (auto it = list.rbegin(); it != list.rend(); ++it) {
        const Vec3 &c = scene.gaussians[static_cast<std::size_t>(it->gaussian)].color;
        const double dl_dalpha = it->transmittance * dl_dc.dot(c - behind);
        GaussianGrad g = it->dalpha;
        g *= dl_dalpha;
        if (color_grad) g.color = it->alpha * it->transmittance * dl_dc;
        sink.emplace_back(it->gaussian, g);
        behind = it->alpha * c + (1.0 - it->alpha) * behind;
    }
}

inline SceneGrad reduce_rows(std::size_t n, const std::vector<std::vector<std::pair<int, GaussianGrad>>> &rows) {
    SceneGrad out(n);
    for (const auto &row : rows)
        for (const auto &[j, g] : row) out[static_cast<std::size_t>(j)] += g;
    return out;
}

inline void check_no_perceptual(const LossConfig &config) {
    if (config.perceptual) throw InvalidInput("analytic gradients need the perceptual term disabled");
}

} // namespace detail

/// Analytic gradient of MSE(render(scene), gt) for the selected parameters.
/// Depth order, tile membership and the alpha_min support are held fixed.
inline GradResult grad_loss2d_analytic(const Scene &scene, const Camera &cam, const ImageBuffer &gt,
                                       const RenderOptions &opts, const GradSelection &sel = {}) {
    if (gt.height() != cam.height || gt.width() != cam.width) throw InvalidInput("ground truth does not match camera");
    const auto view = prepare_view(scene, cam, opts, true);
    GradResult res;
    res.render = RenderOutput(cam.height, cam.width, opts.background);
    const double norm = 2.0 / (3.0 * cam.height * cam.width);
    const bool exact_norm = !opts.alpha_exponents.empty();

    // Per-splat constants reused for every pixel.
    struct SplatCache {
        Eigen::Matrix<double, 2, 3> jw;   // J W
        Eigen::Matrix<double, 2, 3> j;    // J
        Mat3 m;                           // W Σ Wᵀ
        Mat3 r;                           // rotation of the Gaussian
        Vec3 t;                           // camera-frame mean
    };
    std::vector<SplatCache> cache(view.splats.size());
    for (std::size_t i = 0; i < view.splats.size(); ++i) {
        const auto &g = scene.gaussians[static_cast<std::size_t>(view.splats[i].gaussian_index)];
        auto &sc = cache[i];
        sc.t = cam.to_camera(g.mu);
        sc.j = projection_jacobian(cam, sc.t);
        sc.jw = sc.j * cam.rotation_wc;
        sc.r = quat_to_rotation(g.rotation);
        sc.m = cam.rotation_wc * covariance3d(g.scale, g.rotation) * cam.rotation_wc.transpose();
    }

    std::vector<std::vector<std::pair<int, GaussianGrad>>> rows(static_cast<std::size_t>(cam.height));
    parallel_for(cam.height, opts.threads, [&](int row) {
        std::vector<detail::Contribution> list;
        for (int col = 0; col < cam.width; ++col) {
            const Vec2 p = pixel_center(row, col);
            PixelCompositor px;
            list.clear();
            for (int idx : view.candidates(row, col)) {
                const auto &s = view.splats[static_cast<std::size_t>(idx)];
                const auto j = s.gaussian_index;
                const auto &g = scene.gaussians[static_cast<std::size_t>(j)];
                const double e = exact_norm ? opts.alpha_exponents[static_cast<std::size_t>(j)] : 1.0;
                const double raw = splat_alpha(s, g.opacity, p);
                const double t_before = px.transmittance;
                const double used = px.add(raw, g.color, opts, e);
                if (used < 0.0) continue;

                detail::Contribution c{j, used, t_before, {}};
                if (raw < opts.alpha_max) {
                    // d used / d raw
                    const double chain = e == 1.0 ? 1.0 : e * std::pow(1.0 - raw, e - 1.0);
                    const auto &sc = cache[static_cast<std::size_t>(idx)];
                    const Vec2 d = p - s.mean2d;
                    const Vec2 v = s.conic * d;
                    if (sel.opacity) c.dalpha.logit_opacity = chain * raw * (1.0 - g.opacity);
                    if (sel.scale) {
                        for (int a = 0; a < 3; ++a) {
                            const double proj = v.dot(sc.jw * sc.r.col(a));
                            c.dalpha.log_scale[a] = chain * raw * g.scale[a] * g.scale[a] * proj * proj;
                        }
                    }
                    if (sel.mu) {
                        // d power / d t through the mean and through J.
                        const Eigen::Matrix<double, 2, 3> gj = -2.0 * v * v.transpose() * sc.j * sc.m;
                        Vec3 dpow_dt = sc.j.transpose() * (-2.0 * v);
                        const double tz = sc.t.z(), iz2 = 1.0 / (tz * tz), iz3 = iz2 / tz;
                        dpow_dt.x() += gj(0, 2) * (-cam.fx * iz2);
                        dpow_dt.y() += gj(1, 2) * (-cam.fy * iz2);
                        dpow_dt.z() += gj(0, 0) * (-cam.fx * iz2) + gj(0, 2) * (2.0 * cam.fx * sc.t.x() * iz3) +
                                       gj(1, 1) * (-cam.fy * iz2) + gj(1, 2) * (2.0 * cam.fy * sc.t.y() * iz3);
                        c.dalpha.mu = chain * (-0.5 * raw) * (cam.rotation_wc.transpose() * dpow_dt);
                    }
                }
                list.push_back(c);
                if (px.done) break;
            }
            px.store(res.render, row, col, opts.background);
            const Vec3 dl_dc = norm * (res.render.color(row, col) - gt(row, col));
            detail::backprop_pixel(list, scene, opts.background, dl_dc, sel.color, rows[static_cast<std::size_t>(row)]);
        }
    });
    res.loss = mse(res.render.color, gt);
    res.grad = detail::reduce_rows(scene.size(), rows);
    return res;
}

/// Analytic gradient of MSE(render3d(scene), gt) with respect to log-scale and
/// logit-opacity3d only.
inline GradResult grad_loss3d_analytic(const Scene &scene, const std::vector<Vec3> &normals, const Camera &cam,
                                       const ImageBuffer &gt, const RenderOptions &opts) {
    if (gt.height() != cam.height || gt.width() != cam.width) throw InvalidInput("ground truth does not match camera");
    if (normals.size() != scene.size()) throw InvalidInput("render3d needs one normal per Gaussian");
    const auto view = prepare_view(scene, cam, opts, true);
    GradResult res;
    res.render = RenderOutput(cam.height, cam.width, opts.background);
    const double norm = 2.0 / (3.0 * cam.height * cam.width);
    const Vec3 origin = cam.center();

    std::vector<std::vector<std::pair<int, GaussianGrad>>> rows(static_cast<std::size_t>(cam.height));
    parallel_for(cam.height, opts.threads, [&](int row) {
        std::vector<detail::Contribution> list;
        for (int col = 0; col < cam.width; ++col) {
            const Vec2 p = pixel_center(row, col);
            const Ray ray{origin, pixel_ray_direction(cam, p)};
            PixelCompositor px;
            list.clear();
            for (int idx : view.candidates(row, col)) {
                const auto &s = view.splats[static_cast<std::size_t>(idx)];
                if (!inside_footprint(s, p, opts.projection.cutoff_sigma)) continue;
                const auto j = s.gaussian_index;
                const auto &g = scene.gaussians[static_cast<std::size_t>(j)];
                const auto hit = ray_plane_intersect(ray, g.mu, normals[static_cast<std::size_t>(j)]);
                if (!hit) continue;
                Vec3 z;
                const double raw = g.opacity3d * std::exp(-0.5 * mahalanobis2(g, hit->point, &z));
                const double t_before = px.transmittance;
                const double used = px.add(raw, g.color, opts);
                if (used < 0.0) continue;
                detail::Contribution c{j, used, t_before, {}};
                if (raw < opts.alpha_max) {
                    c.dalpha.logit_opacity3d = raw * (1.0 - g.opacity3d);
                    c.dalpha.log_scale = raw * z.array().square().matrix();
                }
                list.push_back(c);
                if (px.done) break;
            }
            px.store(res.render, row, col, opts.background);
            const Vec3 dl_dc = norm * (res.render.color(row, col) - gt(row, col));
            detail::backprop_pixel(list, scene, opts.background, dl_dc, false, rows[static_cast<std::size_t>(row)]);
        }
    });
    res.loss = mse(res.render.color, gt);
    res.grad = detail::reduce_rows(scene.size(), rows);
    return res;
}

// ---------------------------------------------------------------------------
// Finite differences (oracle)

namespace detail {

inline double clamp_open01(double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); }

template <typename LossFn>
double central_difference(const Scene &scene, std::size_t j, double eps, LossFn &&loss,
                          void (*perturb)(Gaussian &, int, double), int axis) {
    Scene plus = scene, minus = scene;
    perturb(plus.gaussians[j], axis, eps);
    perturb(minus.gaussians[j], axis, -eps);
    return (loss(plus) - loss(minus)) / (2.0 * eps);
}

inline void perturb_log_scale(Gaussian &g, int axis, double e) { g.scale[axis] *= std::exp(e); }
inline void perturb_logit_opacity(Gaussian &g, int, double e) {
    g.opacity = io::sigmoid(io::logit(clamp_open01(g.opacity)) + e);
}
inline void perturb_logit_opacity3d(Gaussian &g, int, double e) {
    g.opacity3d = io::sigmoid(io::logit(clamp_open01(g.opacity3d)) + e);
}
inline void perturb_color(Gaussian &g, int axis, double e) { g.color[axis] += e; }
inline void perturb_mu(Gaussian &g, int axis, double e) { g.mu[axis] += e; }

} // namespace detail

/// Central-difference gradient of L2D = loss2d(render(scene), gt).
inline GradResult grad_loss2d_fd(const Scene &scene, const Camera &cam, const ImageBuffer &gt,
                                 const RenderOptions &opts, const LossConfig &loss_cfg, const GradSelection &sel = {},
                                 double eps = 1e-4) {
    auto loss = [&](const Scene &s) { return loss2d(render(s, cam, opts).color, gt, loss_cfg); };
    GradResult res;
    res.render = render(scene, cam, opts);
    res.loss = loss2d(res.render.color, gt, loss_cfg);
    res.grad.resize(scene.size());
    for (std::size_t j = 0; j < scene.size(); ++j) {
        auto &g = res.grad[j];
        for (int a = 0; a < 3; ++a) {
            if (sel.scale) g.log_scale[a] = detail::central_difference(scene, j, eps, loss, detail::perturb_log_scale, a);
            if (sel.color) g.color[a] = detail::central_difference(scene, j, eps, loss, detail::perturb_color, a);
            if (sel.mu) g.mu[a] = detail::central_difference(scene, j, eps, loss, detail::perturb_mu, a);
        }
        if (sel.opacity) g.logit_opacity = detail::central_difference(scene, j, eps, loss, detail::perturb_logit_opacity, 0);
    }
    return res;
}

/// Central-difference gradient of L3D = loss3d(render3d(scene), gt) over
/// log-scale and logit-opacity3d.
inline GradResult grad_loss3d_fd(const Scene &scene, const std::vector<Vec3> &normals, const Camera &cam,
                                 const ImageBuffer &gt, const RenderOptions &opts, const LossConfig &loss_cfg,
                                 double eps = 1e-4) {
    auto loss = [&](const Scene &s) { return loss3d(render3d(s, normals, cam, opts).color, gt, loss_cfg); };
    GradResult res;
    res.render = render3d(scene, normals, cam, opts);
    res.loss = loss3d(res.render.color, gt, loss_cfg);
    res.grad.resize(scene.size());
    for (std::size_t j = 0; j < scene.size(); ++j) {
        for (int a = 0; a < 3; ++a)
            res.grad[j].log_scale[a] = detail::central_difference(scene, j, eps, loss, detail::perturb_log_scale, a);
        res.grad[j].logit_opacity3d =
            detail::central_difference(scene, j, eps, loss, detail::perturb_logit_opacity3d, 0);
    }
    return res;
}

inline GradResult grad_loss2d(const Scene &scene, const Camera &cam, const ImageBuffer &gt, const RenderOptions &opts,
                              const LossConfig &loss_cfg, const GradSelection &sel = {},
                              GradientMode mode = GradientMode::Analytic, double eps = 1e-4) {
    if (mode == GradientMode::FiniteDifference) return grad_loss2d_fd(scene, cam, gt, opts, loss_cfg, sel, eps);
    detail::check_no_perceptual(loss_cfg);
    return grad_loss2d_analytic(scene, cam, gt, opts, sel);
}

inline GradResult grad_loss3d(const Scene &scene, const std::vector<Vec3> &normals, const Camera &cam,
                              const ImageBuffer &gt, const RenderOptions &opts, const LossConfig &loss_cfg,
                              GradientMode mode = GradientMode::Analytic, double eps = 1e-4) {
    if (mode == GradientMode::FiniteDifference) return grad_loss3d_fd(scene, normals, cam, gt, opts, loss_cfg, eps);
    detail::check_no_perceptual(loss_cfg);
    return grad_loss3d_analytic(scene, normals, cam, gt, opts);
}

// ---------------------------------------------------------------------------
// Per-scene fitting

struct TargetView {
    Camera camera;
    ImageBuffer image;
};

enum class Optimizer { GradientDescent, Adam };

struct FitConfig {
    int iterations = 200;
    // Step sizes act on the per-view squared error summed over pixels and
    // channels (MSE × 3HW), so they do not depend on image resolution.
    double step_log_scale = 0.02;
    double step_logit_opacity3d = 0.02;
    double step_logit_opacity = 0.02;
    double step_color = 0.01;
    double step_mu = 0.0;
    GradSelection train2d{true, true, true, false};
    LossConfig loss;
    GradientMode gradient_mode = GradientMode::Analytic;
    double fd_epsilon = 1e-4;
    Optimizer optimizer = Optimizer::GradientDescent;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    // Views drawn per iteration (without replacement, seeded); 0 means all.
    int views_per_iteration = 0;
    unsigned seed = 0;
    RenderOptions render;
    // Camera for the per-iteration hole_fraction probe; the first view when unset.
    std::optional<Camera> probe_camera;
    double hole_threshold = 0.5;
};

inline void validate(const FitConfig &c) {
    if (c.iterations < 0) throw InvalidInput("iterations must be non-negative");
    for (double s : {c.step_log_scale, c.step_logit_opacity3d, c.step_logit_opacity, c.step_color}) {
        if (!(s > 0.0)) throw InvalidInput("step sizes must be positive");
    }
    if (c.step_mu < 0.0) throw InvalidInput("step sizes must be positive");
    if (c.train2d.mu && !(c.step_mu > 0.0)) throw InvalidInput("training mu needs a positive step_mu");
    validate(c.loss);
}

struct FitRecord {
    int iteration = 0;
    double loss = 0.0;
    double loss2d = 0.0;
    double loss3d = 0.0;
    double median_scale = 0.0;
    double hole_fraction = 0.0;
};

struct FitResult {
    Scene scene;
    std::vector<FitRecord> history;
};

/// Raised when the loss stops being finite; carries the last finite scene.
class FitDiverged : public std::runtime_error {
  public:
    FitDiverged(int iteration, Scene snapshot)
        : std::runtime_error("non-finite loss at iteration " + std::to_string(iteration)), iteration_(iteration),
          snapshot_(std::move(snapshot)) {}
    int iteration() const noexcept { return iteration_; }
    const Scene &snapshot() const noexcept { return snapshot_; }

  private:
    int iteration_;
    Scene snapshot_;
};

/// Median over Gaussians of the geometric mean of the three scales.
inline double median_scale(const Scene &scene) {
    if (scene.gaussians.empty()) return 0.0;
    std::vector<double> v;
    v.reserve(scene.size());
    for (const auto &g : scene.gaussians) v.push_back(std::cbrt(g.scale.prod()));
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

inline std::string history_csv(const std::vector<FitRecord> &history) {
    std::ostringstream out;
    out.precision(10);
    out << "iteration,loss,loss2d,loss3d,median_scale,hole_fraction\n";
    for (const auto &r : history) {
        out << r.iteration << ',' << r.loss << ',' << r.loss2d << ',' << r.loss3d << ',' << r.median_scale << ','
            << r.hole_fraction << '\n';
    }
    return out.str();
}

/// Minimizes (1 - λ) L2D + λ L3D over the target views. L3D reaches only
/// log-scales and logit-opacity3d; L2D reaches the groups in config.train2d.
inline FitResult fit(const Scene &initial, const std::vector<TargetView> &views, const std::vector<Vec3> &normals,
                     const FitConfig &config) {
    validate(config);
    FitResult result{initial, {}};
    if (config.iterations == 0) return result;
    if (views.empty()) throw InvalidInput("fit needs at least one target view");
    const double lambda = config.loss.lambda;
    if (lambda > 0.0 && normals.size() != initial.size()) throw InvalidInput("fit needs one normal per Gaussian");

    Scene &scene = result.scene;
    const std::size_t n = scene.size();
    const Camera probe = config.probe_camera.value_or(views.front().camera);
    std::mt19937 rng(config.seed);

    // Adam moments, one slot per scalar parameter: 3 log-scale, opacity, 3 color, 3 mu, opacity3d.
    constexpr int kSlots = 11;
    std::vector<double> m1(n * kSlots, 0.0), m2(n * kSlots, 0.0);

    auto step = [&](std::size_t j, int slot, double grad, double lr, int t) {
        if (config.optimizer == Optimizer::GradientDescent) return lr * grad;
        double &a = m1[j * kSlots + static_cast<std::size_t>(slot)];
        double &b = m2[j * kSlots + static_cast<std::size_t>(slot)];
        a = config.adam_beta1 * a + (1.0 - config.adam_beta1) * grad;
        b = config.adam_beta2 * b + (1.0 - config.adam_beta2) * grad * grad;
        const double ah = a / (1.0 - std::pow(config.adam_beta1, t));
        const double bh = b / (1.0 - std::pow(config.adam_beta2, t));
        return lr * ah / (std::sqrt(bh) + config.adam_epsilon);
    };

    std::vector<int> order(views.size());
    for (int it = 0; it < config.iterations; ++it) {
        std::iota(order.begin(), order.end(), 0);
        std::size_t used = views.size();
        if (config.views_per_iteration > 0 && static_cast<std::size_t>(config.views_per_iteration) < views.size()) {
            std::shuffle(order.begin(), order.end(), rng);
            used = static_cast<std::size_t>(config.views_per_iteration);
            std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(used));
        }

        SceneGrad g2(n), g3(n);
        double l2 = 0.0, l3 = 0.0;
        for (std::size_t v = 0; v < used; ++v) {
            const auto &tv = views[static_cast<std::size_t>(order[v])];
            const double pixels = 3.0 * tv.camera.height * tv.camera.width;
            if (lambda < 1.0) {
                auto r = grad_loss2d(scene, tv.camera, tv.image, config.render, config.loss, config.train2d,
                                     config.gradient_mode, config.fd_epsilon);
                l2 += r.loss;
                for (std::size_t j = 0; j < n; ++j) {
                    r.grad[j] *= pixels;
                    g2[j] += r.grad[j];
                }
            }
            if (lambda > 0.0) {
                auto r = grad_loss3d(scene, normals, tv.camera, tv.image, config.render, config.loss,
                                     config.gradient_mode, config.fd_epsilon);
                l3 += r.loss;
                for (std::size_t j = 0; j < n; ++j) {
                    r.grad[j] *= pixels;
                    g3[j] += r.grad[j];
                }
            }
        }
        l2 /= static_cast<double>(used);
        l3 /= static_cast<double>(used);
        const double total = combine_losses(l2, l3, lambda);

        FitRecord rec;
        rec.iteration = it;
        rec.loss = total;
        rec.loss2d = l2;
        rec.loss3d = l3;
        rec.median_scale = median_scale(scene);
        rec.hole_fraction = hole_fraction(render(scene, probe, config.render), config.hole_threshold);
        if (!std::isfinite(total)) throw FitDiverged(it, scene);
        result.history.push_back(rec);

        const double w2 = (1.0 - lambda) / static_cast<double>(used);
        const double w3 = lambda / static_cast<double>(used);
        const int t = it + 1;
        for (std::size_t j = 0; j < n; ++j) {
            auto &g = scene.gaussians[j];
            const GaussianGrad &a = g2[j];
            const GaussianGrad &b = g3[j];
            if (config.train2d.scale || lambda > 0.0) {
                for (int k = 0; k < 3; ++k) {
                    const double grad = w2 * (config.train2d.scale ? a.log_scale[k] : 0.0) + w3 * b.log_scale[k];
                    g.scale[k] *= std::exp(-step(j, k, grad, config.step_log_scale, t));
                }
            }
            if (config.train2d.opacity && lambda < 1.0) {
                const double theta = io::logit(detail::clamp_open01(g.opacity));
                g.opacity = io::sigmoid(theta - step(j, 3, w2 * a.logit_opacity, config.step_logit_opacity, t));
            }
            if (config.train2d.color && lambda < 1.0) {
                for (int k = 0; k < 3; ++k) g.color[k] -= step(j, 4 + k, w2 * a.color[k], config.step_color, t);
            }
            if (config.train2d.mu && lambda < 1.0) {
                for (int k = 0; k < 3; ++k) g.mu[k] -= step(j, 7 + k, w2 * a.mu[k], config.step_mu, t);
            }
            if (lambda > 0.0) {
                const double theta = io::logit(detail::clamp_open01(g.opacity3d));
                g.opacity3d = io::sigmoid(theta - step(j, 10, w3 * b.logit_opacity3d, config.step_logit_opacity3d, t));
            }
        }
    }
    return result;
}

} // namespace splatreg
