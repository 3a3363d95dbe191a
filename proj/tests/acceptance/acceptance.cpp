// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

namespace {

using namespace splatreg;

// FNV-1a over the bit patterns of every recorded value.
class Fingerprint {
  public:
    void add(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        mix(bits);
    }
    void add(int v) { mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    void add(const Vec3 &v) {
        for (int k = 0; k < 3; ++k) add(v[k]);
    }
    void add(const Raster<double> &r) {
        for (double v : r.data()) add(v);
    }
    void add(const Raster<int> &r) {
        for (int v : r.data()) add(v);
    }
    void add(const ImageBuffer &img) {
        for (const auto &v : img.pixels().data()) add(v);
    }
    void add(const RenderOutput &out) {
        add(out.color);
        add(out.weight_sum);
        add(out.contrib_count);
    }
    void add(const Scene &s) {
        for (const auto &g : s.gaussians) {
            add(g.mu);
            add(g.scale);
            add(g.color);
            add(g.opacity);
            add(g.opacity3d);
        }
    }
    std::uint64_t value() const { return h_; }

  private:
    void mix(std::uint64_t bits) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= (bits >> (8 * i)) & 0xffu;
            h_ *= 0x100000001b3ull;
        }
    }
    std::uint64_t h_ = 0xcbf29ce484222325ull;
};

struct Outcome {
    bool pass = false;
    std::string detail;
    Fingerprint fp;
};

struct Criterion {
    int id;
    const char *name;
    double time_limit; // seconds, 0 when unbounded
    std::function<Outcome(int threads)> run;
};

std::string fmt(const char *f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Camera square_camera(int size, double f) {
    Camera cam;
    cam.fx = cam.fy = f;
    cam.cx = cam.cy = 0.5 * size;
    cam.width = cam.height = size;
    return cam;
}

Eigen::Vector4d random_quat(std::mt19937 &rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector4d q(n(rng), n(rng), n(rng), n(rng));
    return q.normalized();
}

Vec3 random_unit(std::mt19937 &rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return Vec3(n(rng), n(rng), n(rng)).normalized();
}

// Gaussians spread over (and slightly past) the view frustum of a z-axis camera.
Scene random_scene(std::mt19937 &rng, int count, double min_scale, double max_scale, double min_opacity,
                   double max_opacity) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Scene s;
    for (int i = 0; i < count; ++i) {
        Gaussian g;
        const double z = 2.0 + 2.0 * u(rng);
        g.mu = {1.2 * z * (u(rng) - 0.5), 1.2 * z * (u(rng) - 0.5), z};
        for (int k = 0; k < 3; ++k) g.scale[k] = min_scale + (max_scale - min_scale) * u(rng);
        g.rotation = random_quat(rng);
        g.opacity = min_opacity + (max_opacity - min_opacity) * u(rng);
        g.opacity3d = g.opacity;
        g.color = {u(rng), u(rng), u(rng)};
        s.gaussians.push_back(g);
    }
    return s;
}

double max_abs(const ImageBuffer &a, const ImageBuffer &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.pixels().data().size(); ++i) {
        m = std::max(m, (a.pixels().data()[i] - b.pixels().data()[i]).cwiseAbs().maxCoeff());
    }
    return m;
}

double max_abs(const Raster<double> &a, const Raster<double> &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// ---------------------------------------------------------------------------

Outcome duplicate_invariance(int threads) {
    std::mt19937 rng(1001);
    const Camera cam = square_camera(64, 64.0);
    const Scene base = random_scene(rng, 250, 0.02, 0.1, 0.05, 0.35);
    RenderOptions opts;
    opts.threads = threads;
    const RenderOutput one = render(base, cam, opts);
    Outcome o;
    o.fp.add(one);
    double min_t = 1.0;
    for (double t : one.final_transmittance.data()) min_t = std::min(min_t, t);
    double worst = 0.0;
    for (int m : {2, 4, 8, 16}) {
        const Scene dup = duplicate_scene(base, m);
        RenderOptions norm = opts;
        norm.alpha_exponents = normalization_exponents(std::vector<int>(dup.size(), m), {1.0, 0.5});
        const RenderOutput out = render(dup, cam, norm);
        o.fp.add(out);
        worst = std::max({worst, max_abs(out.color, one.color), max_abs(out.weight_sum, one.weight_sum)});
    }
    o.pass = worst <= 1e-6 && min_t > opts.t_stop;
    o.detail = fmt("max-abs diff %.3g over m in {2,4,8,16}, 4000 Gaussians; min single-copy T %.3g", worst, min_t);
    return o;
}

Outcome over_brightness(int threads) {
    cli::AnalyzeArgs a;
    a.view_counts = {1, 2, 4, 8, 16};
    a.threads = threads;
    const auto rows = cli::run_analyze_sweep(a);
    Outcome o;
    bool raw_w_up = true, raw_psnr_down = true, norm_psnr_ge = true;
    double wmin = rows[0].normalized.median_weight, wmax = wmin, wsum = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto &r = rows[i];
        o.fp.add(r.raw.median_weight);
        o.fp.add(r.raw.psnr);
        o.fp.add(r.normalized.median_weight);
        o.fp.add(r.normalized.psnr);
        o.fp.add(r.raw.median_intensity);
        o.fp.add(r.normalized.median_count);
        wmin = std::min(wmin, r.normalized.median_weight);
        wmax = std::max(wmax, r.normalized.median_weight);
        wsum += r.normalized.median_weight;
        if (i > 0) {
            raw_w_up = raw_w_up && r.raw.median_weight > rows[i - 1].raw.median_weight;
            raw_psnr_down = raw_psnr_down && r.raw.psnr <= rows[i - 1].raw.psnr;
        }
        if (r.views >= 2) norm_psnr_ge = norm_psnr_ge && r.normalized.psnr >= r.raw.psnr;
    }
    const double spread = (wmax - wmin) / (wsum / static_cast<double>(rows.size()));
    o.pass = raw_w_up && raw_psnr_down && norm_psnr_ge && spread < 0.01;
    std::ostringstream d;
    d << "K=1..16 raw W " << rows.front().raw.median_weight << " -> " << rows.back().raw.median_weight << ", raw PSNR "
      << rows[1].raw.psnr << " -> " << rows.back().raw.psnr << " dB, normalized W spread " << spread;
    o.detail = d.str();
    return o;
}

// Reprojection oracle written against the camera fields directly.
Raster<int> oracle_counts(const std::vector<DepthMap> &maps, int i, double tau) {
    const DepthMap &di = maps[static_cast<std::size_t>(i)];
    Raster<int> out(di.values.height(), di.values.width(), 0);
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c) {
            const double d = di.values(r, c);
            if (!(d > 0.0)) continue;
            const Vec3 cam_pt((c + 0.5 - di.camera.cx) / di.camera.fx * d, (r + 0.5 - di.camera.cy) / di.camera.fy * d, d);
            const Vec3 world = di.camera.rotation_wc.transpose() * (cam_pt - di.camera.translation_wc);
            int n = 1;
            for (std::size_t k = 0; k < maps.size(); ++k) {
                if (static_cast<int>(k) == i) continue;
                const auto &ck = maps[k].camera;
                const Vec3 q = ck.rotation_wc * world + ck.translation_wc;
                if (q.z() <= 0) continue;
                const int kc = static_cast<int>(std::floor(ck.fx * q.x() / q.z() + ck.cx));
                const int kr = static_cast<int>(std::floor(ck.fy * q.y() / q.z() + ck.cy));
                if (kr < 0 || kc < 0 || kr >= ck.height || kc >= ck.width) continue;
                const double dk = maps[k].values(kr, kc);
                if (!(dk > 0.0)) continue;
                const Vec3 qk((kc + 0.5 - ck.cx) / ck.fx * dk, (kr + 0.5 - ck.cy) / ck.fy * dk, dk);
                const Vec3 wk = ck.rotation_wc.transpose() * (qk - ck.translation_wc);
                const double dki = (di.camera.rotation_wc * wk + di.camera.translation_wc).z();
                if (dki > 0 && std::abs(d - dki) / (d + dki) <= tau) ++n;
            }
            out(r, c) = n;
        }
    return out;
}

// Fraction of view-i pixels landing at least one pixel inside the other view
// that read count 2.
double interior_twos(const std::vector<DepthMap> &maps, const Raster<int> &counts, int i) {
    const DepthMap &di = maps[static_cast<std::size_t>(i)];
    const Camera &ck = maps[static_cast<std::size_t>(1 - i)].camera;
    int visible = 0, twos = 0;
    for (int r = 0; r < counts.height(); ++r)
        for (int c = 0; c < counts.width(); ++c) {
            const Vec3 world = backproject(di.camera, pixel_center(r, c), di.values(r, c));
            const Vec3 q = ck.to_camera(world);
            const double u = ck.fx * q.x() / q.z() + ck.cx, v = ck.fy * q.y() / q.z() + ck.cy;
            if (u < 1.0 || v < 1.0 || u >= ck.width - 1.0 || v >= ck.height - 1.0) continue;
            ++visible;
            twos += counts(r, c) == 2;
        }
    return visible ? static_cast<double>(twos) / visible : 0.0;
}

Outcome count_maps_exact(int) {
    Outcome o;
    bool oracle_ok = true;
    double worst_fraction = 1.0;
    const NormalizationConfig cfg;
    for (double tilt : {0.0, 25.0}) {
        ViewRigSpec rig;
        rig.count = 2;
        rig.arc_deg = 12.0;
        const auto views = make_plane_views(rig, {2.0, tilt}, {});
        for (int i = 0; i < 2; ++i) {
            const auto m = count_map(views.depths, i, cfg);
            o.fp.add(m.counts);
            oracle_ok = oracle_ok && m.counts == oracle_counts(views.depths, i, cfg.tau);
            worst_fraction = std::min(worst_fraction, interior_twos(views.depths, m.counts, i));
        }
    }

    const Camera cam = square_camera(32, 32.0);
    const std::vector<DepthMap> clash{{Raster<double>(32, 32, 1.0), cam}, {Raster<double>(32, 32, 4.0), cam}};
    bool clash_ones = true;
    for (int i = 0; i < 2; ++i) {
        const auto m = count_map(clash, i, cfg);
        o.fp.add(m.counts);
        oracle_ok = oracle_ok && m.counts == oracle_counts(clash, i, cfg.tau);
        for (int c : m.counts.data()) clash_ones = clash_ones && c == 1;
    }
    const std::vector<DepthMap> single{clash[0]};
    const auto m1 = count_map(single, 0, cfg);
    bool single_ones = m1.counts == oracle_counts(single, 0, cfg.tau);
    for (int c : m1.counts.data()) single_ones = single_ones && c == 1;

    o.pass = oracle_ok && worst_fraction >= 0.99 && clash_ones && single_ones;
    o.detail = std::to_string(100.0 * worst_fraction).substr(0, 6) + "% count 2 on mutually visible pixels (worst view)" +
               ", z=1/z=4 pair all ones " + (clash_ones ? "yes" : "no") + ", K=1 all ones " +
               (single_ones ? "yes" : "no") + ", brute-force oracle exact " + (oracle_ok ? "yes" : "no");
    return o;
}

Outcome rasterizer_oracle(int threads) {
    std::mt19937 rng(1004);
    std::uniform_int_distribution<int> count(50, 1000);
    const Camera cam = square_camera(64, 64.0);
    RenderOptions opts;
    opts.threads = threads;
    opts.projection.cutoff_sigma = 6.0;
    Outcome o;
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        const Scene scene = random_scene(rng, count(rng), 0.01, 0.2, 0.05, 0.99);
        const RenderOutput tiled = render(scene, cam, opts);
        const RenderOutput ref = render_reference(scene, cam, opts);
        o.fp.add(tiled);
        worst = std::max({worst, max_abs(tiled.color, ref.color), max_abs(tiled.weight_sum, ref.weight_sum)});
    }
    o.pass = worst <= 1e-5;
    o.detail = fmt("20 scenes, 6-sigma cutoff, max-abs color/weight diff %.3g", worst);
    return o;
}

Outcome plane_and_falloff(int) {
    std::mt19937 rng(1005);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Outcome o;
    double worst_plane = 0.0;
    int hits = 0;
    for (int i = 0; i < 1000; ++i) {
        Ray ray{Vec3(u(rng), u(rng), u(rng)), random_unit(rng)};
        const Vec3 mu(u(rng), u(rng), u(rng)), n = random_unit(rng);
        // Point the ray toward the plane so the hit lies ahead of its origin.
        if (n.dot(mu - ray.origin) * n.dot(ray.direction) < 0.0) ray.direction = -ray.direction;
        const auto hit = ray_plane_intersect(ray, mu, n);
        if (!hit) continue;
        ++hits;
        const double scale = std::max({1.0, (hit->point - mu).norm(), std::abs(hit->t)});
        worst_plane = std::max(worst_plane, std::abs(n.dot(hit->point - mu)) / scale);
        o.fp.add(hit->point);
    }
    double worst_center = 0.0, worst_sigma = 0.0;
    std::uniform_real_distribution<double> s(0.01, 2.0);
    for (int i = 0; i < 1000; ++i) {
        Gaussian g;
        g.mu = Vec3(u(rng), u(rng), u(rng));
        g.rotation = random_quat(rng);
        g.scale = Vec3::Constant(s(rng));
        worst_center = std::max(worst_center, std::abs(eval_gaussian3d(g, g.mu) - 1.0));
        const double iso = eval_gaussian3d(g, g.mu + g.scale.x() * random_unit(rng));
        g.scale = Vec3(s(rng), s(rng), s(rng));
        const int axis = i % 3;
        const Vec3 along = quat_to_rotation(g.rotation).col(axis) * g.scale[axis];
        const double aniso = eval_gaussian3d(g, g.mu + along);
        worst_sigma = std::max({worst_sigma, std::abs(iso - std::exp(-0.5)), std::abs(aniso - std::exp(-0.5))});
        o.fp.add(iso);
        o.fp.add(aniso);
    }
    o.pass = hits >= 990 && worst_plane <= 1e-6 && worst_center == 0.0 && worst_sigma <= 1e-9;
    o.detail = std::to_string(hits) + " hits, worst plane residual " + fmt("%.3g", worst_plane) +
               fmt(" relative; |G(mu)-1| max %.3g; 1-sigma falloff error %.3g", worst_center, worst_sigma);
    return o;
}

struct GradCheck {
    int compared = 0;
    double worst = 0.0;
    bool ok = true;
    void check(double analytic, double fd) {
        if (std::abs(analytic) <= 1e-8 && std::abs(fd) <= 1e-8) return;
        ++compared;
        const double rel = std::abs(analytic - fd) / std::max(std::abs(analytic), std::abs(fd));
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-3;
    }
    void check(const SceneGrad &a, const SceneGrad &f) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            for (int k = 0; k < 3; ++k) {
                check(a[j].log_scale[k], f[j].log_scale[k]);
                check(a[j].color[k], f[j].color[k]);
                check(a[j].mu[k], f[j].mu[k]);
            }
            check(a[j].logit_opacity, f[j].logit_opacity);
            check(a[j].logit_opacity3d, f[j].logit_opacity3d);
        }
    }
};

Outcome gradient_checks(int threads) {
    std::mt19937 rng(1006);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Camera cam = square_camera(12, 12.0);
    // Every Gaussian reaches every pixel and no alpha is skipped, so the loss
    // is smooth in all parameters and central differences are meaningful.
    RenderOptions smooth;
    smooth.threads = threads;
    smooth.alpha_min = 0.0;
    smooth.projection.cutoff_sigma = 1000.0;
    RenderOptions defaults;
    defaults.threads = threads;
    const GradSelection all{true, true, true, true};
    GradCheck g2, g3;
    bool support_zero = true;
    Outcome o;
    for (int trial = 0; trial < 20; ++trial) {
        Scene scene;
        const int n = 1 + trial % 3;
        for (int i = 0; i < n; ++i) {
            Gaussian g;
            g.mu = {0.6 * (u(rng) - 0.5), 0.6 * (u(rng) - 0.5), 1.8 + 0.6 * u(rng)};
            g.scale = {0.1 + 0.25 * u(rng), 0.1 + 0.25 * u(rng), 0.1 + 0.25 * u(rng)};
            g.rotation = random_quat(rng);
            g.opacity = 0.3 + 0.5 * u(rng);
            g.opacity3d = 0.3 + 0.5 * u(rng);
            g.color = {u(rng), u(rng), u(rng)};
            g.normal = Vec3(u(rng) - 0.5, u(rng) - 0.5, -1.0).normalized();
            scene.gaussians.push_back(g);
        }
        ImageBuffer gt(12, 12);
        for (auto &p : gt.pixels().data()) p = Vec3(u(rng), u(rng), u(rng));
        const auto normals = resolve_normals(scene);

        const auto a2 = grad_loss2d(scene, cam, gt, smooth, {}, all, GradientMode::Analytic);
        const auto f2 = grad_loss2d(scene, cam, gt, smooth, {}, all, GradientMode::FiniteDifference);
        g2.check(a2.grad, f2.grad);
        const auto a3 = grad_loss3d(scene, normals, cam, gt, smooth, {}, GradientMode::Analytic);
        const auto f3 = grad_loss3d(scene, normals, cam, gt, smooth, {}, GradientMode::FiniteDifference);
        g3.check(a3.grad, f3.grad);
        for (const auto *res : {&a3, &f3}) {
            for (const auto &g : res->grad) {
                o.fp.add(g.log_scale);
                o.fp.add(g.logit_opacity3d);
            }
        }
        for (const auto &opts : {smooth, defaults}) {
            for (const auto &g : grad_loss3d(scene, normals, cam, gt, opts, {}).grad) {
                support_zero = support_zero && g.color == Vec3::Zero() && g.mu == Vec3::Zero() && g.logit_opacity == 0.0;
            }
        }
    }
    o.pass = g2.ok && g3.ok && support_zero && g2.compared > 0 && g3.compared > 0;
    o.detail = fmt("20 configs; worst relative error 2D %.3g, 3D %.3g", g2.worst, g3.worst) +
               "; 3D gradient zero outside log-scale and logit-opacity3d: " + (support_zero ? "yes" : "no");
    return o;
}

Outcome regularizer_effect(int threads) {
    // Gaussians from two 32×56 views; targets and probe at 64×112.
    ViewRigSpec src;
    src.count = 2;
    src.height = 32;
    src.width = 56;
    src.focal = 32.0;
    src.arc_deg = 10.0;
    ViewRigSpec tgt = src;
    tgt.height = 64;
    tgt.width = 112;
    tgt.focal = 64.0;
    const PlaneViews sv = make_plane_views(src, {}, {});
    const PlaneViews tv = make_plane_views(tgt, {}, {});
    GaussianGenOptions gen;
    gen.scale_factor = 0.25;
    const Scene init = gaussians_from_views(sv, gen);
    std::vector<TargetView> views;
    for (int k = 0; k < 2; ++k) views.push_back({tv.cameras[static_cast<std::size_t>(k)], tv.images[static_cast<std::size_t>(k)]});
    const auto normals = resolve_normals(init);
    const Camera probe = cli::zoom_camera(tv.cameras[0], 4.0);

    Outcome o;
    double holes[2] = {0.0, 0.0}, scale_reg = 0.0;
    const double lambdas[2] = {0.0, 0.05};
    for (int i = 0; i < 2; ++i) {
        FitConfig cfg;
        cfg.iterations = 200;
        cfg.loss.lambda = lambdas[i];
        cfg.step_log_scale = 0.05;
        cfg.step_logit_opacity3d = 0.05;
        cfg.render.threads = threads;
        cfg.probe_camera = probe;
        const FitResult r = fit(init, views, normals, cfg);
        const RenderOutput zoomed = render(r.scene, probe, cfg.render);
        holes[i] = hole_fraction(zoomed, 0.5);
        if (i == 1) scale_reg = median_scale(r.scene);
        o.fp.add(r.scene);
        o.fp.add(zoomed);
        for (const auto &h : r.history) o.fp.add(h.loss);
    }
    const double scale0 = median_scale(init);
    o.pass = holes[1] <= 0.5 * holes[0] && scale_reg > scale0;
    o.detail = fmt("4x zoom hole fraction lambda=0.05 %.4f vs lambda=0 %.4f", holes[1], holes[0]) +
               fmt("; median scale %.5f -> %.5f; %g Gaussians", scale0, scale_reg, static_cast<double>(init.size()));
    return o;
}

Outcome tau_sweep(int threads) {
    cli::AnalyzeArgs a;
    a.taus = {0.1, 0.3, 0.5, 0.7};
    a.threads = threads;
    const auto rows = cli::run_analyze_sweep(a);
    Outcome o;
    bool ok = rows.size() == a.view_counts.size() * a.taus.size();
    double worst_gap = 0.0;
    for (std::size_t k = 0; ok && k < a.view_counts.size(); ++k) {
        double best = -1e300, at_half = 0.0;
        for (std::size_t t = 0; t < a.taus.size(); ++t) {
            const auto &r = rows[k * a.taus.size() + t];
            o.fp.add(r.normalized.psnr);
            o.fp.add(r.normalized.median_weight);
            best = std::max(best, r.normalized.psnr);
            if (r.tau == 0.5) at_half = r.normalized.psnr;
        }
        worst_gap = std::max(worst_gap, best - at_half);
    }
    o.pass = ok && worst_gap <= 0.1;
    o.detail = fmt("tau in {0.1,0.3,0.5,0.7} over K in {1,2,4,8}; tau=0.5 trails the best by at most %.3g dB", worst_gap);
    return o;
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "duplicate invariance", 5.0, duplicate_invariance},
        {2, "over-brightness curve direction", 30.0, over_brightness},
        {3, "count map correctness", 0.0, count_maps_exact},
        {4, "rasterizer oracle equivalence", 60.0, rasterizer_oracle},
        {5, "ray-plane and 3D falloff identities", 0.0, plane_and_falloff},
        {6, "gradient checks", 0.0, gradient_checks},
        {7, "regularizer effect", 300.0, regularizer_effect},
        {8, "tau sensitivity smoke", 0.0, tau_sweep},
    };

    bool all = true;
    std::vector<std::uint64_t> first;
    for (const auto &c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run(4);
        } catch (const std::exception &e) {
            o.pass = false;
            o.detail = std::string("threw: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.time_limit <= 0.0 || secs < c.time_limit;
        const bool pass = o.pass && in_time;
        all = all && pass;
        first.push_back(o.fp.value());
        std::printf("%s criterion %d (%s): %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    c.time_limit > 0.0 ? fmt(", limit %.0f s", c.time_limit).c_str() : "");
        std::fflush(stdout);
    }

    // Repeat every criterion with 1 thread and again with 4.
    bool same = true;
    std::string mismatches;
    for (int threads : {1, 4}) {
        for (std::size_t i = 0; i < criteria.size(); ++i) {
            std::uint64_t v = 0;
            try {
                v = criteria[i].run(threads).fp.value();
            } catch (const std::exception &) {
            }
            if (v != first[i]) {
                same = false;
                mismatches += " " + std::to_string(criteria[i].id) + "@" + std::to_string(threads) + "t";
            }
        }
    }
    all = all && same;
    std::printf("%s criterion 9 (determinism): outputs of criteria 1-8 %s across two 4-thread runs and a 1-thread run%s\n",
                same ? "PASS" : "FAIL", same ? "bit-identical" : "differ", mismatches.c_str());
    return all ? 0 : 1;
}
