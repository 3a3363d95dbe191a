#pragma once

// Command implementations behind the splatreg executable. Each run_* returns
// a process exit code; flag parsing lives in main.cpp.

#include "splatreg/splatreg.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace splatreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Bad flags, flag values or missing input files.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void require_file(const std::filesystem::path &path, const char *what) {
    if (!std::filesystem::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path.string());
}

/// Focal lengths scaled by `zoom`, principal point and resolution unchanged.
inline Camera zoom_camera(Camera cam, double zoom) {
    if (!(zoom > 0.0)) throw UsageError("--zoom must be positive");
    cam.fx *= zoom;
    cam.fy *= zoom;
    return cam;
}

inline double luma709(const Vec3 &c) { return 0.2126 * c.x() + 0.7152 * c.y() + 0.0722 * c.z(); }

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    return 0.5 * (*std::max_element(v.begin(), mid) + *mid);
}

// ---------------------------------------------------------------------------
// render

enum class NormalizeMode { None, Exact, Opacity };

struct RenderArgs {
    std::filesystem::path scene;
    std::filesystem::path camera;
    std::filesystem::path out;
    std::filesystem::path dump_weights;
    std::string branch = "2d";
    double zoom = 1.0;
    NormalizeMode normalize = NormalizeMode::None;
    NormalizationConfig norm;
    // Depth views for the count maps, view k = k-th pair.
    std::vector<std::filesystem::path> view_cameras;
    std::vector<std::filesystem::path> view_depths;
    // JSON array with one stored count per Gaussian; replaces the depth views.
    std::filesystem::path counts;
    int threads = 1;
};

inline std::vector<int> load_counts(const std::filesystem::path &path, std::size_t expected) {
    const auto j = io::detail::parse_json(io::read_file(path));
    if (!j.is_array() || j.size() != expected) {
        throw InvalidInput(path.string() + ": expected an array of " + std::to_string(expected) + " counts");
    }
    std::vector<int> out;
    for (const auto &e : j) out.push_back(e.get<int>());
    return out;
}

inline std::vector<int> gaussian_counts(const Scene &scene, const RenderArgs &a) {
    if (!a.counts.empty()) return load_counts(a.counts, scene.size());
    if (a.view_depths.empty()) throw UsageError("--normalize needs --counts or --view-camera/--view-depth pairs");
    if (a.view_depths.size() != a.view_cameras.size()) {
        throw UsageError("--view-camera and --view-depth must be given the same number of times");
    }
    std::vector<DepthMap> depths;
    for (std::size_t k = 0; k < a.view_depths.size(); ++k) {
        depths.push_back({io::read_pfm_gray(a.view_depths[k]), io::load_camera(a.view_cameras[k])});
    }
    return per_gaussian_counts(scene, count_maps(depths, a.norm));
}

inline void write_image(const std::filesystem::path &path, const ImageBuffer &img) {
    if (path.extension() == ".pfm") {
        io::write_pfm(path, img);
    } else if (path.extension() == ".png") {
        io::write_png(path, img);
    } else {
        throw UsageError("--out must end in .pfm or .png: " + path.string());
    }
}

inline int run_render(const RenderArgs &a) {
    require_file(a.scene, "scene file");
    require_file(a.camera, "camera file");
    for (const auto &p : a.view_cameras) require_file(p, "view camera");
    for (const auto &p : a.view_depths) require_file(p, "view depth map");
    if (!a.counts.empty()) require_file(a.counts, "counts file");
    if (a.out.extension() != ".pfm" && a.out.extension() != ".png") {
        throw UsageError("--out must end in .pfm or .png: " + a.out.string());
    }
    if (a.branch != "2d" && a.branch != "3d") throw UsageError("--branch must be 2d or 3d");
    try {
        validate(a.norm);
    } catch (const InvalidInput &e) {
        throw UsageError(e.what());
    }

    std::vector<std::string> warnings;
    Scene scene = io::load_scene(a.scene, &warnings);
    for (const auto &w : warnings) std::cerr << "warning: " << w << '\n';
    const Camera cam = zoom_camera(io::load_camera(a.camera), a.zoom);

    RenderOptions opts;
    opts.threads = a.threads;
    if (a.normalize != NormalizeMode::None) {
        const auto counts = gaussian_counts(scene, a);
        if (a.normalize == NormalizeMode::Exact) {
            opts.alpha_exponents = normalization_exponents(counts, a.norm);
        } else {
            scene = normalize_scene(scene, counts, a.norm);
        }
    }

    const RenderOutput out =
        a.branch == "3d" ? render3d(scene, resolve_normals(scene), cam, opts) : render(scene, cam, opts);
    write_image(a.out, out.color);
    if (!a.dump_weights.empty()) io::write_pfm(a.dump_weights, out.weight_sum);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze: over-brightness sweep on exact duplicates of one plane view

struct AnalyzeArgs {
    std::vector<int> view_counts{1, 2, 4, 8};
    std::vector<double> taus{0.5};
    ViewRigSpec rig{1, 32, 32, 32.0, 0.0};
    PlaneSpec plane;
    TextureSpec texture;
    // Low opacity and half-footprint scales keep T above t_stop up to K = 16,
    // so the raw weight keeps growing with K instead of saturating.
    double opacity = 0.1;
    double scale_factor = 0.5;
    double m_ref = 1.0;
    int threads = 1;
};

struct SweepStats {
    double median_intensity = 0.0;
    double median_weight = 0.0;
    double psnr = 0.0;
    double median_count = 0.0;
};

struct AnalyzeRow {
    int views = 0;
    double tau = 0.0;
    SweepStats raw;
    SweepStats normalized;
};

inline SweepStats sweep_stats(const RenderOutput &out, const ImageBuffer &gt) {
    std::vector<double> luma, weight, count;
    for (const auto &c : out.color.pixels().data()) luma.push_back(luma709(c));
    for (double w : out.weight_sum.data()) weight.push_back(w);
    for (int n : out.contrib_count.data()) count.push_back(n);
    return {median(std::move(luma)), median(std::move(weight)), psnr(out.color, gt), median(std::move(count))};
}

/// K copies of one view's Gaussians, each copy attributed to its own view.
/// All K views share the camera and exact depth map, so every consistency
/// test passes and the count maps read K; gt is the single-copy render.
inline std::vector<AnalyzeRow> run_analyze_sweep(const AnalyzeArgs &a) {
    for (int k : a.view_counts) {
        if (k < 1) throw UsageError("view counts must be at least 1");
    }
    for (double t : a.taus) {
        if (!(t > 0.0 && t < 1.0)) throw UsageError("tau values must lie in (0, 1)");
    }
    if (!(a.m_ref > 0.0)) throw UsageError("--m-ref must be positive");
    ViewRigSpec rig = a.rig;
    rig.count = 1;
    const PlaneViews views = make_plane_views(rig, a.plane, a.texture);
    GaussianGenOptions gen;
    gen.opacity = a.opacity;
    gen.scale_factor = a.scale_factor;
    const Scene base = gaussians_from_views(views, gen);
    const Camera &cam = views.cameras[0];

    RenderOptions opts;
    opts.threads = a.threads;
    const ImageBuffer gt = render(base, cam, opts).color;

    std::vector<AnalyzeRow> rows;
    for (int k : a.view_counts) {
        const Scene dup = duplicate_scene(base, k);
        const std::vector<DepthMap> depths(static_cast<std::size_t>(k), views.depths[0]);
        const SweepStats raw = sweep_stats(render(dup, cam, opts), gt);
        for (double tau : a.taus) {
            const NormalizationConfig cfg{a.m_ref, tau};
            RenderOptions norm_opts = opts;
            norm_opts.alpha_exponents = normalization_exponents(per_gaussian_counts(dup, count_maps(depths, cfg)), cfg);
            rows.push_back({k, tau, raw, sweep_stats(render(dup, cam, norm_opts), gt)});
        }
    }
    return rows;
}

inline std::string analyze_csv(const std::vector<AnalyzeRow> &rows) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "views,tau,raw_median_intensity,raw_median_weight,raw_psnr,raw_median_count,"
           "norm_median_intensity,norm_median_weight,norm_psnr,norm_median_count\n";
    for (const auto &r : rows) {
        out << r.views << ',' << std::setprecision(6) << r.tau << std::setprecision(17);
        for (const SweepStats *s : {&r.raw, &r.normalized}) {
            out << ',' << s->median_intensity << ',' << s->median_weight << ',' << s->psnr << ',' << s->median_count;
        }
        out << '\n';
    }
    return out.str();
}

inline int run_analyze(const AnalyzeArgs &a, const std::filesystem::path &out_path) {
    const std::string csv = analyze_csv(run_analyze_sweep(a));
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        io::write_file(out_path, csv);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// gen: textured plane views plus their Gaussians

struct GenArgs {
    std::filesystem::path out_dir;
    ViewRigSpec rig{2, 32, 32, 32.0, 6.0};
    PlaneSpec plane;
    TextureSpec texture;
    GaussianGenOptions gaussians;
    int duplicates = 1;
};

/// Writes camera_k.json, depth_k.pfm and image_k.pfm per view plus scene.json.
inline int run_gen(const GenArgs &a) {
    if (a.duplicates < 1) throw UsageError("--duplicates must be at least 1");
    if (a.rig.count < 1) throw UsageError("--views must be at least 1");
    std::filesystem::create_directories(a.out_dir);
    const PlaneViews views = make_plane_views(a.rig, a.plane, a.texture);
    for (std::size_t k = 0; k < views.cameras.size(); ++k) {
        const std::string tag = std::to_string(k);
        io::save_camera(views.cameras[k], a.out_dir / ("camera_" + tag + ".json"));
        io::write_pfm(a.out_dir / ("depth_" + tag + ".pfm"), views.depths[k].values);
        io::write_pfm(a.out_dir / ("image_" + tag + ".pfm"), views.images[k]);
    }
    Scene scene = gaussians_from_views(views, a.gaussians);
    if (a.duplicates > 1) scene = duplicate_scene(scene, a.duplicates);
    io::save_scene(scene, a.out_dir / "scene.json");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    std::filesystem::path scene;
    std::vector<std::filesystem::path> view_cameras;
    std::vector<std::filesystem::path> view_images;
    std::filesystem::path probe_camera;
    std::filesystem::path out;
    std::filesystem::path history;
    FitConfig config;
};

inline std::filesystem::path snapshot_path(const std::filesystem::path &out) {
    std::filesystem::path p = out;
    p.replace_extension(".diverged" + out.extension().string());
    return p;
}

inline int run_fit(const FitArgs &a) {
    require_file(a.scene, "scene file");
    if (a.view_cameras.size() != a.view_images.size()) {
        throw UsageError("--view-camera and --view-image must be given the same number of times");
    }
    for (const auto &p : a.view_cameras) require_file(p, "view camera");
    for (const auto &p : a.view_images) require_file(p, "view image");
    if (!a.probe_camera.empty()) require_file(a.probe_camera, "probe camera");
    if (a.out.empty()) throw UsageError("--out is required");
    try {
        validate(a.config);
    } catch (const InvalidInput &e) {
        throw UsageError(e.what());
    }

    std::vector<std::string> warnings;
    const Scene scene = io::load_scene(a.scene, &warnings);
    for (const auto &w : warnings) std::cerr << "warning: " << w << '\n';
    std::vector<TargetView> views;
    for (std::size_t k = 0; k < a.view_cameras.size(); ++k) {
        TargetView v{io::load_camera(a.view_cameras[k]), io::read_pfm_image(a.view_images[k])};
        if (v.image.height() != v.camera.height || v.image.width() != v.camera.width) {
            throw InvalidInput(a.view_images[k].string() + ": image size differs from its camera");
        }
        views.push_back(std::move(v));
    }
    FitConfig cfg = a.config;
    if (!a.probe_camera.empty()) cfg.probe_camera = io::load_camera(a.probe_camera);
    const std::vector<Vec3> normals = cfg.loss.lambda > 0.0 ? resolve_normals(scene) : std::vector<Vec3>{};

    try {
        const FitResult result = fit(scene, views, normals, cfg);
        io::save_scene(result.scene, a.out);
        if (!a.history.empty()) io::write_file(a.history, history_csv(result.history));
    } catch (const FitDiverged &e) {
        const auto snap = snapshot_path(a.out);
        io::save_scene(e.snapshot(), snap);
        std::cerr << "error: " << e.what() << "; last finite scene written to " << snap.string() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace splatreg::cli
