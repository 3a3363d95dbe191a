#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

using namespace splatreg;
using namespace splatreg::cli;

void add_plane_flags(CLI::App *cmd, ViewRigSpec &rig, PlaneSpec &plane, TextureSpec &tex) {
    cmd->add_option("--width", rig.width, "Image width")->check(CLI::PositiveNumber);
    cmd->add_option("--height", rig.height, "Image height")->check(CLI::PositiveNumber);
    cmd->add_option("--focal", rig.focal, "Focal length in pixels")->check(CLI::PositiveNumber);
    cmd->add_option("--plane-depth", plane.depth, "Distance of the plane center")->check(CLI::PositiveNumber);
    cmd->add_option("--tilt", plane.tilt_deg, "Plane tilt about x, degrees");
    cmd->add_option("--texture", tex.kind, "Texture kind")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, TextureKind>{{"noise", TextureKind::ValueNoise}, {"checker", TextureKind::Checkerboard}}));
    cmd->add_option("--frequency", tex.frequency, "Texture cells per scene unit")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", tex.seed, "Texture seed");
}

int dispatch(int argc, char **argv) {
    CLI::App app{"Pixel-wise Gaussian splatting with alpha normalization and 3D scale regularization"};
    app.require_subcommand(1);
    int threads = default_thread_count();
    app.add_option("--threads", threads, "Worker threads (default: SPLATREG_THREADS or hardware)")
        ->check(CLI::PositiveNumber);

    RenderArgs ra;
    auto *render_cmd = app.add_subcommand("render", "Render a scene from a camera");
    render_cmd->add_option("--scene", ra.scene, "Scene (.json or .ply)")->required();
    render_cmd->add_option("--camera", ra.camera, "Camera JSON")->required();
    render_cmd->add_option("--out", ra.out, "Output image (.pfm or .png)")->required();
    render_cmd->add_option("--branch", ra.branch, "Rasterizer branch")->check(CLI::IsMember({"2d", "3d"}));
    render_cmd->add_option("--zoom", ra.zoom, "Focal length multiplier")->check(CLI::PositiveNumber);
    render_cmd->add_option("--normalize", ra.normalize, "Alpha normalization mode")
        ->transform(CLI::CheckedTransformer(std::map<std::string, NormalizeMode>{
            {"none", NormalizeMode::None}, {"exact", NormalizeMode::Exact}, {"opacity", NormalizeMode::Opacity}}));
    render_cmd->add_option("--m-ref", ra.norm.m_ref, "Reference overlap count");
    render_cmd->add_option("--tau", ra.norm.tau, "Relative depth consistency threshold");
    render_cmd->add_option("--view-camera", ra.view_cameras, "Camera of a depth view (repeatable)");
    render_cmd->add_option("--view-depth", ra.view_depths, "Depth map PFM of a depth view (repeatable)");
    render_cmd->add_option("--counts", ra.counts, "JSON array of stored per-Gaussian counts");
    render_cmd->add_option("--dump-weights", ra.dump_weights, "Write the accumulated weight as grayscale PFM");

    AnalyzeArgs aa;
    std::filesystem::path analyze_out;
    auto *analyze_cmd = app.add_subcommand("analyze", "Over-brightness sweep over duplicated plane views");
    analyze_cmd->add_option("--views", aa.view_counts, "View counts K to sweep")->delimiter(',');
    analyze_cmd->add_option("--tau-sweep", aa.taus, "Depth thresholds to sweep")->delimiter(',');
    analyze_cmd->add_option("--m-ref", aa.m_ref, "Reference overlap count");
    analyze_cmd->add_option("--opacity", aa.opacity, "Opacity of generated Gaussians");
    analyze_cmd->add_option("--scale-factor", aa.scale_factor, "Gaussian scale relative to the pixel footprint");
    analyze_cmd->add_option("--out", analyze_out, "CSV path (default: stdout)");
    add_plane_flags(analyze_cmd, aa.rig, aa.plane, aa.texture);

    GenArgs ga;
    auto *gen_cmd = app.add_subcommand("gen", "Write textured plane views and their Gaussians");
    gen_cmd->add_option("--out-dir", ga.out_dir, "Output directory")->required();
    gen_cmd->add_option("--views", ga.rig.count, "Number of views")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--arc", ga.rig.arc_deg, "Angular spread of the camera arc, degrees");
    gen_cmd->add_option("--opacity", ga.gaussians.opacity, "Opacity of generated Gaussians");
    gen_cmd->add_option("--scale-factor", ga.gaussians.scale_factor, "Gaussian scale relative to the pixel footprint");
    gen_cmd->add_option("--duplicates", ga.duplicates, "Copies of every Gaussian");
    add_plane_flags(gen_cmd, ga.rig, ga.plane, ga.texture);

    FitArgs fa;
    auto &fc = fa.config;
    auto *fit_cmd = app.add_subcommand("fit", "Fit a scene to target views");
    fit_cmd->add_option("--scene", fa.scene, "Initial scene")->required();
    fit_cmd->add_option("--view-camera", fa.view_cameras, "Target camera (repeatable)")->required();
    fit_cmd->add_option("--view-image", fa.view_images, "Target image PFM (repeatable)")->required();
    fit_cmd->add_option("--probe-camera", fa.probe_camera, "Camera for the hole_fraction column");
    fit_cmd->add_option("--out", fa.out, "Fitted scene (.json or .ply)")->required();
    fit_cmd->add_option("--history", fa.history, "Per-iteration CSV");
    fit_cmd->add_option("--iterations", fc.iterations, "Iterations");
    fit_cmd->add_option("--lambda", fc.loss.lambda, "Weight of the 3D-sampling loss");
    fit_cmd->add_option("--step-scale", fc.step_log_scale, "Step size for log-scales");
    fit_cmd->add_option("--step-opacity", fc.step_logit_opacity, "Step size for logit opacity");
    fit_cmd->add_option("--step-opacity3d", fc.step_logit_opacity3d, "Step size for logit opacity3d");
    fit_cmd->add_option("--step-color", fc.step_color, "Step size for colors");
    fit_cmd->add_option("--step-mu", fc.step_mu, "Step size for means (enables mean updates)");
    fit_cmd->add_option("--optimizer", fc.optimizer, "Update rule")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Optimizer>{{"gd", Optimizer::GradientDescent}, {"adam", Optimizer::Adam}}));
    fit_cmd->add_option("--views-per-iteration", fc.views_per_iteration, "Views sampled per iteration (0: all)");
    fit_cmd->add_option("--seed", fc.seed, "Seed for view sampling");
    fit_cmd->add_option("--hole-threshold", fc.hole_threshold, "Weight below which a probe pixel is a hole");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    if (*render_cmd) {
        ra.threads = threads;
        return run_render(ra);
    }
    if (*analyze_cmd) {
        aa.threads = threads;
        return run_analyze(aa, analyze_out);
    }
    if (*gen_cmd) return run_gen(ga);
    fc.train2d.mu = fc.step_mu > 0.0;
    fc.render.threads = threads;
    return run_fit(fa);
}

} // namespace

int main(int argc, char **argv) {
    try {
        return dispatch(argc, argv);
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
