// Renders K exact copies of a plane's Gaussians with and without alpha
// normalization and prints the median accumulated weight per K.
// Usage: duplicate_views [output-dir]   (PNG renders are written when given)

#include "splatreg/splatreg.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

using namespace splatreg;

static double median_weight(const RenderOutput &out) {
    std::vector<double> w = out.weight_sum.data();
    std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(w.size() / 2), w.end());
    return w[w.size() / 2];
}

int main(int argc, char **argv) {
    const std::filesystem::path out_dir = argc > 1 ? argv[1] : "";
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    ViewRigSpec rig;
    rig.height = 48;
    rig.width = 64;
    rig.focal = 48.0;
    const PlaneViews views = make_plane_views(rig, {}, {});
    GaussianGenOptions gen;
    gen.opacity = 0.15;
    gen.scale_factor = 0.5;
    const Scene base = gaussians_from_views(views, gen);
    const Camera &cam = views.cameras[0];
    const ImageBuffer gt = render(base, cam).color;

    std::printf("%3s %12s %12s %10s %10s\n", "K", "W raw", "W norm", "PSNR raw", "PSNR norm");
    for (int k : {1, 2, 4, 8, 16}) {
        const Scene dup = duplicate_scene(base, k);
        const std::vector<DepthMap> depths(static_cast<std::size_t>(k), views.depths[0]);
        RenderOptions norm;
        norm.alpha_exponents = normalization_exponents(per_gaussian_counts(dup, count_maps(depths, {})), {});
        const RenderOutput raw = render(dup, cam);
        const RenderOutput fixed = render(dup, cam, norm);
        std::printf("%3d %12.6f %12.6f %10.2f %10.2f\n", k, median_weight(raw), median_weight(fixed), psnr(raw.color, gt),
                    psnr(fixed.color, gt));
        if (!out_dir.empty()) {
            io::write_png(out_dir / ("raw_k" + std::to_string(k) + ".png"), raw.color);
            io::write_png(out_dir / ("norm_k" + std::to_string(k) + ".png"), fixed.color);
        }
    }
    return 0;
}
