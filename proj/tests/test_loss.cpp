#include "test_support.hpp"

#include <random>

namespace splatreg {
namespace {

ImageBuffer constant(int h, int w, double v) { return ImageBuffer(h, w, Vec3::Constant(v)); }

TEST(Mse, Examples) {
    const auto a = constant(5, 6, 0.3);
    EXPECT_EQ(mse(a, a), 0.0);
    EXPECT_NEAR(mse(a, constant(5, 6, 0.4)), 0.01, 1e-15);
    EXPECT_THROW(mse(a, constant(6, 5, 0.3)), InvalidInput);
}

TEST(Mse, MatchesDoubleLoop) {
    std::mt19937 rng(51);
    const auto a = test::random_image(rng, 4, 4), b = test::random_image(rng, 4, 4);
    double sum = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            for (int k = 0; k < 3; ++k) sum += (a(r, c)[k] - b(r, c)[k]) * (a(r, c)[k] - b(r, c)[k]);
    EXPECT_NEAR(mse(a, b), sum / 48.0, 1e-12);
    EXPECT_EQ(mse(a, b), mse(b, a));
}

TEST(ImageLoss, PerceptualHook) {
    const auto a = constant(4, 4, 0.3), b = constant(4, 4, 0.4);
    LossConfig cfg;
    EXPECT_EQ(loss2d(a, a, cfg), 0.0);
    EXPECT_NEAR(loss2d(a, b, cfg), 0.01, 1e-15);
    cfg.perceptual = [](const ImageBuffer &x, const ImageBuffer &y) { return mse(x, y); };
    EXPECT_NEAR(loss2d(a, b, cfg), 1.05 * mse(a, b), 1e-15);
    EXPECT_NEAR(loss3d(a, b, cfg), 1.05 * mse(a, b), 1e-15);
    cfg.perceptual = [](const ImageBuffer &, const ImageBuffer &) { return -1.0; };
    EXPECT_THROW(loss2d(a, b, cfg), InvalidInput);
}

TEST(TotalLoss, Combination) {
    EXPECT_EQ(combine_losses(0.02, 0.10, 0.0), 0.02);
    EXPECT_EQ(combine_losses(0.02, 0.10, 1.0), 0.10);
    EXPECT_NEAR(combine_losses(0.02, 0.10, 0.05), 0.024, 1e-15);
    std::mt19937 rng(52);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng), l = u(rng);
        EXPECT_NEAR(combine_losses(a, b, l), a + l * (b - a), 1e-14);
    }

    const auto gt = constant(4, 4, 0.5), r2 = constant(4, 4, 0.4), r3 = constant(4, 4, 0.2);
    LossConfig cfg;
    cfg.lambda = 0.05;
    EXPECT_NEAR(total_loss(r2, r3, gt, cfg), 0.95 * 0.01 + 0.05 * 0.09, 1e-15);
    cfg.lambda = 1.5;
    EXPECT_THROW(total_loss(r2, r3, gt, cfg), InvalidInput);
}

TEST(Psnr, Examples) {
    const auto a = constant(4, 4, 0.3);
    EXPECT_NEAR(psnr(a, constant(4, 4, 0.4)), 20.0, 1e-12);
    EXPECT_EQ(psnr(a, a), 99.0);
    EXPECT_NEAR(psnr(constant(4, 4, 0.0), constant(4, 4, 1.0)), 0.0, 1e-15);
    std::mt19937 rng(53);
    const auto x = test::random_image(rng, 5, 5), y = test::random_image(rng, 5, 5);
    EXPECT_EQ(psnr(x, y), psnr(y, x));
}

// Direct 2D-window SSIM over every valid 11×11 position.
double brute_ssim(const ImageBuffer &a, const ImageBuffer &b) {
    double w[11][11], total_w = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) total_w += w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        int n = 0;
        for (int r = 0; r + 11 <= a.height(); ++r)
            for (int c = 0; c + 11 <= a.width(); ++c) {
                double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
                for (int i = 0; i < 11; ++i)
                    for (int j = 0; j < 11; ++j) {
                        const double g = w[i][j] / total_w, x = a(r + i, c + j)[k], y = b(r + i, c + j)[k];
                        mx += g * x;
                        my += g * y;
                        xx += g * x * x;
                        yy += g * y * y;
                        xy += g * x * y;
                    }
                const double c1 = 1e-4, c2 = 9e-4;
                sum += (2 * mx * my + c1) * (2 * (xy - mx * my) + c2) /
                       ((mx * mx + my * my + c1) * (xx - mx * mx + yy - my * my + c2));
                ++n;
            }
        total += sum / n;
    }
    return total / 3.0;
}

TEST(Ssim, IdenticalIsOne) {
    std::mt19937 rng(54);
    const auto a = test::random_image(rng, 13, 14);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, ConstantPairMatchesReference) {
    const auto a = constant(12, 12, 0.2), b = constant(12, 12, 0.8);
    // Reference value from scikit-image (Gaussian weights, sigma 1.5, population covariance).
    EXPECT_NEAR(ssim(a, b), 0.47066607851786496, 1e-6);
    EXPECT_NEAR(ssim(a, b), (0.32 + 1e-4) / (0.68 + 1e-4), 1e-12);
}

TEST(Ssim, StructuredPairMatchesReference) {
    ImageBuffer a(16, 20), b(16, 20);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 20; ++c)
            for (int k = 0; k < 3; ++k) {
                a(r, c)[k] = 0.5 + 0.4 * std::sin(0.37 * r + 0.23 * c + 1.1 * k);
                b(r, c)[k] = 0.5 + 0.35 * std::cos(0.29 * r - 0.41 * c + 0.7 * k) * std::sin(0.13 * r * c / 7 + k);
            }
    EXPECT_NEAR(ssim(a, b), 0.0038012478775003946, 1e-6);
    EXPECT_NEAR(ssim(a, b), brute_ssim(a, b), 1e-12);
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-15);
}

TEST(Ssim, NoisePairMatchesBruteForce) {
    std::mt19937 rng(55);
    const auto a = test::random_image(rng, 15, 17), b = test::random_image(rng, 15, 17);
    const double v = ssim(a, b);
    EXPECT_GT(v, -1.0);
    EXPECT_LT(v, 1.0);
    EXPECT_NEAR(v, brute_ssim(a, b), 1e-12);
}

TEST(Ssim, TooSmallRejected) { EXPECT_THROW(ssim(constant(10, 12, 0), constant(10, 12, 0)), InvalidInput); }

TEST(HoleFraction, Examples) {
    const auto cam = test::identity_camera(8, 8, 10, 4, 4);
    EXPECT_EQ(hole_fraction(render(Scene{}, cam)), 1.0);
    RenderOutput out(8, 8, Vec3::Zero());
    for (auto &w : out.weight_sum.data()) w = 0.999;
    EXPECT_EQ(hole_fraction(out), 0.0);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 8; ++c) out.weight_sum(r, c) = 0.1;
    EXPECT_EQ(hole_fraction(out), 0.5);
    EXPECT_EQ(hole_fraction(out, 0.05), 0.0);
}

TEST(Evaluate, BundlesMetrics) {
    std::mt19937 rng(56);
    const auto gt = test::random_image(rng, 12, 12);
    RenderOutput out(12, 12, Vec3::Zero());
    out.color = gt;
    const auto m = evaluate(out, gt);
    EXPECT_EQ(m.psnr, 99.0);
    EXPECT_NEAR(m.ssim, 1.0, 1e-12);
    EXPECT_EQ(m.mse, 0.0);
    EXPECT_EQ(m.hole_fraction, 1.0);
}

} // namespace
} // namespace splatreg
