#include "oracles.hpp"
#include "rsbench/diffusion.hpp"
#include "rsbench/error.hpp"
#include "rsbench/random.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>

namespace rsbench::diffusion {
namespace {

LatentTensor random_tensor(Shape4 shape, std::uint64_t seed) {
    Rng rng(seed);
    auto t = LatentTensor::zeros(shape);
    for (auto& v : t.values) v = rng.normal();
    return t;
}

NoiseSchedule scalar_schedule(double beta, double alpha_bar) {
    NoiseSchedule s;
    s.steps = 1;
    s.beta = {beta};
    s.alpha_bar = {alpha_bar};
    s.sigma = {std::sqrt(beta)};
    return s;
}

TEST(Schedule, SingleStep) {
    const auto s = make_schedule(1, 0.5, 0.5);
    EXPECT_DOUBLE_EQ(s.alpha_bar_at(1), 0.5);
    EXPECT_DOUBLE_EQ(s.sigma_at(1), std::sqrt(0.5));
}

TEST(Schedule, DefaultMatchesCumulativeProductOracle) {
    const auto s = make_schedule();
    // Frozen value from an independent double-precision product in Python.
    EXPECT_NEAR(s.alpha_bar_at(1000), 4.0358297653756754e-05, 1e-15);
    for (const int t : {1, 10, 500, 1000}) {
        EXPECT_NEAR(s.alpha_bar_at(t), static_cast<double>(testing::brute_alpha_bar(1000, 1e-4, 0.02, t)), 1e-14);
    }
    for (int t = 2; t <= 1000; ++t) EXPECT_LT(s.alpha_bar_at(t), s.alpha_bar_at(t - 1));
    for (int t = 1; t <= 1000; ++t) EXPECT_DOUBLE_EQ(s.sigma_at(t) * s.sigma_at(t), s.beta_at(t));
}

TEST(Schedule, InvalidInputs) {
    EXPECT_ERROR_KIND(make_schedule(0), ErrorKind::InvalidSchedule);
    EXPECT_ERROR_KIND(make_schedule(10, 0.0, 0.02), ErrorKind::InvalidSchedule);
    EXPECT_ERROR_KIND(make_schedule(10, 0.03, 0.02), ErrorKind::InvalidSchedule);
    EXPECT_ERROR_KIND(make_schedule(10, 0.01, 1.0), ErrorKind::InvalidSchedule);
}

TEST(Forward, HandCase) {
    const auto sched = scalar_schedule(0.25, 0.75);
    const auto d0 = LatentTensor::zeros({1, 1, 1, 3});
    const auto eps = LatentTensor::from({1, 1, 1, 3}, {1.0, -2.0, 0.5});
    const auto dt = forward_diffuse(d0, 1, eps, sched);
    EXPECT_EQ(dt.values, (std::vector<double>{0.5, -1.0, 0.25}));
}

TEST(Forward, ZeroNoiseLimit) {
    const auto sched = scalar_schedule(1e-300, 1.0);
    const auto d0 = random_tensor({1, 2, 2, 2}, 1);
    EXPECT_EQ(forward_diffuse(d0, 1, random_tensor({1, 2, 2, 2}, 2), sched).values, d0.values);
}

TEST(Forward, Errors) {
    const auto sched = make_schedule(10);
    const auto a = LatentTensor::zeros({1, 1, 2, 2});
    const auto b = LatentTensor::zeros({1, 1, 2, 3});
    EXPECT_ERROR_KIND(forward_diffuse(a, 1, b, sched), ErrorKind::ShapeMismatch);
    EXPECT_ERROR_KIND(forward_diffuse(a, 0, a, sched), ErrorKind::StepOutOfRange);
    EXPECT_ERROR_KIND(forward_diffuse(a, 11, a, sched), ErrorKind::StepOutOfRange);
    EXPECT_ERROR_KIND(LatentTensor::from({1, 1, 2, 2}, {1.0}), ErrorKind::ShapeMismatch);
}

TEST(Reverse, HandCase) {
    const auto sched = scalar_schedule(0.19, 0.36);
    const auto dt = LatentTensor::from({1, 1, 1, 1}, {1.0});
    const auto eps = LatentTensor::from({1, 1, 1, 1}, {0.8});
    EXPECT_NEAR(reverse_step(dt, 1, eps, sched).values[0], 0.9, 1e-15);
}

TEST(Reverse, NoiseIgnoredAtFinalStepOnly) {
    NoiseSchedule sched = make_schedule(2, 0.1, 0.2);
    const auto dt = LatentTensor::from({1, 1, 1, 1}, {1.0});
    const auto eps = LatentTensor::from({1, 1, 1, 1}, {0.0});
    const auto z = LatentTensor::from({1, 1, 1, 1}, {1.0});
    EXPECT_DOUBLE_EQ(reverse_step(dt, 1, eps, sched, &z).values[0], reverse_step(dt, 1, eps, sched).values[0]);
    EXPECT_NEAR(reverse_step(dt, 2, eps, sched, &z).values[0] - reverse_step(dt, 2, eps, sched).values[0],
                std::sqrt(0.2), 1e-15);
}

TEST(Loss, PerfectAndUnitError) {
    const auto eps = random_tensor({2, 1, 3, 3}, 5);
    EXPECT_EQ(diffusion_loss(eps, eps), 0.0);
    const auto zeros = LatentTensor::zeros({1, 1, 2, 5});
    auto ones = zeros;
    for (auto& v : ones.values) v = 1.0;
    EXPECT_DOUBLE_EQ(diffusion_loss(zeros, ones), 1.0);
    EXPECT_ERROR_KIND(diffusion_loss(zeros, eps), ErrorKind::ShapeMismatch);
}

TEST(Loss, MatchesBruteForceAndGradient) {
    const auto a = random_tensor({1, 2, 3, 4}, 6);
    const auto b = random_tensor({1, 2, 3, 4}, 7);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) sum += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    EXPECT_NEAR(diffusion_loss(a, b), sum / static_cast<double>(a.values.size()), 1e-12);

    const auto g = diffusion_loss_grad(a, b);
    const double h = 1e-5;
    for (std::size_t i = 0; i < b.values.size(); i += 5) {
        auto up = b;
        auto down = b;
        up.values[i] += h;
        down.values[i] -= h;
        const double fd = (diffusion_loss(a, up) - diffusion_loss(a, down)) / (2 * h);
        EXPECT_NEAR(g.values[i], fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
}

struct AttentionCase {
    LatentTensor z_x;
    LatentTensor z_d;
    TextEmbedding text;
    AttentionWeights weights;
};

AttentionCase small_case(int length = 3, std::uint64_t seed = 21) {
    return {random_tensor({1, 3, 2, 2}, seed), random_tensor({1, 1, 2, 2}, seed + 1),
            random_text_embedding(1, length, 4, seed + 2), random_attention_weights(4, 4, 5, 6, seed + 3)};
}

TEST(Attention, MatchesNaiveOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto c = small_case(3, 100 + seed * 7);
        const auto fast = cross_attention(c.z_x, c.z_d, c.text, c.weights);
        const auto ref = testing::naive_cross_attention(c.z_x, c.z_d, c.text, c.weights);
        ASSERT_EQ(fast.output.shape, ref.output.shape);
        for (std::size_t i = 0; i < ref.output.values.size(); ++i) {
            EXPECT_NEAR(fast.output.values[i], ref.output.values[i], 1e-10);
        }
        for (std::size_t i = 0; i < ref.attention.size(); ++i) EXPECT_NEAR(fast.attention[i], ref.attention[i], 1e-10);
    }
}

TEST(Attention, RowsSumToOne) {
    const auto c = small_case(5);
    const auto r = cross_attention(c.z_x, c.z_d, c.text, c.weights);
    for (std::size_t row = 0; row < r.attention.size() / 5; ++row) {
        double s = 0.0;
        for (int l = 0; l < 5; ++l) s += r.attention[row * 5 + l];
        EXPECT_NEAR(s, 1.0, 1e-6);
    }
}

TEST(Attention, SingleTokenIgnoresQueries) {
    auto c = small_case(1);
    const auto a = cross_attention(c.z_x, c.z_d, c.text, c.weights);
    for (const double w : a.attention) EXPECT_EQ(w, 1.0);
    const auto other = cross_attention_fuse(random_tensor({1, 3, 2, 2}, 999), c.z_d, c.text, c.weights);
    for (std::size_t i = 0; i < other.values.size(); ++i) EXPECT_NEAR(other.values[i], a.output.values[i], 1e-12);
}

TEST(Attention, DuplicatingAllTokensChangesNothing) {
    const auto c = small_case(3);
    TextEmbedding doubled{1, 6, 4, c.text.values};
    doubled.values.insert(doubled.values.end(), c.text.values.begin(), c.text.values.end());
    const auto a = cross_attention_fuse(c.z_x, c.z_d, c.text, c.weights);
    const auto b = cross_attention_fuse(c.z_x, c.z_d, doubled, c.weights);
    for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-12);

    const auto one = small_case(1);
    TextEmbedding twice{1, 2, 4, one.text.values};
    twice.values.insert(twice.values.end(), one.text.values.begin(), one.text.values.end());
    const auto x = cross_attention_fuse(one.z_x, one.z_d, one.text, one.weights);
    const auto y = cross_attention_fuse(one.z_x, one.z_d, twice, one.weights);
    for (std::size_t i = 0; i < x.values.size(); ++i) EXPECT_NEAR(x.values[i], y.values[i], 1e-12);
}

TEST(Attention, ShapeChecks) {
    const auto c = small_case();
    EXPECT_ERROR_KIND(cross_attention(c.z_x, random_tensor({1, 1, 3, 2}, 1), c.text, c.weights),
                      ErrorKind::ShapeMismatch);
    EXPECT_ERROR_KIND(cross_attention(c.z_x, c.z_d, random_text_embedding(1, 3, 5, 1), c.weights),
                      ErrorKind::ShapeMismatch);
    EXPECT_ERROR_KIND(cross_attention(c.z_x, c.z_d, random_text_embedding(2, 3, 4, 1), c.weights),
                      ErrorKind::ShapeMismatch);
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

TEST(Attention, BackwardMatchesCentralDifferences) {
    const auto c = small_case(3, 77);
    const auto g = random_tensor(cross_attention_fuse(c.z_x, c.z_d, c.text, c.weights).shape, 78);
    const auto objective = [&](const LatentTensor& zx, const LatentTensor& zd, const TextEmbedding& text,
                               const AttentionWeights& w) {
        const auto out = cross_attention_fuse(zx, zd, text, w);
        double s = 0.0;
        for (std::size_t i = 0; i < out.values.size(); ++i) s += out.values[i] * g.values[i];
        return s;
    };
    const auto grads = cross_attention_backward(c.z_x, c.z_d, c.text, c.weights, g);
    const double h = 1e-5;

    const auto fd_over = [&](std::vector<double>& param) {
        std::vector<double> out(param.size());
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double keep = param[i];
            param[i] = keep + h;
            const double up = objective(c.z_x, c.z_d, c.text, c.weights);
            param[i] = keep - h;
            const double down = objective(c.z_x, c.z_d, c.text, c.weights);
            param[i] = keep;
            out[i] = (up - down) / (2 * h);
        }
        return out;
    };
    auto& m = const_cast<AttentionCase&>(c);
    EXPECT_LT(relative_error(grads.d_zx.values, fd_over(m.z_x.values)), 1e-4);
    EXPECT_LT(relative_error(grads.d_zd.values, fd_over(m.z_d.values)), 1e-4);
    EXPECT_LT(relative_error(grads.d_text, fd_over(m.text.values)), 1e-4);
    EXPECT_LT(relative_error(grads.d_weights.wq.values, fd_over(m.weights.wq.values)), 1e-4);
    EXPECT_LT(relative_error(grads.d_weights.wk.values, fd_over(m.weights.wk.values)), 1e-4);
    EXPECT_LT(relative_error(grads.d_weights.wv.values, fd_over(m.weights.wv.values)), 1e-4);
    EXPECT_LT(relative_error(grads.d_weights.wo.values, fd_over(m.weights.wo.values)), 1e-4);
}

TEST(Denoiser, ZeroAndContract) {
    const auto z = random_tensor({1, 1, 2, 2}, 3);
    const auto text = random_text_embedding(1, 1, 1, 0);
    const auto eps = predict_noise(zero_denoiser(), z, 5, text);
    EXPECT_EQ(eps.shape, z.shape);
    for (const double v : eps.values) EXPECT_EQ(v, 0.0);

    const Denoiser wrong = [](const LatentTensor&, int, const TextEmbedding&) {
        return LatentTensor::zeros({1, 1, 3, 3});
    };
    EXPECT_ERROR_KIND(predict_noise(wrong, z, 5, text), ErrorKind::ContractViolation);
    const Denoiser nan = [](const LatentTensor& zt, int, const TextEmbedding&) {
        auto out = zt;
        out.values[0] = std::nan("");
        return out;
    };
    EXPECT_ERROR_KIND(predict_noise(nan, z, 5, text), ErrorKind::ContractViolation);
}

TEST(Denoiser, GaussianOracleAlgebra) {
    const auto sched = make_schedule(100);
    const auto text = random_text_embedding(1, 1, 1, 0);
    const int t = 40;
    const double ab = sched.alpha_bar_at(t);
    const auto mode = LatentTensor::from({1, 1, 1, 1}, {std::sqrt(ab) * 3.0});
    EXPECT_NEAR(gaussian_oracle_denoiser(3.0, 0.5, sched)(mode, t, text).values[0], 0.0, 1e-15);

    const auto d = LatentTensor::from({1, 1, 1, 1}, {1.7});
    EXPECT_NEAR(gaussian_oracle_denoiser(3.0, 1.0, sched)(d, t, text).values[0],
                std::sqrt(1 - ab) * (1.7 - std::sqrt(ab) * 3.0), 1e-14);
    EXPECT_ERROR_KIND(gaussian_oracle_denoiser(0.0, 0.0, sched), ErrorKind::InvalidArgument);
}

TEST(Denoiser, OracleNearCleanLimitPredictsZero) {
    const auto sched = scalar_schedule(1e-12, 1.0 - 1e-12);
    const auto text = random_text_embedding(1, 1, 1, 0);
    const auto d = LatentTensor::from({1, 1, 1, 1}, {3.0});
    EXPECT_NEAR(predict_noise(gaussian_oracle_denoiser(3.0, 0.5, sched), d, 1, text).values[0], 0.0, 1e-5);
}

TEST(Denoiser, OracleMinimisesLossEmpirically) {
    const auto sched = make_schedule(1000);
    const auto text = random_text_embedding(1, 1, 1, 0);
    const int n = 10000;
    Rng rng(31);
    const int t = 300;
    auto d0 = LatentTensor::zeros({1, 1, 1, n});
    auto eps = LatentTensor::zeros({1, 1, 1, n});
    for (int i = 0; i < n; ++i) {
        d0.values[i] = 3.0 + 0.5 * rng.normal();
        eps.values[i] = rng.normal();
    }
    const auto dt = forward_diffuse(d0, t, eps, sched);
    const auto oracle = gaussian_oracle_denoiser(3.0, 0.5, sched)(dt, t, text);
    auto perturbed = oracle;
    for (auto& v : perturbed.values) v += 0.1;
    EXPECT_LT(diffusion_loss(eps, oracle), diffusion_loss(eps, perturbed));
}

TEST(Sampling, DeterministicAndOneStepAlgebra) {
    const auto sched = make_schedule(20);
    const auto text = random_text_embedding(1, 1, 1, 0);
    const auto a = sample(gaussian_oracle_denoiser(1.0, 2.0, sched), sched, {1, 1, 4, 4}, text, 5);
    const auto b = sample(gaussian_oracle_denoiser(1.0, 2.0, sched), sched, {1, 1, 4, 4}, text, 5);
    EXPECT_EQ(a.values, b.values);

    const auto one = make_schedule(1, 0.3, 0.3);
    const auto out = sample(zero_denoiser(), one, {1, 1, 1, 4}, text, 9);
    Rng rng(9);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(out.values[i], rng.normal() / std::sqrt(0.7), 1e-15);
}

TEST(Triplicate, EncodeDecode) {
    const auto dem = testing::dem_from(5, 3, [](int r, int c) { return r * 10.0 - c * 0.5; });
    const auto z = encode_depth_triplicate(dem);
    EXPECT_EQ(z.shape, (Shape4{1, 3, 3, 5}));
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 5; ++c) {
            EXPECT_EQ(z.at(0, 0, r, c), z.at(0, 1, r, c));
            EXPECT_EQ(z.at(0, 0, r, c), z.at(0, 2, r, c));
        }
    }
    EXPECT_EQ(decode_depth_triplicate(z, dem), dem);
    const auto rgb = testing::rgb_from(2, 2, [](int, int, int) { return std::uint8_t{0}; });
    EXPECT_ERROR_KIND(encode_depth_triplicate(rgb), ErrorKind::BandMismatch);
}

TEST(Verification, SmallRunPassesAndIsReproducible) {
    VerificationConfig cfg;
    cfg.seed = 4;
    cfg.variance_draws = 20000;
    cfg.moment_samples = 2000;
    const auto report = run_verification(cfg);
    EXPECT_TRUE(report.passed()) << report.to_json();
    EXPECT_EQ(report.checks.size(), 5u);
    EXPECT_EQ(report.to_json(), run_verification(cfg).to_json());
    const auto j = nlohmann::json::parse(report.to_json());
    EXPECT_EQ(j["seed"], 4);
}

}  // namespace
}  // namespace rsbench::diffusion
