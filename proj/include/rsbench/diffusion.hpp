#pragma once

#include "rsbench/raster.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rsbench::diffusion {

struct Shape4 {
    int batch = 1;
    int channels = 1;
    int height = 1;
    int width = 1;

    std::size_t size() const {
        return static_cast<std::size_t>(batch) * channels * height * width;
    }
    bool operator==(const Shape4&) const = default;
};

/// Dense (B, C, H, W) tensor, row-major.
struct LatentTensor {
    Shape4 shape;
    std::vector<double> values;

    static LatentTensor zeros(Shape4 shape);
    /// Throws ShapeMismatch when the value count does not match the shape.
    static LatentTensor from(Shape4 shape, std::vector<double> values);

    std::size_t index(int b, int c, int h, int w) const {
        return ((static_cast<std::size_t>(b) * shape.channels + c) * shape.height + h) * shape.width + w;
    }
    double& at(int b, int c, int h, int w) { return values[index(b, c, h, w)]; }
    double at(int b, int c, int h, int w) const { return values[index(b, c, h, w)]; }
};

/// Text embedding of shape (B, L, D).
struct TextEmbedding {
    int batch = 1;
    int length = 1;
    int dim = 1;
    std::vector<double> values;

    double at(int b, int l, int d) const {
        return values[(static_cast<std::size_t>(b) * length + l) * dim + d];
    }
};

/// Row-major dense matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    static Matrix zeros(int rows, int cols);
    double& operator()(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

enum class ScheduleKind { Linear };

/// Tables indexed by step t in 1..T (element t - 1).
struct NoiseSchedule {
    int steps = 0;
    std::vector<double> beta;
    std::vector<double> alpha_bar;
    std::vector<double> sigma;

    double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
    double alpha_bar_at(int t) const { return alpha_bar[static_cast<std::size_t>(t - 1)]; }
    double sigma_at(int t) const { return sigma[static_cast<std::size_t>(t - 1)]; }
};

/// Throws InvalidSchedule unless T >= 1 and 0 < beta_start <= beta_end < 1.
NoiseSchedule make_schedule(int steps = 1000, double beta_start = 1e-4, double beta_end = 0.02,
                            ScheduleKind kind = ScheduleKind::Linear);

/// d_t = sqrt(ᾱ_t) d_0 + sqrt(1 - ᾱ_t) ε. Throws ShapeMismatch, StepOutOfRange.
LatentTensor forward_diffuse(const LatentTensor& d0, int t, const LatentTensor& eps, const NoiseSchedule& sched);

/// d_{t-1} = (d_t - β_t / sqrt(1 - ᾱ_t) ε̂) / sqrt(1 - β_t) + σ_t z, with z = 0
/// at t = 1 or when no noise is given.
LatentTensor reverse_step(const LatentTensor& d_t, int t, const LatentTensor& eps_hat, const NoiseSchedule& sched,
                          const LatentTensor* noise = nullptr);

/// Mean squared error over every element. Throws ShapeMismatch.
double diffusion_loss(const LatentTensor& eps, const LatentTensor& eps_hat);
/// Gradient of diffusion_loss with respect to eps_hat.
LatentTensor diffusion_loss_grad(const LatentTensor& eps, const LatentTensor& eps_hat);

/// Single-head projections. Query input has C = C_x + C_d channels and text
/// tokens have D features: wq is C x dk, wk is D x dk, wv is D x dv, wo is dv x C.
struct AttentionWeights {
    Matrix wq;
    Matrix wk;
    Matrix wv;
    Matrix wo;
};

/// Random weights with N(0, 1/fan_in) entries.
AttentionWeights random_attention_weights(int channels, int text_dim, int key_dim, int value_dim, std::uint64_t seed);
TextEmbedding random_text_embedding(int batch, int length, int dim, std::uint64_t seed);

struct AttentionResult {
    LatentTensor output;             // (B, C, H, W)
    std::vector<double> attention;   // (B, H*W, L); rows sum to 1
};

/// Concatenates z_x and z_d along channels, treats the H*W positions as
/// queries and attends over the L text tokens (scaled dot product, softmax
/// over tokens). No residual connection. Throws ShapeMismatch.
AttentionResult cross_attention(const LatentTensor& z_x, const LatentTensor& z_d, const TextEmbedding& text,
                                const AttentionWeights& weights);
LatentTensor cross_attention_fuse(const LatentTensor& z_x, const LatentTensor& z_d, const TextEmbedding& text,
                                  const AttentionWeights& weights);

struct AttentionGradients {
    LatentTensor d_zx;
    LatentTensor d_zd;
    std::vector<double> d_text;  // layout of TextEmbedding::values
    AttentionWeights d_weights;
};

/// Vector-Jacobian product of cross_attention_fuse for an upstream gradient
/// of the output's shape.
AttentionGradients cross_attention_backward(const LatentTensor& z_x, const LatentTensor& z_d,
                                            const TextEmbedding& text, const AttentionWeights& weights,
                                            const LatentTensor& grad_output);

/// ε̂ = ε_θ(z_t, t, τE). The output must have the depth-latent shape.
using Denoiser = std::function<LatentTensor(const LatentTensor& z_t, int t, const TextEmbedding& text)>;

/// Calls the denoiser and enforces its contract: output shape equals
/// `expected` (default: the input shape) and every value is finite.
/// Throws ContractViolation.
LatentTensor predict_noise(const Denoiser& denoiser, const LatentTensor& z_t, int t, const TextEmbedding& text,
                           std::optional<Shape4> expected = std::nullopt);

Denoiser zero_denoiser();

/// Optimal ε-predictor for d_0 ~ N(μ, s² I):
/// ε̂ = sqrt(1 - ᾱ_t) (d_t - sqrt(ᾱ_t) μ) / (ᾱ_t s² + 1 - ᾱ_t). Throws InvalidArgument for s <= 0.
Denoiser gaussian_oracle_denoiser(double mu, double s, const NoiseSchedule& sched);

/// Ancestral sampling from d_T ~ N(0, I) down to t = 1. Deterministic given the seed.
LatentTensor sample(const Denoiser& denoiser, const NoiseSchedule& sched, Shape4 shape, const TextEmbedding& text,
                    std::uint64_t seed);

/// (1, 3, H, W) latent with the DEM copied into each channel. Throws BandMismatch.
LatentTensor encode_depth_triplicate(const raster::GeoGrid& dem);
/// Channel mean of a (1, 3, H, W) latent, written onto the grid geometry of `like`.
raster::GeoGrid decode_depth_triplicate(const LatentTensor& latent, const raster::GeoGrid& like);

struct VerificationCheck {
    std::string name;
    bool passed = false;
    std::vector<std::pair<std::string, double>> measured;
};

struct VerificationReport {
    std::uint64_t seed = 0;
    std::vector<VerificationCheck> checks;

    bool passed() const;
    std::string to_json() const;
};

struct VerificationConfig {
    std::uint64_t seed = 0;
    int variance_draws = 100000;
    int moment_samples = 10000;
    int steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
};

/// Runs the numerical verification suite: variance preservation, perfect
/// denoiser loss, oracle moment recovery, attention against a naive
/// reference, and finite-difference gradient checks.
VerificationReport run_verification(const VerificationConfig& config);

}  // namespace rsbench::diffusion
