#pragma once

#include "rsbench/diffusion.hpp"

#include <cstdint>
#include <vector>

namespace rsbench::testing {

/// Step-by-step reference for single-head cross-attention, written with plain
/// loops and no shared code with the library: concatenate channels, project
/// queries/keys/values, softmax over tokens, project back.
struct NaiveAttention {
    diffusion::LatentTensor output;
    std::vector<double> attention;  // (B, H*W, L)
};
NaiveAttention naive_cross_attention(const diffusion::LatentTensor& z_x, const diffusion::LatentTensor& z_d,
                                     const diffusion::TextEmbedding& text, const diffusion::AttentionWeights& w);

/// Brute-force per-pixel metrics with an explicit loop over valid pixels.
struct BruteMetrics {
    double rmse = 0.0;
    double mae = 0.0;
    double delta[3] = {0.0, 0.0, 0.0};
};
BruteMetrics brute_force_metrics(const std::vector<double>& pred, const std::vector<double>& gt,
                                 const std::vector<std::uint8_t>& valid);

/// Cumulative product of (1 - beta_t) for a linear schedule, in long double.
long double brute_alpha_bar(int steps, double beta_start, double beta_end, int t);

}  // namespace rsbench::testing
