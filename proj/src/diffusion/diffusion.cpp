#include "rsbench/diffusion.hpp"

#include "rsbench/error.hpp"
#include "rsbench/random.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace rsbench::diffusion {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;

ConstMap view(const Matrix& m) { return ConstMap(m.values.data(), m.rows, m.cols); }

Matrix to_matrix(const RowMatrix& m) {
    Matrix out = Matrix::zeros(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    Eigen::Map<RowMatrix>(out.values.data(), m.rows(), m.cols()) = m;
    return out;
}

void require_same_shape(const LatentTensor& a, const LatentTensor& b, const char* what) {
    if (!(a.shape == b.shape) || a.values.size() != b.values.size()) {
        throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": tensor shapes differ");
    }
}

void require_step(const NoiseSchedule& sched, int t) {
    if (t < 1 || t > sched.steps) {
        throw Error(ErrorKind::StepOutOfRange, "step " + std::to_string(t) + " outside 1.." + std::to_string(sched.steps));
    }
}

struct AttentionDims {
    int cx, cd, c, n, l, d, dk, dv;
};

AttentionDims check_attention(const LatentTensor& z_x, const LatentTensor& z_d, const TextEmbedding& text,
                              const AttentionWeights& w) {
    const auto& sx = z_x.shape;
    const auto& sd = z_d.shape;
    if (sx.batch != sd.batch || sx.height != sd.height || sx.width != sd.width) {
        throw Error(ErrorKind::ShapeMismatch, "image and depth latents differ in batch or spatial shape");
    }
    if (text.batch != sx.batch) throw Error(ErrorKind::ShapeMismatch, "text batch differs from latent batch");
    if (text.values.size() != static_cast<std::size_t>(text.batch) * text.length * text.dim || text.length < 1) {
        throw Error(ErrorKind::ShapeMismatch, "text embedding values do not match (B, L, D)");
    }
    AttentionDims d{sx.channels, sd.channels, sx.channels + sd.channels, sx.height * sx.width,
                    text.length,  text.dim,    w.wq.cols,                w.wv.cols};
    if (w.wq.rows != d.c || w.wk.rows != d.d || w.wk.cols != d.dk || w.wv.rows != d.d || w.wo.rows != d.dv ||
        w.wo.cols != d.c || d.dk < 1 || d.dv < 1) {
        throw Error(ErrorKind::ShapeMismatch, "attention weights are dimensionally inconsistent");
    }
    return d;
}

RowMatrix gather_queries(const LatentTensor& z_x, const LatentTensor& z_d, int b, const AttentionDims& d) {
    RowMatrix x(d.n, d.c);
    const int w = z_x.shape.width;
    for (int pos = 0; pos < d.n; ++pos) {
        const int h = pos / w;
        const int col = pos % w;
        for (int c = 0; c < d.cx; ++c) x(pos, c) = z_x.at(b, c, h, col);
        for (int c = 0; c < d.cd; ++c) x(pos, d.cx + c) = z_d.at(b, c, h, col);
    }
    return x;
}

RowMatrix gather_text(const TextEmbedding& text, int b) {
    return ConstMap(text.values.data() + static_cast<std::size_t>(b) * text.length * text.dim, text.length, text.dim);
}

RowMatrix softmax_rows(const RowMatrix& s) {
    RowMatrix a(s.rows(), s.cols());
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        const double m = s.row(r).maxCoeff();
        a.row(r) = (s.row(r).array() - m).exp();
        a.row(r) /= a.row(r).sum();
    }
    return a;
}

// Straight loops, no Eigen: the reference the vectorized path is checked against.
std::vector<double> naive_attention(const LatentTensor& z_x, const LatentTensor& z_d, const TextEmbedding& text,
                                    const AttentionWeights& w) {
    const auto d = check_attention(z_x, z_d, text, w);
    const int width = z_x.shape.width;
    LatentTensor out = LatentTensor::zeros({z_x.shape.batch, d.c, z_x.shape.height, width});
    for (int b = 0; b < z_x.shape.batch; ++b) {
        for (int pos = 0; pos < d.n; ++pos) {
            const int h = pos / width;
            const int col = pos % width;
            std::vector<double> x(static_cast<std::size_t>(d.c));
            for (int c = 0; c < d.cx; ++c) x[c] = z_x.at(b, c, h, col);
            for (int c = 0; c < d.cd; ++c) x[d.cx + c] = z_d.at(b, c, h, col);
            std::vector<double> q(static_cast<std::size_t>(d.dk), 0.0);
            for (int k = 0; k < d.dk; ++k) {
                for (int c = 0; c < d.c; ++c) q[k] += x[c] * w.wq(c, k);
            }
            std::vector<double> score(static_cast<std::size_t>(d.l), 0.0);
            for (int l = 0; l < d.l; ++l) {
                for (int k = 0; k < d.dk; ++k) {
                    double key = 0.0;
                    for (int e = 0; e < d.d; ++e) key += text.at(b, l, e) * w.wk(e, k);
                    score[l] += q[k] * key;
                }
                score[l] /= std::sqrt(static_cast<double>(d.dk));
            }
            const double m = *std::max_element(score.begin(), score.end());
            double z = 0.0;
            for (auto& s : score) z += (s = std::exp(s - m));
            std::vector<double> o(static_cast<std::size_t>(d.dv), 0.0);
            for (int l = 0; l < d.l; ++l) {
                for (int v = 0; v < d.dv; ++v) {
                    double value = 0.0;
                    for (int e = 0; e < d.d; ++e) value += text.at(b, l, e) * w.wv(e, v);
                    o[v] += score[l] / z * value;
                }
            }
            for (int c = 0; c < d.c; ++c) {
                double y = 0.0;
                for (int v = 0; v < d.dv; ++v) y += o[v] * w.wo(v, c);
                out.at(b, c, h, col) = y;
            }
        }
    }
    return out.values;
}

LatentTensor standard_normal(Shape4 shape, Rng& rng) {
    LatentTensor t = LatentTensor::zeros(shape);
    for (auto& v : t.values) v = rng.normal();
    return t;
}

double relative_error(const std::vector<double>& numeric, const std::vector<double>& analytic) {
    double diff = 0.0;
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        diff += (numeric[i] - analytic[i]) * (numeric[i] - analytic[i]);
        a += numeric[i] * numeric[i];
        b += analytic[i] * analytic[i];
    }
    const double scale = std::max({std::sqrt(a), std::sqrt(b), 1e-12});
    return std::sqrt(diff) / scale;
}

// Central differences of a scalar function over every entry of `params`.
template <typename F>
std::vector<double> numeric_gradient(std::vector<double>& params, F objective, double h) {
    std::vector<double> grad(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = objective();
        params[i] = saved - h;
        const double down = objective();
        params[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace

LatentTensor LatentTensor::zeros(Shape4 shape) {
    if (shape.batch < 1 || shape.channels < 1 || shape.height < 1 || shape.width < 1) {
        throw Error(ErrorKind::ShapeMismatch, "tensor dimensions must be positive");
    }
    return {shape, std::vector<double>(shape.size(), 0.0)};
}

LatentTensor LatentTensor::from(Shape4 shape, std::vector<double> values) {
    auto t = zeros(shape);
    if (values.size() != t.values.size()) throw Error(ErrorKind::ShapeMismatch, "value count does not match shape");
    t.values = std::move(values);
    return t;
}

Matrix Matrix::zeros(int rows, int cols) {
    return {rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0)};
}

NoiseSchedule make_schedule(int steps, double beta_start, double beta_end, ScheduleKind kind) {
    if (steps < 1) throw Error(ErrorKind::InvalidSchedule, "schedule needs at least one step");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw Error(ErrorKind::InvalidSchedule, "need 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.steps = steps;
    s.beta.resize(static_cast<std::size_t>(steps));
    s.alpha_bar.resize(s.beta.size());
    s.sigma.resize(s.beta.size());
    double running = 1.0;
    for (int i = 0; i < steps; ++i) {
        switch (kind) {
            case ScheduleKind::Linear:
                s.beta[i] = steps == 1 ? beta_start
                                       : beta_start + (beta_end - beta_start) * static_cast<double>(i) / (steps - 1);
                break;
        }
        running *= 1.0 - s.beta[i];
        s.alpha_bar[i] = running;
        s.sigma[i] = std::sqrt(s.beta[i]);
    }
    return s;
}

LatentTensor forward_diffuse(const LatentTensor& d0, int t, const LatentTensor& eps, const NoiseSchedule& sched) {
    require_same_shape(d0, eps, "forward_diffuse");
    require_step(sched, t);
    const double a = std::sqrt(sched.alpha_bar_at(t));
    const double b = std::sqrt(1.0 - sched.alpha_bar_at(t));
    LatentTensor out = d0;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a * d0.values[i] + b * eps.values[i];
    return out;
}

LatentTensor reverse_step(const LatentTensor& d_t, int t, const LatentTensor& eps_hat, const NoiseSchedule& sched,
                          const LatentTensor* noise) {
    require_same_shape(d_t, eps_hat, "reverse_step");
    require_step(sched, t);
    const bool add_noise = noise != nullptr && t > 1;
    if (add_noise) require_same_shape(d_t, *noise, "reverse_step noise");
    const double beta = sched.beta_at(t);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(1.0 - beta);
    const double eps_coef = beta / std::sqrt(1.0 - sched.alpha_bar_at(t));
    const double sigma = sched.sigma_at(t);
    LatentTensor out = d_t;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double v = inv_sqrt_alpha * (d_t.values[i] - eps_coef * eps_hat.values[i]);
        if (add_noise) v += sigma * noise->values[i];
        out.values[i] = v;
    }
    return out;
}

double diffusion_loss(const LatentTensor& eps, const LatentTensor& eps_hat) {
    require_same_shape(eps, eps_hat, "diffusion_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < eps.values.size(); ++i) {
        const double e = eps.values[i] - eps_hat.values[i];
        sum += e * e;
    }
    return sum / static_cast<double>(eps.values.size());
}

LatentTensor diffusion_loss_grad(const LatentTensor& eps, const LatentTensor& eps_hat) {
    require_same_shape(eps, eps_hat, "diffusion_loss_grad");
    LatentTensor g = eps_hat;
    const double scale = 2.0 / static_cast<double>(eps.values.size());
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = scale * (eps_hat.values[i] - eps.values[i]);
    return g;
}

AttentionWeights random_attention_weights(int channels, int text_dim, int key_dim, int value_dim, std::uint64_t seed) {
    Rng rng(seed);
    const auto fill = [&](int rows, int cols) {
        Matrix m = Matrix::zeros(rows, cols);
        const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
        for (auto& v : m.values) v = scale * rng.normal();
        return m;
    };
    AttentionWeights w;
    w.wq = fill(channels, key_dim);
    w.wk = fill(text_dim, key_dim);
    w.wv = fill(text_dim, value_dim);
    w.wo = fill(value_dim, channels);
    return w;
}

TextEmbedding random_text_embedding(int batch, int length, int dim, std::uint64_t seed) {
    Rng rng(seed);
    TextEmbedding e{batch, length, dim, std::vector<double>(static_cast<std::size_t>(batch) * length * dim)};
    for (auto& v : e.values) v = rng.normal();
    return e;
}

AttentionResult cross_attention(const LatentTensor& z_x, const LatentTensor& z_d, const TextEmbedding& text,
                                const AttentionWeights& weights) {
    const auto d = check_attention(z_x, z_d, text, weights);
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d.dk));
    AttentionResult r{LatentTensor::zeros({z_x.shape.batch, d.c, z_x.shape.height, z_x.shape.width}), {}};
    r.attention.reserve(static_cast<std::size_t>(z_x.shape.batch) * d.n * d.l);
    for (int b = 0; b < z_x.shape.batch; ++b) {
        const RowMatrix x = gather_queries(z_x, z_d, b, d);
        const RowMatrix e = gather_text(text, b);
        const RowMatrix q = x * view(weights.wq);
        const RowMatrix k = e * view(weights.wk);
        const RowMatrix v = e * view(weights.wv);
        const RowMatrix a = softmax_rows(q * k.transpose() * inv_scale);
        const RowMatrix y = a * v * view(weights.wo);
        r.attention.insert(r.attention.end(), a.data(), a.data() + a.size());
        for (int pos = 0; pos < d.n; ++pos) {
            for (int c = 0; c < d.c; ++c) r.output.at(b, c, pos / z_x.shape.width, pos % z_x.shape.width) = y(pos, c);
        }
    }
    return r;
}

LatentTensor cross_attention_fuse(const LatentTensor& z_x, const LatentTensor& z_d, const TextEmbedding& text,
                                  const AttentionWeights& weights) {
    return cross_attention(z_x, z_d, text, weights).output;
}

AttentionGradients cross_attention_backward(const LatentTensor& z_x, const LatentTensor& z_d,
                                            const TextEmbedding& text, const AttentionWeights& weights,
                                            const LatentTensor& grad_output) {
    const auto d = check_attention(z_x, z_d, text, weights);
    const Shape4 out_shape{z_x.shape.batch, d.c, z_x.shape.height, z_x.shape.width};
    if (!(grad_output.shape == out_shape)) throw Error(ErrorKind::ShapeMismatch, "upstream gradient shape");
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d.dk));

    AttentionGradients g{LatentTensor::zeros(z_x.shape), LatentTensor::zeros(z_d.shape),
                         std::vector<double>(text.values.size(), 0.0), {}};
    RowMatrix dwq = RowMatrix::Zero(d.c, d.dk);
    RowMatrix dwk = RowMatrix::Zero(d.d, d.dk);
    RowMatrix dwv = RowMatrix::Zero(d.d, d.dv);
    RowMatrix dwo = RowMatrix::Zero(d.dv, d.c);

    for (int b = 0; b < z_x.shape.batch; ++b) {
        const RowMatrix x = gather_queries(z_x, z_d, b, d);
        const RowMatrix e = gather_text(text, b);
        const RowMatrix q = x * view(weights.wq);
        const RowMatrix k = e * view(weights.wk);
        const RowMatrix v = e * view(weights.wv);
        const RowMatrix a = softmax_rows(q * k.transpose() * inv_scale);
        const RowMatrix o = a * v;

        RowMatrix dy(d.n, d.c);
        for (int pos = 0; pos < d.n; ++pos) {
            for (int c = 0; c < d.c; ++c) dy(pos, c) = grad_output.at(b, c, pos / z_x.shape.width, pos % z_x.shape.width);
        }
        dwo += o.transpose() * dy;
        const RowMatrix d_o = dy * view(weights.wo).transpose();
        const RowMatrix d_a = d_o * v.transpose();
        const RowMatrix d_v = a.transpose() * d_o;
        // Softmax Jacobian applied row by row.
        const Eigen::VectorXd row_dot = (d_a.array() * a.array()).rowwise().sum();
        const RowMatrix d_s = a.array() * (d_a.colwise() - row_dot).array();
        const RowMatrix d_q = d_s * k * inv_scale;
        const RowMatrix d_k = d_s.transpose() * q * inv_scale;

        dwq += x.transpose() * d_q;
        dwk += e.transpose() * d_k;
        dwv += e.transpose() * d_v;
        const RowMatrix dx = d_q * view(weights.wq).transpose();
        const RowMatrix de = d_k * view(weights.wk).transpose() + d_v * view(weights.wv).transpose();

        for (int pos = 0; pos < d.n; ++pos) {
            const int h = pos / z_x.shape.width;
            const int col = pos % z_x.shape.width;
            for (int c = 0; c < d.cx; ++c) g.d_zx.at(b, c, h, col) = dx(pos, c);
            for (int c = 0; c < d.cd; ++c) g.d_zd.at(b, c, h, col) = dx(pos, d.cx + c);
        }
        std::copy(de.data(), de.data() + de.size(), g.d_text.begin() + static_cast<std::ptrdiff_t>(b) * d.l * d.d);
    }
    g.d_weights = {to_matrix(dwq), to_matrix(dwk), to_matrix(dwv), to_matrix(dwo)};
    return g;
}

LatentTensor predict_noise(const Denoiser& denoiser, const LatentTensor& z_t, int t, const TextEmbedding& text,
                           std::optional<Shape4> expected) {
    const Shape4 want = expected.value_or(z_t.shape);
    auto eps_hat = denoiser(z_t, t, text);
    if (!(eps_hat.shape == want) || eps_hat.values.size() != want.size()) {
        throw Error(ErrorKind::ContractViolation, "denoiser returned a tensor of the wrong shape");
    }
    for (const double v : eps_hat.values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::ContractViolation, "denoiser returned a non-finite value");
    }
    return eps_hat;
}

Denoiser zero_denoiser() {
    return [](const LatentTensor& z_t, int, const TextEmbedding&) { return LatentTensor::zeros(z_t.shape); };
}

Denoiser gaussian_oracle_denoiser(double mu, double s, const NoiseSchedule& sched) {
    if (!(s > 0.0)) throw Error(ErrorKind::InvalidArgument, "oracle standard deviation must be positive");
    return [mu, s, sched](const LatentTensor& z_t, int t, const TextEmbedding&) {
        require_step(sched, t);
        const double ab = sched.alpha_bar_at(t);
        const double num = std::sqrt(1.0 - ab);
        const double centre = std::sqrt(ab) * mu;
        const double den = ab * s * s + 1.0 - ab;
        LatentTensor out = z_t;
        for (auto& v : out.values) v = num * (v - centre) / den;
        return out;
    };
}

LatentTensor sample(const Denoiser& denoiser, const NoiseSchedule& sched, Shape4 shape, const TextEmbedding& text,
                    std::uint64_t seed) {
    Rng rng(seed);
    LatentTensor d = standard_normal(shape, rng);
    LatentTensor z = LatentTensor::zeros(shape);
    for (int t = sched.steps; t >= 1; --t) {
        const auto eps_hat = predict_noise(denoiser, d, t, text);
        if (t > 1) {
            for (auto& v : z.values) v = rng.normal();
            d = reverse_step(d, t, eps_hat, sched, &z);
        } else {
            d = reverse_step(d, t, eps_hat, sched);
        }
    }
    return d;
}

LatentTensor encode_depth_triplicate(const raster::GeoGrid& dem) {
    if (!dem.is_dem()) throw Error(ErrorKind::BandMismatch, "depth triplication expects a single-band grid");
    LatentTensor out = LatentTensor::zeros({1, 3, dem.height(), dem.width()});
    const auto z = dem.f32();
    for (int c = 0; c < 3; ++c) {
        std::copy(z.begin(), z.end(), out.values.begin() + static_cast<std::ptrdiff_t>(c) * z.size());
    }
    return out;
}

raster::GeoGrid decode_depth_triplicate(const LatentTensor& latent, const raster::GeoGrid& like) {
    const Shape4 want{1, 3, like.height(), like.width()};
    if (!(latent.shape == want)) throw Error(ErrorKind::ShapeMismatch, "latent does not match the target grid");
    const std::size_t n = like.pixel_count();
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double sum = latent.values[i] + latent.values[n + i] + latent.values[2 * n + i];
        out[i] = static_cast<float>(sum / 3.0);
    }
    return raster::GeoGrid::dem(like.width(), like.height(), like.transform(), like.crs(), std::move(out),
                                like.nodata());
}

bool VerificationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::string VerificationReport::to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["passed"] = passed();
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json item;
        item["name"] = c.name;
        item["passed"] = c.passed;
        item["measured"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : c.measured) item["measured"][k] = v;
        j["checks"].push_back(item);
    }
    return j.dump(2);
}

VerificationReport run_verification(const VerificationConfig& config) {
    VerificationReport report;
    report.seed = config.seed;
    const auto sched = make_schedule(config.steps, config.beta_start, config.beta_end);
    Rng rng(config.seed);

    {
        VerificationCheck c{"forward_variance_preservation", true, {}};
        const int n = config.variance_draws;
        const double tolerance = 3.0 * std::sqrt(2.0 / (n - 1));
        const Shape4 shape{1, 1, 1, n};
        for (const int t : {1, sched.steps / 4, sched.steps / 2, sched.steps}) {
            if (t < 1) continue;
            const auto d0 = standard_normal(shape, rng);
            const auto eps = standard_normal(shape, rng);
            const auto dt = forward_diffuse(d0, t, eps, sched);
            double mean = 0.0;
            for (const double v : dt.values) mean += v;
            mean /= n;
            double var = 0.0;
            for (const double v : dt.values) var += (v - mean) * (v - mean);
            var /= (n - 1);
            c.measured.emplace_back("variance_t" + std::to_string(t), var);
            c.passed = c.passed && std::abs(var - 1.0) <= tolerance;
        }
        c.measured.emplace_back("tolerance", tolerance);
        report.checks.push_back(c);
    }

    {
        VerificationCheck c{"perfect_denoiser_loss", false, {}};
        const auto eps = standard_normal({2, 3, 4, 4}, rng);
        const double loss = diffusion_loss(eps, eps);
        c.measured.emplace_back("loss", loss);
        c.passed = loss == 0.0;
        report.checks.push_back(c);
    }

    {
        VerificationCheck c{"oracle_moment_recovery", false, {}};
        constexpr double kMu = 3.0;
        constexpr double kStd = 0.5;
        const int n = config.moment_samples;
        const auto text = random_text_embedding(1, 1, 1, config.seed);
        const auto out = sample(gaussian_oracle_denoiser(kMu, kStd, sched), sched, {1, 1, 1, n}, text,
                                rng.next_u64());
        double mean = 0.0;
        for (const double v : out.values) mean += v;
        mean /= n;
        double var = 0.0;
        for (const double v : out.values) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / (n - 1));
        c.measured.emplace_back("mean", mean);
        c.measured.emplace_back("std", sd);
        c.passed = std::abs(mean - kMu) <= 0.02 * kMu && std::abs(sd - kStd) <= 0.05 * kStd;
        report.checks.push_back(c);
    }

    const auto z_x = standard_normal({1, 2, 2, 2}, rng);
    const auto z_d = standard_normal({1, 1, 2, 2}, rng);
    const auto text = random_text_embedding(1, 3, 4, rng.next_u64());
    const auto weights = random_attention_weights(3, 4, 5, 3, rng.next_u64());

    {
        VerificationCheck c{"attention_matches_reference", false, {}};
        const auto fast = cross_attention(z_x, z_d, text, weights);
        const auto slow = naive_attention(z_x, z_d, text, weights);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < slow.size(); ++i) max_diff = std::max(max_diff, std::abs(fast.output.values[i] - slow[i]));
        double max_row_error = 0.0;
        for (std::size_t r = 0; r < fast.attention.size() / 3; ++r) {
            const double sum = fast.attention[3 * r] + fast.attention[3 * r + 1] + fast.attention[3 * r + 2];
            max_row_error = std::max(max_row_error, std::abs(sum - 1.0));
        }
        c.measured.emplace_back("max_abs_diff", max_diff);
        c.measured.emplace_back("max_row_sum_error", max_row_error);
        c.passed = max_diff <= 1e-10 && max_row_error <= 1e-6;
        report.checks.push_back(c);
    }

    {
        VerificationCheck c{"finite_difference_gradients", true, {}};
        constexpr double kStep = 1e-5;
        constexpr double kTolerance = 1e-4;

        auto eps = standard_normal({1, 2, 3, 3}, rng);
        auto eps_hat = standard_normal(eps.shape, rng);
        const auto loss_grad = diffusion_loss_grad(eps, eps_hat);
        const auto loss_fd = numeric_gradient(eps_hat.values, [&] { return diffusion_loss(eps, eps_hat); }, kStep);
        const double loss_err = relative_error(loss_fd, loss_grad.values);
        c.measured.emplace_back("loss_wrt_eps_hat", loss_err);

        const auto upstream = standard_normal({1, 3, 2, 2}, rng);
        auto zx = z_x;
        auto zd = z_d;
        auto tx = text;
        auto w = weights;
        const auto objective = [&] {
            const auto y = cross_attention_fuse(zx, zd, tx, w);
            double s = 0.0;
            for (std::size_t i = 0; i < y.values.size(); ++i) s += y.values[i] * upstream.values[i];
            return s;
        };
        const auto analytic = cross_attention_backward(zx, zd, tx, w, upstream);
        const std::vector<std::pair<std::string, std::pair<std::vector<double>*, const std::vector<double>*>>> params = {
            {"attention_wrt_z_x", {&zx.values, &analytic.d_zx.values}},
            {"attention_wrt_z_d", {&zd.values, &analytic.d_zd.values}},
            {"attention_wrt_text", {&tx.values, &analytic.d_text}},
            {"attention_wrt_wq", {&w.wq.values, &analytic.d_weights.wq.values}},
            {"attention_wrt_wk", {&w.wk.values, &analytic.d_weights.wk.values}},
            {"attention_wrt_wv", {&w.wv.values, &analytic.d_weights.wv.values}},
            {"attention_wrt_wo", {&w.wo.values, &analytic.d_weights.wo.values}},
        };
        double worst = loss_err;
        for (const auto& [name, pair] : params) {
            const double err = relative_error(numeric_gradient(*pair.first, objective, kStep), *pair.second);
            c.measured.emplace_back(name, err);
            worst = std::max(worst, err);
        }
        c.measured.emplace_back("max_relative_error", worst);
        c.passed = worst <= kTolerance;
        report.checks.push_back(c);
    }
    return report;
}

}  // namespace rsbench::diffusion
