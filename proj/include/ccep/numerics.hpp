#pragma once

// Dense multilayer-perceptron numerics: parameter storage, batched
// forward/backward passes, Adam, soft target updates, finite-difference
// gradient checking and a bit-exact binary snapshot format.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccep {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class OutputHead : std::uint8_t { linear = 0, bounded = 1 };

struct NetConfig {
    std::vector<std::size_t> layer_sizes;  // input, hidden..., output
    OutputHead head = OutputHead::linear;
    double scale = 1.0;  // bounded head: scale * tanh(z)

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t num_layers() const { return layer_sizes.size() - 1; }

    void validate() const {
        if (layer_sizes.size() < 2) throw std::invalid_argument("NetConfig: need at least 2 layer sizes");
        for (auto s : layer_sizes)
            if (s == 0) throw std::invalid_argument("NetConfig: layer sizes must be >= 1");
        if (head == OutputHead::bounded && !(scale > 0.0))
            throw std::invalid_argument("NetConfig: bounded head needs scale > 0");
    }

    bool operator==(const NetConfig&) const = default;
};

struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // out
};

struct NetworkParams {
    NetConfig config;
    std::vector<Layer> layers;

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }
};

// Same shape as the NetworkParams it was produced for.
struct Gradients {
    std::vector<Layer> layers;
};

struct AdamState {
    std::vector<Layer> first_moment;
    std::vector<Layer> second_moment;
    std::int64_t step = 0;

    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;
};

// Activations recorded by forward() for use in backward().
struct ForwardCache {
    std::vector<Matrix> inputs;  // input to each layer (batch x in)
    std::vector<Matrix> pre;     // pre-activation of each layer (batch x out)
    Matrix output;               // batch x out
};

struct BackwardResult {
    Gradients grads;
    Matrix input_grad;  // batch x in
};

namespace detail {

inline void check_shapes(const std::vector<Layer>& a, const std::vector<Layer>& b, const char* what) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": layer count mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].weight.rows() != b[i].weight.rows() || a[i].weight.cols() != b[i].weight.cols() ||
            a[i].bias.size() != b[i].bias.size())
            throw std::invalid_argument(std::string(what) + ": shape mismatch at layer " + std::to_string(i));
    }
}

inline std::vector<Layer> zeros_like(const std::vector<Layer>& layers) {
    std::vector<Layer> out;
    out.reserve(layers.size());
    for (const auto& l : layers)
        out.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    return out;
}

// Visits every scalar parameter in canonical order: per layer, weights
// row-major, then bias.
template <typename Layers, typename F>
void for_each_scalar(Layers& layers, F&& f) {
    for (auto& l : layers) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) f(l.weight(r, c));
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) f(l.bias(r));
    }
}

}  // namespace detail

inline NetworkParams init_params(const NetConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    NetworkParams p;
    p.config = config;
    const std::size_t n = config.num_layers();
    p.layers.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto in = static_cast<Eigen::Index>(config.layer_sizes[i]);
        const auto out = static_cast<Eigen::Index>(config.layer_sizes[i + 1]);
        const double bound = (i + 1 == n) ? 3e-3 : 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Layer l{Matrix(out, in), Vector(out)};
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = dist(rng);
        for (Eigen::Index r = 0; r < out; ++r) l.bias(r) = dist(rng);
        p.layers.push_back(std::move(l));
    }
    return p;
}

inline Matrix apply_output_head(const NetConfig& config, const Matrix& pre) {
    if (config.head == OutputHead::linear) return pre;
    return config.scale * pre.array().tanh().matrix();
}

// Batched forward pass. Each row of `input` is one sample.
inline Matrix forward(const NetworkParams& params, const Matrix& input, ForwardCache* cache = nullptr) {
    if (static_cast<std::size_t>(input.cols()) != params.config.input_size())
        throw std::invalid_argument("forward: input has " + std::to_string(input.cols()) + " columns, network expects " +
                                    std::to_string(params.config.input_size()));
    const std::size_t n = params.layers.size();
    if (cache) {
        cache->inputs.resize(n);
        cache->pre.resize(n);
    }
    Matrix x = input;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& l = params.layers[i];
        Matrix z(x.rows(), l.weight.rows());
        z.noalias() = x * l.weight.transpose();
        z.rowwise() += l.bias.transpose();
        if (cache) cache->inputs[i] = x;
        if (i + 1 < n) {
            x = z.cwiseMax(0.0);
        } else {
            x = apply_output_head(params.config, z);
        }
        if (cache) cache->pre[i] = std::move(z);
    }
    if (cache) cache->output = x;
    return x;
}

inline Vector forward(const NetworkParams& params, std::span<const double> input, ForwardCache* cache = nullptr) {
    Matrix row = Eigen::Map<const Matrix>(input.data(), 1, static_cast<Eigen::Index>(input.size()));
    Matrix out = forward(params, row, cache);
    return out.row(0).transpose();
}

namespace detail {

// Gradient w.r.t. the final pre-activation given the gradient w.r.t. output.
inline Matrix head_backward(const NetConfig& config, const ForwardCache& cache, const Matrix& output_grad) {
    if (config.head == OutputHead::linear) return output_grad;
    const auto& z = cache.pre.back();
    Matrix t = z.array().tanh().matrix();
    return (output_grad.array() * (config.scale * (1.0 - t.array().square()))).matrix();
}

template <bool WithParams>
inline Matrix backward_impl(const NetworkParams& params, const ForwardCache& cache, const Matrix& output_grad,
                            Gradients* grads) {
    const std::size_t n = params.layers.size();
    if (cache.pre.size() != n) throw std::invalid_argument("backward: cache does not match network");
    if (output_grad.rows() != cache.output.rows() || output_grad.cols() != cache.output.cols())
        throw std::invalid_argument("backward: output_grad shape mismatch");
    if constexpr (WithParams) grads->layers.resize(n);
    Matrix delta = head_backward(params.config, cache, output_grad);
    for (std::size_t k = n; k-- > 0;) {
        const auto& l = params.layers[k];
        if (k + 1 < n) delta = (cache.pre[k].array() > 0.0).select(delta, 0.0);
        if constexpr (WithParams) {
            auto& g = grads->layers[k];
            g.weight.resize(l.weight.rows(), l.weight.cols());
            g.weight.noalias() = delta.transpose() * cache.inputs[k];
            g.bias = delta.colwise().sum().transpose();
        }
        Matrix prev(delta.rows(), l.weight.cols());
        prev.noalias() = delta * l.weight;
        delta = std::move(prev);
    }
    return delta;
}

}  // namespace detail

// Exact gradient of sum(output .* output_grad) w.r.t. every parameter and the input.
inline BackwardResult backward(const NetworkParams& params, const ForwardCache& cache, const Matrix& output_grad) {
    BackwardResult r;
    r.input_grad = detail::backward_impl<true>(params, cache, output_grad, &r.grads);
    return r;
}

inline BackwardResult backward(const NetworkParams& params, const ForwardCache& cache, std::span<const double> output_grad) {
    Matrix g = Eigen::Map<const Matrix>(output_grad.data(), 1, static_cast<Eigen::Index>(output_grad.size()));
    return backward(params, cache, g);
}

// Input gradient only; skips the weight-gradient products.
inline Matrix input_gradient(const NetworkParams& params, const ForwardCache& cache, const Matrix& output_grad) {
    return detail::backward_impl<false>(params, cache, output_grad, nullptr);
}

inline AdamState make_adam_state(const NetworkParams& params) {
    return {detail::zeros_like(params.layers), detail::zeros_like(params.layers), 0};
}

// One bias-corrected Adam descent step.
inline void adam_step(NetworkParams& params, const Gradients& grads, AdamState& state, double lr) {
    detail::check_shapes(params.layers, grads.layers, "adam_step");
    if (state.first_moment.empty()) state = make_adam_state(params);
    detail::check_shapes(params.layers, state.first_moment, "adam_step");
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(AdamState::beta1, t);
    const double c2 = 1.0 - std::pow(AdamState::beta2, t);
    constexpr double b1 = AdamState::beta1, b2 = AdamState::beta2, eps = AdamState::epsilon;
    auto update = [&](auto&& p, const auto& g, auto&& m, auto&& v) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.square();
        p -= lr * (m / c1) / ((v / c2).sqrt() + eps);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        auto& l = params.layers[i];
        const auto& g = grads.layers[i];
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        update(l.weight.array(), g.weight.array(), m.weight.array(), v.weight.array());
        update(l.bias.array(), g.bias.array(), m.bias.array(), v.bias.array());
    }
}

// target <- tau * source + (1 - tau) * target
inline void soft_update(NetworkParams& target, const NetworkParams& source, double tau) {
    detail::check_shapes(target.layers, source.layers, "soft_update");
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must be in [0, 1]");
    for (std::size_t i = 0; i < target.layers.size(); ++i) {
        auto& t = target.layers[i];
        const auto& s = source.layers[i];
        t.weight = tau * s.weight + (1.0 - tau) * t.weight;
        t.bias = tau * s.bias + (1.0 - tau) * t.bias;
    }
}

inline bool bit_equal(const NetworkParams& a, const NetworkParams& b) {
    if (!(a.config == b.config) || a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const auto& x = a.layers[i];
        const auto& y = b.layers[i];
        if (x.weight.rows() != y.weight.rows() || x.weight.cols() != y.weight.cols() || x.bias.size() != y.bias.size())
            return false;
        if (std::memcmp(x.weight.data(), y.weight.data(), sizeof(double) * x.weight.size()) != 0) return false;
        if (std::memcmp(x.bias.data(), y.bias.data(), sizeof(double) * x.bias.size()) != 0) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct GradCheckOptions {
    double step = 1e-5;
    double kink_margin = 1e-6;
    // Relative error uses max(|analytic|, |numeric|, floor) as denominator.
    double denominator_floor = 1e-3;
};

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_at_kink = 0;
};

namespace detail {

inline std::vector<std::uint8_t> activation_pattern(const ForwardCache& cache) {
    std::vector<std::uint8_t> mask;
    for (std::size_t k = 0; k + 1 < cache.pre.size(); ++k)
        for (Eigen::Index i = 0; i < cache.pre[k].size(); ++i) mask.push_back(cache.pre[k].data()[i] > 0.0);
    return mask;
}

inline double min_kink_distance(const ForwardCache& cache) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < cache.pre.size(); ++k) d = std::min(d, cache.pre[k].cwiseAbs().minCoeff());
    return d;
}

}  // namespace detail

// Compares backward() with central finite differences of sum(output .* output_grad)
// over every parameter of `params` at `input`. Parameters whose perturbation
// flips a rectifier are skipped.
inline GradCheckReport grad_check(NetworkParams params, const Matrix& input, const Matrix& output_grad,
                                  const GradCheckOptions& opt = {}) {
    ForwardCache cache;
    forward(params, input, &cache);
    const auto base_mask = detail::activation_pattern(cache);
    const auto analytic = backward(params, cache, output_grad).grads;

    auto objective = [&](std::vector<std::uint8_t>* mask) {
        ForwardCache c;
        Matrix out = forward(params, input, &c);
        if (mask) *mask = detail::activation_pattern(c);
        return (out.array() * output_grad.array()).sum();
    };

    std::vector<double*> slots;
    detail::for_each_scalar(params.layers, [&](double& x) { slots.push_back(&x); });
    std::vector<double> grad_flat;
    detail::for_each_scalar(analytic.layers, [&](const double& x) { grad_flat.push_back(x); });

    GradCheckReport report;
    std::vector<std::uint8_t> mask_plus, mask_minus;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const double saved = *slots[i];
        *slots[i] = saved + opt.step;
        const double f_plus = objective(&mask_plus);
        *slots[i] = saved - opt.step;
        const double f_minus = objective(&mask_minus);
        *slots[i] = saved;
        if (mask_plus != base_mask || mask_minus != base_mask) {
            ++report.skipped_at_kink;
            continue;
        }
        const double numeric = (f_plus - f_minus) / (2.0 * opt.step);
        const double a = grad_flat[i];
        const double denom = std::max({std::abs(a), std::abs(numeric), opt.denominator_floor});
        report.max_relative_error = std::max(report.max_relative_error, std::abs(a - numeric) / denom);
        ++report.checked;
    }
    return report;
}

// Random network (uniform [-1, 1] parameters), random input kept away from
// rectifier kinks and a random output weighting, all drawn from `seed`.
inline GradCheckReport grad_check(const NetConfig& config, std::uint64_t seed, const GradCheckOptions& opt = {}) {
    config.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    NetworkParams params = init_params(config, seed);
    detail::for_each_scalar(params.layers, [&](double& x) { x = unit(rng); });

    const auto in = static_cast<Eigen::Index>(config.input_size());
    const auto out = static_cast<Eigen::Index>(config.output_size());
    Matrix input(1, in);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        for (Eigen::Index c = 0; c < in; ++c) input(0, c) = unit(rng);
        ForwardCache cache;
        forward(params, input, &cache);
        if (detail::min_kink_distance(cache) >= opt.kink_margin) break;
    }
    Matrix output_grad(1, out);
    for (Eigen::Index c = 0; c < out; ++c) output_grad(0, c) = unit(rng);
    return grad_check(std::move(params), input, output_grad, opt);
}

struct GradCheckSuiteReport {
    std::size_t nets = 0;
    std::size_t checked = 0;
    std::size_t skipped_at_kink = 0;
    double max_relative_error = 0.0;
};

// Random small networks: 1 to 3 weight layers of 1 to 16 units, with
// linear or bounded heads.
inline GradCheckSuiteReport grad_check_random_nets(std::size_t nets, std::uint64_t seed, const GradCheckOptions& opt = {}) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> depth(1, 3), width(1, 16);
    std::uniform_real_distribution<double> scale(0.5, 3.0);
    GradCheckSuiteReport total;
    for (std::size_t n = 0; n < nets; ++n) {
        NetConfig c;
        const std::size_t layers = depth(rng);
        for (std::size_t i = 0; i <= layers; ++i) c.layer_sizes.push_back(width(rng));
        if (rng() % 2) {
            c.head = OutputHead::bounded;
            c.scale = scale(rng);
        }
        const auto r = grad_check(c, rng(), opt);
        ++total.nets;
        total.checked += r.checked;
        total.skipped_at_kink += r.skipped_at_kink;
        total.max_relative_error = std::max(total.max_relative_error, r.max_relative_error);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Snapshot format (little-endian host order):
//   8 bytes  magic "CCEPNET1"
//   u8       head (0 linear, 1 bounded)
//   f64      scale
//   u64      number of layer sizes L
//   u64 x L  layer sizes
//   then per layer: weight (out x in, row-major f64), bias (out f64)

inline constexpr char snapshot_magic[8] = {'C', 'C', 'E', 'P', 'N', 'E', 'T', '1'};

inline void save_params(std::ostream& os, const NetworkParams& p) {
    auto put = [&](const void* data, std::size_t n) { os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); };
    put(snapshot_magic, sizeof snapshot_magic);
    const auto head = static_cast<std::uint8_t>(p.config.head);
    put(&head, 1);
    put(&p.config.scale, sizeof(double));
    const std::uint64_t count = p.config.layer_sizes.size();
    put(&count, sizeof count);
    for (auto s : p.config.layer_sizes) {
        const std::uint64_t v = s;
        put(&v, sizeof v);
    }
    for (const auto& l : p.layers) {
        put(l.weight.data(), sizeof(double) * static_cast<std::size_t>(l.weight.size()));
        put(l.bias.data(), sizeof(double) * static_cast<std::size_t>(l.bias.size()));
    }
    if (!os) throw std::runtime_error("save_params: write failed");
}

inline NetworkParams load_params(std::istream& is) {
    auto get = [&](void* data, std::size_t n) {
        is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (!is) throw std::runtime_error("load_params: truncated snapshot");
    };
    char magic[8];
    get(magic, sizeof magic);
    if (std::memcmp(magic, snapshot_magic, sizeof magic) != 0) throw std::runtime_error("load_params: bad magic");
    NetConfig config;
    std::uint8_t head = 0;
    get(&head, 1);
    if (head > 1) throw std::runtime_error("load_params: unknown output head");
    config.head = static_cast<OutputHead>(head);
    get(&config.scale, sizeof(double));
    std::uint64_t count = 0;
    get(&count, sizeof count);
    if (count < 2 || count > 1024) throw std::runtime_error("load_params: implausible layer count");
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t v = 0;
        get(&v, sizeof v);
        config.layer_sizes.push_back(static_cast<std::size_t>(v));
    }
    config.validate();
    NetworkParams p;
    p.config = config;
    for (std::size_t i = 0; i + 1 < config.layer_sizes.size(); ++i) {
        const auto in = static_cast<Eigen::Index>(config.layer_sizes[i]);
        const auto out = static_cast<Eigen::Index>(config.layer_sizes[i + 1]);
        Layer l{Matrix(out, in), Vector(out)};
        get(l.weight.data(), sizeof(double) * static_cast<std::size_t>(l.weight.size()));
        get(l.bias.data(), sizeof(double) * static_cast<std::size_t>(l.bias.size()));
        p.layers.push_back(std::move(l));
    }
    return p;
}

inline void save_params(const std::string& path, const NetworkParams& p) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_params: cannot open " + path);
    save_params(os, p);
}

inline NetworkParams load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_params: cannot open " + path);
    return load_params(is);
}

}  // namespace ccep
