#pragma once

// Fully connected decoder f(z) mapping oscillator features to observations,
// with reverse-mode gradients for parameters and inputs and a forward-mode
// directional derivative for frequency refinement.

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spectral/errors.hpp"
#include "spectral/oscillator.hpp"
#include "spectral/random.hpp"

namespace spectral {

enum class Activation { tanh, relu, identity };

[[nodiscard]] inline std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::identity: return "identity";
    }
    return "identity";
}

[[nodiscard]] inline Activation activation_from_string(std::string_view s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    if (s == "identity" || s == "linear") return Activation::identity;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

struct Layer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
    Activation activation = Activation::identity;
};

struct DecoderParams {
    std::vector<Layer> layers;

    [[nodiscard]] Index input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
    [[nodiscard]] Index output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

    [[nodiscard]] Index parameter_count() const {
        Index count = 0;
        for (const auto& l : layers) count += l.weight.size() + l.bias.size();
        return count;
    }

    void validate() const {
        if (layers.empty()) throw DimensionError("decoder has no layers");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& l = layers[k];
            if (l.bias.size() != l.weight.rows()) throw DimensionError("layer bias length differs from its output dimension");
            if (k > 0 && layers[k - 1].weight.rows() != l.weight.cols())
                throw DimensionError("decoder layer dimensions do not chain");
        }
        if (layers.back().activation != Activation::identity) throw ConfigError("decoder output layer must be identity");
    }

    /// Single identity-activated layer: f(z) = W z + b.
    [[nodiscard]] bool is_affine() const { return layers.size() == 1; }
};

namespace detail {

inline void activate(Activation a, Eigen::MatrixXd& m) {
    switch (a) {
        case Activation::tanh: m = m.array().tanh().matrix(); break;
        case Activation::relu: m = m.cwiseMax(0.0); break;
        case Activation::identity: break;
    }
}

/// Activation derivative expressed through the pre-activation values.
inline Eigen::MatrixXd activation_slope(Activation a, const Eigen::MatrixXd& pre, const Eigen::MatrixXd& post) {
    switch (a) {
        case Activation::tanh: return (1.0 - post.array().square()).matrix();
        case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
        case Activation::identity: break;
    }
    return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
}

struct ForwardTrace {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activations
    Eigen::MatrixXd output;
};

inline ForwardTrace forward_trace(const DecoderParams& params, const Eigen::MatrixXd& z) {
    params.validate();
    if (z.rows() != params.input_dim()) throw DimensionError("feature dimension does not match decoder input");
    ForwardTrace tr;
    Eigen::MatrixXd h = z;
    for (const auto& l : params.layers) {
        tr.inputs.push_back(h);
        Eigen::MatrixXd a = l.weight * h;
        a.colwise() += l.bias;
        tr.pre.push_back(a);
        activate(l.activation, a);
        h = std::move(a);
    }
    tr.output = std::move(h);
    return tr;
}

}  // namespace detail

/// Glorot-uniform weights U(-r, r), r = sqrt(6 / (fan_in + fan_out)); zero biases.
[[nodiscard]] inline DecoderParams make_decoder(Index input_dim, const std::vector<Index>& hidden, Index output_dim,
                                                Activation hidden_activation, Rng& rng) {
    if (input_dim < 1 || output_dim < 1) throw ConfigError("decoder dimensions must be positive");
    DecoderParams p;
    Index in = input_dim;
    auto add = [&](Index out, Activation act) {
        if (out < 1) throw ConfigError("hidden width must be positive");
        Layer l;
        const double r = std::sqrt(6.0 / static_cast<double>(in + out));
        l.weight.resize(out, in);
        for (Index c = 0; c < in; ++c)
            for (Index o = 0; o < out; ++o) l.weight(o, c) = rng.uniform(-r, r);
        l.bias = Eigen::VectorXd::Zero(out);
        l.activation = act;
        p.layers.push_back(std::move(l));
        in = out;
    };
    for (Index w : hidden) add(w, hidden_activation);
    add(output_dim, Activation::identity);
    return p;
}

/// f(W z + b) = z: a single identity layer of the given size.
[[nodiscard]] inline DecoderParams identity_decoder(Index dim) {
    DecoderParams p;
    p.layers.push_back(Layer{Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim), Activation::identity});
    return p;
}

/// Columnwise decoder output for a (2m+1) x T feature matrix.
[[nodiscard]] inline Eigen::MatrixXd forward(const DecoderParams& params, const Eigen::MatrixXd& features) {
    return detail::forward_trace(params, features).output;
}

[[nodiscard]] inline Eigen::VectorXd forward(const DecoderParams& params, const Eigen::VectorXd& feature) {
    return forward(params, Eigen::MatrixXd(feature)).col(0);
}

struct DecoderGradients {
    std::vector<Eigen::MatrixXd> weight;
    std::vector<Eigen::VectorXd> bias;
    Eigen::MatrixXd features;  // dL/dz, same shape as the input features
};

/// Reverse-mode gradients of a scalar loss whose gradient with respect to the
/// decoder output is `upstream` (n x T).
[[nodiscard]] inline DecoderGradients backward(const DecoderParams& params, const Eigen::MatrixXd& features,
                                               const Eigen::MatrixXd& upstream) {
    const auto tr = detail::forward_trace(params, features);
    if (upstream.rows() != tr.output.rows() || upstream.cols() != tr.output.cols())
        throw DimensionError("upstream gradient shape does not match decoder output");
    const std::size_t L = params.layers.size();
    DecoderGradients g;
    g.weight.resize(L);
    g.bias.resize(L);
    Eigen::MatrixXd delta = upstream;  // dL/d(post-activation) of the current layer
    for (std::size_t k = L; k-- > 0;) {
        const auto& layer = params.layers[k];
        if (layer.activation != Activation::identity) {
            Eigen::MatrixXd post = tr.pre[k];
            detail::activate(layer.activation, post);
            delta = delta.cwiseProduct(detail::activation_slope(layer.activation, tr.pre[k], post));
        }
        g.weight[k] = delta * tr.inputs[k].transpose();
        g.bias[k] = delta.rowwise().sum();
        delta = layer.weight.transpose() * delta;
    }
    g.features = std::move(delta);
    return g;
}

/// Forward-mode derivative: d/de f(z + e dz) at e = 0, columnwise.
[[nodiscard]] inline Eigen::MatrixXd jvp(const DecoderParams& params, const Eigen::MatrixXd& features,
                                         const Eigen::MatrixXd& direction) {
    if (direction.rows() != features.rows() || direction.cols() != features.cols())
        throw DimensionError("direction shape does not match features");
    const auto tr = detail::forward_trace(params, features);
    Eigen::MatrixXd d = direction;
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        const auto& layer = params.layers[k];
        d = layer.weight * d;
        if (layer.activation != Activation::identity) {
            Eigen::MatrixXd post = tr.pre[k];
            detail::activate(layer.activation, post);
            d = d.cwiseProduct(detail::activation_slope(layer.activation, tr.pre[k], post));
        }
    }
    return d;
}

/// p <- p - rate * g for every weight and bias.
[[nodiscard]] inline DecoderParams gd_step(const DecoderParams& params, const DecoderGradients& grads, double rate) {
    if (grads.weight.size() != params.layers.size() || grads.bias.size() != params.layers.size())
        throw DimensionError("gradient layer count differs from decoder");
    DecoderParams out = params;
    for (std::size_t k = 0; k < out.layers.size(); ++k) {
        if (grads.weight[k].rows() != out.layers[k].weight.rows() || grads.weight[k].cols() != out.layers[k].weight.cols() ||
            grads.bias[k].size() != out.layers[k].bias.size())
            throw DimensionError("gradient shape differs from decoder layer");
        out.layers[k].weight -= rate * grads.weight[k];
        out.layers[k].bias -= rate * grads.bias[k];
    }
    return out;
}

/// Squared-error loss sum ||x - f(z)||^2 and its gradients.
struct SquaredLoss {
    double value = 0.0;
    DecoderGradients grads;
};

[[nodiscard]] inline SquaredLoss squared_loss(const DecoderParams& params, const Eigen::MatrixXd& features,
                                              const Eigen::MatrixXd& target) {
    const Eigen::MatrixXd r = forward(params, features) - target;
    SquaredLoss out;
    out.value = r.squaredNorm();
    out.grads = backward(params, features, 2.0 * r);
    return out;
}

/// Adam optimizer state for one decoder.
class Adam {
public:
    explicit Adam(const DecoderParams& shape, double rate = 1e-2, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : rate_(rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& l : shape.layers) {
            mw_.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
            vw_.push_back(mw_.back());
            mb_.push_back(Eigen::VectorXd::Zero(l.bias.size()));
            vb_.push_back(mb_.back());
        }
    }

    void step(DecoderParams& params, const DecoderGradients& g) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t k = 0; k < params.layers.size(); ++k) {
            mw_[k] = beta1_ * mw_[k] + (1.0 - beta1_) * g.weight[k];
            vw_[k] = beta2_ * vw_[k] + (1.0 - beta2_) * g.weight[k].cwiseAbs2();
            mb_[k] = beta1_ * mb_[k] + (1.0 - beta1_) * g.bias[k];
            vb_[k] = beta2_ * vb_[k] + (1.0 - beta2_) * g.bias[k].cwiseAbs2();
            params.layers[k].weight.array() -=
                rate_ * (mw_[k].array() / c1) / ((vw_[k].array() / c2).sqrt() + eps_);
            params.layers[k].bias.array() -= rate_ * (mb_[k].array() / c1) / ((vb_[k].array() / c2).sqrt() + eps_);
        }
    }

    void set_rate(double rate) { rate_ = rate; }

private:
    double rate_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Eigen::MatrixXd> mw_, vw_;
    std::vector<Eigen::VectorXd> mb_, vb_;
};

}  // namespace spectral
