#pragma once

// Convolutional autoencoder with hand-written backpropagation.
//
// Encoder: conv(3x3, stride 2) -> ReLU -> conv(3x3, stride 2) -> ReLU ->
//          flatten -> fully connected (embedding, linear).
// Decoder: fully connected -> ReLU -> reshape -> deconv(3x3, stride 2) -> ReLU
//          -> deconv(3x3, stride 2) -> ReLU -> 1x1 conv -> sigmoid.
//
// Feature maps are stored as (channels, batch*side*side) column-major
// matrices, so the columns of one sample are contiguous and a flattened
// sample is a plain reshape of the same storage.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "reptex/rng.hpp"

namespace reptex::nn {

struct Architecture {
    int input_size = 32; // canonical side; must be a positive multiple of 4
    int channels = 3;
    int conv1 = 16;
    int conv2 = 32;
    int embed_dim = 64;
    int deconv1 = 32;
    int deconv2 = 16;

    int bottleneck_side() const noexcept { return input_size / 4; }
    int flat_size() const noexcept { return conv2 * bottleneck_side() * bottleneck_side(); }
    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Weight and bias placement inside the flat parameter vector.
struct LayerShape {
    const char* name;
    int rows;
    int cols;
    int fan_in;
    std::size_t weight_offset;
    std::size_t bias_offset; // bias length == rows unless noted by bias_size
    int bias_size;
};

/// Parameter storage with a fixed 64-byte alignment. Vectorised loops peel a
/// different number of leading elements for other alignments, which changes
/// float rounding between otherwise identical runs.
template <typename T>
using Params = std::vector<T, Eigen::aligned_allocator<T>>;

enum Layer : int { kConv1 = 0, kConv2, kEncFc, kDecFc, kDeconv1, kDeconv2, kHead, kLayerCount };

inline std::vector<LayerShape> layer_shapes(const Architecture& a) {
    const int s = a.bottleneck_side();
    struct Spec {
        const char* name;
        int rows, cols, fan_in, bias;
    };
    const Spec specs[kLayerCount] = {
        {"conv1", a.conv1, 9 * a.channels, 9 * a.channels, a.conv1},
        {"conv2", a.conv2, 9 * a.conv1, 9 * a.conv1, a.conv2},
        {"enc_fc", a.embed_dim, a.flat_size(), a.flat_size(), a.embed_dim},
        {"dec_fc", a.flat_size(), a.embed_dim, a.embed_dim, a.conv2 * s * s},
        // Transposed convolutions store W^T as (9*out, in); each output pixel
        // sees roughly a quarter of the 3x3 taps at stride 2.
        {"deconv1", 9 * a.deconv1, a.conv2, std::max(1, 9 * a.conv2 / 4), a.deconv1},
        {"deconv2", 9 * a.deconv2, a.deconv1, std::max(1, 9 * a.deconv1 / 4), a.deconv2},
        {"head", a.channels, a.deconv2, a.deconv2, a.channels},
    };
    std::vector<LayerShape> out;
    std::size_t offset = 0;
    for (const Spec& sp : specs) {
        LayerShape l{sp.name, sp.rows, sp.cols, sp.fan_in, offset, 0, sp.bias};
        offset += static_cast<std::size_t>(sp.rows) * sp.cols;
        l.bias_offset = offset;
        offset += sp.bias;
        out.push_back(l);
    }
    return out;
}

inline std::size_t parameter_count(const Architecture& a) {
    const auto shapes = layer_shapes(a);
    return shapes.back().bias_offset + shapes.back().bias_size;
}

/// Fan-in scaled uniform initialisation (He-uniform limit sqrt(6/fan_in)),
/// zero biases.
template <typename T>
Params<T> initial_parameters(const Architecture& a, std::uint64_t seed) {
    Params<T> p(parameter_count(a), T(0));
    CounterRng rng(seed, tag_of("autoencoder-init"));
    for (const LayerShape& l : layer_shapes(a)) {
        const double limit = std::sqrt(6.0 / l.fan_in);
        const std::size_t n = static_cast<std::size_t>(l.rows) * l.cols;
        for (std::size_t i = 0; i < n; ++i) p[l.weight_offset + i] = static_cast<T>(rng.uniform(-limit, limit));
    }
    return p;
}

/// im2col for a 3x3 / stride 2 / pad 1 window: `big` holds `c` channels of
/// `batch` square maps with side `big_side`; `cols` receives (9*c, batch*small²)
/// with row index tap*c + channel.
template <typename T>
void gather_patches(const T* big, int c, int big_side, int batch, T* cols) {
    const int small = big_side / 2;
    const std::size_t big_area = static_cast<std::size_t>(big_side) * big_side;
    const std::size_t col_rows = 9 * static_cast<std::size_t>(c);
    T* dst = cols;
    for (int b = 0; b < batch; ++b) {
        const T* src_b = big + b * big_area * c;
        for (int oy = 0; oy < small; ++oy) {
            for (int ox = 0; ox < small; ++ox, dst += col_rows) {
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = 2 * oy - 1 + ky;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = 2 * ox - 1 + kx;
                        T* out = dst + (ky * 3 + kx) * c;
                        if (iy < 0 || ix < 0 || iy >= big_side || ix >= big_side) {
                            std::fill(out, out + c, T(0));
                        } else {
                            const T* in = src_b + (static_cast<std::size_t>(iy) * big_side + ix) * c;
                            std::copy(in, in + c, out);
                        }
                    }
                }
            }
        }
    }
}

/// Adjoint of gather_patches: accumulates `cols` into `big` (which the caller
/// zeroes or pre-fills).
template <typename T>
void scatter_patches(const T* cols, int c, int big_side, int batch, T* big) {
    const int small = big_side / 2;
    const std::size_t big_area = static_cast<std::size_t>(big_side) * big_side;
    const std::size_t col_rows = 9 * static_cast<std::size_t>(c);
    const T* src = cols;
    for (int b = 0; b < batch; ++b) {
        T* dst_b = big + b * big_area * c;
        for (int oy = 0; oy < small; ++oy) {
            for (int ox = 0; ox < small; ++ox, src += col_rows) {
                for (int ky = 0; ky < 3; ++ky) {
                    const int iy = 2 * oy - 1 + ky;
                    if (iy < 0 || iy >= big_side) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int ix = 2 * ox - 1 + kx;
                        if (ix < 0 || ix >= big_side) continue;
                        const T* in = src + (ky * 3 + kx) * c;
                        T* out = dst_b + (static_cast<std::size_t>(iy) * big_side + ix) * c;
                        for (int ch = 0; ch < c; ++ch) out[ch] += in[ch];
                    }
                }
            }
        }
    }
}

template <typename T>
class ConvAutoencoder {
public:
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
    using MapMat = Eigen::Map<Mat>;
    using ConstMapMat = Eigen::Map<const Mat>;
    using ConstMapVec = Eigen::Map<const Vec>;

    explicit ConvAutoencoder(Architecture arch) : arch_(arch), shapes_(layer_shapes(arch)) {}

    const Architecture& architecture() const noexcept { return arch_; }
    const std::vector<LayerShape>& shapes() const noexcept { return shapes_; }

    /// Encoder pass. `input` is (channels, batch*side²); returns (embed_dim, batch).
    Mat encode(const Params<T>& params, const Mat& input, int batch) {
        forward_encoder(params, input, batch);
        return emb_;
    }

    /// Full pass; returns the reconstruction (channels, batch*side²).
    const Mat& reconstruct(const Params<T>& params, const Mat& input, int batch) {
        forward_encoder(params, input, batch);
        forward_decoder(params, batch);
        return out_;
    }

    /// Mean squared reconstruction error of the last reconstruct() against `target`.
    T loss(const Mat& target) const {
        return (out_ - target).squaredNorm() / static_cast<T>(target.size());
    }

    /// Gradient of loss(target) w.r.t. every parameter; requires a preceding
    /// reconstruct() on the same parameters.
    void backward(const Params<T>& params, const Mat& target, int batch, Params<T>& grad) {
        grad.assign(params.size(), T(0));
        const int S = arch_.input_size;
        const int h = S / 2;
        const int s = arch_.bottleneck_side();
        const T scale = T(2) / static_cast<T>(target.size());

        // Sigmoid head.
        Mat d_head = (scale * (out_ - target).array() * out_.array() * (T(1) - out_.array())).matrix();
        dense_grad(kHead, params, d_head, dec2_, grad);
        Mat d_dec2 = weights(kHead, params).transpose() * d_head;
        d_dec2.array() *= (dec2_.array() > T(0)).template cast<T>();

        // deconv2: dec1_ (deconv1 ch, B*h²) -> dec2_ (deconv2 ch, B*S²)
        Mat d_dec1 = deconv_backward(kDeconv2, params, d_dec2, dec1_, arch_.deconv2, S, batch, grad);
        d_dec1.array() *= (dec1_.array() > T(0)).template cast<T>();

        // deconv1: decfc_ (conv2 ch, B*s²) -> dec1_ (deconv1 ch, B*h²)
        Mat d_decfc = deconv_backward(kDeconv1, params, d_dec1, decfc_, arch_.deconv1, h, batch, grad);
        d_decfc.array() *= (decfc_.array() > T(0)).template cast<T>();

        // Decoder fc on the flattened view.
        ConstMapMat d_decfc_flat(d_decfc.data(), arch_.flat_size(), batch);
        dense_grad_flat(kDecFc, d_decfc_flat, emb_, grad);
        Mat d_emb = weights(kDecFc, params).transpose() * d_decfc_flat;

        // Encoder fc.
        ConstMapMat enc2_flat(enc2_.data(), arch_.flat_size(), batch);
        dense_grad_flat(kEncFc, d_emb, enc2_flat, grad);
        Mat d_enc2_flat = weights(kEncFc, params).transpose() * d_emb;
        Mat d_enc2 = MapMat(d_enc2_flat.data(), arch_.conv2, static_cast<Eigen::Index>(batch) * s * s);
        d_enc2.array() *= (enc2_.array() > T(0)).template cast<T>();

        Mat d_enc1 = conv_backward(kConv2, params, d_enc2, cols2_, arch_.conv1, h, batch, grad);
        d_enc1.array() *= (enc1_.array() > T(0)).template cast<T>();
        conv_backward(kConv1, params, d_enc1, cols1_, arch_.channels, S, batch, grad, /*need_input_grad=*/false);
    }

private:
    ConstMapMat weights(int layer, const Params<T>& p) const {
        const LayerShape& l = shapes_[layer];
        return ConstMapMat(p.data() + l.weight_offset, l.rows, l.cols);
    }
    ConstMapVec bias(int layer, const Params<T>& p) const {
        const LayerShape& l = shapes_[layer];
        return ConstMapVec(p.data() + l.bias_offset, l.bias_size);
    }
    MapMat weight_grad(int layer, Params<T>& g) const {
        const LayerShape& l = shapes_[layer];
        return MapMat(g.data() + l.weight_offset, l.rows, l.cols);
    }
    Eigen::Map<Vec> bias_grad(int layer, Params<T>& g) const {
        const LayerShape& l = shapes_[layer];
        return Eigen::Map<Vec>(g.data() + l.bias_offset, l.bias_size);
    }

    static void relu(Mat& m) { m = m.cwiseMax(T(0)); }

    void forward_encoder(const Params<T>& params, const Mat& input, int batch) {
        const int S = arch_.input_size;
        const int h = S / 2;
        const int s = arch_.bottleneck_side();

        cols1_.resize(9 * arch_.channels, static_cast<Eigen::Index>(batch) * h * h);
        gather_patches(input.data(), arch_.channels, S, batch, cols1_.data());
        enc1_.noalias() = weights(kConv1, params) * cols1_;
        enc1_.colwise() += bias(kConv1, params);
        relu(enc1_);

        cols2_.resize(9 * arch_.conv1, static_cast<Eigen::Index>(batch) * s * s);
        gather_patches(enc1_.data(), arch_.conv1, h, batch, cols2_.data());
        enc2_.noalias() = weights(kConv2, params) * cols2_;
        enc2_.colwise() += bias(kConv2, params);
        relu(enc2_);

        ConstMapMat flat(enc2_.data(), arch_.flat_size(), batch);
        emb_.noalias() = weights(kEncFc, params) * flat;
        emb_.colwise() += bias(kEncFc, params);
    }

    void forward_decoder(const Params<T>& params, int batch) {
        const int S = arch_.input_size;
        const int h = S / 2;
        const int s = arch_.bottleneck_side();

        Mat flat = weights(kDecFc, params) * emb_;
        flat.colwise() += bias(kDecFc, params);
        relu(flat);
        decfc_ = MapMat(flat.data(), arch_.conv2, static_cast<Eigen::Index>(batch) * s * s);

        dec1_ = deconv_forward(kDeconv1, params, decfc_, arch_.deconv1, h, batch);
        relu(dec1_);
        dec2_ = deconv_forward(kDeconv2, params, dec1_, arch_.deconv2, S, batch);
        relu(dec2_);

        Mat z = weights(kHead, params) * dec2_;
        z.colwise() += bias(kHead, params);
        out_ = (T(1) / (T(1) + (-z.array()).exp())).matrix();
    }

    Mat deconv_forward(int layer, const Params<T>& params, const Mat& in, int out_ch, int big_side, int batch) {
        Mat cols = weights(layer, params) * in; // (9*out, batch*small²)
        Mat out = Mat::Zero(out_ch, static_cast<Eigen::Index>(batch) * big_side * big_side);
        scatter_patches(cols.data(), out_ch, big_side, batch, out.data());
        out.colwise() += bias(layer, params);
        return out;
    }

    Mat deconv_backward(int layer, const Params<T>& params, const Mat& d_out, const Mat& in, int out_ch,
                        int big_side, int batch, Params<T>& grad) {
        const int small = big_side / 2;
        Mat d_cols(9 * out_ch, static_cast<Eigen::Index>(batch) * small * small);
        gather_patches(d_out.data(), out_ch, big_side, batch, d_cols.data());
        weight_grad(layer, grad).noalias() += d_cols * in.transpose();
        bias_grad(layer, grad) += d_out.rowwise().sum();
        return weights(layer, params).transpose() * d_cols;
    }

    Mat conv_backward(int layer, const Params<T>& params, const Mat& d_out, const Mat& cols, int in_ch,
                      int big_side, int batch, Params<T>& grad, bool need_input_grad = true) {
        weight_grad(layer, grad).noalias() += d_out * cols.transpose();
        bias_grad(layer, grad) += d_out.rowwise().sum();
        if (!need_input_grad) return Mat();
        Mat d_cols = weights(layer, params).transpose() * d_out;
        Mat d_in = Mat::Zero(in_ch, static_cast<Eigen::Index>(batch) * big_side * big_side);
        scatter_patches(d_cols.data(), in_ch, big_side, batch, d_in.data());
        return d_in;
    }

    void dense_grad(int layer, const Params<T>&, const Mat& d_out, const Mat& in, Params<T>& grad) {
        weight_grad(layer, grad).noalias() += d_out * in.transpose();
        bias_grad(layer, grad) += d_out.rowwise().sum();
    }

    template <typename DOut, typename In>
    void dense_grad_flat(int layer, const DOut& d_out, const In& in, Params<T>& grad) {
        weight_grad(layer, grad).noalias() += d_out * in.transpose();
        bias_grad(layer, grad) += d_out.rowwise().sum();
    }

    Architecture arch_;
    std::vector<LayerShape> shapes_;
    Mat cols1_, enc1_, cols2_, enc2_, emb_, decfc_, dec1_, dec2_, out_;
};

/// Adam with bias correction.
template <typename T>
class Adam {
public:
    Adam(std::size_t n, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(eps), m_(n, T(0)), v_(n, T(0)) {}

    void step(Params<T>& params, const Params<T>& grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, t_);
        const double c2 = 1.0 - std::pow(b2_, t_);
        const T step = static_cast<T>(lr_ * std::sqrt(c2) / c1);
        const T b1 = static_cast<T>(b1_), b2 = static_cast<T>(b2_);
        const T eps = static_cast<T>(eps_ * std::sqrt(c2));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = b1 * m_[i] + (T(1) - b1) * grad[i];
            v_[i] = b2 * v_[i] + (T(1) - b2) * grad[i] * grad[i];
            params[i] -= step * m_[i] / (std::sqrt(v_[i]) + eps);
        }
    }

private:
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    Params<T> m_, v_;
};

} // namespace reptex::nn
