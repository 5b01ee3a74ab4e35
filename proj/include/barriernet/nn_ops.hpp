#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "barriernet/errors.hpp"
#include "barriernet/tensor.hpp"

// Layer primitives for the 1D residual classifier. All loops write each output
// element from exactly one thread with a fixed-order inner reduction, so
// results are bitwise deterministic regardless of thread count.

namespace barriernet {

template <typename T>
struct ConvLayer {
    int in_ch = 0;
    int out_ch = 0;
    int kernel = 1;            // odd; same-padding of (kernel-1)/2
    std::vector<T> w;          // [out_ch][in_ch][kernel]
    std::vector<T> b;          // [out_ch]

    T weight(int o, int i, int q) const { return w[(std::size_t(o) * in_ch + i) * kernel + q]; }
};

template <typename T>
struct BatchNormLayer {
    int ch = 0;
    std::vector<T> gamma;
    std::vector<T> beta;
    std::vector<T> running_mean;
    std::vector<T> running_var;
    double eps = 1e-5;
    double momentum = 0.1;
};

template <typename T>
struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<T> w;  // [out][in]
    std::vector<T> b;  // [out]
};

// out[b][o][t] = bias[o] + sum_i sum_q w[o][i][q] * in[b][i][t + q - pad]
// Zero padding keeps the output length equal to the input length.
template <typename T>
void conv1d_forward(const Tensor<T>& in, const ConvLayer<T>& layer, Tensor<T>& out) {
    if (in.c != layer.in_ch)
        throw ShapeError("conv1d: input has " + std::to_string(in.c) + " channels, layer expects " +
                         std::to_string(layer.in_ch));
    out = Tensor<T>(in.n, layer.out_ch, in.len);
    const int pad = (layer.kernel - 1) / 2;
    const int len = in.len;
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < in.n; ++b) {
        for (int o = 0; o < layer.out_ch; ++o) {
            T* dst = out.channel(b, o);
            for (int t = 0; t < len; ++t) dst[t] = layer.b[o];
            for (int i = 0; i < layer.in_ch; ++i) {
                const T* src = in.channel(b, i);
                const T* wrow = layer.w.data() + (std::size_t(o) * layer.in_ch + i) * layer.kernel;
                for (int q = 0; q < layer.kernel; ++q) {
                    const T wq = wrow[q];
                    const int shift = q - pad;
                    const int t0 = shift < 0 ? -shift : 0;
                    const int t1 = shift > 0 ? len - shift : len;
                    for (int t = t0; t < t1; ++t) dst[t] += wq * src[t + shift];
                }
            }
        }
    }
}

// Gradients w.r.t. input, weights and bias given d(loss)/d(out).
template <typename T>
void conv1d_backward(const Tensor<T>& in, const ConvLayer<T>& layer, const Tensor<T>& dout,
                     Tensor<T>& din, std::vector<T>& dw, std::vector<T>& db) {
    const int pad = (layer.kernel - 1) / 2;
    const int len = in.len;
    din = Tensor<T>(in.n, in.c, len);
    dw.assign(layer.w.size(), T(0));
    db.assign(layer.b.size(), T(0));

#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < in.n; ++b) {
        for (int i = 0; i < layer.in_ch; ++i) {
            T* dst = din.channel(b, i);
            for (int o = 0; o < layer.out_ch; ++o) {
                const T* g = dout.channel(b, o);
                const T* wrow = layer.w.data() + (std::size_t(o) * layer.in_ch + i) * layer.kernel;
                for (int q = 0; q < layer.kernel; ++q) {
                    const T wq = wrow[q];
                    const int shift = q - pad;
                    // dst[t] accumulates g[t - shift] * wq over valid t.
                    const int t0 = shift > 0 ? shift : 0;
                    const int t1 = shift < 0 ? len + shift : len;
                    for (int t = t0; t < t1; ++t) dst[t] += wq * g[t - shift];
                }
            }
        }
    }

#pragma omp parallel for schedule(static)
    for (int o = 0; o < layer.out_ch; ++o) {
        T bias_sum = 0;
        for (int b = 0; b < in.n; ++b) {
            const T* g = dout.channel(b, o);
            for (int t = 0; t < len; ++t) bias_sum += g[t];
            for (int i = 0; i < layer.in_ch; ++i) {
                const T* src = in.channel(b, i);
                T* wrow = dw.data() + (std::size_t(o) * layer.in_ch + i) * layer.kernel;
                for (int q = 0; q < layer.kernel; ++q) {
                    const int shift = q - pad;
                    const int t0 = shift < 0 ? -shift : 0;
                    const int t1 = shift > 0 ? len - shift : len;
                    T acc = 0;
                    for (int t = t0; t < t1; ++t) acc += g[t] * src[t + shift];
                    wrow[q] += acc;
                }
            }
        }
        db[o] = bias_sum;
    }
}

// Per-channel statistics captured by a train-mode batch-norm pass.
template <typename T>
struct BnStats {
    std::vector<T> mean;
    std::vector<T> var;  // biased (divide by count)
};

// Train mode: normalize by batch statistics over (batch, length) per channel.
// xhat is kept for the backward pass.
template <typename T>
void batchnorm_forward_train(const Tensor<T>& in, const BatchNormLayer<T>& bn, Tensor<T>& out,
                             Tensor<T>& xhat, BnStats<T>& stats) {
    out = Tensor<T>(in.n, in.c, in.len);
    xhat = Tensor<T>(in.n, in.c, in.len);
    stats.mean.assign(std::size_t(in.c), T(0));
    stats.var.assign(std::size_t(in.c), T(0));
    const T count = T(std::size_t(in.n) * in.len);
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < in.c; ++ch) {
        T sum = 0;
        for (int b = 0; b < in.n; ++b) {
            const T* src = in.channel(b, ch);
            for (int t = 0; t < in.len; ++t) sum += src[t];
        }
        const T mean = sum / count;
        T sq = 0;
        for (int b = 0; b < in.n; ++b) {
            const T* src = in.channel(b, ch);
            for (int t = 0; t < in.len; ++t) {
                const T d = src[t] - mean;
                sq += d * d;
            }
        }
        const T var = sq / count;
        stats.mean[ch] = mean;
        stats.var[ch] = var;
        const T inv = T(1) / std::sqrt(var + T(bn.eps));
        const T g = bn.gamma[ch], be = bn.beta[ch];
        for (int b = 0; b < in.n; ++b) {
            const T* src = in.channel(b, ch);
            T* xh = xhat.channel(b, ch);
            T* dst = out.channel(b, ch);
            for (int t = 0; t < in.len; ++t) {
                xh[t] = (src[t] - mean) * inv;
                dst[t] = g * xh[t] + be;
            }
        }
    }
}

// Eval mode: normalize by the stored running statistics; per-sample independent.
template <typename T>
void batchnorm_forward_eval(const Tensor<T>& in, const BatchNormLayer<T>& bn, Tensor<T>& out) {
    out = Tensor<T>(in.n, in.c, in.len);
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < in.c; ++ch) {
        const T inv = T(1) / std::sqrt(bn.running_var[ch] + T(bn.eps));
        const T g = bn.gamma[ch], be = bn.beta[ch];
        const T mean = bn.running_mean[ch];
        for (int b = 0; b < in.n; ++b) {
            const T* src = in.channel(b, ch);
            T* dst = out.channel(b, ch);
            for (int t = 0; t < in.len; ++t) dst[t] = g * (src[t] - mean) * inv + be;
        }
    }
}

// running <- (1-momentum)*running + momentum*batch; running_var gets the
// unbiased estimate (count/(count-1) rescale).
template <typename T>
void batchnorm_update_running(BatchNormLayer<T>& bn, const BnStats<T>& stats, std::size_t count) {
    const T m = T(bn.momentum);
    const T unbias = count > 1 ? T(count) / T(count - 1) : T(1);
    for (int ch = 0; ch < bn.ch; ++ch) {
        bn.running_mean[ch] = (T(1) - m) * bn.running_mean[ch] + m * stats.mean[ch];
        bn.running_var[ch] = (T(1) - m) * bn.running_var[ch] + m * stats.var[ch] * unbias;
    }
}

// Backward through train-mode normalization, including the dependence of the
// batch statistics on the input:
//   dx = gamma/sqrt(var+eps) * (dy - mean(dy) - xhat * mean(dy*xhat))
template <typename T>
void batchnorm_backward_train(const Tensor<T>& xhat, const BatchNormLayer<T>& bn,
                              const BnStats<T>& stats, const Tensor<T>& dout, Tensor<T>& din,
                              std::vector<T>& dgamma, std::vector<T>& dbeta) {
    din = Tensor<T>(dout.n, dout.c, dout.len);
    dgamma.assign(std::size_t(dout.c), T(0));
    dbeta.assign(std::size_t(dout.c), T(0));
    const T count = T(std::size_t(dout.n) * dout.len);
#pragma omp parallel for schedule(static)
    for (int ch = 0; ch < dout.c; ++ch) {
        T sum_dy = 0, sum_dy_xhat = 0;
        for (int b = 0; b < dout.n; ++b) {
            const T* g = dout.channel(b, ch);
            const T* xh = xhat.channel(b, ch);
            for (int t = 0; t < dout.len; ++t) {
                sum_dy += g[t];
                sum_dy_xhat += g[t] * xh[t];
            }
        }
        dgamma[ch] = sum_dy_xhat;
        dbeta[ch] = sum_dy;
        const T inv = T(1) / std::sqrt(stats.var[ch] + T(bn.eps));
        const T scale = bn.gamma[ch] * inv;
        const T mean_dy = sum_dy / count;
        const T mean_dy_xhat = sum_dy_xhat / count;
        for (int b = 0; b < dout.n; ++b) {
            const T* g = dout.channel(b, ch);
            const T* xh = xhat.channel(b, ch);
            T* dst = din.channel(b, ch);
            for (int t = 0; t < dout.len; ++t)
                dst[t] = scale * (g[t] - mean_dy - xh[t] * mean_dy_xhat);
        }
    }
}

template <typename T>
void relu_forward(const Tensor<T>& in, Tensor<T>& out) {
    out = Tensor<T>(in.n, in.c, in.len);
    for (std::size_t i = 0; i < in.v.size(); ++i) out.v[i] = in.v[i] > T(0) ? in.v[i] : T(0);
}

// din = dout where the pre-activation was positive.
template <typename T>
void relu_backward(const Tensor<T>& pre, const Tensor<T>& dout, Tensor<T>& din) {
    din = Tensor<T>(dout.n, dout.c, dout.len);
    for (std::size_t i = 0; i < dout.v.size(); ++i) din.v[i] = pre.v[i] > T(0) ? dout.v[i] : T(0);
}

// Mean over time per channel: (n, c, len) -> (n, c).
template <typename T>
void gap_forward(const Tensor<T>& in, Matrix<T>& out) {
    out = Matrix<T>(in.n, in.c);
    for (int b = 0; b < in.n; ++b) {
        for (int ch = 0; ch < in.c; ++ch) {
            const T* src = in.channel(b, ch);
            T sum = 0;
            for (int t = 0; t < in.len; ++t) sum += src[t];
            out.at(b, ch) = sum / T(in.len);
        }
    }
}

template <typename T>
void gap_backward(const Matrix<T>& dout, int len, Tensor<T>& din) {
    din = Tensor<T>(dout.rows, dout.cols, len);
    for (int b = 0; b < dout.rows; ++b) {
        for (int ch = 0; ch < dout.cols; ++ch) {
            const T g = dout.at(b, ch) / T(len);
            T* dst = din.channel(b, ch);
            for (int t = 0; t < len; ++t) dst[t] = g;
        }
    }
}

template <typename T>
void dense_forward(const Matrix<T>& in, const DenseLayer<T>& layer, Matrix<T>& out) {
    if (in.cols != layer.in)
        throw ShapeError("dense: input width " + std::to_string(in.cols) + ", layer expects " +
                         std::to_string(layer.in));
    out = Matrix<T>(in.rows, layer.out);
    for (int r = 0; r < in.rows; ++r) {
        const T* x = in.row(r);
        for (int o = 0; o < layer.out; ++o) {
            const T* wrow = layer.w.data() + std::size_t(o) * layer.in;
            T acc = layer.b[o];
            for (int i = 0; i < layer.in; ++i) acc += wrow[i] * x[i];
            out.at(r, o) = acc;
        }
    }
}

template <typename T>
void dense_backward(const Matrix<T>& in, const DenseLayer<T>& layer, const Matrix<T>& dout,
                    Matrix<T>& din, std::vector<T>& dw, std::vector<T>& db) {
    din = Matrix<T>(in.rows, layer.in);
    dw.assign(layer.w.size(), T(0));
    db.assign(layer.b.size(), T(0));
    for (int r = 0; r < in.rows; ++r) {
        const T* x = in.row(r);
        const T* g = dout.row(r);
        for (int o = 0; o < layer.out; ++o) {
            db[o] += g[o];
            T* wrow = dw.data() + std::size_t(o) * layer.in;
            const T* wsrc = layer.w.data() + std::size_t(o) * layer.in;
            T* dx = din.row(r);
            for (int i = 0; i < layer.in; ++i) {
                wrow[i] += g[o] * x[i];
                dx[i] += wsrc[i] * g[o];
            }
        }
    }
}

// Row-wise numerically stable softmax.
template <typename T>
void softmax_rows(const Matrix<T>& logits, Matrix<T>& probs) {
    probs = Matrix<T>(logits.rows, logits.cols);
    for (int r = 0; r < logits.rows; ++r) {
        const T* x = logits.row(r);
        T mx = x[0];
        for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, x[c]);
        T sum = 0;
        T* p = probs.row(r);
        for (int c = 0; c < logits.cols; ++c) {
            p[c] = std::exp(x[c] - mx);
            sum += p[c];
        }
        for (int c = 0; c < logits.cols; ++c) p[c] /= sum;
    }
}

}  // namespace barriernet
