#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "barriernet/binio.hpp"
#include "barriernet/errors.hpp"
#include "barriernet/labeling.hpp"
#include "barriernet/nn_ops.hpp"
#include "barriernet/synth.hpp"
#include "barriernet/tensor.hpp"

// 1D residual classifier over 5xW log-OHLCV windows. Each block is three
// conv->BN->ReLU layers (kernels 7,5,3 by default) added to a skip path;
// the first block projects the input channels with a 1x1 conv. A global
// average pool and a dense layer produce 3-way softmax probabilities.

namespace barriernet {

struct NetworkConfig {
    int in_channels = 5;
    int window = 600;
    int blocks = 5;
    int channels = 12;
    std::vector<int> kernels = {7, 5, 3};  // per layer inside each block
    int classes = 3;
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;

    void validate() const {
        if (in_channels < 1 || window < 1 || blocks < 1 || channels < 1 || classes < 2)
            throw ConfigError("network: all dimensions must be positive");
        if (kernels.empty()) throw ConfigError("network: kernel schedule is empty");
        for (int k : kernels)
            if (k < 1 || k % 2 == 0) throw ConfigError("network: kernel sizes must be odd");
    }

    bool operator==(const NetworkConfig&) const = default;
};

template <typename T>
struct ResidualBlock {
    std::vector<ConvLayer<T>> convs;
    std::vector<BatchNormLayer<T>> bns;
    std::optional<ConvLayer<T>> projection;  // 1x1 skip conv when channels change
};

// A mutable reference to one named parameter tensor; traversal order is the
// declared order and doubles as the checkpoint layout.
template <typename T>
struct ParamRef {
    std::string name;
    std::vector<T>* values;
};

template <typename T>
struct Network {
    NetworkConfig cfg;
    std::vector<ResidualBlock<T>> blocks;
    DenseLayer<T> head;

    static Network zeros(const NetworkConfig& cfg);
    static Network initialize(const NetworkConfig& cfg, std::uint64_t seed);

    // Trainable parameters, declared order.
    std::vector<ParamRef<T>> params();
    // Batch-norm running statistics, declared order.
    std::vector<ParamRef<T>> running_stats();
};

template <typename T>
Network<T> Network<T>::zeros(const NetworkConfig& cfg) {
    cfg.validate();
    Network net;
    net.cfg = cfg;
    int in_ch = cfg.in_channels;
    for (int b = 0; b < cfg.blocks; ++b) {
        ResidualBlock<T> block;
        int ch = in_ch;
        for (int k : cfg.kernels) {
            ConvLayer<T> conv;
            conv.in_ch = ch;
            conv.out_ch = cfg.channels;
            conv.kernel = k;
            conv.w.assign(std::size_t(conv.out_ch) * conv.in_ch * conv.kernel, T(0));
            conv.b.assign(std::size_t(conv.out_ch), T(0));
            block.convs.push_back(std::move(conv));

            BatchNormLayer<T> bn;
            bn.ch = cfg.channels;
            bn.eps = cfg.bn_eps;
            bn.momentum = cfg.bn_momentum;
            bn.gamma.assign(std::size_t(bn.ch), T(1));
            bn.beta.assign(std::size_t(bn.ch), T(0));
            bn.running_mean.assign(std::size_t(bn.ch), T(0));
            bn.running_var.assign(std::size_t(bn.ch), T(1));
            block.bns.push_back(std::move(bn));
            ch = cfg.channels;
        }
        if (in_ch != cfg.channels) {
            ConvLayer<T> proj;
            proj.in_ch = in_ch;
            proj.out_ch = cfg.channels;
            proj.kernel = 1;
            proj.w.assign(std::size_t(proj.out_ch) * proj.in_ch, T(0));
            proj.b.assign(std::size_t(proj.out_ch), T(0));
            block.projection = std::move(proj);
        }
        net.blocks.push_back(std::move(block));
        in_ch = cfg.channels;
    }
    net.head.in = cfg.channels;
    net.head.out = cfg.classes;
    net.head.w.assign(std::size_t(cfg.classes) * cfg.channels, T(0));
    net.head.b.assign(std::size_t(cfg.classes), T(0));
    return net;
}

template <typename T>
Network<T> Network<T>::initialize(const NetworkConfig& cfg, std::uint64_t seed) {
    Network net = zeros(cfg);
    std::mt19937_64 rng(mix_seed(seed, 0x6e657477ULL));
    // Fan-in scaled uniform for conv and dense weights; biases stay zero.
    // Draws are always double so f32 and f64 nets share initial values.
    auto fill = [&rng](std::vector<T>& w, int fan_in) {
        double bound = 1.0 / std::sqrt(double(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& x : w) x = T(dist(rng));
    };
    for (auto& block : net.blocks) {
        for (auto& conv : block.convs) fill(conv.w, conv.in_ch * conv.kernel);
        if (block.projection) fill(block.projection->w, block.projection->in_ch);
    }
    fill(net.head.w, net.head.in);
    return net;
}

template <typename T>
std::vector<ParamRef<T>> Network<T>::params() {
    std::vector<ParamRef<T>> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        std::string prefix = "block" + std::to_string(b);
        auto& block = blocks[b];
        for (std::size_t l = 0; l < block.convs.size(); ++l) {
            std::string lp = prefix + ".conv" + std::to_string(l);
            out.push_back({lp + ".w", &block.convs[l].w});
            out.push_back({lp + ".b", &block.convs[l].b});
            out.push_back({prefix + ".bn" + std::to_string(l) + ".gamma", &block.bns[l].gamma});
            out.push_back({prefix + ".bn" + std::to_string(l) + ".beta", &block.bns[l].beta});
        }
        if (block.projection) {
            out.push_back({prefix + ".proj.w", &block.projection->w});
            out.push_back({prefix + ".proj.b", &block.projection->b});
        }
    }
    out.push_back({"head.w", &head.w});
    out.push_back({"head.b", &head.b});
    return out;
}

template <typename T>
std::vector<ParamRef<T>> Network<T>::running_stats() {
    std::vector<ParamRef<T>> out;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        std::string prefix = "block" + std::to_string(b);
        auto& block = blocks[b];
        for (std::size_t l = 0; l < block.bns.size(); ++l) {
            std::string lp = prefix + ".bn" + std::to_string(l);
            out.push_back({lp + ".running_mean", &block.bns[l].running_mean});
            out.push_back({lp + ".running_var", &block.bns[l].running_var});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Forward / backward

enum class Mode { Train, Eval };

struct ClassProbs {
    double p0 = 0, p1 = 0, p2 = 0;

    double operator[](int i) const { return i == 0 ? p0 : i == 1 ? p1 : p2; }
    // Ties break toward the larger label index.
    int argmax() const {
        int best = 0;
        double bv = p0;
        if (p1 >= bv) { best = 1; bv = p1; }
        if (p2 >= bv) { best = 2; }
        return best;
    }
    double confidence() const { return std::max(p0, std::max(p1, p2)); }
};

template <typename T>
struct LayerCache {
    Tensor<T> xhat;      // train mode only
    Tensor<T> relu_out;  // post-activation; also the ReLU mask
    BnStats<T> stats;    // train mode only
};

template <typename T>
struct BlockCache {
    std::vector<LayerCache<T>> layers;
};

template <typename T>
struct ForwardCache {
    Mode mode = Mode::Eval;
    std::vector<Tensor<T>> block_inputs;  // [0] = batch input, [k+1] = block k output
    std::vector<BlockCache<T>> blocks;
    Matrix<T> gap_out;
    Matrix<T> logits;
    Matrix<T> probs;
    std::vector<int> conv_lengths;  // output length of every conv apply, in order

    int batch_size() const { return probs.rows; }
    ClassProbs probabilities(int row) const {
        return {double(probs.at(row, 0)), double(probs.at(row, 1)), double(probs.at(row, 2))};
    }
};

// Runs the network over a batch. Train mode uses batch statistics and fills
// the caches backward needs; eval mode uses running statistics and is
// independent across samples. The network itself is never mutated here;
// running statistics advance only via update_running_stats.
template <typename T>
ForwardCache<T> forward(const Network<T>& net, const Tensor<T>& batch, Mode mode) {
    if (batch.c != net.cfg.in_channels || batch.len != net.cfg.window)
        throw ShapeError("forward: input is " + std::to_string(batch.c) + "x" +
                         std::to_string(batch.len) + ", network expects " +
                         std::to_string(net.cfg.in_channels) + "x" + std::to_string(net.cfg.window));
    if (batch.n < 1) throw ShapeError("forward: empty batch");
    if (mode == Mode::Train && batch.n < 2)
        throw ValidationError("forward: train mode needs a batch of at least 2 for batch statistics");

    ForwardCache<T> cache;
    cache.mode = mode;
    cache.block_inputs.reserve(net.blocks.size() + 1);
    cache.block_inputs.push_back(batch);
    cache.blocks.resize(net.blocks.size());

    for (std::size_t b = 0; b < net.blocks.size(); ++b) {
        const auto& block = net.blocks[b];
        const Tensor<T>& block_in = cache.block_inputs[b];
        auto& bc = cache.blocks[b];
        bc.layers.resize(block.convs.size());

        const Tensor<T>* x = &block_in;
        for (std::size_t l = 0; l < block.convs.size(); ++l) {
            Tensor<T> conv_out;
            conv1d_forward(*x, block.convs[l], conv_out);
            cache.conv_lengths.push_back(conv_out.len);
            auto& lc = bc.layers[l];
            Tensor<T> bn_out;
            if (mode == Mode::Train) {
                batchnorm_forward_train(conv_out, block.bns[l], bn_out, lc.xhat, lc.stats);
            } else {
                batchnorm_forward_eval(conv_out, block.bns[l], bn_out);
            }
            relu_forward(bn_out, lc.relu_out);
            x = &lc.relu_out;
        }

        Tensor<T> skip;
        if (block.projection) {
            conv1d_forward(block_in, *block.projection, skip);
            cache.conv_lengths.push_back(skip.len);
        } else {
            skip = block_in;
        }
        Tensor<T> out = *x;
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += skip.v[i];
        cache.block_inputs.push_back(std::move(out));
    }

    gap_forward(cache.block_inputs.back(), cache.gap_out);
    dense_forward(cache.gap_out, net.head, cache.logits);
    softmax_rows(cache.logits, cache.probs);
    return cache;
}

// Folds the train-mode batch statistics of `cache` into the running stats.
template <typename T>
void update_running_stats(Network<T>& net, const ForwardCache<T>& cache) {
    if (cache.mode != Mode::Train) throw ValidationError("update_running_stats: cache is not train mode");
    for (std::size_t b = 0; b < net.blocks.size(); ++b) {
        const Tensor<T>& in = cache.block_inputs[b];
        std::size_t count = std::size_t(in.n) * net.cfg.window;
        for (std::size_t l = 0; l < net.blocks[b].bns.size(); ++l)
            batchnorm_update_running(net.blocks[b].bns[l], cache.blocks[b].layers[l].stats, count);
    }
}

inline constexpr double kProbFloor = 1e-12;

// Class-weighted mean of -log p(true class). `clipped` counts probabilities
// that had to be floored before the log.
template <typename T>
double weighted_cross_entropy(const Matrix<T>& probs, const std::vector<int>& labels,
                              const std::array<double, 3>& class_weights,
                              std::size_t* clipped = nullptr) {
    if (probs.rows == 0 || std::size_t(probs.rows) != labels.size())
        throw ValidationError("loss: probs and labels must be non-empty and the same length");
    double sum = 0;
    for (int r = 0; r < probs.rows; ++r) {
        int y = labels[std::size_t(r)];
        if (y < 0 || y >= probs.cols) throw ValidationError("loss: label out of range");
        double p = double(probs.at(r, y));
        if (p < kProbFloor) {
            p = kProbFloor;
            if (clipped) ++*clipped;
        }
        sum += class_weights[std::size_t(y)] * -std::log(p);
    }
    return sum / double(probs.rows);
}

inline double weighted_cross_entropy(const std::vector<ClassProbs>& probs,
                                     const std::vector<int>& labels,
                                     const std::array<double, 3>& class_weights,
                                     std::size_t* clipped = nullptr) {
    Matrix<double> m(int(probs.size()), 3);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        m.at(int(i), 0) = probs[i].p0;
        m.at(int(i), 1) = probs[i].p1;
        m.at(int(i), 2) = probs[i].p2;
    }
    return weighted_cross_entropy(m, labels, class_weights, clipped);
}

// Analytic gradients of the weighted cross-entropy w.r.t. every trainable
// parameter, returned as a zero-stats network of matching shapes.
template <typename T>
Network<T> backward(const Network<T>& net, const ForwardCache<T>& cache,
                    const std::vector<int>& labels, const std::array<double, 3>& class_weights) {
    if (cache.mode != Mode::Train)
        throw ValidationError("backward: needs a train-mode forward cache");
    const int n = cache.batch_size();
    if (std::size_t(n) != labels.size())
        throw ValidationError("backward: cache batch size " + std::to_string(n) + " vs " +
                              std::to_string(labels.size()) + " labels");

    Network<T> grads = Network<T>::zeros(net.cfg);

    // Softmax + cross-entropy: dlogits = (p - onehot) * w / n.
    Matrix<T> dlogits(n, net.cfg.classes);
    for (int r = 0; r < n; ++r) {
        int y = labels[std::size_t(r)];
        const T w = T(class_weights[std::size_t(y)] / double(n));
        for (int c = 0; c < net.cfg.classes; ++c) {
            T p = cache.probs.at(r, c);
            dlogits.at(r, c) = (p - (c == y ? T(1) : T(0))) * w;
        }
    }

    Matrix<T> dgap;
    dense_backward(cache.gap_out, net.head, dlogits, dgap, grads.head.w, grads.head.b);

    Tensor<T> d_out;
    gap_backward(dgap, net.cfg.window, d_out);

    for (std::size_t b = net.blocks.size(); b-- > 0;) {
        const auto& block = net.blocks[b];
        auto& gblock = grads.blocks[b];
        const auto& bc = cache.blocks[b];
        const Tensor<T>& block_in = cache.block_inputs[b];

        // Residual path, last layer to first.
        Tensor<T> d = d_out;
        for (std::size_t l = block.convs.size(); l-- > 0;) {
            const Tensor<T>& conv_in = l == 0 ? block_in : bc.layers[l - 1].relu_out;
            Tensor<T> d_bn, d_conv;
            relu_backward(bc.layers[l].relu_out, d, d_bn);
            batchnorm_backward_train(bc.layers[l].xhat, block.bns[l], bc.layers[l].stats, d_bn, d_conv,
                                     gblock.bns[l].gamma, gblock.bns[l].beta);
            Tensor<T> d_in;
            conv1d_backward(conv_in, block.convs[l], d_conv, d_in, gblock.convs[l].w,
                            gblock.convs[l].b);
            d = std::move(d_in);
        }

        // Skip path.
        Tensor<T> d_skip;
        if (block.projection) {
            conv1d_backward(block_in, *block.projection, d_out, d_skip, gblock.projection->w,
                            gblock.projection->b);
        } else {
            d_skip = d_out;
        }
        for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] += d_skip.v[i];
        d_out = std::move(d);
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    double learning_rate = 1e-3;
    enum class Optimizer { Adam, Sgd } optimizer = Optimizer::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    // Defaults to inverse label frequency of the training set, mean 1.
    std::optional<std::array<double, 3>> class_weights;

    void validate() const {
        if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
        if (batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
        if (!(learning_rate > 0)) throw ConfigError("train.learning_rate must be > 0");
        if (class_weights)
            for (double w : *class_weights)
                if (!(w >= 0)) throw ConfigError("train.class_weights must be >= 0");
    }
};

struct EpochRecord {
    int epoch = 0;       // 1-based
    double loss = 0;     // weighted mean over the epoch's processed samples
    double accuracy = 0; // train-mode argmax accuracy over the same samples
};

template <typename T>
struct TrainResult {
    Network<T> net;
    std::vector<EpochRecord> history;
    std::array<double, 3> class_weights{1, 1, 1};
    std::size_t clipped_log_probs = 0;
    std::vector<std::string> warnings;
};

// Inverse-frequency weights normalized to mean 1 over the classes present.
// Absent classes get weight 0.
inline std::array<double, 3> inverse_frequency_weights(const std::vector<int>& labels) {
    std::array<std::size_t, 3> counts{0, 0, 0};
    for (int y : labels) {
        if (y < 0 || y > 2) throw ValidationError("labels must be in {0,1,2}");
        ++counts[std::size_t(y)];
    }
    std::array<double, 3> raw{0, 0, 0};
    double sum = 0;
    int present = 0;
    for (int c = 0; c < 3; ++c) {
        if (counts[c] > 0) {
            raw[c] = double(labels.size()) / double(counts[c]);
            sum += raw[c];
            ++present;
        }
    }
    std::array<double, 3> w{0, 0, 0};
    for (int c = 0; c < 3; ++c)
        if (counts[c] > 0) w[c] = raw[c] * double(present) / sum;
    return w;
}

template <typename T>
Tensor<T> windows_to_tensor(const std::vector<const FeatureWindow*>& windows) {
    if (windows.empty()) throw ValidationError("empty window batch");
    const int len = windows[0]->length();
    Tensor<T> batch(int(windows.size()), FeatureWindow::kRows, len);
    for (std::size_t b = 0; b < windows.size(); ++b) {
        if (windows[b]->length() != len) throw ShapeError("windows in a batch must share one length");
        const auto& src = windows[b]->data();
        for (std::size_t i = 0; i < src.size(); ++i) batch.v[std::size_t(b) * src.size() + i] = T(src[i]);
    }
    return batch;
}

namespace detail {

// Fisher-Yates with an explicit bounded draw; the shuffle order is part of the
// determinism contract, so it does not depend on std::shuffle internals.
inline void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = std::size_t(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace detail

template <typename T>
TrainResult<T> train(const std::vector<LabeledSample>& data, const NetworkConfig& arch,
                     const TrainConfig& cfg) {
    arch.validate();
    cfg.validate();
    if (data.empty()) throw ValidationError("train: empty dataset");
    for (const auto& s : data)
        if (s.window.length() != arch.window)
            throw ShapeError("train: sample window length " + std::to_string(s.window.length()) +
                             " does not match network window " + std::to_string(arch.window));

    TrainResult<T> result;
    std::vector<int> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data[i].label;

    {
        std::array<std::size_t, 3> counts{0, 0, 0};
        for (int y : labels) ++counts[std::size_t(y)];
        int present = int(counts[0] > 0) + int(counts[1] > 0) + int(counts[2] > 0);
        if (present == 1)
            result.warnings.push_back("training set contains a single class; proceeding anyway");
    }
    result.class_weights = cfg.class_weights ? *cfg.class_weights : inverse_frequency_weights(labels);

    Network<T> net = Network<T>::initialize(arch, cfg.seed);

    // Optimizer state, parallel to the declared parameter order.
    auto refs = net.params();
    std::vector<std::vector<T>> adam_m, adam_v;
    if (cfg.optimizer == TrainConfig::Optimizer::Adam) {
        for (auto& r : refs) {
            adam_m.emplace_back(r.values->size(), T(0));
            adam_v.emplace_back(r.values->size(), T(0));
        }
    }
    std::uint64_t step = 0;

    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x73687566ULL));
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    bool warned_leftover = false;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        detail::shuffle_indices(order, shuffle_rng);

        double loss_sum = 0;
        std::size_t seen = 0, correct = 0;
        for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
            std::size_t end = std::min(order.size(), start + std::size_t(cfg.batch_size));
            if (end - start < 2) {
                // A trailing batch of one cannot produce batch statistics.
                if (!warned_leftover) {
                    result.warnings.push_back("dropping single-sample trailing batches");
                    warned_leftover = true;
                }
                continue;
            }
            std::vector<const FeatureWindow*> windows;
            std::vector<int> batch_labels;
            windows.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                windows.push_back(&data[order[i]].window);
                batch_labels.push_back(labels[order[i]]);
            }
            Tensor<T> batch = windows_to_tensor<T>(windows);

            ForwardCache<T> cache = forward(net, batch, Mode::Train);
            loss_sum += weighted_cross_entropy(cache.probs, batch_labels, result.class_weights,
                                               &result.clipped_log_probs) *
                        double(batch_labels.size());
            for (int r = 0; r < int(batch_labels.size()); ++r)
                if (cache.probabilities(r).argmax() == batch_labels[std::size_t(r)]) ++correct;
            seen += batch_labels.size();

            Network<T> grads = backward(net, cache, batch_labels, result.class_weights);
            update_running_stats(net, cache);

            ++step;
            auto grefs = grads.params();
            if (cfg.optimizer == TrainConfig::Optimizer::Adam) {
                const T b1 = T(cfg.adam_beta1), b2 = T(cfg.adam_beta2);
                const T corr1 = T(1) - T(std::pow(cfg.adam_beta1, double(step)));
                const T corr2 = T(1) - T(std::pow(cfg.adam_beta2, double(step)));
                const T lr = T(cfg.learning_rate), eps = T(cfg.adam_eps);
                for (std::size_t p = 0; p < refs.size(); ++p) {
                    auto& theta = *refs[p].values;
                    const auto& g = *grefs[p].values;
                    auto& m = adam_m[p];
                    auto& v = adam_v[p];
                    for (std::size_t i = 0; i < theta.size(); ++i) {
                        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
                        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
                        const T mhat = m[i] / corr1;
                        const T vhat = v[i] / corr2;
                        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
                    }
                }
            } else {
                const T lr = T(cfg.learning_rate);
                for (std::size_t p = 0; p < refs.size(); ++p) {
                    auto& theta = *refs[p].values;
                    const auto& g = *grefs[p].values;
                    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * g[i];
                }
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = seen ? loss_sum / double(seen) : 0.0;
        rec.accuracy = seen ? double(correct) / double(seen) : 0.0;
        result.history.push_back(rec);
    }

    result.net = std::move(net);
    return result;
}

// ---------------------------------------------------------------------------
// Prediction

template <typename T>
std::vector<ClassProbs> predict_batch(const Network<T>& net,
                                      const std::vector<const FeatureWindow*>& windows) {
    Tensor<T> batch = windows_to_tensor<T>(windows);
    ForwardCache<T> cache = forward(net, batch, Mode::Eval);
    std::vector<ClassProbs> out;
    out.reserve(windows.size());
    for (int r = 0; r < cache.batch_size(); ++r) out.push_back(cache.probabilities(r));
    return out;
}

template <typename T>
ClassProbs predict(const Network<T>& net, const FeatureWindow& window) {
    return predict_batch(net, {&window})[0];
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Versioned binary layout: magic, version, architecture descriptor, every
// trainable tensor then every running statistic in declared order (stored as
// f64), and an FNV-1a 64 trailer over all preceding bytes.

inline constexpr char kCheckpointMagic[8] = {'B', 'N', 'E', 'T', 'C', 'K', 'P', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    binio::Writer w(out);
    w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
    w.value(kCheckpointVersion);
    const auto& cfg = net.cfg;
    w.value(std::int32_t(cfg.in_channels));
    w.value(std::int32_t(cfg.window));
    w.value(std::int32_t(cfg.blocks));
    w.value(std::int32_t(cfg.channels));
    w.value(std::int32_t(cfg.classes));
    w.value(std::int32_t(cfg.kernels.size()));
    for (int k : cfg.kernels) w.value(std::int32_t(k));
    w.value(cfg.bn_eps);
    w.value(cfg.bn_momentum);

    auto& mutable_net = const_cast<Network<T>&>(net);  // params() needs non-const refs
    for (auto& p : mutable_net.params()) w.doubles(*p.values);
    for (auto& p : mutable_net.running_stats()) w.doubles(*p.values);
    w.finish();
    if (!out) throw IoError("write failed for " + path.string());
}

template <typename T>
Network<T> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    binio::Reader r(in, path.string());

    char magic[8];
    r.raw(magic, sizeof magic);
    if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw IoError(path.string() + ": not a checkpoint file");
    auto version = r.value<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));

    NetworkConfig cfg;
    cfg.in_channels = r.value<std::int32_t>();
    cfg.window = r.value<std::int32_t>();
    cfg.blocks = r.value<std::int32_t>();
    cfg.channels = r.value<std::int32_t>();
    cfg.classes = r.value<std::int32_t>();
    auto nk = r.value<std::int32_t>();
    if (nk < 1 || nk > 64) throw IoError(path.string() + ": corrupt kernel schedule");
    cfg.kernels.clear();
    for (int i = 0; i < nk; ++i) cfg.kernels.push_back(r.value<std::int32_t>());
    cfg.bn_eps = r.value<double>();
    cfg.bn_momentum = r.value<double>();
    cfg.validate();

    Network<T> net = Network<T>::zeros(cfg);
    for (auto& p : net.params()) *p.values = r.doubles<T>(p.values->size());
    for (auto& p : net.running_stats()) *p.values = r.doubles<T>(p.values->size());
    r.verify();
    return net;
}

}  // namespace barriernet
