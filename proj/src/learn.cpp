#include "grasplab/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "grasplab/error.hpp"
#include "grasplab/rng.hpp"
#include "grasplab/util.hpp"

namespace grasplab {

// -- NetSpec -------------------------------------------------------------------

int NetSpec::receptive_field() const {
    int rf = 1, jump = 1;
    for (const LayerSpec& l : layers) {
        rf += (l.kernel - 1) * jump;
        jump *= l.stride;
    }
    return rf;
}

int NetSpec::total_stride() const {
    int s = 1;
    for (const LayerSpec& l : layers) s *= l.stride;
    return s;
}

int NetSpec::output_spatial(int input) const {
    int s = input;
    for (const LayerSpec& l : layers) {
        if (s < l.kernel) return 0;
        s = (s - l.kernel) / l.stride + 1;
    }
    return s;
}

int NetSpec::conv_layer_count() const {
    int n = 0;
    for (const LayerSpec& l : layers)
        if (l.kind == LayerSpec::Kind::Conv) ++n;
    return n;
}

void NetSpec::validate() const {
    if (layers.empty()) raise(ErrorCode::ConfigError, "net has no layers");
    if (n_bins < 1) raise(ErrorCode::ConfigError, "n_bins must be >= 1");
    for (const LayerSpec& l : layers) {
        if (l.kernel < 1 || l.stride < 1)
            raise(ErrorCode::ConfigError, "layer kernel and stride must be >= 1");
        if (l.kind == LayerSpec::Kind::Conv && l.out_channels < 1)
            raise(ErrorCode::ConfigError, "conv layer needs out_channels >= 1");
    }
    const LayerSpec& last = layers.back();
    if (last.kind != LayerSpec::Kind::Conv || last.kernel != 1 || last.stride != 1 ||
        last.out_channels != 2 * n_bins || last.relu)
        raise(ErrorCode::ConfigError, "final layer must be Conv(1,1,2*n_bins) without activation");
    if (receptive_field() > input_size)
        raise(ErrorCode::ConfigError, "receptive field exceeds network input size");
    if (output_spatial(input_size) != 1)
        raise(ErrorCode::ConfigError, "network input must map to a 1x1 output");
}

size_t ModelParams::total_floats() const {
    size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

int angle_to_bin(double phi, int n_bins) {
    if (!(phi >= 0.0 && phi < M_PI))
        raise(ErrorCode::PhiOutOfRange, "phi must lie in [0, pi): " + std::to_string(phi));
    const int bin = static_cast<int>(std::floor(phi / (M_PI / n_bins)));
    return std::min(bin, n_bins - 1); // guards the phi -> pi floating edge
}

double bin_to_angle(int bin, int n_bins) {
    if (bin < 0 || bin >= n_bins) raise(ErrorCode::ConfigError, "bin out of range");
    return (bin + 0.5) * M_PI / n_bins;
}

ModelParams init_params(const NetSpec& net, uint64_t seed) {
    net.validate();
    ModelParams params;
    params.net = net;
    params.init_seed = seed;
    Rng rng(derive_seed(seed, 0x1e17));
    int cin = 3;
    for (const LayerSpec& l : net.layers) {
        if (l.kind != LayerSpec::Kind::Conv) continue;
        const size_t fan_in = static_cast<size_t>(l.kernel) * l.kernel * cin;
        const double sigma = std::sqrt(2.0 / static_cast<double>(fan_in));
        std::vector<float> w(fan_in * l.out_channels);
        for (float& x : w) x = static_cast<float>(sigma * rng.normal());
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::vector<float>(l.out_channels, 0.0f));
        cin = l.out_channels;
    }
    return params;
}

TensorMap image_to_tensor(const ImageGrid& image) {
    TensorMap t(image.height, image.width, 3);
    t.v = image.values;
    return t;
}

// -- templated network core ------------------------------------------------------

namespace {

template <typename T>
struct TensorT {
    int h = 0, w = 0, c = 0;
    std::vector<T> v;

    void resize(int hh, int ww, int cc) {
        h = hh;
        w = ww;
        c = cc;
        v.assign(static_cast<size_t>(hh) * ww * cc, T(0));
    }
};

template <typename T>
struct NetT {
    NetSpec spec;
    std::vector<std::vector<T>> weights;
    std::vector<std::vector<T>> biases;
};

template <typename T>
NetT<T> to_net(const ModelParams& p) {
    NetT<T> net;
    net.spec = p.net;
    net.weights.reserve(p.weights.size());
    net.biases.reserve(p.biases.size());
    for (const auto& w : p.weights) net.weights.emplace_back(w.begin(), w.end());
    for (const auto& b : p.biases) net.biases.emplace_back(b.begin(), b.end());
    return net;
}

// Fixed nonlinearity pattern recorded during a forward pass. Finite-difference
// checks re-run the net with the pattern frozen so they differentiate the same
// piecewise-linear branch that backpropagation does.
struct ActivationTrace {
    std::vector<std::vector<uint8_t>> relu_on; // per layer (conv only)
    std::vector<std::vector<int>> argmax;      // per layer (maxpool only)
};

// per-sample activations plus maxpool winner indices for backward
template <typename T>
struct NetState {
    std::vector<TensorT<T>> acts;          // acts[0] = input, acts[i+1] = layer i output
    std::vector<std::vector<int>> argmax;  // per layer; empty for conv
};

template <typename T>
void conv_forward(const TensorT<T>& in, TensorT<T>& out, const LayerSpec& l,
                  const std::vector<T>& weights, const std::vector<T>& biases,
                  std::vector<uint8_t>* record_relu, const std::vector<uint8_t>* frozen_relu) {
    const int oh = (in.h - l.kernel) / l.stride + 1;
    const int ow = (in.w - l.kernel) / l.stride + 1;
    const int cin = in.c, cout = l.out_channels, k = l.kernel;
    out.resize(oh, ow, cout);
    if (record_relu) record_relu->assign(out.v.size(), 1);
    std::vector<T> acc(cout);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            std::copy(biases.begin(), biases.end(), acc.begin());
            for (int ky = 0; ky < k; ++ky) {
                const T* in_row = &in.v[(static_cast<size_t>(oy * l.stride + ky) * in.w +
                                         ox * l.stride) * cin];
                const T* w_row = &weights[static_cast<size_t>(ky) * k * cin * cout];
                for (int kx = 0; kx < k; ++kx) {
                    const T* px = in_row + static_cast<size_t>(kx) * cin;
                    const T* wp = w_row + static_cast<size_t>(kx) * cin * cout;
                    for (int ci = 0; ci < cin; ++ci) {
                        const T x = px[ci];
                        const T* w = wp + static_cast<size_t>(ci) * cout;
                        for (int oc = 0; oc < cout; ++oc) acc[oc] += x * w[oc];
                    }
                }
            }
            const size_t base = (static_cast<size_t>(oy) * ow + ox) * cout;
            T* dst = &out.v[base];
            if (!l.relu) {
                for (int oc = 0; oc < cout; ++oc) dst[oc] = acc[oc];
            } else if (frozen_relu) {
                for (int oc = 0; oc < cout; ++oc)
                    dst[oc] = (*frozen_relu)[base + oc] ? acc[oc] : T(0);
            } else {
                for (int oc = 0; oc < cout; ++oc) {
                    const bool on = acc[oc] > T(0);
                    dst[oc] = on ? acc[oc] : T(0);
                    if (record_relu) (*record_relu)[base + oc] = on ? 1 : 0;
                }
            }
        }
    }
}

template <typename T>
void maxpool_forward(const TensorT<T>& in, TensorT<T>& out, const LayerSpec& l,
                     std::vector<int>* argmax, const std::vector<int>* frozen_argmax) {
    const int oh = (in.h - l.kernel) / l.stride + 1;
    const int ow = (in.w - l.kernel) / l.stride + 1;
    const int c = in.c;
    out.resize(oh, ow, c);
    if (frozen_argmax) {
        for (size_t j = 0; j < out.v.size(); ++j) out.v[j] = in.v[(*frozen_argmax)[j]];
        if (argmax) *argmax = *frozen_argmax;
        return;
    }
    if (argmax) argmax->assign(static_cast<size_t>(oh) * ow * c, -1);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            T* dst = &out.v[(static_cast<size_t>(oy) * ow + ox) * c];
            int* am = argmax ? &(*argmax)[(static_cast<size_t>(oy) * ow + ox) * c] : nullptr;
            for (int ch = 0; ch < c; ++ch) {
                T best = -std::numeric_limits<T>::infinity();
                int best_idx = -1;
                for (int ky = 0; ky < l.kernel; ++ky) {
                    for (int kx = 0; kx < l.kernel; ++kx) {
                        const size_t idx = (static_cast<size_t>(oy * l.stride + ky) * in.w +
                                            (ox * l.stride + kx)) * c + ch;
                        if (in.v[idx] > best) { // ties keep the first window cell
                            best = in.v[idx];
                            best_idx = static_cast<int>(idx);
                        }
                    }
                }
                dst[ch] = best;
                if (am) am[ch] = best_idx;
            }
        }
    }
}

template <typename T>
void net_forward(const NetT<T>& net, const TensorT<T>& input, NetState<T>& state,
                 bool keep_argmax, ActivationTrace* record = nullptr,
                 const ActivationTrace* frozen = nullptr) {
    const size_t n_layers = net.spec.layers.size();
    state.acts.resize(n_layers + 1);
    state.argmax.resize(n_layers);
    if (record) {
        record->relu_on.assign(n_layers, {});
        record->argmax.assign(n_layers, {});
    }
    state.acts[0] = input;
    int conv_idx = 0;
    for (size_t i = 0; i < n_layers; ++i) {
        const LayerSpec& l = net.spec.layers[i];
        if (state.acts[i].h < l.kernel || state.acts[i].w < l.kernel)
            raise(ErrorCode::ShapeMismatch, "input smaller than the receptive field");
        if (l.kind == LayerSpec::Kind::Conv) {
            conv_forward(state.acts[i], state.acts[i + 1], l, net.weights[conv_idx],
                         net.biases[conv_idx], record ? &record->relu_on[i] : nullptr,
                         frozen ? &frozen->relu_on[i] : nullptr);
            ++conv_idx;
        } else {
            maxpool_forward(state.acts[i], state.acts[i + 1], l,
                            (keep_argmax || record) ? &state.argmax[i] : nullptr,
                            frozen ? &frozen->argmax[i] : nullptr);
            if (record) record->argmax[i] = state.argmax[i];
        }
    }
}

template <typename T>
struct LossGrad {
    double loss = 0.0;
    double p_success = 0.0;
    T d0 = T(0); // d loss / d fail logit
    T d1 = T(0); // d loss / d success logit
};

template <typename T>
LossGrad<T> masked_loss_grad(const T* logits, int bin, int reward) {
    const double l0 = static_cast<double>(logits[2 * bin]);
    const double l1 = static_cast<double>(logits[2 * bin + 1]);
    const double m = std::max(l0, l1);
    const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
    const double z = e0 + e1;
    const double p0 = e0 / z, p1 = e1 / z;
    LossGrad<T> out;
    out.loss = -((reward ? l1 : l0) - m - std::log(z));
    out.p_success = p1;
    out.d0 = static_cast<T>(p0 - (reward ? 0.0 : 1.0));
    out.d1 = static_cast<T>(p1 - (reward ? 1.0 : 0.0));
    return out;
}

template <typename T>
struct Gradients {
    std::vector<std::vector<T>> weights;
    std::vector<std::vector<T>> biases;

    void match(const NetT<T>& net) {
        weights.resize(net.weights.size());
        biases.resize(net.biases.size());
        for (size_t i = 0; i < net.weights.size(); ++i) {
            weights[i].assign(net.weights[i].size(), T(0));
            biases[i].assign(net.biases[i].size(), T(0));
        }
    }
};

// Backward through all layers given d(loss)/d(output logits) in d_out.
// Accumulates into grads (so minibatch gradients sum naturally).
template <typename T>
void net_backward(const NetT<T>& net, const NetState<T>& state, TensorT<T>& d_out,
                  Gradients<T>& grads) {
    const int n_layers = static_cast<int>(net.spec.layers.size());
    int conv_idx = static_cast<int>(net.weights.size());
    TensorT<T> d_in;
    for (int i = n_layers - 1; i >= 0; --i) {
        const LayerSpec& l = net.spec.layers[i];
        const TensorT<T>& in = state.acts[i];
        const TensorT<T>& out = state.acts[i + 1];
        d_in.resize(in.h, in.w, in.c);
        if (l.kind == LayerSpec::Kind::MaxPool) {
            const std::vector<int>& am = state.argmax[i];
            for (size_t j = 0; j < d_out.v.size(); ++j)
                if (am[j] >= 0) d_in.v[am[j]] += d_out.v[j];
        } else {
            --conv_idx;
            const std::vector<T>& weights = net.weights[conv_idx];
            std::vector<T>& d_w = grads.weights[conv_idx];
            std::vector<T>& d_b = grads.biases[conv_idx];
            const int k = l.kernel, cin = in.c, cout = l.out_channels;
            for (int oy = 0; oy < out.h; ++oy) {
                for (int ox = 0; ox < out.w; ++ox) {
                    T* dz = &d_out.v[(static_cast<size_t>(oy) * out.w + ox) * cout];
                    if (l.relu) {
                        const T* o = &out.v[(static_cast<size_t>(oy) * out.w + ox) * cout];
                        for (int oc = 0; oc < cout; ++oc)
                            if (!(o[oc] > T(0))) dz[oc] = T(0);
                    }
                    for (int oc = 0; oc < cout; ++oc) d_b[oc] += dz[oc];
                    for (int ky = 0; ky < k; ++ky) {
                        const size_t row = (static_cast<size_t>(oy * l.stride + ky) * in.w +
                                            ox * l.stride) * cin;
                        for (int kx = 0; kx < k; ++kx) {
                            const T* px = &in.v[row + static_cast<size_t>(kx) * cin];
                            T* dpx = &d_in.v[row + static_cast<size_t>(kx) * cin];
                            const size_t wbase = (static_cast<size_t>(ky) * k + kx) * cin;
                            for (int ci = 0; ci < cin; ++ci) {
                                const T x = px[ci];
                                const T* w = &weights[(wbase + ci) * cout];
                                T* dw = &d_w[(wbase + ci) * cout];
                                T acc = T(0);
                                for (int oc = 0; oc < cout; ++oc) {
                                    dw[oc] += x * dz[oc];
                                    acc += w[oc] * dz[oc];
                                }
                                dpx[ci] += acc;
                            }
                        }
                    }
                }
            }
        }
        std::swap(d_out, d_in);
        d_in.v.clear();
    }
}

template <typename T>
TensorT<T> image_to_tensor_t(const ImageGrid& image) {
    TensorT<T> t;
    t.resize(image.height, image.width, 3);
    for (size_t i = 0; i < image.values.size(); ++i) t.v[i] = static_cast<T>(image.values[i]);
    return t;
}

// loss of one record at 1x1 output; used by training and gradient checks
template <typename T>
double record_loss(const NetT<T>& net, const ImageGrid& patch, int bin, int reward,
                   NetState<T>& state, const ActivationTrace* frozen = nullptr) {
    net_forward(net, image_to_tensor_t<T>(patch), state, false, nullptr, frozen);
    const TensorT<T>& logits = state.acts.back();
    return masked_loss_grad(logits.v.data(), bin, reward).loss;
}

} // namespace

// -- public operations ------------------------------------------------------------

TensorMap forward(const ModelParams& params, const TensorMap& input) {
    if (input.channels != 3) raise(ErrorCode::ShapeMismatch, "input must have 3 channels");
    if (input.height < params.net.receptive_field() || input.width < params.net.receptive_field())
        raise(ErrorCode::ShapeMismatch, "input smaller than the receptive field");
    NetT<float> net = to_net<float>(params);
    TensorT<float> in;
    in.h = input.height;
    in.w = input.width;
    in.c = input.channels;
    in.v = input.v;
    NetState<float> state;
    net_forward(net, in, state, false);
    const TensorT<float>& out = state.acts.back();
    TensorMap result(out.h, out.w, out.c);
    result.v = out.v;
    return result;
}

double masked_loss(std::span<const float> logits, int bin, int reward) {
    if (bin < 0 || 2 * bin + 1 >= static_cast<int>(logits.size()))
        raise(ErrorCode::ShapeMismatch, "bin outside the logit vector");
    return masked_loss_grad(logits.data(), bin, reward).loss;
}

double success_probability(float fail_logit, float success_logit) {
    const float pair[2] = {fail_logit, success_logit};
    return masked_loss_grad(pair, 0, 1).p_success;
}

ImageGrid transform_patch(const ImageGrid& patch, int t) {
    const int n = patch.height;
    ImageGrid out(n, n, 0.0f);
    const int rot = t % 4;
    const bool mirror = t >= 4;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            int rr = r, cc = c;
            for (int k = 0; k < rot; ++k) { // +90 degrees: (c, r) -> (n-1-r, c)
                const int nc = n - 1 - rr;
                rr = cc;
                cc = nc;
            }
            if (mirror) cc = n - 1 - cc;
            std::memcpy(out.pixel(rr, cc), patch.pixel(r, c), 3 * sizeof(float));
        }
    }
    return out;
}

int transform_bin(int bin, int t, int n_bins) {
    const int rot = t % 4;
    int out = (bin + rot * (n_bins / 2)) % n_bins;
    if (t >= 4) out = (n_bins - 1 - out) % n_bins;
    return out;
}

TrainResult train(const ModelParams& start, std::span<const LabeledPatch> data,
                  const TrainConfig& cfg) {
    if (data.empty()) raise(ErrorCode::EmptyDataset, "training requires at least one record");
    if (cfg.learning_rate <= 0.0 || cfg.batch_size < 1)
        raise(ErrorCode::ConfigError, "learning rate must be > 0 and batch size >= 1");
    const int input = start.net.input_size;
    for (const LabeledPatch& r : data) {
        if (!r.patch || r.patch->height != input || r.patch->width != input)
            raise(ErrorCode::ShapeMismatch, "record patch does not match the net input size");
        if (r.bin < 0 || r.bin >= start.net.n_bins)
            raise(ErrorCode::ConfigError, "record bin out of range");
    }
    if (cfg.augment_rotations && start.net.n_bins % 2 != 0)
        raise(ErrorCode::ConfigError, "rotation augmentation needs an even bin count");

    NetT<float> net = to_net<float>(start);
    Gradients<float> grads;
    grads.match(net);
    Gradients<float> velocity;
    velocity.match(net);
    NetState<float> state;

    // samples are (record, transform) pairs; transform 0 is the identity
    const size_t n_transforms = cfg.augment_rotations ? 8 : 1;
    std::vector<size_t> successes, failures;
    for (size_t i = 0; i < data.size(); ++i)
        for (size_t t = 0; t < n_transforms; ++t)
            (data[i].reward ? successes : failures).push_back(i * n_transforms + t);
    const bool balanced = cfg.class_balance && !successes.empty() && !failures.empty();

    Rng rng(derive_seed(cfg.seed, 0x7121));
    std::vector<size_t> order(data.size() * n_transforms);
    std::iota(order.begin(), order.end(), size_t{0});

    const size_t steps_per_epoch =
        (data.size() + cfg.batch_size - 1) / static_cast<size_t>(cfg.batch_size);

    TrainResult result;
    result.curve.reserve(cfg.epochs);
    std::vector<size_t> batch;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (!balanced) { // fresh shuffle each epoch
            for (size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.uniform_int(i)]);
        }
        double loss_sum = 0.0;
        size_t n_seen = 0, n_correct = 0;
        for (size_t step = 0; step < steps_per_epoch; ++step) {
            batch.clear();
            if (balanced) {
                const int half = std::max(1, cfg.batch_size / 2);
                for (int i = 0; i < half; ++i)
                    batch.push_back(successes[rng.uniform_int(successes.size())]);
                for (int i = 0; i < cfg.batch_size - half; ++i)
                    batch.push_back(failures[rng.uniform_int(failures.size())]);
            } else {
                const size_t lo = step * cfg.batch_size;
                const size_t hi = std::min(lo + cfg.batch_size, order.size());
                for (size_t i = lo; i < hi; ++i) batch.push_back(order[i]);
            }
            if (batch.empty()) continue;

            for (auto& g : grads.weights) std::fill(g.begin(), g.end(), 0.0f);
            for (auto& g : grads.biases) std::fill(g.begin(), g.end(), 0.0f);
            for (const size_t sample : batch) {
                const LabeledPatch& r = data[sample / n_transforms];
                const int t = static_cast<int>(sample % n_transforms);
                const ImageGrid patch = t == 0 ? *r.patch : transform_patch(*r.patch, t);
                const int bin = transform_bin(r.bin, t, start.net.n_bins);
                net_forward(net, image_to_tensor_t<float>(patch), state, true);
                const TensorT<float>& logits = state.acts.back();
                const LossGrad<float> lg = masked_loss_grad(logits.v.data(), bin, r.reward);
                loss_sum += lg.loss;
                n_correct += ((lg.p_success > 0.5) == (r.reward == 1)) ? 1 : 0;
                ++n_seen;
                TensorT<float> d_out;
                d_out.resize(1, 1, logits.c);
                d_out.v[2 * bin] = lg.d0;
                d_out.v[2 * bin + 1] = lg.d1;
                net_backward(net, state, d_out, grads);
            }
            const float scale = 1.0f / static_cast<float>(batch.size());
            const float lr = static_cast<float>(cfg.learning_rate);
            const float mom = static_cast<float>(cfg.momentum);
            const float wd = static_cast<float>(cfg.weight_decay);
            for (size_t li = 0; li < net.weights.size(); ++li) {
                for (size_t i = 0; i < net.weights[li].size(); ++i) {
                    float& v = velocity.weights[li][i];
                    v = mom * v - lr * (grads.weights[li][i] * scale + wd * net.weights[li][i]);
                    net.weights[li][i] += v;
                }
                for (size_t i = 0; i < net.biases[li].size(); ++i) {
                    float& v = velocity.biases[li][i];
                    v = mom * v - lr * grads.biases[li][i] * scale; // no decay on biases
                    net.biases[li][i] += v;
                }
            }
        }
        result.curve.push_back(EpochStat{n_seen ? loss_sum / n_seen : 0.0,
                                         n_seen ? static_cast<double>(n_correct) / n_seen : 0.0});
    }

    result.params = start;
    result.params.weights = std::move(net.weights);
    result.params.biases = std::move(net.biases);
    return result;
}

void write_loss_curve_csv(const std::vector<EpochStat>& curve, const std::string& path) {
    std::ofstream f(path);
    if (!f) raise(ErrorCode::IoError, "cannot open for writing: " + path);
    f << "epoch,mean_loss,train_accuracy\n";
    for (size_t i = 0; i < curve.size(); ++i)
        f << i + 1 << ',' << curve[i].mean_loss << ',' << curve[i].train_accuracy << '\n';
}

namespace {

template <typename T>
GradCheckResult gradient_check_impl(const ModelParams& params, const ImageGrid& patch, int bin,
                                    int reward, double epsilon, int n_weights, uint64_t seed) {
    NetT<T> net = to_net<T>(params);
    NetState<T> state;
    ActivationTrace trace; // branch pattern the analytic gradient differentiates
    net_forward(net, image_to_tensor_t<T>(patch), state, true, &trace);
    const TensorT<T>& logits = state.acts.back();
    const LossGrad<T> lg = masked_loss_grad(logits.v.data(), bin, reward);
    Gradients<T> grads;
    grads.match(net);
    TensorT<T> d_out;
    d_out.resize(1, 1, logits.c);
    d_out.v[2 * bin] = lg.d0;
    d_out.v[2 * bin + 1] = lg.d1;
    net_backward(net, state, d_out, grads);

    GradCheckResult result;

    // mask contract: every non-active head parameter has exactly zero gradient
    const size_t head = grads.weights.size() - 1;
    const int cout = params.net.layers.back().out_channels;
    for (size_t i = 0; i < grads.weights[head].size(); ++i) {
        const int oc = static_cast<int>(i % cout);
        if (oc == 2 * bin || oc == 2 * bin + 1) continue;
        result.max_nonactive_grad =
            std::max(result.max_nonactive_grad, std::abs(static_cast<double>(grads.weights[head][i])));
    }
    for (int oc = 0; oc < cout; ++oc) {
        if (oc == 2 * bin || oc == 2 * bin + 1) continue;
        result.max_nonactive_grad =
            std::max(result.max_nonactive_grad, std::abs(static_cast<double>(grads.biases[head][oc])));
    }

    // finite differences in long double regardless of the analytic precision
    NetT<long double> fd_net = to_net<long double>(params);
    NetState<long double> fd_state;

    // flat index space across all weight and bias arrays
    std::vector<size_t> sizes;
    size_t total = 0;
    for (const auto& w : params.weights) {
        sizes.push_back(w.size());
        total += w.size();
    }
    for (const auto& b : params.biases) {
        sizes.push_back(b.size());
        total += b.size();
    }

    Rng rng(derive_seed(seed, 0xfd));
    const int n = static_cast<int>(std::min(static_cast<size_t>(n_weights), total));
    for (int trial = 0; trial < n; ++trial) {
        size_t flat = rng.uniform_int(total);
        size_t arr = 0;
        while (flat >= sizes[arr]) {
            flat -= sizes[arr];
            ++arr;
        }
        const bool is_weight = arr < params.weights.size();
        const size_t layer = is_weight ? arr : arr - params.weights.size();
        auto& fd_param = is_weight ? fd_net.weights[layer][flat] : fd_net.biases[layer][flat];
        const long double saved = fd_param;
        fd_param = saved + static_cast<long double>(epsilon);
        const double lp = record_loss(fd_net, patch, bin, reward, fd_state, &trace);
        fd_param = saved - static_cast<long double>(epsilon);
        const double lm = record_loss(fd_net, patch, bin, reward, fd_state, &trace);
        fd_param = saved;
        const double g_num = (lp - lm) / (2.0 * epsilon);
        const double g_ana = static_cast<double>(is_weight ? grads.weights[layer][flat]
                                                           : grads.biases[layer][flat]);
        const double denom = std::max({std::abs(g_ana), std::abs(g_num), 1e-8});
        result.max_rel_error = std::max(result.max_rel_error, std::abs(g_ana - g_num) / denom);
        ++result.n_checked;
    }
    return result;
}

} // namespace

GradCheckResult gradient_check(const ModelParams& params, const ImageGrid& patch, int bin,
                               int reward, double epsilon, Precision precision, int n_weights,
                               uint64_t seed) {
    if (epsilon <= 0.0) raise(ErrorCode::ConfigError, "epsilon must be > 0");
    if (patch.height != params.net.input_size || patch.width != params.net.input_size)
        raise(ErrorCode::ShapeMismatch, "patch does not match the net input size");
    return precision == Precision::Float64
               ? gradient_check_impl<double>(params, patch, bin, reward, epsilon, n_weights, seed)
               : gradient_check_impl<float>(params, patch, bin, reward, epsilon, n_weights, seed);
}

double predict_q(const ModelParams& params, const ImageGrid& patch, int bin) {
    if (patch.height != params.net.input_size || patch.width != params.net.input_size)
        raise(ErrorCode::ShapeMismatch, "patch does not match the net input size");
    if (bin < 0 || bin >= params.net.n_bins) raise(ErrorCode::ConfigError, "bin out of range");
    const TensorMap logits = forward(params, image_to_tensor(patch));
    return masked_loss_grad(logits.v.data(), bin, 1).p_success;
}

DensePrediction dense_predict(const ModelParams& params, const ImageGrid& image) {
    const TensorMap logits = forward(params, image_to_tensor(image));
    DensePrediction out;
    out.stride = params.net.total_stride();
    out.offset = params.net.receptive_field() / 2.0;
    out.scores = TensorMap(logits.height, logits.width, params.net.n_bins);
    for (int y = 0; y < logits.height; ++y) {
        for (int x = 0; x < logits.width; ++x) {
            const float* cell = &logits.v[(static_cast<size_t>(y) * logits.width + x) * logits.channels];
            float* dst = &out.scores.v[(static_cast<size_t>(y) * logits.width + x) * params.net.n_bins];
            for (int k = 0; k < params.net.n_bins; ++k)
                dst[k] = static_cast<float>(masked_loss_grad(cell, k, 1).p_success);
        }
    }
    return out;
}

// -- model file io ------------------------------------------------------------------

nlohmann::json netspec_to_json(const NetSpec& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerSpec& l : net.layers) {
        if (l.kind == LayerSpec::Kind::Conv)
            layers.push_back({{"type", "conv"},
                              {"k", l.kernel},
                              {"s", l.stride},
                              {"c", l.out_channels},
                              {"relu", l.relu}});
        else
            layers.push_back({{"type", "maxpool"}, {"k", l.kernel}, {"s", l.stride}});
    }
    return nlohmann::json{{"input_size", net.input_size}, {"n_bins", net.n_bins},
                          {"layers", std::move(layers)}};
}

NetSpec netspec_from_json(const nlohmann::json& j) {
    NetSpec net;
    net.input_size = j.at("input_size").get<int>();
    net.n_bins = j.at("n_bins").get<int>();
    for (const auto& l : j.at("layers")) {
        const std::string type = l.at("type").get<std::string>();
        if (type == "conv")
            net.layers.push_back(LayerSpec::conv(l.at("k").get<int>(), l.at("s").get<int>(),
                                                 l.at("c").get<int>(), l.at("relu").get<bool>()));
        else if (type == "maxpool")
            net.layers.push_back(LayerSpec::maxpool(l.at("k").get<int>(), l.at("s").get<int>()));
        else
            raise(ErrorCode::ConfigError, "unknown layer type: " + type);
    }
    net.validate();
    return net;
}

void save_model(const ModelParams& params, const std::string& path) {
    std::vector<float> payload;
    payload.reserve(params.total_floats());
    for (size_t i = 0; i < params.weights.size(); ++i) {
        payload.insert(payload.end(), params.weights[i].begin(), params.weights[i].end());
        payload.insert(payload.end(), params.biases[i].begin(), params.biases[i].end());
    }
    const uint32_t crc = crc32(payload.data(), payload.size() * sizeof(float));
    nlohmann::json header{{"magic", "grasplab-model"},
                          {"version", params.version},
                          {"net", netspec_to_json(params.net)},
                          {"init_seed", params.init_seed},
                          {"n_floats", payload.size()},
                          {"crc32", crc}};
    std::ofstream f(path, std::ios::binary);
    if (!f) raise(ErrorCode::IoError, "cannot open for writing: " + path);
    f << header.dump() << '\n';
    f.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!f) raise(ErrorCode::IoError, "write failed: " + path);
}

ModelParams load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) raise(ErrorCode::IoError, "cannot open for reading: " + path);
    std::string header_line;
    if (!std::getline(f, header_line)) raise(ErrorCode::IoError, "empty model file: " + path);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ModelLoadError, std::string("bad model header: ") + e.what());
    }
    if (header.value("magic", "") != "grasplab-model")
        raise(ErrorCode::VersionMismatch, "not a grasplab model file");

    ModelParams params;
    params.version = header.value("version", "");
    if (params.version != ModelParams{}.version)
        raise(ErrorCode::VersionMismatch, "unsupported model version: " + params.version);
    params.net = netspec_from_json(header.at("net"));
    params.init_seed = header.value("init_seed", uint64_t{0});

    // expected float count from the net spec itself
    size_t expected = 0;
    int cin = 3;
    std::vector<std::pair<size_t, size_t>> shapes; // (weights, biases) per conv layer
    for (const LayerSpec& l : params.net.layers) {
        if (l.kind != LayerSpec::Kind::Conv) continue;
        const size_t w = static_cast<size_t>(l.kernel) * l.kernel * cin * l.out_channels;
        shapes.emplace_back(w, l.out_channels);
        expected += w + l.out_channels;
        cin = l.out_channels;
    }
    if (header.at("n_floats").get<size_t>() != expected)
        raise(ErrorCode::VersionMismatch, "header float count does not match the net spec");

    std::vector<float> payload(expected);
    f.read(reinterpret_cast<char*>(payload.data()),
           static_cast<std::streamsize>(expected * sizeof(float)));
    if (static_cast<size_t>(f.gcount()) != expected * sizeof(float))
        raise(ErrorCode::ChecksumMismatch, "model payload truncated");
    if (crc32(payload.data(), payload.size() * sizeof(float)) != header.at("crc32").get<uint32_t>())
        raise(ErrorCode::ChecksumMismatch, "model payload checksum mismatch");

    size_t off = 0;
    for (const auto& [w, b] : shapes) {
        params.weights.emplace_back(payload.begin() + off, payload.begin() + off + w);
        off += w;
        params.biases.emplace_back(payload.begin() + off, payload.begin() + off + b);
        off += b;
    }
    return params;
}

NetSpec desk_net() {
    // Stride/kernel layout keeps every layer window aligned to the 8 px
    // dense stride, so sliding-window and dense inference agree exactly.
    // Most arithmetic sits in the first conv, which the dense pass shares
    // across overlapping windows.
    NetSpec net;
    net.input_size = 32;
    net.n_bins = 18;
    net.layers = {LayerSpec::conv(4, 2, 96, true), LayerSpec::maxpool(3, 2),
                  LayerSpec::conv(1, 1, 24, true), LayerSpec::conv(3, 1, 24, true),
                  LayerSpec::conv(5, 2, 32, true), LayerSpec::conv(1, 1, 36, false)};
    net.validate();
    return net;
}

NetSpec paper_net() {
    NetSpec net;
    net.input_size = 227;
    net.n_bins = 18;
    net.layers = {LayerSpec::conv(11, 4, 96, true), LayerSpec::maxpool(3, 2),
                  LayerSpec::conv(5, 2, 256, true), LayerSpec::conv(3, 1, 384, true),
                  LayerSpec::conv(3, 1, 384, true), LayerSpec::conv(3, 1, 256, true),
                  LayerSpec::conv(6, 1, 4096, true), LayerSpec::conv(1, 1, 1024, true),
                  LayerSpec::conv(1, 1, 36, false)};
    net.validate();
    return net;
}

} // namespace grasplab
