#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grasplab/render.hpp"

namespace grasplab {

// H x W x C float map, row-major: v[(y * width + x) * channels + c]
struct TensorMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> v;

    TensorMap() = default;
    TensorMap(int h, int w, int c) : height(h), width(w), channels(c),
                                     v(static_cast<size_t>(h) * w * c, 0.0f) {}
    float& at(int y, int x, int c) { return v[(static_cast<size_t>(y) * width + x) * channels + c]; }
    float at(int y, int x, int c) const { return v[(static_cast<size_t>(y) * width + x) * channels + c]; }
};

struct LayerSpec {
    enum class Kind { Conv, MaxPool };
    Kind kind = Kind::Conv;
    int kernel = 1;
    int stride = 1;
    int out_channels = 0; // Conv only
    bool relu = false;    // Conv only

    static LayerSpec conv(int k, int s, int c, bool relu) { return {Kind::Conv, k, s, c, relu}; }
    static LayerSpec maxpool(int k, int s) { return {Kind::MaxPool, k, s, 0, false}; }
};

struct NetSpec {
    std::vector<LayerSpec> layers;
    int input_size = 32; // square network input, px
    int n_bins = 18;

    int receptive_field() const;
    int total_stride() const;
    // spatial side after all layers for a square input (valid windows)
    int output_spatial(int input) const;
    int conv_layer_count() const;
    // must end in Conv(1,1,2*n_bins, no relu), fit the input exactly
    // (1x1 spatial output) and keep receptive_field <= input_size
    void validate() const;
};

struct ModelParams {
    NetSpec net;
    // per conv layer; weights laid out ((ky*k + kx)*c_in + ci)*c_out + co
    std::vector<std::vector<float>> weights;
    std::vector<std::vector<float>> biases;
    std::string version = "grasplab-net-1";
    uint64_t init_seed = 0;

    size_t total_floats() const;
};

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 1e-4; // L2 penalty applied with the gradient step
    int batch_size = 32;
    int epochs = 20;
    uint64_t seed = 0;
    bool class_balance = true; // 1:1 success/failure minibatch sampling
    // Expand every record with its 90-degree rotations and mirrors. These are
    // exact on the pixel grid and the angular bin moves with them, so labels
    // stay valid: rot90 shifts the bin by +n_bins/2 (mod n_bins, pi-periodic)
    // and mirroring maps bin k to n_bins-1-k.
    bool augment_rotations = true;
};

// one training example: net-input-size patch + active bin + binary reward
struct LabeledPatch {
    const ImageGrid* patch = nullptr;
    int bin = 0;
    int reward = 0;
};

struct EpochStat {
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStat> curve;
};

// -- operations --------------------------------------------------------------

int angle_to_bin(double phi, int n_bins = 18);     // floor(phi / (pi/n_bins))
double bin_to_angle(int bin, int n_bins = 18);     // bin center (bin + 0.5) * pi / n_bins

ModelParams init_params(const NetSpec& net, uint64_t seed); // He fan-in init

TensorMap image_to_tensor(const ImageGrid& image);

// Full fully-convolutional pass; output is H' x W' x 2*n_bins logits with
// per-bin (fail, success) pairs at channels (2k, 2k+1).
TensorMap forward(const ModelParams& params, const TensorMap& input);

// Cross-entropy of the active bin's two logits only; gradients of every
// other bin are exactly zero.
double masked_loss(std::span<const float> logits, int bin, int reward);

// softmax success probability of one (fail, success) logit pair
double success_probability(float fail_logit, float success_logit);

TrainResult train(const ModelParams& start, std::span<const LabeledPatch> data,
                  const TrainConfig& cfg);

// transform t in [0, 8): rotation by 90*(t%4) degrees, mirrored when t >= 4
ImageGrid transform_patch(const ImageGrid& patch, int t);
int transform_bin(int bin, int t, int n_bins = 18);

void write_loss_curve_csv(const std::vector<EpochStat>& curve, const std::string& path);

enum class Precision { Float32, Float64 };

struct GradCheckResult {
    double max_rel_error = 0.0;      // vs central differences over sampled weights
    double max_nonactive_grad = 0.0; // largest |analytic gradient| over non-active head params
    int n_checked = 0;
};

// Central finite differences of masked_loss against the analytic gradient for
// n_weights randomly chosen parameters. The finite-difference reference always
// evaluates in long double; `precision` selects the analytic side.
GradCheckResult gradient_check(const ModelParams& params, const ImageGrid& patch, int bin,
                               int reward, double epsilon, Precision precision,
                               int n_weights = 200, uint64_t seed = 1);

// softmax success probability of `bin` for a patch of exactly the net input size
double predict_q(const ModelParams& params, const ImageGrid& patch, int bin);

struct DensePrediction {
    TensorMap scores;  // H' x W' x n_bins success probabilities
    int stride = 0;    // product of all layer strides
    double offset = 0; // receptive_field / 2; cell (i, j) is the patch centered
                       // at pixel (offset + j * stride, offset + i * stride)
};

DensePrediction dense_predict(const ModelParams& params, const ImageGrid& image);

void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

nlohmann::json netspec_to_json(const NetSpec& net);
NetSpec netspec_from_json(const nlohmann::json& j);

NetSpec desk_net();  // input 32, receptive field 32, stride 8
NetSpec paper_net(); // AlexNet-style valid-padding preset, input 227

} // namespace grasplab
