#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "adaptcast/memory_queue.hpp"
#include "adaptcast/time_series.hpp"

namespace adaptcast {

enum class Activation { LeakyRelu, Relu, Identity };

std::string_view to_string(Activation act);
Activation parse_activation(std::string_view name);

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct DenseLayer {
    Matrix weights;  // fan_out x fan_in
    std::vector<double> bias;
    Activation activation = Activation::Identity;
    double slope = 0.01;  // LeakyRelu only

    std::size_t fan_in() const noexcept { return weights.cols; }
    std::size_t fan_out() const noexcept { return weights.rows; }
};

struct LayerGradient {
    Matrix weights;
    std::vector<double> bias;
};

/// One entry per layer, shaped like the layer's parameters.
using Gradients = std::vector<LayerGradient>;

struct AdamState {
    Gradients first_moment;
    Gradients second_moment;
    std::uint64_t step = 0;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double leaky_slope = 0.01;
    /// L2 penalty coefficient added to weight gradients during training. 0 disables.
    double weight_decay = 0.0;
    std::size_t epochs_per_step = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Fully connected network: LeakyReLU hidden layers, ReLU output, plus its
/// Adam optimizer state.
struct MlpModel {
    std::vector<DenseLayer> layers;
    AdamState adam;

    std::size_t input_dim() const { return layers.front().fan_in(); }
    std::size_t output_dim() const { return layers.back().fan_out(); }
    /// {input, hidden..., output}
    std::vector<std::size_t> architecture() const;
    std::size_t parameter_count() const;

    /// Throws ShapeError if layer shapes do not chain or the Adam state does
    /// not mirror them.
    void validate() const;
};

/// He-Normal weights (N(0, 2/fan_in)), zero biases, zeroed Adam state.
/// `architecture` is {input, hidden..., output}.
MlpModel init_mlp(std::span<const std::size_t> architecture, const TrainConfig& cfg);

std::vector<double> forward(const MlpModel& model, std::span<const double> x);

double mse_loss(std::span<const double> predicted, std::span<const double> target);

/// Exact gradient of mse_loss(forward(model, x), y). Activation derivatives at
/// exactly zero take the non-negative branch.
Gradients backward(const MlpModel& model, std::span<const double> x, std::span<const double> y);

Gradients zero_gradients(const MlpModel& model);

/// Bias-corrected Adam update; advances the step counter by one.
void adam_step(MlpModel& model, const Gradients& grads, const TrainConfig& cfg);

/// One backward pass and one Adam step on a single example.
void train_example(MlpModel& model, const WindowedExample& example, const TrainConfig& cfg);

/// cfg.epochs_per_step passes over the memory, oldest to newest, one Adam step per example.
void train_increment(MlpModel& model, const MemoryQueue& memory, const TrainConfig& cfg);

/// Same schedule over an arbitrary chronological example list.
void train_epochs(MlpModel& model, std::span<const WindowedExample> examples, const TrainConfig& cfg);

/// FNV-1a over the bit patterns of every parameter and the step counter.
std::uint64_t parameter_checksum(const MlpModel& model);

// Checkpoints are line-oriented text; every double is written as a hex float
// so a load reproduces the model bit for bit. See README for the layout.
void save_checkpoint(std::ostream& out, const MlpModel& model);
MlpModel load_checkpoint(std::istream& in);

}  // namespace adaptcast
