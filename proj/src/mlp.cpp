#include "adaptcast/mlp.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "adaptcast/errors.hpp"

namespace adaptcast {

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::LeakyRelu: return "leaky-relu";
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    if (name == "leaky-relu") return Activation::LeakyRelu;
    if (name == "relu") return Activation::Relu;
    if (name == "identity") return Activation::Identity;
    throw ConfigError("unknown activation '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in (0, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(leaky_slope > 0.0)) throw ConfigError("leaky_slope must be positive");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
    if (epochs_per_step == 0) throw ConfigError("epochs must be at least 1");
}

std::vector<std::size_t> MlpModel::architecture() const {
    std::vector<std::size_t> arch;
    if (layers.empty()) return arch;
    arch.push_back(input_dim());
    for (const auto& layer : layers) arch.push_back(layer.fan_out());
    return arch;
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weights.data.size() + layer.bias.size();
    return n;
}

namespace {

bool same_shape(const LayerGradient& g, const DenseLayer& layer) {
    return g.weights.rows == layer.weights.rows && g.weights.cols == layer.weights.cols &&
           g.weights.data.size() == layer.weights.data.size() && g.bias.size() == layer.bias.size();
}

void check_shapes(const Gradients& grads, const MlpModel& model, const char* what) {
    if (grads.size() != model.layers.size()) throw ShapeError(std::string(what) + ": layer count mismatch");
    for (std::size_t k = 0; k < grads.size(); ++k) {
        if (!same_shape(grads[k], model.layers[k])) {
            throw ShapeError(std::string(what) + ": shape mismatch at layer " + std::to_string(k));
        }
    }
}

}  // namespace

void MlpModel::validate() const {
    if (layers.empty()) throw ShapeError("model has no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& layer = layers[k];
        if (layer.weights.data.size() != layer.weights.rows * layer.weights.cols ||
            layer.bias.size() != layer.fan_out() || layer.fan_in() == 0 || layer.fan_out() == 0) {
            throw ShapeError("malformed layer " + std::to_string(k));
        }
        if (k > 0 && layer.fan_in() != layers[k - 1].fan_out()) {
            throw ShapeError("layer " + std::to_string(k) + " fan_in does not match previous fan_out");
        }
    }
    check_shapes(adam.first_moment, *this, "adam first moment");
    check_shapes(adam.second_moment, *this, "adam second moment");
}

Gradients zero_gradients(const MlpModel& model) {
    Gradients g;
    g.reserve(model.layers.size());
    for (const auto& layer : model.layers) {
        g.push_back({Matrix(layer.fan_out(), layer.fan_in()), std::vector<double>(layer.fan_out(), 0.0)});
    }
    return g;
}

MlpModel init_mlp(std::span<const std::size_t> architecture, const TrainConfig& cfg) {
    cfg.validate();
    if (architecture.size() < 2) throw ConfigError("architecture needs at least input and output sizes");
    for (auto n : architecture) {
        if (n == 0) throw ConfigError("layer sizes must be at least 1");
    }

    std::mt19937_64 rng(cfg.seed);
    MlpModel model;
    for (std::size_t k = 1; k < architecture.size(); ++k) {
        const std::size_t fan_in = architecture[k - 1];
        const std::size_t fan_out = architecture[k];
        DenseLayer layer;
        layer.weights = Matrix(fan_out, fan_in);
        layer.bias.assign(fan_out, 0.0);
        const bool is_output = k + 1 == architecture.size();
        layer.activation = is_output ? Activation::Relu : Activation::LeakyRelu;
        layer.slope = cfg.leaky_slope;
        std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        for (double& w : layer.weights.data) w = he(rng);
        model.layers.push_back(std::move(layer));
    }
    model.adam.first_moment = zero_gradients(model);
    model.adam.second_moment = zero_gradients(model);
    model.adam.step = 0;
    return model;
}

namespace {

double activate(double z, const DenseLayer& layer) {
    switch (layer.activation) {
        case Activation::LeakyRelu: return z < 0.0 ? layer.slope * z : z;
        case Activation::Relu: return z < 0.0 ? 0.0 : z;
        case Activation::Identity: return z;
    }
    return z;
}

double activation_derivative(double z, const DenseLayer& layer) {
    switch (layer.activation) {
        case Activation::LeakyRelu: return z < 0.0 ? layer.slope : 1.0;
        case Activation::Relu: return z < 0.0 ? 0.0 : 1.0;
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

struct ForwardTrace {
    std::vector<std::vector<double>> inputs;  // input to each layer
    std::vector<std::vector<double>> pre;     // pre-activations per layer
    std::vector<double> output;
};

ForwardTrace forward_trace(const MlpModel& model, std::span<const double> x) {
    if (model.layers.empty()) throw ShapeError("model has no layers");
    if (x.size() != model.input_dim()) {
        throw ShapeError("input has " + std::to_string(x.size()) + " entries, model expects " +
                         std::to_string(model.input_dim()));
    }
    ForwardTrace trace;
    std::vector<double> a(x.begin(), x.end());
    for (const auto& layer : model.layers) {
        std::vector<double> z(layer.fan_out());
        for (std::size_t r = 0; r < layer.fan_out(); ++r) {
            double s = layer.bias[r];
            const double* row = &layer.weights.data[r * layer.fan_in()];
            for (std::size_t c = 0; c < layer.fan_in(); ++c) s += row[c] * a[c];
            z[r] = s;
        }
        std::vector<double> next(z.size());
        for (std::size_t r = 0; r < z.size(); ++r) next[r] = activate(z[r], layer);
        trace.inputs.push_back(std::move(a));
        trace.pre.push_back(std::move(z));
        a = std::move(next);
    }
    trace.output = std::move(a);
    return trace;
}

}  // namespace

std::vector<double> forward(const MlpModel& model, std::span<const double> x) {
    return forward_trace(model, x).output;
}

double mse_loss(std::span<const double> predicted, std::span<const double> target) {
    if (predicted.size() != target.size() || predicted.empty()) {
        throw ShapeError("mse_loss needs equal, non-zero lengths");
    }
    double s = 0.0;
    for (std::size_t d = 0; d < predicted.size(); ++d) {
        double e = predicted[d] - target[d];
        s += e * e;
    }
    return s / static_cast<double>(predicted.size());
}

Gradients backward(const MlpModel& model, std::span<const double> x, std::span<const double> y) {
    auto trace = forward_trace(model, x);
    if (y.size() != model.output_dim()) {
        throw ShapeError("target has " + std::to_string(y.size()) + " entries, model outputs " +
                         std::to_string(model.output_dim()));
    }

    // dJ/da for the current layer's output.
    const double scale = 2.0 / static_cast<double>(y.size());
    std::vector<double> upstream(y.size());
    for (std::size_t d = 0; d < y.size(); ++d) upstream[d] = scale * (trace.output[d] - y[d]);

    Gradients grads = zero_gradients(model);
    for (std::size_t k = model.layers.size(); k-- > 0;) {
        const auto& layer = model.layers[k];
        const auto& z = trace.pre[k];
        const auto& input = trace.inputs[k];
        std::vector<double> delta(layer.fan_out());
        for (std::size_t r = 0; r < delta.size(); ++r) {
            delta[r] = upstream[r] * activation_derivative(z[r], layer);
            if (!std::isfinite(delta[r])) {
                throw NumericError("non-finite gradient at layer " + std::to_string(k));
            }
        }
        auto& g = grads[k];
        for (std::size_t r = 0; r < layer.fan_out(); ++r) {
            g.bias[r] = delta[r];
            double* row = &g.weights.data[r * layer.fan_in()];
            for (std::size_t c = 0; c < layer.fan_in(); ++c) row[c] = delta[r] * input[c];
        }
        if (k == 0) break;
        std::vector<double> below(layer.fan_in(), 0.0);
        for (std::size_t r = 0; r < layer.fan_out(); ++r) {
            const double* row = &layer.weights.data[r * layer.fan_in()];
            for (std::size_t c = 0; c < layer.fan_in(); ++c) below[c] += row[c] * delta[r];
        }
        upstream = std::move(below);
    }
    return grads;
}

void adam_step(MlpModel& model, const Gradients& grads, const TrainConfig& cfg) {
    check_shapes(grads, model, "adam_step gradients");
    auto& adam = model.adam;
    ++adam.step;
    const double t = static_cast<double>(adam.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);

    auto update = [&](double& w, double& m, double& v, double g) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m / correction1;
        const double v_hat = v / correction2;
        w -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    };

    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        auto& layer = model.layers[k];
        auto& m = adam.first_moment[k];
        auto& v = adam.second_moment[k];
        const auto& g = grads[k];
        for (std::size_t i = 0; i < layer.weights.data.size(); ++i) {
            update(layer.weights.data[i], m.weights.data[i], v.weights.data[i], g.weights.data[i]);
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
            update(layer.bias[i], m.bias[i], v.bias[i], g.bias[i]);
        }
    }
}

void train_example(MlpModel& model, const WindowedExample& example, const TrainConfig& cfg) {
    auto grads = backward(model, example.x, example.y);
    if (cfg.weight_decay > 0.0) {
        for (std::size_t k = 0; k < grads.size(); ++k) {
            const auto& w = model.layers[k].weights.data;
            for (std::size_t i = 0; i < w.size(); ++i) grads[k].weights.data[i] += cfg.weight_decay * w[i];
        }
    }
    adam_step(model, grads, cfg);
}

void train_increment(MlpModel& model, const MemoryQueue& memory, const TrainConfig& cfg) {
    if (memory.empty()) throw InsufficientDataError("cannot train on an empty memory");
    for (std::size_t epoch = 0; epoch < cfg.epochs_per_step; ++epoch) {
        for (const auto& example : memory) train_example(model, example, cfg);
    }
}

void train_epochs(MlpModel& model, std::span<const WindowedExample> examples, const TrainConfig& cfg) {
    if (examples.empty()) throw InsufficientDataError("cannot train on an empty example list");
    for (std::size_t epoch = 0; epoch < cfg.epochs_per_step; ++epoch) {
        for (const auto& example : examples) train_example(model, example, cfg);
    }
}

std::uint64_t parameter_checksum(const MlpModel& model) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint64_t bits) {
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    auto mix_double = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        mix(bits);
    };
    for (const auto& layer : model.layers) {
        for (double w : layer.weights.data) mix_double(w);
        for (double b : layer.bias) mix_double(b);
    }
    mix(model.adam.step);
    return h;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kMagic = "adaptcast-mlp-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, res.ptr);
}

double unhex(const std::string& token) {
    double v = 0.0;
    std::string_view s = token;
    bool negative = false;
    if (!s.empty() && s.front() == '-') {
        negative = true;
        s.remove_prefix(1);
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError("checkpoint: bad number '" + token + "'");
    return negative ? -v : v;
}

void write_row(std::ostream& out, std::string_view tag, const std::vector<double>& values) {
    out << tag;
    for (double v : values) out << ' ' << hex(v);
    out << '\n';
}

std::vector<double> read_row(std::istream& in, std::string_view tag, std::size_t count) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("checkpoint: missing '" + std::string(tag) + "' row");
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word != tag) throw DataError("checkpoint: expected '" + std::string(tag) + "', found '" + word + "'");
    std::vector<double> values;
    values.reserve(count);
    while (ss >> word) values.push_back(unhex(word));
    if (values.size() != count) throw DataError("checkpoint: wrong value count in '" + std::string(tag) + "'");
    return values;
}

template <typename T>
T read_field(std::istream& in, std::string_view tag) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("checkpoint: missing '" + std::string(tag) + "'");
    std::istringstream ss(line);
    std::string word;
    T value{};
    if (!(ss >> word >> value) || word != tag) throw DataError("checkpoint: malformed '" + std::string(tag) + "'");
    return value;
}

}  // namespace

void save_checkpoint(std::ostream& out, const MlpModel& model) {
    model.validate();
    out << kMagic << ' ' << kVersion << '\n';
    out << "step " << model.adam.step << '\n';
    out << "layers " << model.layers.size() << '\n';
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        const auto& layer = model.layers[k];
        out << "layer " << layer.fan_in() << ' ' << layer.fan_out() << ' ' << to_string(layer.activation) << ' '
            << hex(layer.slope) << '\n';
        write_row(out, "weights", layer.weights.data);
        write_row(out, "bias", layer.bias);
        write_row(out, "m_weights", model.adam.first_moment[k].weights.data);
        write_row(out, "m_bias", model.adam.first_moment[k].bias);
        write_row(out, "v_weights", model.adam.second_moment[k].weights.data);
        write_row(out, "v_bias", model.adam.second_moment[k].bias);
    }
    out << "end\n";
}

MlpModel load_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("checkpoint: empty input");
    {
        std::istringstream ss(line);
        std::string magic;
        int version = 0;
        ss >> magic >> version;
        if (magic != kMagic) throw DataError("checkpoint: bad magic");
        if (version != kVersion) throw DataError("checkpoint: unsupported version " + std::to_string(version));
    }
    MlpModel model;
    model.adam.step = read_field<std::uint64_t>(in, "step");
    const auto count = read_field<std::size_t>(in, "layers");
    for (std::size_t k = 0; k < count; ++k) {
        if (!std::getline(in, line)) throw DataError("checkpoint: truncated");
        std::istringstream ss(line);
        std::string tag, act, slope;
        std::size_t fan_in = 0, fan_out = 0;
        if (!(ss >> tag >> fan_in >> fan_out >> act >> slope) || tag != "layer") {
            throw DataError("checkpoint: malformed layer header");
        }
        DenseLayer layer;
        layer.activation = parse_activation(act);
        layer.slope = unhex(slope);
        layer.weights = Matrix(fan_out, fan_in);
        layer.weights.data = read_row(in, "weights", fan_in * fan_out);
        layer.bias = read_row(in, "bias", fan_out);
        LayerGradient m{Matrix(fan_out, fan_in), {}}, v{Matrix(fan_out, fan_in), {}};
        m.weights.data = read_row(in, "m_weights", fan_in * fan_out);
        m.bias = read_row(in, "m_bias", fan_out);
        v.weights.data = read_row(in, "v_weights", fan_in * fan_out);
        v.bias = read_row(in, "v_bias", fan_out);
        model.layers.push_back(std::move(layer));
        model.adam.first_moment.push_back(std::move(m));
        model.adam.second_moment.push_back(std::move(v));
    }
    if (!std::getline(in, line) || line != "end") throw DataError("checkpoint: missing end marker");
    model.validate();
    return model;
}

}  // namespace adaptcast
