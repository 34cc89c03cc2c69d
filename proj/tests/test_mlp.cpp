#include <cmath>
#include <random>
#include <sstream>

#include "adaptcast/errors.hpp"
#include "adaptcast/memory_queue.hpp"
#include "adaptcast/mlp.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace adaptcast;

namespace {

MlpModel unit_chain() {
    const std::vector<std::size_t> arch{1, 1, 1};
    auto m = init_mlp(arch, TrainConfig{});
    for (auto& l : m.layers) {
        l.weights.data = {1.0};
        l.bias = {0.0};
    }
    return m;
}

WindowedExample example(std::vector<double> x, std::vector<double> y) {
    WindowedExample e;
    e.x = std::move(x);
    e.y = std::move(y);
    return e;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("initialisation is deterministic and biases start at zero") {
    const std::vector<std::size_t> arch{7, 16, 8, 3};
    TrainConfig cfg;
    cfg.seed = 42;
    const auto a = init_mlp(arch, cfg);
    const auto b = init_mlp(arch, cfg);
    REQUIRE(a.layers.size() == 3);
    for (std::size_t k = 0; k < a.layers.size(); ++k) {
        CHECK(a.layers[k].weights == b.layers[k].weights);
        for (double v : a.layers[k].bias) CHECK(v == 0.0);
    }
    CHECK(a.layers[0].activation == Activation::LeakyRelu);
    CHECK(a.layers[2].activation == Activation::Relu);
    CHECK(a.adam.step == 0);
    cfg.seed = 43;
    CHECK(init_mlp(arch, cfg).layers[0].weights != a.layers[0].weights);
    CHECK(a.architecture() == arch);
    CHECK(a.parameter_count() == 7 * 16 + 16 + 16 * 8 + 8 + 8 * 3 + 3);
}

TEST_CASE("he normal variance") {
    const std::vector<std::size_t> arch{100, 100, 1};
    const auto m = init_mlp(arch, TrainConfig{});
    const auto& w = m.layers[0].weights.data;
    REQUIRE(w.size() == 10000);
    const double var = oracle::definitional_std(w) * oracle::definitional_std(w);
    CHECK(std::fabs(var - 0.02) < 0.1 * 0.02);
}

TEST_CASE("forward hand cases") {
    const auto m = unit_chain();
    const std::vector<double> neg{-1.0}, pos{2.0};
    CHECK(forward(m, neg)[0] == 0.0);
    CHECK(forward(m, pos)[0] == 2.0);

    auto zero = init_mlp(std::vector<std::size_t>{3, 4, 2}, TrainConfig{});
    for (auto& l : zero.layers) std::fill(l.weights.data.begin(), l.weights.data.end(), 0.0);
    const std::vector<double> x{1, -2, 3};
    CHECK(forward(zero, x) == std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(forward(zero, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("mse hand cases") {
    const std::vector<double> a{1, 0}, z{0, 0}, three{3}, one{1};
    CHECK(mse_loss(a, a) == 0.0);
    CHECK(mse_loss(a, z) == 0.5);
    CHECK(mse_loss(three, one) == 4.0);
}

TEST_CASE("gradients vanish at the target") {
    const std::vector<std::size_t> arch{3, 5, 2};
    TrainConfig cfg;
    cfg.seed = 9;
    const auto m = init_mlp(arch, cfg);
    const std::vector<double> x{0.2, 0.7, 0.1};
    const auto y = forward(m, x);
    for (const auto& g : backward(m, x, y)) {
        for (double v : g.weights.data) CHECK(v == 0.0);
        for (double v : g.bias) CHECK(v == 0.0);
    }
}

TEST_CASE("dead output unit passes no gradient") {
    auto m = unit_chain();
    m.layers[1].weights.data = {-1.0};
    const std::vector<double> x{2.0}, y{0.0};
    const auto g = backward(m, x, y);
    CHECK(g[1].weights.data[0] == 0.0);
    CHECK(g[1].bias[0] == 0.0);
    CHECK(g[0].weights.data[0] == 0.0);
}

TEST_CASE("backprop matches finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> width(1, 8);
    std::uniform_int_distribution<std::size_t> depth(1, 3);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = 0.0;
    for (int net = 0; net < 50; ++net) {
        std::vector<std::size_t> arch{width(rng)};
        const std::size_t layers = depth(rng);
        for (std::size_t k = 0; k < layers; ++k) arch.push_back(width(rng));
        TrainConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(net);
        auto m = init_mlp(arch, cfg);
        for (auto& l : m.layers) for (auto& b : l.bias) b = 0.1 * normal(rng);
        std::vector<double> x(arch.front()), y(arch.back());
        for (auto& v : x) v = normal(rng);
        for (auto& v : y) v = std::fabs(normal(rng));
        const auto check = oracle::finite_difference_check(m, x, y, backward(m, x, y));
        worst = std::max(worst, check.max_relative_error);
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("first adam step has the closed form") {
    auto m = unit_chain();
    auto g = zero_gradients(m);
    g[0].weights.data[0] = 0.3;
    g[1].bias[0] = -2.5;
    TrainConfig cfg;
    const double w0 = m.layers[0].weights.data[0];
    const double b0 = m.layers[1].bias[0];
    const double untouched = m.layers[1].weights.data[0];
    adam_step(m, g, cfg);
    CHECK(std::fabs(m.layers[0].weights.data[0] - oracle::adam_first_step(w0, 0.3, 1e-3, 1e-8)) <= 1e-12);
    CHECK(std::fabs(m.layers[1].bias[0] - oracle::adam_first_step(b0, -2.5, 1e-3, 1e-8)) <= 1e-12);
    CHECK(m.layers[1].weights.data[0] == untouched);
    CHECK(m.adam.step == 1);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
    auto m = init_mlp(std::vector<std::size_t>{4, 6, 2}, TrainConfig{});
    const auto before = m.layers;
    adam_step(m, zero_gradients(m), TrainConfig{});
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        CHECK(m.layers[k].weights == before[k].weights);
        CHECK(m.layers[k].bias == before[k].bias);
    }
}

TEST_CASE("step counter advances by memory size times epochs") {
    const std::vector<std::size_t> arch{3, 4, 1};
    for (std::size_t k : {1u, 4u, 9u}) {
        for (std::size_t e : {1u, 3u}) {
            TrainConfig cfg;
            cfg.epochs_per_step = e;
            auto m = init_mlp(arch, cfg);
            MemoryQueue mem(k);
            for (std::size_t i = 0; i < k + 2; ++i) mem.append(example({0.1, 0.2, 0.3 + 0.01 * double(i)}, {0.5}));
            train_increment(m, mem, cfg);
            CHECK(m.adam.step == k * e);
        }
    }
}

TEST_CASE("training converges on a single example") {
    TrainConfig cfg;
    cfg.seed = 3;
    cfg.learning_rate = 0.01;
    auto m = init_mlp(std::vector<std::size_t>{4, 8, 1}, cfg);
    // Reachable target: positive output bias alone can fit it.
    const auto ex = example({0.5, 0.4, 0.3, 0.2}, {0.8});
    const double initial = mse_loss(forward(m, ex.x), ex.y);
    REQUIRE(initial > 0.0);
    for (int i = 0; i < 200; ++i) train_example(m, ex, cfg);
    CHECK(mse_loss(forward(m, ex.x), ex.y) < 1e-3 * initial);
}

TEST_CASE("checkpoint round trip is bit exact") {
    TrainConfig cfg;
    cfg.seed = 17;
    auto m = init_mlp(std::vector<std::size_t>{5, 7, 3}, cfg);
    for (int i = 0; i < 5; ++i) train_example(m, example({0.1, 0.2, 0.3, 0.4, 0.5}, {0.3, 0.2, 0.1}), cfg);
    std::stringstream buf;
    save_checkpoint(buf, m);
    const auto back = load_checkpoint(buf);
    CHECK(parameter_checksum(back) == parameter_checksum(m));
    CHECK(back.adam.step == m.adam.step);
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        CHECK(back.layers[k].weights == m.layers[k].weights);
        CHECK(back.layers[k].bias == m.layers[k].bias);
        CHECK(back.adam.first_moment[k].weights == m.adam.first_moment[k].weights);
        CHECK(back.adam.second_moment[k].bias == m.adam.second_moment[k].bias);
    }
    std::stringstream bad("adaptcast-mlp-checkpoint 1\nstep x\n");
    CHECK_THROWS(load_checkpoint(bad));
}

TEST_CASE("invalid training settings are rejected") {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.beta1 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    cfg.epochs_per_step = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // TEST_SUITE
