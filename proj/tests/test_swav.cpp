#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qclust/errors.hpp"
#include "qclust/pipeline.hpp"
#include "qclust/swav.hpp"

using namespace qclust;
using namespace qclust::swav;

namespace {

FeatureMatrix random_features(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::normal_distribution<double> g(0.0, 1.0);
    FeatureMatrix f{Matrix(n, d), {}};
    for (auto& v : f.values.data()) v = g(rng);
    for (std::size_t j = 0; j < d; ++j) f.dim_names.push_back("f" + std::to_string(j));
    return f;
}

// Max abs error over the FD vector's infinity norm.
double relative_error(const std::vector<double>& analytic, const std::vector<double>& fd) {
    double scale = 1e-8, err = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
        scale = std::max(scale, std::abs(fd[i]));
        err = std::max(err, std::abs(analytic[i] - fd[i]));
    }
    return err / scale;
}

struct Instance {
    vqc::AnsatzParams params;
    SwAVHead head;
    qfm::MapperConfig mapper;
    FeatureMatrix view1;
    std::vector<std::size_t> assignments;
};

Instance random_instance(std::uint64_t seed, std::size_t depth, std::size_t batch, std::size_t n_prototypes) {
    std::mt19937_64 rng(seed);
    Instance in;
    in.mapper = {.d_in = 7, .d_out = 4, .scale = 1.0};
    in.params = vqc::init_params(qfm::required_qubits(in.mapper), depth, rng());
    in.head = make_head(n_prototypes, in.mapper.d_out, rng());
    in.view1 = random_features(rng, batch, in.mapper.d_in);
    for (std::size_t i = 0; i < batch; ++i) in.assignments.push_back(rng() % n_prototypes);
    return in;
}

void check_gradients(const Instance& in, KlDirection dir) {
    const auto grads = loss_gradients(in.params, in.head, in.mapper, in.view1, in.assignments, dir);
    CHECK(grads.loss == doctest::Approx(batch_loss(in.params, in.head, in.mapper, in.view1, in.assignments, dir)));

    auto theta_loss = [&](const std::vector<double>& theta) {
        auto p = in.params;
        p.angles.data() = theta;
        return batch_loss(p, in.head, in.mapper, in.view1, in.assignments, dir);
    };
    if (in.params.size() > 0) {
        const auto fd = oracle::fd_gradient(theta_loss, in.params.angles.data());
        CHECK(relative_error(grads.theta, fd) < 1e-4);
    }

    auto proto_loss = [&](const std::vector<double>& c) {
        auto h = in.head;
        h.prototypes.data() = c;
        return batch_loss(in.params, h, in.mapper, in.view1, in.assignments, dir);
    };
    const auto fd = oracle::fd_gradient(proto_loss, in.head.prototypes.data());
    CHECK(relative_error(grads.prototypes.data(), fd) < 1e-4);
}

}  // namespace

TEST_CASE("targets worked value and exact sums") {
    const auto t = swav_targets(3, 10, 0.1);
    REQUIRE(t.size() == 10);
    CHECK(t[3] == doctest::Approx(0.91).epsilon(1e-15));
    for (std::size_t i = 0; i < 10; ++i)
        if (i != 3) CHECK(t[i] == doctest::Approx(0.01).epsilon(1e-15));

    const auto one_hot = swav_targets(1, 4, 0.0);
    CHECK(one_hot == std::vector<double>{0, 1, 0, 0});

    for (std::size_t np : {1u, 2u, 3u, 5u, 7u, 10u, 20u, 33u, 64u}) {
        for (double eps : {0.0, 0.01, 0.1, 0.25, 0.3, 0.5, 0.9, 0.99}) {
            for (std::size_t k = 0; k < np; ++k) {
                const auto p = swav_targets(k, np, eps);
                double sum = 0.0;
                for (double v : p) sum += v;
                CHECK(sum == 1.0);
                for (std::size_t i = 0; i < np; ++i) {
                    // the peak absorbs the rounding of the sequential sum
                    CHECK(p[i] >= eps / static_cast<double>(np) - 1e-14);
                    CHECK(p[i] <= 1.0 - eps + eps / static_cast<double>(np) + 1e-14);
                }
            }
        }
    }
    CHECK_THROWS_AS(swav_targets(10, 10, 0.1), ArgumentError);
}

TEST_CASE("assignment picks the first maximal prototype") {
    SwAVHead head{Matrix(3, 3, std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1})};
    const std::vector<double> e2{0, 0, 1};
    CHECK(assign_prototype(e2, head) == 2);
    const std::vector<double> zero{0, 0, 0};
    CHECK(assign_prototype(zero, head) == 0);

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto h = make_head(8, 4, rng());
        std::normal_distribution<double> g;
        std::vector<double> y(4);
        for (auto& v : y) v = g(rng);
        std::size_t best = 0;
        double best_dot = -1e300;
        for (std::size_t j = 0; j < 8; ++j) {
            double dot = 0;
            for (std::size_t d = 0; d < 4; ++d) dot += y[d] * h.prototypes(j, d);
            if (dot > best_dot) best_dot = dot, best = j;
        }
        CHECK(assign_prototype(y, h) == best);
    }
}

TEST_CASE("loss worked value and KL identities") {
    const std::vector<double> uniform_logits(10, 0.37);
    const auto target = swav_targets(0, 10, 0.1);
    const double expected = 0.91 * std::log(9.1) + 0.09 * std::log(0.1);
    CHECK(std::abs(swav_loss(uniform_logits, target, 0.07) - expected) < 1e-6);
    CHECK(std::abs(swav_loss(uniform_logits, target, 0.07) - 1.802297) < 1e-6);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> z(6);
        for (auto& v : z) v = g(rng);
        const double tau = 0.05 + 0.5 * (trial % 7) / 7.0;
        const auto lp = log_softmax(z, tau);
        std::vector<double> p(lp.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(lp[i]);
        CHECK(swav_loss(z, p, tau) < 1e-12);
        CHECK(swav_loss(z, p, tau, KlDirection::ModelFirst) < 1e-12);

        const auto t = swav_targets(static_cast<std::size_t>(trial) % 6, 6, 0.1);
        CHECK(swav_loss(z, t, tau) >= 0.0);
        CHECK(swav_loss(z, t, tau, KlDirection::ModelFirst) >= 0.0);
    }

    const std::vector<double> bad{0.0, std::nan("")};
    CHECK_THROWS_AS(swav_loss(bad, swav_targets(0, 2, 0.1), 0.07), ArgumentError);
}

TEST_CASE("logit gradient matches finite differences in both directions") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (auto dir : {KlDirection::TargetFirst, KlDirection::ModelFirst}) {
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> z(5);
            for (auto& v : z) v = 0.1 * g(rng);
            const auto t = swav_targets(static_cast<std::size_t>(trial) % 5, 5, 0.1);
            const auto analytic = swav_loss_logit_gradient(z, t, 0.5, dir);
            const auto fd = oracle::fd_gradient([&](const std::vector<double>& zz) { return swav_loss(zz, t, 0.5, dir); }, z);
            CHECK(relative_error(analytic, fd) < 1e-6);
        }
    }
}

TEST_CASE("kl direction names") {
    CHECK(parse_kl_direction("target_first") == KlDirection::TargetFirst);
    CHECK(parse_kl_direction("model_first") == KlDirection::ModelFirst);
    CHECK(to_string(KlDirection::ModelFirst) == "model_first");
    CHECK_THROWS_AS(parse_kl_direction("sideways"), ConfigError);
}

TEST_CASE("full-chain gradients match finite differences") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        CAPTURE(seed);
        check_gradients(random_instance(seed, 1, 8, 6), KlDirection::TargetFirst);
        check_gradients(random_instance(100 + seed, 1 + seed % 3, 5, 4), KlDirection::ModelFirst);
    }
}

TEST_CASE("a prototype with no target mass still has a matching gradient") {
    auto in = random_instance(42, 2, 6, 5);
    for (auto& a : in.assignments) a = 0;
    check_gradients(in, KlDirection::TargetFirst);
}

TEST_CASE("uniform circuit gives zero features and zero prototype gradient") {
    qfm::MapperConfig mapper;
    const std::size_t n = qfm::required_qubits(mapper);
    vqc::AnsatzParams params{n, 1, Matrix(1, n, std::numbers::pi / 2)};
    // R_y(pi/2) on every qubit followed by CNOTs keeps the distribution uniform
    const auto probs = vqc::circuit_probs(params);
    for (double p : probs.probs) CHECK(p == doctest::Approx(1.0 / 32).epsilon(1e-12));

    std::mt19937_64 rng(5);
    const auto x = random_features(rng, 8, mapper.d_in);
    const auto y = quantum_features(params, mapper, x);
    for (double v : y.values.data()) CHECK(std::abs(v) < 1e-12);

    const auto head = make_head(5, mapper.d_out, 9);
    const std::vector<std::size_t> assignments{0, 1, 2, 3, 4, 0, 1, 2};
    const auto grads = loss_gradients(params, head, mapper, x, assignments);
    for (double v : grads.prototypes.data()) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("clipping bounds the global norm") {
    auto in = random_instance(7, 2, 8, 5);
    auto grads = loss_gradients(in.params, in.head, in.mapper, in.view1, in.assignments);
    for (auto& v : grads.theta) v *= 1e3;
    const double before = grads.global_norm();
    CHECK(clip_global_norm(grads, 1.0) == doctest::Approx(before));
    CHECK(grads.global_norm() <= 1.0 + 1e-9);

    auto small = loss_gradients(in.params, in.head, in.mapper, in.view1, in.assignments);
    for (auto& v : small.theta) v *= 1e-6;
    for (auto& v : small.prototypes.data()) v *= 1e-6;
    const auto unclipped = small.theta;
    clip_global_norm(small, 1.0);
    CHECK(small.theta == unclipped);
}

TEST_CASE("adam first step moves by the learning rate") {
    Adam adam(3, 0.01);
    std::vector<double> p{1.0, 2.0, 3.0};
    const std::vector<double> g{0.5, -2.0, 0.0};
    adam.step(p, g);
    CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(2.01).epsilon(1e-9));
    CHECK(p[2] == 3.0);
    CHECK(adam.steps() == 1);
}

namespace {

FeatureMatrix blob_features(std::size_t samples) {
    const auto ds = pipeline::synth_transactions(samples, 3, 0.05, 7);
    return pipeline::preprocess(ds.records);
}

}  // namespace

TEST_CASE("training with zero epochs leaves parameters untouched") {
    const auto x = blob_features(60);
    qfm::MapperConfig mapper;
    const auto init = vqc::init_params(qfm::required_qubits(mapper), 2, 3);
    const auto head = make_head(5, mapper.d_out, 4);
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto res = train(x, init, head, mapper, cfg);
    CHECK(res.params == init);
    CHECK(res.head.prototypes == head.prototypes);
    REQUIRE(res.epoch_features.size() == 1);
    CHECK(res.epoch_features[0] == quantum_features(init, mapper, x));
    CHECK(res.log.empty());
}

TEST_CASE("zero learning rate keeps angles bit-identical") {
    const auto x = blob_features(60);
    qfm::MapperConfig mapper;
    const auto init = vqc::init_params(qfm::required_qubits(mapper), 1, 3);
    const auto head = make_head(5, mapper.d_out, 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.0;
    const auto res = train(x, init, head, mapper, cfg);
    CHECK(res.params == init);
    for (std::size_t i = 0; i < head.prototypes.size(); ++i)
        CHECK(std::abs(res.head.prototypes.data()[i] - head.prototypes.data()[i]) < 1e-15);
    CHECK(res.epoch_features.size() == 3);
    CHECK(res.log.size() == 2 * 4);
}

TEST_CASE("training keeps unit prototypes and is deterministic") {
    const auto x = blob_features(90);
    qfm::MapperConfig mapper;
    const auto head = make_head(5, mapper.d_out, 8);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 32;
    cfg.seed = 11;
    const auto a = train(x, 1, head, mapper, cfg);
    const auto b = train(x, 1, head, mapper, cfg);
    CHECK(a.params == b.params);
    CHECK(a.head.prototypes == b.head.prototypes);
    CHECK(a.epoch_mean_loss == b.epoch_mean_loss);
    for (std::size_t r = 0; r < a.head.n_prototypes(); ++r) {
        double norm = 0;
        for (double v : a.head.prototypes.row(r)) norm += v * v;
        CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-10);
    }
    CHECK_FALSE(a.aborted());
}

TEST_CASE("training reduces the loss on the blob dataset") {
    const auto x = blob_features(600);
    qfm::MapperConfig mapper;
    const auto head = make_head(5, mapper.d_out, 1);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 0;
    const auto res = train(x, 1, head, mapper, cfg);
    REQUIRE(res.epoch_mean_loss.size() == 5);
    CHECK(res.epoch_mean_loss.back() < res.epoch_mean_loss.front());
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.learning_rate = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    CHECK_NOTHROW(cfg.validate());
}
