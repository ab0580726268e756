#include "qclust/swav.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qclust/errors.hpp"
#include "qclust/seeding.hpp"

namespace qclust::swav {

namespace {

constexpr std::uint64_t kInitTag = 0x1417;
constexpr std::uint64_t kShuffleTag = 0x5bf1;
constexpr std::uint64_t kNoiseTag = 0xa06e;

double sequential_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

// Searches a few ulps either side of v[i], nearest first, for a value that
// makes the front-to-back sum exactly 1.
bool nudge_to_unit_sum(std::vector<double>& v, std::size_t i) {
    const double start = v[i];
    double down = start, up = start;
    for (int step = 0; step <= 64; ++step) {
        for (double candidate : {up, down}) {
            v[i] = candidate;
            if (sequential_sum(v) == 1.0) return true;
        }
        up = std::nextafter(up, 2.0);
        down = std::nextafter(down, -1.0);
    }
    v[i] = start;
    return false;
}

void check_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw ArgumentError(std::string(what) + " must be finite");
    }
}

std::vector<double> logits_for(std::span<const double> y, const SwAVHead& head) {
    std::vector<double> z(head.n_prototypes(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto c = head.prototypes.row(i);
        for (std::size_t d = 0; d < y.size(); ++d) z[i] += y[d] * c[d];
    }
    return z;
}

void check_dims(const SwAVHead& head, const qfm::MapperConfig& mapper, const FeatureMatrix& view) {
    if (head.dim() != mapper.d_out) throw ArgumentError("prototype dimension must equal the quantum feature count");
    if (view.n_dims() != mapper.d_in) throw ArgumentError("batch width must equal the mapper input size");
}

}  // namespace

KlDirection parse_kl_direction(const std::string& name) {
    if (name == "target_first") return KlDirection::TargetFirst;
    if (name == "model_first") return KlDirection::ModelFirst;
    throw ConfigError("kl_direction must be target_first or model_first, got '" + name + "'");
}

std::string to_string(KlDirection direction) {
    return direction == KlDirection::TargetFirst ? "target_first" : "model_first";
}

void SwAVHead::normalize_rows() {
    for (std::size_t r = 0; r < prototypes.rows(); ++r) {
        auto row = prototypes.row(r);
        double norm = 0.0;
        for (double v : row) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            std::fill(row.begin(), row.end(), 0.0);
            row[r % row.size()] = 1.0;
        } else {
            for (double& v : row) v /= norm;
        }
    }
}

SwAVHead make_head(std::size_t n_prototypes, std::size_t dim, std::uint64_t seed, double temperature,
                   double smoothing) {
    if (n_prototypes < 1 || dim < 1) throw ConfigError("SwAV head needs at least one prototype and dimension");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
    if (!(smoothing >= 0.0 && smoothing < 1.0)) throw ConfigError("smoothing must lie in [0, 1)");
    SwAVHead head{Matrix(n_prototypes, dim), temperature, smoothing};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& v : head.prototypes.data()) v = gauss(rng);
    head.normalize_rows();
    return head;
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
    if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
    if (!(augment_sigma >= 0.0) || !std::isfinite(augment_sigma)) throw ConfigError("augment_sigma must be >= 0");
}

std::vector<double> swav_targets(std::size_t k, std::size_t n_prototypes, double smoothing) {
    if (k >= n_prototypes) {
        throw ArgumentError("prototype index " + std::to_string(k) + " out of range for " +
                            std::to_string(n_prototypes) + " prototypes");
    }
    if (!(smoothing >= 0.0 && smoothing < 1.0)) throw ArgumentError("smoothing must lie in [0, 1)");
    const double off = smoothing / static_cast<double>(n_prototypes);
    std::vector<double> p(n_prototypes, off);
    p[k] = (1.0 - smoothing) + off;

    if (sequential_sum(p) == 1.0) return p;
    if (nudge_to_unit_sum(p, k)) return p;
    // Stepping the peak can jump over 1.0; settle the remainder on the last entry.
    const std::size_t last = n_prototypes - 1;
    double prefix = 0.0;
    for (std::size_t i = 0; i < last; ++i) prefix += p[i];
    p[last] = 1.0 - prefix;
    if (!nudge_to_unit_sum(p, last)) throw std::logic_error("smoothed targets do not sum to one");
    return p;
}

std::size_t assign_prototype(std::span<const double> feature, const SwAVHead& head) {
    if (feature.size() != head.dim()) throw ArgumentError("feature and prototype dimensions differ");
    const auto z = logits_for(feature, head);
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

std::vector<double> log_softmax(std::span<const double> logits, double temperature) {
    check_finite(logits, "logits");
    std::vector<double> out(logits.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = logits[i] / temperature;
        top = std::max(top, out[i]);
    }
    double sum = 0.0;
    for (double v : out) sum += std::exp(v - top);
    const double lse = top + std::log(sum);
    for (double& v : out) v -= lse;
    return out;
}

double swav_loss(std::span<const double> logits, std::span<const double> target, double temperature,
                 KlDirection direction) {
    if (logits.size() != target.size()) throw ArgumentError("logits and target differ in length");
    const auto log_p1 = log_softmax(logits, temperature);
    double loss = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (direction == KlDirection::TargetFirst) {
            if (target[i] > 0.0) loss += target[i] * (std::log(target[i]) - log_p1[i]);
        } else {
            const double p1 = std::exp(log_p1[i]);
            if (p1 > 0.0) loss += p1 * (log_p1[i] - std::log(target[i]));
        }
    }
    return std::max(loss, 0.0);
}

std::vector<double> swav_loss_logit_gradient(std::span<const double> logits, std::span<const double> target,
                                             double temperature, KlDirection direction) {
    const auto log_p1 = log_softmax(logits, temperature);
    std::vector<double> g(logits.size());
    if (direction == KlDirection::TargetFirst) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = (std::exp(log_p1[i]) - target[i]) / temperature;
    } else {
        double kl = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) kl += std::exp(log_p1[i]) * (log_p1[i] - std::log(target[i]));
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double p1 = std::exp(log_p1[i]);
            g[i] = p1 * (log_p1[i] - std::log(target[i]) - kl) / temperature;
        }
    }
    return g;
}

double Gradients::global_norm() const {
    double s = 0.0;
    for (double g : theta) s += g * g;
    for (double g : prototypes.data()) s += g * g;
    return std::sqrt(s);
}

FeatureMatrix quantum_features(const vqc::AnsatzParams& params, const qfm::MapperConfig& mapper,
                               const FeatureMatrix& features) {
    return qfm::nn_forward(qfm::map_circuit(params, mapper), features);
}

std::vector<std::size_t> assign_batch(const vqc::AnsatzParams& params, const SwAVHead& head,
                                      const qfm::MapperConfig& mapper, const FeatureMatrix& view2) {
    check_dims(head, mapper, view2);
    const FeatureMatrix y = quantum_features(params, mapper, view2);
    std::vector<std::size_t> out(y.n_samples());
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = assign_prototype(y.values.row(r), head);
    return out;
}

double batch_loss(const vqc::AnsatzParams& params, const SwAVHead& head, const qfm::MapperConfig& mapper,
                  const FeatureMatrix& view1, const std::vector<std::size_t>& assignments, KlDirection direction) {
    check_dims(head, mapper, view1);
    const FeatureMatrix y = quantum_features(params, mapper, view1);
    double total = 0.0;
    for (std::size_t r = 0; r < y.n_samples(); ++r) {
        const auto target = swav_targets(assignments[r], head.n_prototypes(), head.smoothing);
        total += swav_loss(logits_for(y.values.row(r), head), target, head.temperature, direction);
    }
    return total / static_cast<double>(y.n_samples());
}

Gradients loss_gradients(const vqc::AnsatzParams& params, const SwAVHead& head,
                         const qfm::MapperConfig& mapper, const FeatureMatrix& view1,
                         const std::vector<std::size_t>& assignments, KlDirection direction) {
    check_dims(head, mapper, view1);
    if (assignments.size() != view1.n_samples()) throw ArgumentError("one assignment per batch row required");

    const auto probs = vqc::circuit_probs(params);
    const qfm::TransformNet net = qfm::probs_to_weights(probs, mapper);
    const FeatureMatrix y = qfm::nn_forward(net, view1);
    const double inv_b = 1.0 / static_cast<double>(view1.n_samples());

    Gradients g{0.0, {}, Matrix(head.n_prototypes(), head.dim())};
    std::vector<double> dweights(mapper.weight_count(), 0.0);
    std::vector<double> dy(head.dim());
    for (std::size_t r = 0; r < view1.n_samples(); ++r) {
        const auto yr = y.values.row(r);
        const auto z = logits_for(yr, head);
        const auto target = swav_targets(assignments[r], head.n_prototypes(), head.smoothing);
        g.loss += swav_loss(z, target, head.temperature, direction) * inv_b;

        const auto dz = swav_loss_logit_gradient(z, target, head.temperature, direction);
        std::fill(dy.begin(), dy.end(), 0.0);
        for (std::size_t i = 0; i < dz.size(); ++i) {
            const double w = dz[i] * inv_b;
            const auto c = head.prototypes.row(i);
            auto gc = g.prototypes.row(i);
            for (std::size_t d = 0; d < dy.size(); ++d) {
                dy[d] += w * c[d];
                gc[d] += w * yr[d];
            }
        }
        qfm::accumulate_net_gradient(net, view1.values.row(r), yr, dy, dweights);
    }

    if (params.size() > 0) {
        const auto jac = vqc::probs_jacobian(params);
        g.theta = qfm::chain_to_angles(dweights, net, mapper, jac, params.n_qubits);
    }
    return g;
}

Gradients loss_gradients(const vqc::AnsatzParams& params, const SwAVHead& head,
                         const qfm::MapperConfig& mapper, const FeatureMatrix& view1,
                         const FeatureMatrix& view2, const TrainConfig& config) {
    const auto assignments = assign_batch(params, head, mapper, view2);
    return loss_gradients(params, head, mapper, view1, assignments, config.kl_direction);
}

double clip_global_norm(Gradients& grads, double clip_norm) {
    const double norm = grads.global_norm();
    if (norm > clip_norm) {
        const double factor = clip_norm / norm;
        for (double& v : grads.theta) v *= factor;
        for (double& v : grads.prototypes.data()) v *= factor;
    }
    return norm;
}

Adam::Adam(std::size_t n_params, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n_params, 0.0), v_(n_params, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) throw ArgumentError("Adam parameter count changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
        const double m_hat = m_[i] / bc1;
        const double v_hat = v_[i] / bc2;
        params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
}

TrainResult train(const FeatureMatrix& features, const vqc::AnsatzParams& initial, const SwAVHead& head_init,
                  const qfm::MapperConfig& mapper, const TrainConfig& config) {
    config.validate();
    features.validate();
    initial.validate();
    check_dims(head_init, mapper, features);
    if ((std::size_t{1} << initial.n_qubits) < mapper.weight_count()) {
        throw ConfigError("circuit has too few basis states for the mapped network");
    }

    TrainResult res{initial, head_init, {}, {}, {}, {}, {}};
    bool unit_rows = true;
    for (std::size_t r = 0; r < res.head.n_prototypes(); ++r) {
        double norm2 = 0.0;
        for (double v : res.head.prototypes.row(r)) norm2 += v * v;
        unit_rows = unit_rows && std::abs(norm2 - 1.0) < 1e-12;
    }
    if (!unit_rows) res.head.normalize_rows();
    res.epoch_features.push_back(quantum_features(res.params, mapper, features));

    const std::size_t n = features.n_samples();
    const std::size_t n_theta = res.params.size();
    const std::size_t n_proto = res.head.prototypes.size();
    Adam adam(n_theta + n_proto, config.learning_rate, config.beta1, config.beta2, config.adam_eps);
    std::vector<double> flat(n_theta + n_proto);
    std::vector<double> flat_grad(n_theta + n_proto);
    std::vector<std::size_t> order(n);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 shuffle_rng(derive_seed(config.seed, {kShuffleTag, epoch}));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_total = 0.0;
        std::size_t epoch_batches = 0;
        for (std::size_t start = 0, batch = 0; start < n; start += config.batch_size, ++batch) {
            const std::size_t rows = std::min(config.batch_size, n - start);
            FeatureMatrix view1{Matrix(rows, features.n_dims()), features.dim_names};
            FeatureMatrix view2 = view1;
            std::mt19937_64 noise_rng(derive_seed(config.seed, {kNoiseTag, epoch, batch}));
            std::normal_distribution<double> noise(0.0, 1.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const auto src = features.values.row(order[start + r]);
                for (std::size_t d = 0; d < src.size(); ++d) view1.values(r, d) = src[d] + config.augment_sigma * noise(noise_rng);
            }
            for (std::size_t r = 0; r < rows; ++r) {
                const auto src = features.values.row(order[start + r]);
                for (std::size_t d = 0; d < src.size(); ++d) view2.values(r, d) = src[d] + config.augment_sigma * noise(noise_rng);
            }

            Gradients g = loss_gradients(res.params, res.head, mapper, view1, view2, config);
            const bool finite = std::isfinite(g.loss) && std::isfinite(g.global_norm());
            if (!finite) {
                res.aborted_epochs.push_back(epoch);
                res.diagnostic += "epoch " + std::to_string(epoch) + " batch " + std::to_string(batch) +
                                  ": non-finite loss or gradient, epoch aborted\n";
                break;
            }
            res.log.push_back({epoch, batch, g.loss});
            epoch_total += g.loss;
            ++epoch_batches;

            clip_global_norm(g, config.clip_norm);
            std::copy(res.params.angles.data().begin(), res.params.angles.data().end(), flat.begin());
            std::copy(res.head.prototypes.data().begin(), res.head.prototypes.data().end(), flat.begin() + n_theta);
            std::copy(g.theta.begin(), g.theta.end(), flat_grad.begin());
            std::copy(g.prototypes.data().begin(), g.prototypes.data().end(), flat_grad.begin() + n_theta);
            adam.step(flat, flat_grad);
            std::copy(flat.begin(), flat.begin() + n_theta, res.params.angles.data().begin());
            std::copy(flat.begin() + n_theta, flat.end(), res.head.prototypes.data().begin());
            res.head.normalize_rows();
        }
        res.epoch_mean_loss.push_back(epoch_batches ? epoch_total / static_cast<double>(epoch_batches)
                                                    : std::numeric_limits<double>::quiet_NaN());
        res.epoch_features.push_back(quantum_features(res.params, mapper, features));
    }
    return res;
}

TrainResult train(const FeatureMatrix& features, std::size_t depth, const SwAVHead& head_init,
                  const qfm::MapperConfig& mapper, const TrainConfig& config) {
    const auto initial =
        vqc::init_params(qfm::required_qubits(mapper), depth, derive_seed(config.seed, {kInitTag, depth}));
    return train(features, initial, head_init, mapper, config);
}

}  // namespace qclust::swav
