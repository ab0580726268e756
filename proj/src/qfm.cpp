#include "qclust/qfm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qclust/errors.hpp"

namespace qclust::qfm {

void MapperConfig::validate() const {
    if (d_in == 0 || d_out == 0) throw ConfigError("mapper d_in and d_out must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("weight scale must be positive");
}

std::size_t required_qubits(const MapperConfig& config) {
    config.validate();
    const std::size_t m = config.weight_count();
    std::size_t n = 1;
    while ((std::size_t{1} << n) < m) ++n;
    return n;
}

TransformNet probs_to_weights(const qsim::BasisDistribution& probs, const MapperConfig& config) {
    config.validate();
    const std::size_t m = config.weight_count();
    if (probs.size() < m) {
        throw ConfigError("distribution has " + std::to_string(probs.size()) + " entries but the network needs " +
                          std::to_string(m) + " weights");
    }
    const double dim = static_cast<double>(probs.size());
    const double uniform = 1.0 / dim;

    TransformNet net{config.d_in, config.d_out, Matrix(config.d_out, config.d_in),
                     std::vector<double>(config.d_out)};
    auto mapped = [&](std::size_t j) { return config.scale * std::tanh((probs[j] - uniform) * dim); };
    const std::size_t n_w = config.d_in * config.d_out;
    for (std::size_t j = 0; j < n_w; ++j) net.weights.data()[j] = mapped(j);
    for (std::size_t o = 0; o < config.d_out; ++o) net.bias[o] = mapped(n_w + o);
    return net;
}

FeatureMatrix nn_forward(const TransformNet& net, const FeatureMatrix& features) {
    if (features.n_dims() != net.d_in) {
        throw ArgumentError("network expects " + std::to_string(net.d_in) + " input dims, got " +
                            std::to_string(features.n_dims()));
    }
    FeatureMatrix out{Matrix(features.n_samples(), net.d_out), {}};
    for (std::size_t o = 0; o < net.d_out; ++o) out.dim_names.push_back("qf" + std::to_string(o));
    for (std::size_t r = 0; r < features.n_samples(); ++r) {
        const auto x = features.values.row(r);
        for (std::size_t o = 0; o < net.d_out; ++o) {
            double a = net.bias[o];
            const auto w = net.weights.row(o);
            for (std::size_t i = 0; i < net.d_in; ++i) a += w[i] * x[i];
            out.values(r, o) = std::tanh(a);
        }
    }
    return out;
}

FeatureMatrix hybrid_concat(const FeatureMatrix& classical, const FeatureMatrix& quantum) {
    if (classical.n_samples() != quantum.n_samples()) {
        throw ArgumentError("cannot concatenate " + std::to_string(classical.n_samples()) + " classical rows with " +
                            std::to_string(quantum.n_samples()) + " quantum rows");
    }
    const std::size_t n = classical.n_samples();
    const std::size_t dc = classical.n_dims();
    const std::size_t dq = quantum.n_dims();

    FeatureMatrix out{Matrix(n, dc + dq), classical.dim_names};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < dc; ++c) out.values(r, c) = classical.values(r, c);
    }
    for (std::size_t c = 0; c < dq; ++c) {
        const std::string& name = c < quantum.dim_names.size() ? quantum.dim_names[c] : std::to_string(c);
        out.dim_names.push_back("q_" + name);

        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += quantum.values(r, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = quantum.values(r, c) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        // relative guard: a column constant up to rounding is degenerate
        const bool degenerate = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
        for (std::size_t r = 0; r < n; ++r) {
            out.values(r, dc + c) = degenerate ? 0.0 : (quantum.values(r, c) - mean) / sd;
        }
    }
    return out;
}

std::vector<double> weight_derivatives(const TransformNet& net, const MapperConfig& config,
                                       std::size_t n_qubits) {
    const double dim = static_cast<double>(std::size_t{1} << n_qubits);
    std::vector<double> d(config.weight_count());
    const std::size_t n_w = net.weights.size();
    for (std::size_t j = 0; j < d.size(); ++j) {
        const double t = (j < n_w ? net.weights.data()[j] : net.bias[j - n_w]) / config.scale;
        d[j] = config.scale * (1.0 - t * t) * dim;
    }
    return d;
}

void accumulate_net_gradient(const TransformNet& net, std::span<const double> x,
                             std::span<const double> y, std::span<const double> dloss_dy,
                             std::span<double> grad) {
    const std::size_t n_w = net.weights.size();
    for (std::size_t o = 0; o < net.d_out; ++o) {
        const double da = dloss_dy[o] * (1.0 - y[o] * y[o]);
        for (std::size_t i = 0; i < net.d_in; ++i) grad[o * net.d_in + i] += da * x[i];
        grad[n_w + o] += da;
    }
}

std::vector<double> chain_to_angles(std::span<const double> dloss_dweights,
                                    const TransformNet& net, const MapperConfig& config,
                                    const vqc::ProbJacobian& jacobian, std::size_t n_qubits) {
    const auto dw_dp = weight_derivatives(net, config, n_qubits);
    std::vector<double> grad(jacobian.entries.cols(), 0.0);
    for (std::size_t m = 0; m < dw_dp.size(); ++m) {
        const double g = dloss_dweights[m] * dw_dp[m];
        if (g == 0.0) continue;
        const auto jrow = jacobian.entries.row(m);
        for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += g * jrow[j];
    }
    return grad;
}

TransformNet map_circuit(const vqc::AnsatzParams& params, const MapperConfig& config) {
    return probs_to_weights(vqc::circuit_probs(params), config);
}

}  // namespace qclust::qfm
