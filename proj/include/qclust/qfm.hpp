#pragma once

// Quantum-Train style feature mapping: a circuit's basis distribution becomes
// the weights of a one-layer tanh network that turns classical features into
// "quantum features".
//
// Weight mapping, for the first M = d_in*d_out + d_out probabilities of an
// n-qubit distribution:
//
//     w_j = scale * tanh((p_j - 2^-n) * 2^n)
//
// filled row-major into the d_out x d_in weight matrix, then into the bias.
// A uniform distribution therefore maps to the all-zero network.

#include <cstddef>
#include <span>
#include <vector>

#include "qclust/matrix.hpp"
#include "qclust/qsim.hpp"
#include "qclust/vqc.hpp"

namespace qclust::qfm {

struct MapperConfig {
    std::size_t d_in = 7;
    std::size_t d_out = 4;
    double scale = 1.0;

    std::size_t weight_count() const { return d_in * d_out + d_out; }
    /// ConfigError on zero sizes or a non-positive scale.
    void validate() const;
};

struct TransformNet {
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    Matrix weights;            // d_out x d_in
    std::vector<double> bias;  // d_out

    friend bool operator==(const TransformNet&, const TransformNet&) = default;
};

/// Smallest n with 2^n >= d_in*d_out + d_out.
std::size_t required_qubits(const MapperConfig& config);

/// ConfigError when the distribution has fewer than M entries.
TransformNet probs_to_weights(const qsim::BasisDistribution& probs, const MapperConfig& config);

/// Row-wise tanh(W x + b). ArgumentError if feature width != d_in.
FeatureMatrix nn_forward(const TransformNet& net, const FeatureMatrix& features);

/// Standardizes each quantum column to mean 0 / std 1 (constant columns become
/// zeros), prefixes their names with "q_" and appends them to the classical
/// columns. ArgumentError on a row-count mismatch.
FeatureMatrix hybrid_concat(const FeatureMatrix& classical, const FeatureMatrix& quantum);

// --- gradient plumbing used by the SwAV trainer -----------------------------

/// d w_m / d p_m for the m-th mapped weight (weights flattened W row-major then b).
std::vector<double> weight_derivatives(const TransformNet& net, const MapperConfig& config,
                                       std::size_t n_qubits);

/// Accumulates d loss / d (W, b) into `grad` (length M) for one sample, given
/// the sample input `x`, its forward output `y`, and d loss / d y.
void accumulate_net_gradient(const TransformNet& net, std::span<const double> x,
                             std::span<const double> y, std::span<const double> dloss_dy,
                             std::span<double> grad);

/// Chains d loss / d (W, b) through the weight mapping and the probability
/// Jacobian to d loss / d theta.
std::vector<double> chain_to_angles(std::span<const double> dloss_dweights,
                                    const TransformNet& net, const MapperConfig& config,
                                    const vqc::ProbJacobian& jacobian, std::size_t n_qubits);

/// Circuit -> distribution -> network, the full untrained quantum-feature map.
TransformNet map_circuit(const vqc::AnsatzParams& params, const MapperConfig& config);

}  // namespace qclust::qfm
