#pragma once

// Layered R_y / CNOT-chain ansatz and exact parameter-shift gradients of its
// basis-state probabilities.

#include <cstddef>
#include <cstdint>

#include "qclust/matrix.hpp"
#include "qclust/qsim.hpp"

namespace qclust::vqc {

/// Trainable angles, one row per layer and one column per qubit.
struct AnsatzParams {
    std::size_t n_qubits = 1;
    std::size_t depth = 0;
    Matrix angles;  // depth x n_qubits, radians

    std::size_t size() const { return angles.size(); }
    /// Flat index of angle (layer, qubit); matches ProbJacobian column order.
    std::size_t index(std::size_t layer, std::size_t qubit) const { return layer * n_qubits + qubit; }

    /// Throws ArgumentError on shape mismatch or non-finite angles.
    void validate() const;

    friend bool operator==(const AnsatzParams&, const AnsatzParams&) = default;
};

/// d p_i / d theta_j, rows are basis states, columns are flat angle indices.
struct ProbJacobian {
    Matrix entries;
    /// Circuits simulated to build this Jacobian (always 2 * depth * n_qubits).
    std::size_t circuit_evaluations = 0;
};

/// Angles i.i.d. uniform on [0, 2*pi) from a 64-bit Mersenne Twister seeded with `seed`.
AnsatzParams init_params(std::size_t n_qubits, std::size_t depth, std::uint64_t seed);

/// Each layer: R_y on every qubit in ascending order, then CNOT(q, q+1) for q = 0..n-2.
qsim::Statevector run_ansatz(const AnsatzParams& params);

qsim::BasisDistribution circuit_probs(const AnsatzParams& params);

/// Parameter-shift rule: [p(theta_j + pi/2) - p(theta_j - pi/2)] / 2.
ProbJacobian probs_jacobian(const AnsatzParams& params);

}  // namespace qclust::vqc
