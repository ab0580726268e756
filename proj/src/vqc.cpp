#include "qclust/vqc.hpp"

#include <numbers>
#include <random>
#include <string>

#include "qclust/errors.hpp"

namespace qclust::vqc {

void AnsatzParams::validate() const {
    if (n_qubits < 1 || n_qubits > qsim::kMaxQubits) {
        throw ArgumentError("ansatz n_qubits out of range: " + std::to_string(n_qubits));
    }
    if (angles.rows() != depth || (depth > 0 && angles.cols() != n_qubits)) {
        throw ArgumentError("angle matrix shape does not match depth x n_qubits");
    }
    if (!angles.all_finite()) throw ArgumentError("ansatz angles must be finite");
}

AnsatzParams init_params(std::size_t n_qubits, std::size_t depth, std::uint64_t seed) {
    if (n_qubits < 1 || n_qubits > qsim::kMaxQubits) {
        throw ConfigError("ansatz n_qubits out of range: " + std::to_string(n_qubits));
    }
    AnsatzParams p{n_qubits, depth, Matrix(depth, n_qubits)};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (double& a : p.angles.data()) a = angle(rng);
    return p;
}

qsim::Statevector run_ansatz(const AnsatzParams& params) {
    params.validate();
    qsim::Statevector state = qsim::zero_state(params.n_qubits);
    for (std::size_t layer = 0; layer < params.depth; ++layer) {
        for (std::size_t q = 0; q < params.n_qubits; ++q) state.ry(q, params.angles(layer, q));
        for (std::size_t q = 0; q + 1 < params.n_qubits; ++q) state.cnot(q, q + 1);
    }
    return state;
}

qsim::BasisDistribution circuit_probs(const AnsatzParams& params) {
    return qsim::measure_probs(run_ansatz(params));
}

ProbJacobian probs_jacobian(const AnsatzParams& params) {
    params.validate();
    const std::size_t dim = std::size_t{1} << params.n_qubits;
    ProbJacobian jac{Matrix(dim, params.size()), 0};

    AnsatzParams shifted = params;
    constexpr double kShift = std::numbers::pi / 2.0;
    for (std::size_t j = 0; j < params.size(); ++j) {
        double& theta = shifted.angles.data()[j];
        const double original = theta;

        theta = original + kShift;
        const auto plus = circuit_probs(shifted);
        theta = original - kShift;
        const auto minus = circuit_probs(shifted);
        theta = original;
        jac.circuit_evaluations += 2;

        for (std::size_t i = 0; i < dim; ++i) jac.entries(i, j) = 0.5 * (plus[i] - minus[i]);
    }
    return jac;
}

}  // namespace qclust::vqc
