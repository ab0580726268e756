#include "qclust/qsim.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "qclust/errors.hpp"

namespace qclust::qsim {

Statevector zero_state(std::size_t n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw ConfigError("n_qubits must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                          std::to_string(n_qubits));
    }
    std::vector<Amplitude> amps(std::size_t{1} << n_qubits);
    amps[0] = 1.0;
    return Statevector(n_qubits, std::move(amps));
}

Statevector Statevector::from_amplitudes(std::vector<Amplitude> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || !std::has_single_bit(dim) || dim > (std::size_t{1} << kMaxQubits)) {
        throw ArgumentError("amplitude count must be a power of two between 2 and 2^20, got " +
                            std::to_string(dim));
    }
    Statevector s(static_cast<std::size_t>(std::countr_zero(dim)), std::move(amplitudes));
    const double norm = s.norm_squared();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) >= kNormTolerance) {
        throw ArgumentError("state is not normalized: squared norm " + std::to_string(norm));
    }
    return s;
}

double Statevector::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s;
}

Statevector& Statevector::ry(std::size_t qubit, double angle) {
    if (qubit >= n_qubits_) {
        throw ArgumentError("qubit " + std::to_string(qubit) + " out of range for " +
                            std::to_string(n_qubits_) + " qubits");
    }
    if (!std::isfinite(angle)) throw ArgumentError("rotation angle must be finite");

    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t dim = amplitudes_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Amplitude a0 = amplitudes_[i];
            const Amplitude a1 = amplitudes_[i + stride];
            amplitudes_[i] = c * a0 - s * a1;
            amplitudes_[i + stride] = s * a0 + c * a1;
        }
    }
    return *this;
}

Statevector& Statevector::cnot(std::size_t control, std::size_t target) {
    if (control >= n_qubits_ || target >= n_qubits_) {
        throw ArgumentError("CNOT qubit index out of range for " + std::to_string(n_qubits_) +
                            " qubits");
    }
    if (control == target) throw ArgumentError("CNOT control and target must differ");

    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t dim = amplitudes_.size();
    for (std::size_t i = 0; i < dim; ++i) {
        // visit each swapped pair once, from its target-bit-0 member
        if ((i & cmask) && !(i & tmask)) std::swap(amplitudes_[i], amplitudes_[i | tmask]);
    }
    return *this;
}

Statevector apply_ry(const Statevector& state, std::size_t qubit, double angle) {
    Statevector out = state;
    out.ry(qubit, angle);
    return out;
}

Statevector apply_cnot(const Statevector& state, std::size_t control, std::size_t target) {
    Statevector out = state;
    out.cnot(control, target);
    return out;
}

BasisDistribution measure_probs(const Statevector& state) {
    BasisDistribution dist;
    dist.probs.reserve(state.dimension());
    for (const auto& a : state.amplitudes()) dist.probs.push_back(std::norm(a));
    return dist;
}

std::size_t BasisDistribution::n_qubits() const {
    return static_cast<std::size_t>(std::countr_zero(probs.size()));
}

}  // namespace qclust::qsim
