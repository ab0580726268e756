#pragma once

// Dense statevector simulation restricted to R_y rotations and CNOT.
//
// Basis ordering is little-endian: qubit q is bit q of the basis index, so for
// two qubits the amplitudes are ordered |q1 q0> = 00, 01, 10, 11.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qclust::qsim {

using Amplitude = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 20;
inline constexpr double kNormTolerance = 1e-10;

class Statevector {
public:
    /// Wraps explicit amplitudes. Throws ArgumentError unless the length is a
    /// power of two (1..2^20) and the state is normalized within 1e-10.
    static Statevector from_amplitudes(std::vector<Amplitude> amplitudes);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amplitudes_.size(); }
    std::span<const Amplitude> amplitudes() const { return amplitudes_; }
    Amplitude operator[](std::size_t basis_index) const { return amplitudes_[basis_index]; }

    double norm_squared() const;

    // In-place gate kernels. The free functions below are the out-of-place API.
    Statevector& ry(std::size_t qubit, double angle);
    Statevector& cnot(std::size_t control, std::size_t target);

private:
    friend Statevector zero_state(std::size_t n_qubits);
    Statevector(std::size_t n_qubits, std::vector<Amplitude> amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

    std::size_t n_qubits_;
    std::vector<Amplitude> amplitudes_;
};

struct BasisDistribution {
    std::vector<double> probs;

    std::size_t n_qubits() const;
    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }
};

/// |0...0> on n_qubits; ConfigError outside 1..20.
Statevector zero_state(std::size_t n_qubits);

/// R_y(angle) = [[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]] on one qubit.
Statevector apply_ry(const Statevector& state, std::size_t qubit, double angle);

Statevector apply_cnot(const Statevector& state, std::size_t control, std::size_t target);

BasisDistribution measure_probs(const Statevector& state);

}  // namespace qclust::qsim
