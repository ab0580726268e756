#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qclust/errors.hpp"
#include "qclust/qsim.hpp"

using namespace qclust;
using namespace qclust::qsim;

namespace {

Statevector random_state(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    std::vector<Amplitude> a(std::size_t{1} << n);
    double norm = 0.0;
    for (auto& z : a) {
        z = {g(rng), g(rng)};
        norm += std::norm(z);
    }
    for (auto& z : a) z /= std::sqrt(norm);
    return Statevector::from_amplitudes(std::move(a));
}

double max_diff(const Statevector& a, const Statevector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("zero_state") {
    const auto s1 = zero_state(1);
    CHECK(s1.dimension() == 2);
    CHECK(s1[0] == Amplitude(1.0, 0.0));
    CHECK(s1[1] == Amplitude(0.0, 0.0));

    const auto s2 = zero_state(2);
    CHECK(s2.dimension() == 4);
    CHECK(s2[0] == Amplitude(1.0));
    for (std::size_t i = 1; i < 4; ++i) CHECK(s2[i] == Amplitude(0.0));

    CHECK_NOTHROW(zero_state(20));
    CHECK_THROWS_AS(zero_state(21), ConfigError);
    CHECK_THROWS_AS(zero_state(0), ConfigError);
}

TEST_CASE("apply_ry worked values") {
    const auto zero = zero_state(1);
    const auto flipped = apply_ry(zero, 0, std::numbers::pi);
    CHECK(std::abs(flipped[0]) < 1e-15);
    CHECK(flipped[1].real() == doctest::Approx(1.0).epsilon(1e-15));

    const auto half = apply_ry(zero, 0, std::numbers::pi / 2);
    CHECK(half[0].real() == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(half[1].real() == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));

    std::mt19937_64 rng(3);
    const auto psi = random_state(rng, 3);
    CHECK(max_diff(apply_ry(psi, 1, 0.0), psi) == 0.0);
    // out-of-place: input untouched
    const auto copy = psi;
    (void)apply_ry(psi, 2, 1.3);
    CHECK(max_diff(psi, copy) == 0.0);
}

TEST_CASE("apply_ry and apply_cnot reject bad arguments") {
    const auto s = zero_state(2);
    CHECK_THROWS_AS(apply_ry(s, 2, 0.1), ArgumentError);
    CHECK_THROWS_AS(apply_ry(s, 0, std::nan("")), ArgumentError);
    CHECK_THROWS_AS(apply_ry(s, 0, HUGE_VAL), ArgumentError);
    CHECK_THROWS_AS(apply_cnot(s, 1, 1), ArgumentError);
    CHECK_THROWS_AS(apply_cnot(s, 0, 2), ArgumentError);
    CHECK_THROWS_AS(apply_cnot(s, 5, 0), ArgumentError);
}

TEST_CASE("apply_cnot worked values") {
    const auto s = apply_cnot(zero_state(2), 0, 1);
    CHECK(s[0] == Amplitude(1.0));

    // (|01> + |11>)/sqrt2 in |q1 q0> order: control q0 is set in both terms,
    // so CNOT(0,1) swaps the two terms and leaves the state unchanged.
    const double r = 1 / std::sqrt(2.0);
    const auto fixed = Statevector::from_amplitudes({0.0, r, 0.0, r});
    const auto out = apply_cnot(fixed, 0, 1);
    CHECK(max_diff(out, fixed) == 0.0);

    // |01> alone (q0 = 1) maps to |11>
    const auto single = apply_cnot(Statevector::from_amplitudes({0.0, 1.0, 0.0, 0.0}), 0, 1);
    CHECK(single[3] == Amplitude(1.0));
    CHECK(single[1] == Amplitude(0.0));
}

TEST_CASE("gates match dense matrix oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-4.0, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + trial % 4;
        const auto psi = random_state(rng, n);
        const std::size_t q = static_cast<std::size_t>(trial) % n;
        const double a = angle(rng);
        const auto op = oracle::embed_single(oracle::ry_matrix(a), q, n);
        const auto out = apply_ry(psi, q, a);
        for (std::size_t i = 0; i < psi.dimension(); ++i) {
            oracle::cplx expect = 0.0;
            for (std::size_t j = 0; j < psi.dimension(); ++j) expect += op[i][j] * psi[j];
            CHECK(std::abs(out[i] - expect) < 1e-12);
        }
        if (n >= 2) {
            const std::size_t t = (q + 1) % n;
            const auto cop = oracle::cnot_matrix(q, t, n);
            const auto cout = apply_cnot(psi, q, t);
            for (std::size_t i = 0; i < psi.dimension(); ++i) {
                oracle::cplx expect = 0.0;
                for (std::size_t j = 0; j < psi.dimension(); ++j) expect += cop[i][j] * psi[j];
                CHECK(std::abs(cout[i] - expect) < 1e-15);
            }
        }
    }
}

TEST_CASE("measure_probs") {
    const auto p0 = measure_probs(zero_state(2));
    CHECK(p0.probs == std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK(p0.n_qubits() == 2);

    const double r = 1 / std::sqrt(2.0);
    const auto ph = measure_probs(Statevector::from_amplitudes({r, r}));
    CHECK(ph[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ph[1] == doctest::Approx(0.5).epsilon(1e-15));

    std::mt19937_64 rng(5);
    const auto psi = random_state(rng, 3);
    const auto p = measure_probs(psi);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double re = psi[i].real(), im = psi[i].imag();
        CHECK(std::abs(p[i] - (re * re + im * im)) < 1e-12);
        sum += p[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-10);
}

TEST_CASE("from_amplitudes validates") {
    CHECK_THROWS_AS(Statevector::from_amplitudes({1.0, 0.0, 0.0}), ArgumentError);
    CHECK_THROWS_AS(Statevector::from_amplitudes({1.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(Statevector::from_amplitudes({1.0}), ArgumentError);
}

TEST_CASE("properties: norm, linearity, involution, additivity") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> angle(-2 * std::numbers::pi, 2 * std::numbers::pi);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial) % 6;
        std::uniform_int_distribution<std::size_t> qubit(0, n - 1);
        const auto psi = random_state(rng, n);

        // R_y additivity
        const std::size_t q = qubit(rng);
        const double a = angle(rng), b = angle(rng);
        CHECK(max_diff(apply_ry(apply_ry(psi, q, a), q, b), apply_ry(psi, q, a + b)) < 1e-12);

        if (n >= 2) {
            std::size_t t = qubit(rng);
            if (t == q) t = (q + 1) % n;
            CHECK(max_diff(apply_cnot(apply_cnot(psi, q, t), q, t), psi) < 1e-12);
        }

        // linearity on a normalized superposition alpha*psi + beta*phi with phi orthogonal to psi
        auto phi_raw = random_state(rng, n);
        std::vector<Amplitude> phi(phi_raw.amplitudes().begin(), phi_raw.amplitudes().end());
        Amplitude overlap = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) overlap += std::conj(psi[i]) * phi[i];
        double nrm = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            phi[i] -= overlap * psi[i];
            nrm += std::norm(phi[i]);
        }
        for (auto& z : phi) z /= std::sqrt(nrm);
        const auto phis = Statevector::from_amplitudes(phi);
        const Amplitude alpha(0.6, 0.0), beta(0.0, 0.8);
        std::vector<Amplitude> mix(phi.size());
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * psi[i] + beta * phi[i];
        const auto mixed = apply_ry(Statevector::from_amplitudes(mix), q, a);
        const auto rp = apply_ry(psi, q, a);
        const auto rf = apply_ry(phis, q, a);
        for (std::size_t i = 0; i < mix.size(); ++i) CHECK(std::abs(mixed[i] - (alpha * rp[i] + beta * rf[i])) < 1e-12);

        // long random gate sequence keeps the norm
        auto s = psi;
        for (int g = 0; g < 50; ++g) {
            const std::size_t c = qubit(rng);
            if (n >= 2 && g % 3 == 0) {
                s.cnot(c, (c + 1) % n);
            } else {
                s.ry(c, angle(rng));
            }
        }
        CHECK(std::abs(s.norm_squared() - 1.0) < 1e-10);
    }
}
