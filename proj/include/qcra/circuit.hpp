#pragma once

// Gate-level circuit representation and a dense statevector simulator.
//
// Qubit convention is little-endian: qubit q corresponds to bit q of the
// basis-state index, so qubit 0 is the least significant bit.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qcra/errors.hpp"

namespace qcra {

enum class GateKind { X, RY, Z };

/// A control condition. `polarity == false` means the gate fires when the
/// control qubit is |0>, so arbitrary bit patterns can be matched directly.
struct Control {
    int qubit = 0;
    bool polarity = true;

    friend bool operator==(const Control&, const Control&) = default;
};

struct Gate {
    GateKind kind = GateKind::X;
    int target = 0;
    double theta = 0.0; // radians, RY only
    std::vector<Control> controls;
};

/// Controls selecting the computational-basis pattern `value` on `qubits`
/// (bit j of value goes to qubits[j]).
inline std::vector<Control> pattern_controls(const std::vector<int>& qubits, std::uint64_t value) {
    std::vector<Control> out;
    out.reserve(qubits.size());
    for (std::size_t j = 0; j < qubits.size(); ++j) {
        out.push_back({qubits[j], ((value >> j) & 1U) != 0});
    }
    return out;
}

class Circuit {
public:
    static constexpr int kMaxQubits = 26;

    explicit Circuit(int n_qubits) : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > kMaxQubits) {
            throw DomainError("Circuit: qubit count must be in [1, " +
                              std::to_string(kMaxQubits) + "]");
        }
    }

    int num_qubits() const { return n_qubits_; }
    const std::vector<Gate>& gates() const { return gates_; }
    std::size_t size() const { return gates_.size(); }
    bool empty() const { return gates_.empty(); }

    Circuit& add(Gate gate) {
        validate(gate);
        gates_.push_back(std::move(gate));
        return *this;
    }

    Circuit& x(int target, std::vector<Control> controls = {}) {
        return add({GateKind::X, target, 0.0, std::move(controls)});
    }

    Circuit& ry(int target, double theta, std::vector<Control> controls = {}) {
        return add({GateKind::RY, target, theta, std::move(controls)});
    }

    Circuit& z(int target, std::vector<Control> controls = {}) {
        return add({GateKind::Z, target, 0.0, std::move(controls)});
    }

    /// Appends every gate of `other` acting on the same qubit indices.
    Circuit& append(const Circuit& other) {
        if (other.num_qubits() > n_qubits_) {
            throw DomainError("Circuit::append: appended circuit is wider than the target");
        }
        gates_.reserve(gates_.size() + other.size());
        for (const auto& g : other.gates()) {
            gates_.push_back(g);
        }
        return *this;
    }

    /// Same gates on a wider register.
    Circuit widened(int n_qubits) const {
        if (n_qubits < n_qubits_) {
            throw DomainError("Circuit::widened: cannot shrink a circuit");
        }
        Circuit out(n_qubits);
        out.gates_ = gates_;
        return out;
    }

    std::size_t count(GateKind kind) const {
        return static_cast<std::size_t>(std::count_if(
            gates_.begin(), gates_.end(), [kind](const Gate& g) { return g.kind == kind; }));
    }

    std::size_t max_controls() const {
        std::size_t m = 0;
        for (const auto& g : gates_) {
            m = std::max(m, g.controls.size());
        }
        return m;
    }

    /// One gate per line, e.g. `ry(0.5) q3 ctrl q0=1 q1=0`. Angles use 17
    /// significant digits so dumps are exact.
    std::string to_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "qubits " << n_qubits_ << '\n';
        for (const auto& g : gates_) {
            switch (g.kind) {
            case GateKind::X: os << "x"; break;
            case GateKind::Z: os << "z"; break;
            case GateKind::RY: os << "ry(" << g.theta << ")"; break;
            }
            os << " q" << g.target;
            if (!g.controls.empty()) {
                os << " ctrl";
                for (const auto& c : g.controls) {
                    os << " q" << c.qubit << '=' << (c.polarity ? 1 : 0);
                }
            }
            os << '\n';
        }
        return os.str();
    }

private:
    void validate(const Gate& g) const {
        auto in_range = [this](int q) { return q >= 0 && q < n_qubits_; };
        if (!in_range(g.target)) {
            throw DomainError("Circuit: target qubit " + std::to_string(g.target) + " out of range");
        }
        if (g.kind == GateKind::RY && !std::isfinite(g.theta)) {
            throw DomainError("Circuit: rotation angle must be finite");
        }
        for (std::size_t i = 0; i < g.controls.size(); ++i) {
            const int q = g.controls[i].qubit;
            if (!in_range(q)) {
                throw DomainError("Circuit: control qubit " + std::to_string(q) + " out of range");
            }
            if (q == g.target) {
                throw DomainError("Circuit: control qubit equals target " + std::to_string(q));
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (g.controls[j].qubit == q) {
                    throw DomainError("Circuit: duplicate control qubit " + std::to_string(q));
                }
            }
        }
    }

    int n_qubits_;
    std::vector<Gate> gates_;
};

/// Reversed gate order with each gate replaced by its adjoint.
inline Circuit inverse(const Circuit& circuit) {
    Circuit out(circuit.num_qubits());
    const auto& gates = circuit.gates();
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
        Gate g = *it;
        if (g.kind == GateKind::RY) {
            g.theta = -g.theta;
        }
        out.add(std::move(g));
    }
    return out;
}

using Amplitude = std::complex<double>;

class Statevector {
public:
    /// |0...0> on n qubits.
    explicit Statevector(int n_qubits) : Statevector(n_qubits, 0) {}

    Statevector(int n_qubits, std::uint64_t basis_index) : n_qubits_(n_qubits) {
        if (n_qubits < 1 || n_qubits > Circuit::kMaxQubits) {
            throw DomainError("Statevector: qubit count out of range");
        }
        amps_.assign(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
        if (basis_index >= amps_.size()) {
            throw DomainError("Statevector: basis index out of range");
        }
        amps_[basis_index] = 1.0;
    }

    Statevector(int n_qubits, std::vector<Amplitude> amplitudes)
        : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
        if (n_qubits < 1 || n_qubits > Circuit::kMaxQubits ||
            amps_.size() != (std::size_t{1} << n_qubits)) {
            throw DomainError("Statevector: amplitude count must be 2^n_qubits");
        }
    }

    int num_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return amps_.size(); }
    const std::vector<Amplitude>& amplitudes() const { return amps_; }
    std::vector<Amplitude>& amplitudes() { return amps_; }
    const Amplitude& operator[](std::size_t i) const { return amps_[i]; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& a : amps_) {
            s += std::norm(a);
        }
        return s;
    }

    /// Probability of each basis state.
    std::vector<double> probabilities() const {
        std::vector<double> p(amps_.size());
        std::transform(amps_.begin(), amps_.end(), p.begin(),
                       [](const Amplitude& a) { return std::norm(a); });
        return p;
    }

private:
    int n_qubits_;
    std::vector<Amplitude> amps_;
};

namespace detail {

inline void apply_gate(const Gate& g, std::vector<Amplitude>& amps) {
    std::uint64_t cmask = 0;
    std::uint64_t cval = 0;
    for (const auto& c : g.controls) {
        const std::uint64_t bit = std::uint64_t{1} << c.qubit;
        cmask |= bit;
        if (c.polarity) {
            cval |= bit;
        }
    }
    const std::uint64_t tbit = std::uint64_t{1} << g.target;
    const std::uint64_t dim = amps.size();

    // Enumerate indices with the target bit clear by inserting a zero at the
    // target position into a counter of half the dimension.
    const std::uint64_t low_mask = tbit - 1;
    const std::uint64_t half = dim >> 1;
    switch (g.kind) {
    case GateKind::X:
        for (std::uint64_t k = 0; k < half; ++k) {
            const std::uint64_t i = ((k & ~low_mask) << 1) | (k & low_mask);
            if ((i & cmask) == cval) {
                std::swap(amps[i], amps[i | tbit]);
            }
        }
        break;
    case GateKind::Z:
        for (std::uint64_t k = 0; k < half; ++k) {
            const std::uint64_t i = ((k & ~low_mask) << 1) | (k & low_mask);
            if ((i & cmask) == cval) {
                amps[i | tbit] = -amps[i | tbit];
            }
        }
        break;
    case GateKind::RY: {
        const double c = std::cos(0.5 * g.theta);
        const double s = std::sin(0.5 * g.theta);
        for (std::uint64_t k = 0; k < half; ++k) {
            const std::uint64_t i = ((k & ~low_mask) << 1) | (k & low_mask);
            if ((i & cmask) == cval) {
                const Amplitude a0 = amps[i];
                const Amplitude a1 = amps[i | tbit];
                amps[i] = c * a0 - s * a1;
                amps[i | tbit] = s * a0 + c * a1;
            }
        }
        break;
    }
    }
}

} // namespace detail

inline void apply_in_place(const Circuit& circuit, Statevector& state) {
    if (circuit.num_qubits() != state.num_qubits()) {
        throw DomainError("apply: circuit has " + std::to_string(circuit.num_qubits()) +
                          " qubits but state has " + std::to_string(state.num_qubits()));
    }
    for (const auto& g : circuit.gates()) {
        detail::apply_gate(g, state.amplitudes());
    }
}

inline Statevector apply(const Circuit& circuit, Statevector state) {
    apply_in_place(circuit, state);
    return state;
}

/// Probability that measuring `qubit` yields `outcome`.
inline double marginal_probability(const Statevector& state, int qubit, int outcome) {
    if (qubit < 0 || qubit >= state.num_qubits()) {
        throw DomainError("marginal_probability: qubit index out of range");
    }
    if (outcome != 0 && outcome != 1) {
        throw DomainError("marginal_probability: outcome must be 0 or 1");
    }
    const std::uint64_t bit = std::uint64_t{1} << qubit;
    const std::uint64_t want = outcome == 1 ? bit : 0;
    double p = 0.0;
    const auto& amps = state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if ((i & bit) == want) {
            p += std::norm(amps[i]);
        }
    }
    return p;
}

struct Counts {
    std::uint64_t zeros = 0;
    std::uint64_t ones = 0;

    std::uint64_t shots() const { return zeros + ones; }
};

/// Uniform double in [0,1) from the top 53 bits of a 64-bit Mersenne Twister
/// draw. std::mt19937_64's output sequence is fixed by the standard, so
/// sampled results are identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Measures `qubit` `shots` times, drawing from `rng`.
inline Counts sample(const Statevector& state, int qubit, std::uint64_t shots,
                     std::mt19937_64& rng) {
    if (shots == 0) {
        throw DomainError("sample: shots must be positive");
    }
    const double p1 = std::clamp(marginal_probability(state, qubit, 1), 0.0, 1.0);
    Counts counts;
    for (std::uint64_t s = 0; s < shots; ++s) {
        if (uniform01(rng) < p1) {
            ++counts.ones;
        } else {
            ++counts.zeros;
        }
    }
    return counts;
}

inline Counts sample(const Statevector& state, int qubit, std::uint64_t shots,
                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample(state, qubit, shots, rng);
}

} // namespace qcra
