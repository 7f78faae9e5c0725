#pragma once

// Reversible integer arithmetic on qubit registers built from
// pattern-controlled X gates. Registers are little-endian lists of qubit
// indices.

#include <cstdint>
#include <vector>

#include "qcra/circuit.hpp"
#include "qcra/errors.hpp"

namespace qcra {

/// Number of bits needed to hold `value` (at least one).
inline int bit_width_of(std::uint64_t value) {
    int w = 1;
    while (w < 64 && (value >> w) != 0) {
        ++w;
    }
    return w;
}

/// reg += 2^power (mod 2^len(reg)), conditioned on `controls`. Ripple
/// increment from the top bit down: bit t flips when bits power..t-1 are set.
inline void add_controlled_power_of_two(Circuit& circuit, const std::vector<Control>& controls,
                                        const std::vector<int>& reg, int power) {
    const int width = static_cast<int>(reg.size());
    for (int t = width - 1; t >= power; --t) {
        std::vector<Control> ctrl = controls;
        for (int b = power; b < t; ++b) {
            ctrl.push_back({reg[b], true});
        }
        circuit.x(reg[t], std::move(ctrl));
    }
}

/// reg += value (mod 2^len(reg)) when `control` is |1>.
inline void add_controlled_constant(Circuit& circuit, int control, const std::vector<int>& reg,
                                    std::uint64_t value) {
    for (int b = 0; b < static_cast<int>(reg.size()); ++b) {
        if ((value >> b) & 1U) {
            add_controlled_power_of_two(circuit, {{control, true}}, reg, b);
        }
    }
}

/// sum += src, where src is itself a register. Bits of src beyond the sum
/// register's width are ignored.
inline void add_register(Circuit& circuit, const std::vector<int>& src, const std::vector<int>& sum) {
    for (int b = 0; b < static_cast<int>(src.size()) && b < static_cast<int>(sum.size()); ++b) {
        add_controlled_power_of_two(circuit, {{src[b], true}}, sum, b);
    }
}

/// Flips `target` iff the unsigned integer in `reg` is <= `bound`, using a
/// carry chain held in `carries` (len(reg) - 1 qubits, returned to |0>).
///
/// Adds the two's-complement constant 2^n - (bound + 1) and inspects the final
/// carry: it is set exactly when reg >= bound + 1. The target receives the
/// negated carry.
inline void add_leq_comparator(Circuit& circuit, const std::vector<int>& reg,
                               const std::vector<int>& carries, int target, std::int64_t bound) {
    const int n = static_cast<int>(reg.size());
    if (n < 1) {
        throw DomainError("add_leq_comparator: empty register");
    }
    if (static_cast<int>(carries.size()) != n - 1) {
        throw DomainError("add_leq_comparator: need len(reg) - 1 carry qubits");
    }
    if (bound < 0) {
        return; // no unsigned value qualifies
    }
    const std::uint64_t full = std::uint64_t{1} << n;
    if (static_cast<std::uint64_t>(bound) + 1 >= full) {
        circuit.x(target);
        return;
    }
    const std::uint64_t twos = full - (static_cast<std::uint64_t>(bound) + 1);

    // carry_j = MAJ(reg_j, twos_j, carry_{j-1}), carry_{-1} = 0. With a known
    // constant bit this is an OR (bit set) or an AND (bit clear).
    auto carry_gates = [&](int j, int out) {
        const bool tbit = ((twos >> j) & 1U) != 0;
        if (j == 0) {
            if (tbit) {
                circuit.x(out, {{reg[0], true}});
            }
            return;
        }
        const int prev = carries[j - 1];
        if (tbit) {
            // out = reg_j OR prev = NOT(NOT reg_j AND NOT prev)
            circuit.x(out);
            circuit.x(out, {{reg[j], false}, {prev, false}});
        } else {
            circuit.x(out, {{reg[j], true}, {prev, true}});
        }
    };

    for (int j = 0; j < n - 1; ++j) {
        carry_gates(j, carries[j]);
    }
    // Final carry lands on the target, then negate: target ^= NOT carry.
    carry_gates(n - 1, target);
    circuit.x(target);
    // Uncompute the chain in reverse; every block above is self-inverse.
    for (int j = n - 2; j >= 0; --j) {
        carry_gates(j, carries[j]);
    }
}

} // namespace qcra
