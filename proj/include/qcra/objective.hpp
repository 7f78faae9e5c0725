#pragma once

// The comparison operator C, which flips an objective qubit when the total
// loss read from the asset qubits is at most a threshold x, and the assembly
// of the full state-preparation operator A.
//
// Two modes exist. The S-free mode decides every default pattern at build
// time, so LGDs may be arbitrary reals. The weighted-sum mode first computes
// the integer total loss into a sum register and compares that register
// against x; it only accepts integer LGDs.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "qcra/arithmetic.hpp"
#include "qcra/circuit.hpp"
#include "qcra/errors.hpp"
#include "qcra/uncertainty.hpp"

namespace qcra {

enum class ObjectiveMode { SFree, WeightedSum };

inline std::string to_string(ObjectiveMode m) {
    return m == ObjectiveMode::SFree ? "s_free" : "weighted_sum";
}

struct ObjectiveCircuit {
    Circuit circuit{1};
    int objective_qubit = 0;
    ObjectiveMode mode = ObjectiveMode::SFree;
    double threshold = 0.0;
    std::vector<int> sum_qubits;
    std::vector<int> carry_qubits;

    int width() const { return circuit.num_qubits(); }
};

/// Total loss of a default pattern; bit k of `pattern` is asset k.
inline double pattern_loss(const Portfolio& portfolio, std::uint64_t pattern) {
    double loss = 0.0;
    for (std::size_t k = 0; k < portfolio.size(); ++k) {
        if ((pattern >> k) & 1U) {
            loss += portfolio.assets[k].lgd;
        }
    }
    return loss;
}

/// One pattern-controlled X on the objective for every default pattern whose
/// loss is <= threshold.
inline Circuit build_s_free_comparator(const Portfolio& portfolio,
                                       const std::vector<int>& asset_qubits, double threshold,
                                       int objective, int n_qubits) {
    if (asset_qubits.size() != portfolio.size()) {
        throw DomainError("build_s_free_comparator: one asset qubit per asset required");
    }
    if (portfolio.size() > 30) {
        throw DomainError("build_s_free_comparator: too many assets to enumerate");
    }
    if (std::isnan(threshold)) {
        throw DomainError("build_s_free_comparator: threshold is NaN");
    }
    Circuit c(n_qubits);
    const std::uint64_t patterns = std::uint64_t{1} << portfolio.size();
    for (std::uint64_t b = 0; b < patterns; ++b) {
        if (pattern_loss(portfolio, b) <= threshold) {
            c.x(objective, pattern_controls(asset_qubits, b));
        }
    }
    return c;
}

/// Qubits needed to hold the integer sum of `lgds`: floor(log2(sum)) + 1.
inline int n_sum_qubits(const std::vector<std::uint64_t>& lgds) {
    if (lgds.empty()) {
        throw DomainError("n_sum_qubits: empty LGD list");
    }
    std::uint64_t total = 0;
    for (auto v : lgds) {
        total += v;
    }
    if (total == 0) {
        throw DomainError("n_sum_qubits: LGD sum must be at least 1");
    }
    return static_cast<int>(std::floor(std::log2(static_cast<double>(total)))) + 1;
}

/// Integer LGDs of a portfolio, or PreconditionError naming the first asset
/// whose LGD is not a nonnegative integer.
inline std::vector<std::uint64_t> integer_lgds(const Portfolio& portfolio) {
    std::vector<std::uint64_t> out;
    for (std::size_t k = 0; k < portfolio.size(); ++k) {
        const double v = portfolio.assets[k].lgd;
        if (!(v >= 0.0) || v != std::floor(v) || v > 0x1.0p40) {
            std::ostringstream msg;
            msg << "weighted_sum mode requires integer LGDs; asset " << k << " has LGD " << v;
            throw PreconditionError(msg.str());
        }
        out.push_back(static_cast<std::uint64_t>(v));
    }
    return out;
}

/// Weighted-sum objective: computes sum_k LGD_k x_k into a sum register,
/// compares it against the threshold through a carry chain, then uncomputes
/// the sum. Qubits from `first_free` upward hold the sum register, the
/// carries and finally the objective.
inline ObjectiveCircuit build_weighted_sum(const Portfolio& portfolio,
                                           const std::vector<int>& asset_qubits, int first_free,
                                           double threshold) {
    const std::vector<std::uint64_t> lgds = integer_lgds(portfolio);
    if (asset_qubits.size() != lgds.size()) {
        throw DomainError("build_weighted_sum: one asset qubit per asset required");
    }
    if (std::isnan(threshold)) {
        throw DomainError("build_weighted_sum: threshold is NaN");
    }
    std::uint64_t total = 0;
    for (auto v : lgds) {
        total += v;
    }
    const int ns = total == 0 ? 1 : n_sum_qubits(lgds);

    ObjectiveCircuit oc;
    oc.mode = ObjectiveMode::WeightedSum;
    oc.threshold = threshold;
    for (int j = 0; j < ns; ++j) {
        oc.sum_qubits.push_back(first_free + j);
    }
    for (int j = 0; j < ns - 1; ++j) {
        oc.carry_qubits.push_back(first_free + ns + j);
    }
    oc.objective_qubit = first_free + 2 * ns - 1;
    const int width = oc.objective_qubit + 1;

    Circuit adder(width);
    for (std::size_t k = 0; k < lgds.size(); ++k) {
        add_controlled_constant(adder, asset_qubits[k], oc.sum_qubits, lgds[k]);
    }
    std::int64_t bound = -1;
    if (threshold >= 0.0) {
        bound = threshold >= static_cast<double>(total)
                    ? static_cast<std::int64_t>(total)
                    : static_cast<std::int64_t>(std::floor(threshold));
    }
    Circuit c(width);
    c.append(adder);
    add_leq_comparator(c, oc.sum_qubits, oc.carry_qubits, oc.objective_qubit, bound);
    c.append(inverse(adder));
    oc.circuit = std::move(c);
    return oc;
}

/// A = C * model. The comparator must already address the model's qubits; the
/// model is widened to the comparator's register.
inline ObjectiveCircuit assemble_a(const ModelCircuit& model, const Circuit& comparator,
                                   int objective, ObjectiveMode mode = ObjectiveMode::SFree,
                                   double threshold = 0.0) {
    if (comparator.num_qubits() < model.width()) {
        throw DomainError("assemble_a: comparator is narrower than the model");
    }
    if (objective < model.width() || objective >= comparator.num_qubits()) {
        throw DomainError("assemble_a: objective qubit must lie outside the model register");
    }
    ObjectiveCircuit oc;
    oc.mode = mode;
    oc.threshold = threshold;
    oc.objective_qubit = objective;
    oc.circuit = model.circuit.widened(comparator.num_qubits());
    oc.circuit.append(comparator);
    return oc;
}

/// Full A for a threshold: the objective is the first qubit after the model
/// (S-free) or after the sum register and carries (weighted sum).
inline ObjectiveCircuit build_objective(const Portfolio& portfolio, const ModelCircuit& model,
                                        double threshold, ObjectiveMode mode) {
    if (mode == ObjectiveMode::SFree) {
        const int objective = model.width();
        const Circuit comparator = build_s_free_comparator(portfolio, model.asset_qubits,
                                                           threshold, objective, objective + 1);
        return assemble_a(model, comparator, objective, mode, threshold);
    }
    ObjectiveCircuit ws = build_weighted_sum(portfolio, model.asset_qubits, model.width(), threshold);
    ObjectiveCircuit oc = assemble_a(model, ws.circuit, ws.objective_qubit, mode, threshold);
    oc.sum_qubits = std::move(ws.sum_qubits);
    oc.carry_qubits = std::move(ws.carry_qubits);
    return oc;
}

} // namespace qcra
