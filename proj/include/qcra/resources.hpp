#pragma once

// Qubit and gate accounting. Layout widths count a comparison register with
// one qubit per asset plus the objective, as in the reference accounting for
// real-valued losses; "built" numbers are measured on the circuits this
// library actually constructs.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qcra/objective.hpp"
#include "qcra/risk.hpp"
#include "qcra/uncertainty.hpp"

namespace qcra {

struct ResourceReport {
    std::string variant;
    std::string mode;
    std::string encoding;
    int num_assets = 0;
    int num_factors = 0;
    int factor_qubits = 0;
    int width_paper_layout = 0;
    std::optional<int> width_built;
    std::uint64_t rotation_count = 0;
    std::uint64_t comparator_pattern_count = 0;
    std::optional<int> sum_register_width;       // loss-sum register (weighted_sum)
    std::optional<int> index_sum_register_width; // factor index sum (single_rotation)
    std::optional<std::uint64_t> built_gate_count;
    std::optional<std::uint64_t> built_comparator_gates;
    std::optional<std::uint64_t> built_asset_rotation_gates;
    std::string note;
};

/// floor(log2(sum LGD)) + 1 for real-valued LGDs; 1 when the sum is below 1.
inline int loss_register_width(const Portfolio& portfolio) {
    const double total = portfolio.total_lgd();
    if (total < 1.0) {
        return 1;
    }
    return static_cast<int>(std::floor(std::log2(total))) + 1;
}

inline ResourceReport estimate_resources(const Portfolio& portfolio,
                                         const std::vector<FactorGrid>& grids,
                                         ModelVariant variant, ObjectiveMode mode,
                                         Encoding encoding = Encoding::Linear) {
    detail::check_grids(portfolio, grids);
    ResourceReport rep;
    rep.variant = to_string(variant);
    rep.mode = to_string(mode);
    rep.encoding = variant == ModelVariant::SingleRotation ? "linear" : to_string(encoding);
    rep.num_assets = static_cast<int>(portfolio.size());
    rep.num_factors = static_cast<int>(grids.size());
    rep.factor_qubits = std::accumulate(grids.begin(), grids.end(), 0,
                                        [](int s, const FactorGrid& g) { return s + g.n_z; });
    const int K = rep.num_assets;

    int model_width = rep.factor_qubits + K;
    if (variant == ModelVariant::SingleRotation) {
        const SumGrid sg = make_sum_grid(grids, portfolio.assets.front().alphas);
        rep.index_sum_register_width = sg.sum_width;
        model_width += sg.sum_width;
        rep.rotation_count = static_cast<std::uint64_t>(K);
    } else if (encoding == Encoding::Linear) {
        rep.rotation_count = static_cast<std::uint64_t>(K) * grids.size();
    } else {
        rep.rotation_count = static_cast<std::uint64_t>(K) << rep.factor_qubits;
    }

    if (mode == ObjectiveMode::SFree) {
        rep.width_paper_layout = model_width + K + 1;
        rep.comparator_pattern_count = std::uint64_t{1} << K;
    } else {
        const int ns = loss_register_width(portfolio);
        rep.sum_register_width = ns;
        rep.width_paper_layout = model_width + ns + 1;
        rep.comparator_pattern_count = 0; // carry-chain comparator, no patterns
    }

    // Measure the circuit at the worst-case threshold (every pattern accepted).
    try {
        PipelineOptions opts{variant, encoding, mode};
        const ModelCircuit model = build_model(portfolio, grids, opts);
        const ObjectiveCircuit a =
            build_objective(portfolio, model, portfolio.total_lgd(), mode);
        rep.width_built = a.width();
        rep.built_gate_count = a.circuit.size();
        rep.built_comparator_gates = a.circuit.size() - model.circuit.size();
        std::uint64_t asset_rot = 0;
        for (const auto& g : model.circuit.gates()) {
            for (int q : model.asset_qubits) {
                if (g.kind == GateKind::RY && g.target == q) {
                    ++asset_rot;
                }
            }
        }
        rep.built_asset_rotation_gates = asset_rot;
        rep.note = model.layout_note;
    } catch (const PreconditionError& e) {
        rep.note = std::string("not built: ") + e.what();
    }
    return rep;
}

} // namespace qcra
