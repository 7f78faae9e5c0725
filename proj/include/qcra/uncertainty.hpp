#pragma once

// Builders for the uncertainty model U: factor registers loaded with
// discretized normals, and one qubit per asset whose |1> probability is the
// asset's conditional default probability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "qcra/arithmetic.hpp"
#include "qcra/circuit.hpp"
#include "qcra/errors.hpp"
#include "qcra/gaussian.hpp"

namespace qcra {

struct Asset {
    double lgd = 0.0;
    double p0 = 0.0;
    double rho = 0.0;
    std::vector<double> alphas;
};

struct Portfolio {
    std::vector<Asset> assets;
    int num_factors = 1;

    std::size_t size() const { return assets.size(); }

    double total_lgd() const {
        return std::accumulate(assets.begin(), assets.end(), 0.0,
                               [](double s, const Asset& a) { return s + a.lgd; });
    }

    /// Throws DomainError naming the first invalid asset.
    void validate() const {
        if (num_factors < 1) {
            throw DomainError("portfolio: need at least one risk factor");
        }
        if (assets.empty()) {
            throw DomainError("portfolio: need at least one asset");
        }
        for (std::size_t k = 0; k < assets.size(); ++k) {
            const Asset& a = assets[k];
            const std::string who = "asset " + std::to_string(k);
            if (!(a.lgd >= 0.0) || !std::isfinite(a.lgd)) {
                throw DomainError(who + ": lgd must be a finite nonnegative amount");
            }
            if (!(a.p0 > 0.0 && a.p0 < 1.0)) {
                throw DomainError(who + ": p0 must lie in (0,1)");
            }
            if (!(a.rho >= 0.0 && a.rho < 1.0)) {
                throw DomainError(who + ": rho must lie in [0,1)");
            }
            if (static_cast<int>(a.alphas.size()) != num_factors) {
                throw DomainError(who + ": expected " + std::to_string(num_factors) +
                                  " factor weights, got " + std::to_string(a.alphas.size()));
            }
            for (double w : a.alphas) {
                if (!std::isfinite(w)) {
                    throw DomainError(who + ": factor weights must be finite");
                }
            }
        }
    }
};

enum class Encoding { Exact, Linear };
enum class ModelVariant { SingleFactor, MultiRotation, SingleRotation };

inline std::string to_string(Encoding e) { return e == Encoding::Exact ? "exact" : "linear"; }

inline std::string to_string(ModelVariant v) {
    switch (v) {
    case ModelVariant::SingleFactor: return "single_factor";
    case ModelVariant::MultiRotation: return "multi_rotation";
    case ModelVariant::SingleRotation: return "single_rotation";
    }
    return "unknown";
}

/// Contiguous block of qubits [first, first + count).
struct QubitRange {
    int first = 0;
    int count = 0;

    std::vector<int> qubits() const {
        std::vector<int> q(static_cast<std::size_t>(count));
        std::iota(q.begin(), q.end(), first);
        return q;
    }
    int end() const { return first + count; }
};

struct ModelCircuit {
    Circuit circuit{1};
    ModelVariant variant = ModelVariant::MultiRotation;
    Encoding encoding = Encoding::Exact;
    std::vector<QubitRange> factor_qubits;
    std::vector<int> asset_qubits;
    QubitRange sum_register; // empty unless single-rotation
    std::vector<int> ancilla_qubits;
    std::string layout_note;

    int width() const { return circuit.num_qubits(); }
};

/// Prepares sum_i sqrt(probs[i]) |i> on `qubits` (little-endian) from |0...0>.
/// Works from the most significant qubit down: each qubit is rotated by the
/// conditional probability of its bit being 1 given the bits above it, with
/// the higher bits as pattern controls.
inline void load_distribution(Circuit& circuit, const std::vector<int>& qubits,
                              const std::vector<double>& probs) {
    const int n = static_cast<int>(qubits.size());
    if (probs.size() != (std::size_t{1} << n)) {
        throw DomainError("load_distribution: need 2^n probabilities");
    }
    for (int t = n - 1; t >= 0; --t) {
        const std::vector<int> above(qubits.begin() + t + 1, qubits.end());
        const std::uint64_t prefixes = std::uint64_t{1} << (n - 1 - t);
        const std::uint64_t block = std::uint64_t{1} << (t + 1);
        const std::uint64_t half = std::uint64_t{1} << t;
        for (std::uint64_t prefix = 0; prefix < prefixes; ++prefix) {
            double total = 0.0;
            double ones = 0.0;
            for (std::uint64_t low = 0; low < block; ++low) {
                const double p = probs[prefix * block + low];
                total += p;
                if (low >= half) {
                    ones += p;
                }
            }
            if (total <= 0.0 || ones <= 0.0) {
                continue;
            }
            const double angle = probability_angle(std::clamp(ones / total, 0.0, 1.0));
            circuit.ry(qubits[t], angle, pattern_controls(above, prefix));
        }
    }
}

/// Affine rotation angle theta(i) = offset + slope * i in the grid index i.
struct LinearRotation {
    double slope = 0.0;
    double offset = 0.0;

    double at(double index) const { return offset + slope * index; }
};

/// Rotation angle encoding the asset's default probability at a factor
/// realization.
inline double default_angle(const Asset& asset, const std::vector<double>& z) {
    return probability_angle(conditional_pd(asset.p0, asset.rho, asset.alphas, z));
}

/// Endpoint secant of the default angle along factor `factor_index`, with all
/// other factors held at the midpoint of their truncation range. The fitted
/// angle is exact at both grid endpoints of that factor.
inline LinearRotation fit_linear_rotation(const Asset& asset, std::size_t factor_index,
                                          const std::vector<FactorGrid>& grids) {
    if (factor_index >= grids.size() || grids.size() != asset.alphas.size()) {
        throw DomainError("fit_linear_rotation: factor index or grid count mismatch");
    }
    std::vector<double> z(grids.size());
    for (std::size_t j = 0; j < grids.size(); ++j) {
        z[j] = grids[j].midpoint();
    }
    const FactorGrid& g = grids[factor_index];
    z[factor_index] = g.values.front();
    const double lo = default_angle(asset, z);
    z[factor_index] = g.values.back();
    const double hi = default_angle(asset, z);
    const double steps = static_cast<double>(g.size() - 1);
    return {(hi - lo) / steps, lo};
}

/// Per-asset linear angle model over all factor registers:
/// theta(i_1..i_R) = offset + sum_r slope_r * i_r.
///
/// Each slope is the endpoint secant of fit_linear_rotation. The offset is
/// sum_r offset_r - (R - 1) * theta(mid), which reduces to the single fitted
/// line when R = 1 and reproduces the angle everywhere whenever it is affine
/// in the factor indices.
struct LinearAngles {
    double offset = 0.0;
    std::vector<double> slopes;

    double at(const std::vector<std::uint64_t>& indices) const {
        double t = offset;
        for (std::size_t r = 0; r < slopes.size(); ++r) {
            t += slopes[r] * static_cast<double>(indices[r]);
        }
        return t;
    }
};

inline LinearAngles linear_angles(const Asset& asset, const std::vector<FactorGrid>& grids) {
    std::vector<double> mid(grids.size());
    for (std::size_t r = 0; r < grids.size(); ++r) {
        mid[r] = grids[r].midpoint();
    }
    LinearAngles la;
    la.offset = -static_cast<double>(grids.size() - 1) * default_angle(asset, mid);
    for (std::size_t r = 0; r < grids.size(); ++r) {
        const LinearRotation fit = fit_linear_rotation(asset, r, grids);
        la.offset += fit.offset;
        la.slopes.push_back(fit.slope);
    }
    return la;
}

namespace detail {

/// RY(offset) followed by RY(slope * 2^j) controlled on each index bit j.
inline void add_linear_rotation(Circuit& circuit, const std::vector<int>& index_qubits, int target,
                                double slope, double offset) {
    if (offset != 0.0) {
        circuit.ry(target, offset);
    }
    if (slope == 0.0) {
        return;
    }
    for (std::size_t j = 0; j < index_qubits.size(); ++j) {
        circuit.ry(target, slope * static_cast<double>(std::uint64_t{1} << j),
                   {{index_qubits[j], true}});
    }
}

inline void check_grids(const Portfolio& portfolio, const std::vector<FactorGrid>& grids) {
    portfolio.validate();
    if (static_cast<int>(grids.size()) != portfolio.num_factors) {
        throw DomainError("model: portfolio has " + std::to_string(portfolio.num_factors) +
                          " factors but " + std::to_string(grids.size()) + " grids were given");
    }
    for (const auto& g : grids) {
        if (g.n_z < 1 || g.size() != (std::size_t{1} << g.n_z) || g.probs.size() != g.size()) {
            throw DomainError("model: malformed factor grid");
        }
    }
}

/// Factor value vector for a joint index over all factor registers, factor 0
/// in the lowest bits.
inline std::vector<double> joint_values(const std::vector<FactorGrid>& grids, std::uint64_t joint) {
    std::vector<double> z(grids.size());
    for (std::size_t i = 0; i < grids.size(); ++i) {
        const std::uint64_t m = grids[i].size();
        z[i] = grids[i].values[joint % m];
        joint /= m;
    }
    return z;
}

/// Factor registers then asset qubits, both encodings.
inline ModelCircuit build_factor_model(const Portfolio& portfolio,
                                       const std::vector<FactorGrid>& grids, Encoding encoding,
                                       ModelVariant variant) {
    check_grids(portfolio, grids);
    const int total_factor_qubits = std::accumulate(
        grids.begin(), grids.end(), 0, [](int s, const FactorGrid& g) { return s + g.n_z; });
    const int K = static_cast<int>(portfolio.size());
    ModelCircuit m;
    m.variant = variant;
    m.encoding = encoding;
    m.circuit = Circuit(total_factor_qubits + K);

    int next = 0;
    for (const auto& g : grids) {
        m.factor_qubits.push_back({next, g.n_z});
        next += g.n_z;
    }
    for (int k = 0; k < K; ++k) {
        m.asset_qubits.push_back(next + k);
    }
    for (std::size_t i = 0; i < grids.size(); ++i) {
        load_distribution(m.circuit, m.factor_qubits[i].qubits(), grids[i].probs);
    }

    std::ostringstream note;
    note << to_string(variant) << " " << to_string(encoding) << ": factor qubits [0, "
         << total_factor_qubits << "), asset qubits [" << total_factor_qubits << ", "
         << total_factor_qubits + K << "), no ancillas";

    if (encoding == Encoding::Exact) {
        std::vector<int> all_factor(static_cast<std::size_t>(total_factor_qubits));
        std::iota(all_factor.begin(), all_factor.end(), 0);
        const std::uint64_t points = std::uint64_t{1} << total_factor_qubits;
        for (int k = 0; k < K; ++k) {
            for (std::uint64_t joint = 0; joint < points; ++joint) {
                const double angle =
                    default_angle(portfolio.assets[k], joint_values(grids, joint));
                m.circuit.ry(m.asset_qubits[k], angle, pattern_controls(all_factor, joint));
            }
        }
        note << "; exact encoding uses one pattern-controlled rotation per joint grid point "
                "per asset ("
             << points * static_cast<std::uint64_t>(K)
             << " rotations), exponential in factor qubits, intended as a desk-scale oracle";
    } else {
        for (int k = 0; k < K; ++k) {
            const LinearAngles la = linear_angles(portfolio.assets[k], grids);
            add_linear_rotation(m.circuit, {}, m.asset_qubits[k], 0.0, la.offset);
            for (std::size_t r = 0; r < grids.size(); ++r) {
                add_linear_rotation(m.circuit, m.factor_qubits[r].qubits(), m.asset_qubits[k],
                                    la.slopes[r], 0.0);
            }
        }
        note << "; one controlled linear rotation per factor per asset";
    }
    m.layout_note = note.str();
    return m;
}

} // namespace detail

/// One-factor model (R = 1).
inline ModelCircuit build_single_factor(const Portfolio& portfolio, const FactorGrid& grid,
                                        Encoding encoding) {
    if (portfolio.num_factors != 1) {
        throw DomainError("build_single_factor: portfolio must have exactly one factor, has " +
                          std::to_string(portfolio.num_factors));
    }
    return detail::build_factor_model(portfolio, {grid}, encoding, ModelVariant::SingleFactor);
}

/// One register per factor; each factor register drives one linear rotation
/// per asset (linear encoding) or the joint pattern drives exact rotations.
inline ModelCircuit build_multi_rotation(const Portfolio& portfolio,
                                         const std::vector<FactorGrid>& grids, Encoding encoding) {
    return detail::build_factor_model(portfolio, grids, encoding, ModelVariant::MultiRotation);
}

/// Discretization used by the single-rotation variant. Factor r carries the
/// weighted value w_r = alpha_r z_r ~ N(0, alpha_r^2) on the common lattice
/// w = step * (j - (points_r - 1) / 2), so adding indices adds values. The
/// combined factor is y = step * (S - max_sum / 2) with S the index sum.
struct SumGrid {
    double step = 1.0;
    std::vector<std::uint64_t> points;       // used lattice points per factor
    std::vector<std::vector<double>> probs;  // 2^n_z entries per factor, zero past `points`
    std::uint64_t max_sum = 0;
    int sum_width = 1;

    double combined_value(std::uint64_t s) const {
        return step * (static_cast<double>(s) - 0.5 * static_cast<double>(max_sum));
    }
};

/// Builds the common-step lattice. The step is the smallest that lets every
/// factor's +-bound range fit in its register; narrower factors use fewer
/// points.
inline SumGrid make_sum_grid(const std::vector<FactorGrid>& grids,
                             const std::vector<double>& shared_alphas) {
    if (grids.size() != shared_alphas.size() || grids.empty()) {
        throw DomainError("make_sum_grid: need one weight per factor grid");
    }
    SumGrid sg;
    double step = 0.0;
    for (std::size_t r = 0; r < grids.size(); ++r) {
        const double half_range = 0.5 * (grids[r].z_max - grids[r].z_min);
        const double span = 2.0 * half_range * std::abs(shared_alphas[r]);
        step = std::max(step, span / static_cast<double>(grids[r].size() - 1));
    }
    sg.step = step > 0.0 ? step : 1.0;
    for (std::size_t r = 0; r < grids.size(); ++r) {
        const std::uint64_t cap = grids[r].size();
        const double half_range = 0.5 * (grids[r].z_max - grids[r].z_min);
        const double sd = std::abs(shared_alphas[r]);
        std::uint64_t m = 1;
        if (sd > 0.0) {
            m = 1 + static_cast<std::uint64_t>(std::llround(2.0 * half_range * sd / sg.step));
            m = std::min(m, cap);
        }
        std::vector<double> p(cap, 0.0);
        double total = 0.0;
        for (std::uint64_t j = 0; j < m; ++j) {
            const double w = sg.step * (static_cast<double>(j) - 0.5 * static_cast<double>(m - 1));
            p[j] = sd > 0.0 ? std_normal_pdf(w / sd) : 1.0;
            total += p[j];
        }
        for (std::uint64_t j = 0; j < m / 2; ++j) {
            const double avg = 0.5 * (p[j] + p[m - 1 - j]);
            p[j] = p[m - 1 - j] = avg;
        }
        for (auto& x : p) {
            x /= total;
        }
        sg.points.push_back(m);
        sg.probs.push_back(std::move(p));
        sg.max_sum += m - 1;
    }
    sg.sum_width = bit_width_of(sg.max_sum);
    return sg;
}

/// Endpoint secant of the default angle over the sum-register index range.
inline LinearRotation fit_sum_rotation(const Asset& asset, const SumGrid& sg) {
    const double lo = probability_angle(
        conditional_pd_given_combined(asset.p0, asset.rho, sg.combined_value(0)));
    if (sg.max_sum == 0) {
        return {0.0, lo};
    }
    const double hi = probability_angle(
        conditional_pd_given_combined(asset.p0, asset.rho, sg.combined_value(sg.max_sum)));
    return {(hi - lo) / static_cast<double>(sg.max_sum), lo};
}

/// Single-register variant: all assets share one weight vector, the weighted
/// factors are summed into a sum register, and each asset gets exactly one
/// linear rotation controlled by that register.
inline ModelCircuit build_single_rotation(const Portfolio& portfolio,
                                          const std::vector<FactorGrid>& grids,
                                          const std::vector<double>& shared_alphas) {
    detail::check_grids(portfolio, grids);
    if (shared_alphas.size() != grids.size()) {
        throw DomainError("build_single_rotation: shared weight vector has wrong length");
    }
    for (std::size_t k = 0; k < portfolio.size(); ++k) {
        if (portfolio.assets[k].alphas != shared_alphas) {
            throw PreconditionError("build_single_rotation: asset " + std::to_string(k) +
                                    " has factor weights different from the shared vector");
        }
    }
    const SumGrid sg = make_sum_grid(grids, shared_alphas);
    const int total_factor_qubits = std::accumulate(
        grids.begin(), grids.end(), 0, [](int s, const FactorGrid& g) { return s + g.n_z; });
    const int K = static_cast<int>(portfolio.size());

    ModelCircuit m;
    m.variant = ModelVariant::SingleRotation;
    m.encoding = Encoding::Linear;
    m.circuit = Circuit(total_factor_qubits + sg.sum_width + K);
    int next = 0;
    for (const auto& g : grids) {
        m.factor_qubits.push_back({next, g.n_z});
        next += g.n_z;
    }
    m.sum_register = {next, sg.sum_width};
    next += sg.sum_width;
    for (int k = 0; k < K; ++k) {
        m.asset_qubits.push_back(next + k);
    }

    for (std::size_t r = 0; r < grids.size(); ++r) {
        load_distribution(m.circuit, m.factor_qubits[r].qubits(), sg.probs[r]);
    }
    const std::vector<int> sum = m.sum_register.qubits();
    for (std::size_t r = 0; r < grids.size(); ++r) {
        add_register(m.circuit, m.factor_qubits[r].qubits(), sum);
    }
    for (int k = 0; k < K; ++k) {
        const LinearRotation fit = fit_sum_rotation(portfolio.assets[k], sg);
        detail::add_linear_rotation(m.circuit, sum, m.asset_qubits[k], fit.slope, fit.offset);
    }

    std::ostringstream note;
    note << "single_rotation linear: factor qubits [0, " << total_factor_qubits
         << "), sum register [" << m.sum_register.first << ", " << m.sum_register.end()
         << ") width " << sg.sum_width << " (max index sum " << sg.max_sum
         << ", lattice step " << sg.step << "), asset qubits [" << m.sum_register.end() << ", "
         << m.sum_register.end() + K << "), 0 ancillas (multi-controlled increments)";
    m.layout_note = note.str();
    return m;
}

} // namespace qcra
