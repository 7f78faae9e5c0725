#pragma once

// Amplitude estimation for a state-preparation circuit A whose objective qubit
// reads |1> with probability a: exact statevector readout, the Grover
// operator, and Iterative Quantum Amplitude Estimation (IQAE).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "qcra/circuit.hpp"
#include "qcra/errors.hpp"
#include "qcra/objective.hpp"

namespace qcra {

/// Objective-qubit probability of |1> after A|0...0>.
inline double exact_amplitude(const ObjectiveCircuit& a) {
    const Statevector psi = apply(a.circuit, Statevector(a.width()));
    return marginal_probability(psi, a.objective_qubit, 1);
}

/// Q = A S0 A^-1 S_good, where S_good flips the sign of states with the
/// objective set and S0 flips the sign of |0...0>. Gate order is therefore
/// S_good, A^-1, S0, A. Each application rotates by 2 theta in the
/// good/bad plane, where a = sin^2 theta.
inline Circuit grover_operator(const ObjectiveCircuit& a) {
    const int n = a.width();
    Circuit q(n);
    q.z(a.objective_qubit);
    q.append(inverse(a.circuit));
    std::vector<Control> others;
    for (int i = 1; i < n; ++i) {
        others.push_back({i, false});
    }
    q.x(0);
    q.z(0, others);
    q.x(0);
    q.append(a.circuit);
    return q;
}

/// Q^k A |0...0>.
inline Statevector amplified_state(const ObjectiveCircuit& a, const Circuit& grover,
                                   std::uint64_t power) {
    Statevector psi = apply(a.circuit, Statevector(a.width()));
    for (std::uint64_t i = 0; i < power; ++i) {
        apply_in_place(grover, psi);
    }
    return psi;
}

/// Exact Clopper-Pearson interval for `ones` successes in `shots` trials at
/// two-sided level `alpha`.
inline std::pair<double, double> clopper_pearson(std::uint64_t ones, std::uint64_t shots,
                                                 double alpha) {
    if (shots == 0 || ones > shots) {
        throw DomainError("clopper_pearson: need 0 <= ones <= shots and shots > 0");
    }
    const double k = static_cast<double>(ones);
    const double n = static_cast<double>(shots);
    const double lo = ones == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
    const double hi = ones == shots ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
    return {lo, hi};
}

struct IqaeConfig {
    double epsilon = 0.01;        // target half-width on a
    double confidence = 0.95;     // 1 - alpha
    std::uint64_t shots_per_round = 100;
    int max_rounds = 64;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(epsilon > 0.0 && epsilon < 0.5)) {
            throw DomainError("iqae: epsilon must lie in (0, 0.5)");
        }
        if (!(confidence > 0.0 && confidence < 1.0)) {
            throw DomainError("iqae: confidence must lie in (0, 1)");
        }
        if (shots_per_round == 0) {
            throw DomainError("iqae: shots_per_round must be positive");
        }
        if (max_rounds < 1) {
            throw DomainError("iqae: max_rounds must be positive");
        }
    }
};

struct IqaeRound {
    std::uint64_t power = 0;     // Grover power k
    bool upper_half = true;      // amplified angle in [0, pi]
    std::uint64_t ones = 0;      // counts pooled over consecutive rounds at this k
    std::uint64_t shots = 0;
    double theta_low = 0.0;      // interval on theta / (2 pi) after this round
    double theta_high = 0.25;
};

struct IqaeResult {
    bool success = false;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    int rounds = 0;
    /// Applications of A (or A^-1) consumed: each shot at power k costs
    /// 2k + 1 of them.
    std::uint64_t quantum_samples = 0;
    std::uint64_t shots = 0;          // measurement shots
    std::uint64_t oracle_queries = 0; // sum of shots * k
    std::vector<IqaeRound> trace;
    std::string message;
};

namespace detail {

// Largest admissible scaling 4k+2 such that the amplified interval
// lies in a single half-plane, and whether that is the upper one.
inline std::pair<std::uint64_t, bool> next_power(std::uint64_t k, bool upper, double theta_l,
                                                 double theta_u, double min_ratio = 2.0) {
    const double old_scaling = 4.0 * static_cast<double>(k) + 2.0;
    const double width = theta_u - theta_l;
    if (!(width > 0.0)) {
        return {k, upper};
    }
    const double max_scaling_d = std::floor(1.0 / (2.0 * width));
    if (max_scaling_d < 2.0) {
        return {k, upper};
    }
    const auto max_scaling = static_cast<std::int64_t>(std::min(max_scaling_d, 0x1.0p52));
    std::int64_t scaling = max_scaling - ((max_scaling - 2) % 4 + 4) % 4;
    while (static_cast<double>(scaling) >= min_ratio * old_scaling) {
        const double s = static_cast<double>(scaling);
        const double t_min = s * theta_l - std::floor(s * theta_l);
        const double t_max = s * theta_u - std::floor(s * theta_u);
        if (t_min <= t_max && t_max <= 0.5 && t_min <= 0.5) {
            return {static_cast<std::uint64_t>((scaling - 2) / 4), true};
        }
        if (t_max >= 0.5 && t_max >= t_min && t_min >= 0.5) {
            return {static_cast<std::uint64_t>((scaling - 2) / 4), false};
        }
        scaling -= 4;
    }
    return {k, upper};
}

inline double angle_of(double p) {
    return std::acos(std::clamp(1.0 - 2.0 * p, -1.0, 1.0)) / (2.0 * std::numbers::pi);
}

inline double amplitude_of(double theta) {
    const double s = std::sin(2.0 * std::numbers::pi * theta);
    return s * s;
}

} // namespace detail

/// Iterative QAE. Each round picks the largest Grover power whose amplified
/// angle interval stays inside one half-plane, measures the objective qubit
/// `shots_per_round` times, and intersects the Clopper-Pearson interval
/// (at level alpha / T, T the worst-case number of distinct powers) mapped
/// back to the angle. Stops when the angle interval implies a half-width of
/// at most epsilon on a. Deterministic given the seed.
///
/// The point estimate maps the final power's pooled frequency back to the
/// angle and is clamped into the interval.
inline IqaeResult iqae(const ObjectiveCircuit& a, const IqaeConfig& cfg) {
    cfg.validate();
    const Circuit grover = grover_operator(a);
    std::mt19937_64 rng(cfg.seed);

    const double alpha = 1.0 - cfg.confidence;
    const double min_ratio = 2.0;
    const int split =
        static_cast<int>(std::log(min_ratio * std::numbers::pi / (8.0 * cfg.epsilon)) /
                         std::log(min_ratio)) +
        1;
    const double round_alpha = alpha / static_cast<double>(split);

    IqaeResult res;
    double theta_l = 0.0;
    double theta_u = 0.25;
    std::uint64_t k = 0;
    bool upper = true;
    std::uint64_t pooled_ones = 0;
    std::uint64_t pooled_shots = 0;
    double theta_est = 0.0;
    bool have_round = false;

    while (theta_u - theta_l > cfg.epsilon / std::numbers::pi) {
        if (res.rounds >= cfg.max_rounds) {
            res.message = "max_rounds reached before the target precision";
            break;
        }
        ++res.rounds;
        const auto [next_k, next_upper] = detail::next_power(k, upper, theta_l, theta_u, min_ratio);
        if (!have_round || next_k != k) {
            pooled_ones = 0;
            pooled_shots = 0;
        }
        k = next_k;
        upper = next_upper;
        have_round = true;

        const Statevector psi = amplified_state(a, grover, k);
        const Counts counts = sample(psi, a.objective_qubit, cfg.shots_per_round, rng);
        pooled_ones += counts.ones;
        pooled_shots += counts.shots();
        res.shots += counts.shots();
        res.oracle_queries += counts.shots() * k;
        res.quantum_samples += counts.shots() * (2 * k + 1);

        auto [p_lo, p_hi] = clopper_pearson(pooled_ones, pooled_shots, round_alpha);
        const double p_hat = static_cast<double>(pooled_ones) / static_cast<double>(pooled_shots);
        double t_min = 0.0;
        double t_max = 0.0;
        double t_hat = 0.0;
        if (upper) {
            t_min = detail::angle_of(p_lo);
            t_max = detail::angle_of(p_hi);
            t_hat = detail::angle_of(p_hat);
        } else {
            t_min = 1.0 - detail::angle_of(p_hi);
            t_max = 1.0 - detail::angle_of(p_lo);
            t_hat = 1.0 - detail::angle_of(p_hat);
        }
        const double scaling = 4.0 * static_cast<double>(k) + 2.0;
        const double base = std::floor(scaling * theta_l);
        const double new_u = (std::floor(scaling * theta_u) + t_max) / scaling;
        const double new_l = (base + t_min) / scaling;
        theta_est = (base + t_hat) / scaling;
        // Intersect with the previous interval when they overlap; otherwise the
        // fresh round wins.
        if (new_l <= theta_u && new_u >= theta_l) {
            theta_l = std::max(theta_l, new_l);
            theta_u = std::min(theta_u, new_u);
        } else {
            theta_l = new_l;
            theta_u = new_u;
        }
        res.trace.push_back({k, upper, pooled_ones, pooled_shots, theta_l, theta_u});
    }

    res.ci_low = detail::amplitude_of(theta_l);
    res.ci_high = detail::amplitude_of(theta_u);
    res.estimate = std::clamp(detail::amplitude_of(std::clamp(theta_est, theta_l, theta_u)),
                              res.ci_low, res.ci_high);
    res.success = theta_u - theta_l <= cfg.epsilon / std::numbers::pi;
    if (res.success) {
        res.message.clear();
    }
    return res;
}

} // namespace qcra
