#pragma once

// Value at Risk, expected loss and economic capital. The cdf of the total
// loss can come from the quantum pipeline (exact readout or IQAE) or from a
// classical distribution; a bisection over the discrete loss support finds
// the VaR.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "qcra/errors.hpp"
#include "qcra/estimation.hpp"
#include "qcra/gaussian.hpp"
#include "qcra/objective.hpp"
#include "qcra/uncertainty.hpp"

namespace qcra {

struct LossPoint {
    double loss = 0.0;
    double prob = 0.0;
};

/// Finite loss distribution, sorted by loss with unique support points.
struct LossDistribution {
    std::vector<LossPoint> points;

    static LossDistribution from_masses(const std::map<double, double>& masses) {
        LossDistribution d;
        for (const auto& [loss, p] : masses) {
            d.points.push_back({loss, p});
        }
        return d;
    }

    std::vector<double> support() const {
        std::vector<double> s;
        s.reserve(points.size());
        for (const auto& pt : points) {
            s.push_back(pt.loss);
        }
        return s;
    }

    double total_probability() const {
        double s = 0.0;
        for (const auto& pt : points) {
            s += pt.prob;
        }
        return s;
    }

    /// P[L <= x].
    double cdf(double x) const {
        double s = 0.0;
        for (const auto& pt : points) {
            if (pt.loss <= x) {
                s += pt.prob;
            }
        }
        return std::min(s, 1.0);
    }

    /// Probability mass at exactly `loss`, zero off the support.
    double mass(double loss) const {
        for (const auto& pt : points) {
            if (pt.loss == loss) {
                return pt.prob;
            }
        }
        return 0.0;
    }

    /// Smallest support point whose cdf reaches `level`.
    double quantile(double level) const {
        double s = 0.0;
        for (const auto& pt : points) {
            s += pt.prob;
            if (s >= level) {
                return pt.loss;
            }
        }
        return points.empty() ? 0.0 : points.back().loss;
    }
};

inline double total_variation(const LossDistribution& a, const LossDistribution& b) {
    std::map<double, double> diff;
    for (const auto& pt : a.points) {
        diff[pt.loss] += pt.prob;
    }
    for (const auto& pt : b.points) {
        diff[pt.loss] -= pt.prob;
    }
    double tv = 0.0;
    for (const auto& [loss, d] : diff) {
        tv += std::abs(d);
    }
    return 0.5 * tv;
}

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

namespace detail {

/// Joint grid point count, checked against an enumeration budget that also
/// accounts for the 2^K default patterns.
inline std::uint64_t joint_points(const Portfolio& portfolio, const std::vector<FactorGrid>& grids,
                                  std::uint64_t budget) {
    if (portfolio.size() > 40) {
        throw DomainError("enumeration budget exceeded: too many assets");
    }
    const std::uint64_t patterns = std::uint64_t{1} << portfolio.size();
    std::uint64_t points = 1;
    for (const auto& g : grids) {
        points *= g.size();
        if (points * patterns > budget) {
            throw DomainError("enumeration budget exceeded: " + std::to_string(budget) +
                              " joint outcomes allowed");
        }
    }
    if (points * patterns > budget) {
        throw DomainError("enumeration budget exceeded");
    }
    return points;
}

/// Aggregates the conditionally independent default patterns for one factor
/// realization with weight `pz` and per-asset default probabilities `pds`.
inline void add_patterns(const Portfolio& portfolio, const std::vector<double>& pds, double pz,
                         std::map<double, double>& masses) {
    const std::uint64_t patterns = std::uint64_t{1} << portfolio.size();
    for (std::uint64_t b = 0; b < patterns; ++b) {
        double p = pz;
        for (std::size_t k = 0; k < portfolio.size(); ++k) {
            p *= ((b >> k) & 1U) ? pds[k] : 1.0 - pds[k];
        }
        masses[pattern_loss(portfolio, b)] += p;
    }
}

} // namespace detail

/// Enumerates every joint factor grid point and every default pattern.
inline LossDistribution exact_loss_distribution(const Portfolio& portfolio,
                                                const std::vector<FactorGrid>& grids,
                                                std::uint64_t budget = kDefaultEnumerationBudget) {
    detail::check_grids(portfolio, grids);
    const std::uint64_t points = detail::joint_points(portfolio, grids, budget);
    std::map<double, double> masses;
    std::vector<double> pds(portfolio.size());
    for (std::uint64_t joint = 0; joint < points; ++joint) {
        double pz = 1.0;
        std::uint64_t rest = joint;
        for (const auto& g : grids) {
            pz *= g.probs[rest % g.size()];
            rest /= g.size();
        }
        const std::vector<double> z = detail::joint_values(grids, joint);
        for (std::size_t k = 0; k < portfolio.size(); ++k) {
            const Asset& a = portfolio.assets[k];
            pds[k] = conditional_pd(a.p0, a.rho, a.alphas, z);
        }
        detail::add_patterns(portfolio, pds, pz, masses);
    }
    return LossDistribution::from_masses(masses);
}

/// Unconditional model default probability of each asset:
/// sum over grid points of (prod_i p_i) * PD_k(z).
inline std::vector<double> unconditional_pds(const Portfolio& portfolio,
                                             const std::vector<FactorGrid>& grids,
                                             std::uint64_t budget = kDefaultEnumerationBudget) {
    detail::check_grids(portfolio, grids);
    const std::uint64_t points = detail::joint_points(portfolio, grids, budget);
    std::vector<double> out(portfolio.size(), 0.0);
    for (std::uint64_t joint = 0; joint < points; ++joint) {
        double pz = 1.0;
        std::uint64_t rest = joint;
        for (const auto& g : grids) {
            pz *= g.probs[rest % g.size()];
            rest /= g.size();
        }
        const std::vector<double> z = detail::joint_values(grids, joint);
        for (std::size_t k = 0; k < portfolio.size(); ++k) {
            const Asset& a = portfolio.assets[k];
            out[k] += pz * conditional_pd(a.p0, a.rho, a.alphas, z);
        }
    }
    return out;
}

/// Classical Monte Carlo: draw a factor realization from the grids, then each
/// asset's default as a Bernoulli with its conditional PD. Deterministic per
/// seed.
inline LossDistribution monte_carlo_distribution(const Portfolio& portfolio,
                                                 const std::vector<FactorGrid>& grids,
                                                 std::uint64_t n_paths, std::uint64_t seed) {
    detail::check_grids(portfolio, grids);
    if (n_paths == 0) {
        throw DomainError("monte_carlo_distribution: n_paths must be positive");
    }
    const std::uint64_t points = detail::joint_points(portfolio, grids, kDefaultEnumerationBudget);
    // PD table per joint grid point.
    std::vector<double> pd_table(points * portfolio.size());
    for (std::uint64_t joint = 0; joint < points; ++joint) {
        const std::vector<double> z = detail::joint_values(grids, joint);
        for (std::size_t k = 0; k < portfolio.size(); ++k) {
            const Asset& a = portfolio.assets[k];
            pd_table[joint * portfolio.size() + k] = conditional_pd(a.p0, a.rho, a.alphas, z);
        }
    }
    std::vector<std::vector<double>> cumulative;
    for (const auto& g : grids) {
        std::vector<double> c(g.size());
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            s += g.probs[i];
            c[i] = s;
        }
        cumulative.push_back(std::move(c));
    }

    std::mt19937_64 rng(seed);
    std::map<double, std::uint64_t> counts;
    for (std::uint64_t path = 0; path < n_paths; ++path) {
        std::uint64_t joint = 0;
        std::uint64_t stride = 1;
        for (std::size_t r = 0; r < grids.size(); ++r) {
            const double u = uniform01(rng) * cumulative[r].back();
            auto it = std::upper_bound(cumulative[r].begin(), cumulative[r].end(), u);
            std::uint64_t idx = static_cast<std::uint64_t>(it - cumulative[r].begin());
            idx = std::min<std::uint64_t>(idx, grids[r].size() - 1);
            joint += idx * stride;
            stride *= grids[r].size();
        }
        std::uint64_t pattern = 0;
        for (std::size_t k = 0; k < portfolio.size(); ++k) {
            if (uniform01(rng) < pd_table[joint * portfolio.size() + k]) {
                pattern |= std::uint64_t{1} << k;
            }
        }
        ++counts[pattern_loss(portfolio, pattern)];
    }
    std::map<double, double> masses;
    for (const auto& [loss, c] : counts) {
        masses[loss] = static_cast<double>(c) / static_cast<double>(n_paths);
    }
    return LossDistribution::from_masses(masses);
}

inline double expected_loss(const LossDistribution& dist) {
    double s = 0.0;
    for (const auto& pt : dist.points) {
        s += pt.loss * pt.prob;
    }
    return s;
}

/// VaR minus expected loss. Not clamped: degenerate inputs may go negative.
inline double economic_capital(double var, double el) { return var - el; }

/// How the quantum pipeline is assembled.
struct PipelineOptions {
    ModelVariant variant = ModelVariant::MultiRotation;
    Encoding encoding = Encoding::Exact;
    ObjectiveMode mode = ObjectiveMode::SFree;
};

inline ModelCircuit build_model(const Portfolio& portfolio, const std::vector<FactorGrid>& grids,
                                const PipelineOptions& opts) {
    switch (opts.variant) {
    case ModelVariant::SingleFactor:
        if (grids.size() != 1) {
            throw DomainError("single_factor variant needs exactly one factor grid");
        }
        return build_single_factor(portfolio, grids.front(), opts.encoding);
    case ModelVariant::MultiRotation:
        return build_multi_rotation(portfolio, grids, opts.encoding);
    case ModelVariant::SingleRotation:
        if (portfolio.assets.empty()) {
            throw DomainError("portfolio: need at least one asset");
        }
        return build_single_rotation(portfolio, grids, portfolio.assets.front().alphas);
    }
    throw DomainError("unknown model variant");
}

/// Classical enumeration of the model exactly as the circuit encodes it. For
/// the exact encoding this is exact_loss_distribution; the linear encodings
/// use the default probabilities implied by their fitted angles, and the
/// single-rotation variant enumerates its index-sum lattice.
inline LossDistribution encoded_loss_distribution(const Portfolio& portfolio,
                                                  const std::vector<FactorGrid>& grids,
                                                  const PipelineOptions& opts) {
    if (opts.variant != ModelVariant::SingleRotation && opts.encoding == Encoding::Exact) {
        return exact_loss_distribution(portfolio, grids);
    }
    detail::check_grids(portfolio, grids);
    std::map<double, double> masses;
    std::vector<double> pds(portfolio.size());
    if (opts.variant == ModelVariant::SingleRotation) {
        const SumGrid sg = make_sum_grid(grids, portfolio.assets.front().alphas);
        // Distribution of the index sum by convolution.
        std::vector<double> sum_probs{1.0};
        for (std::size_t r = 0; r < grids.size(); ++r) {
            std::vector<double> next(sum_probs.size() + sg.points[r] - 1, 0.0);
            for (std::size_t s = 0; s < sum_probs.size(); ++s) {
                for (std::uint64_t j = 0; j < sg.points[r]; ++j) {
                    next[s + j] += sum_probs[s] * sg.probs[r][j];
                }
            }
            sum_probs = std::move(next);
        }
        std::vector<LinearRotation> fits;
        for (const auto& a : portfolio.assets) {
            fits.push_back(fit_sum_rotation(a, sg));
        }
        for (std::size_t s = 0; s < sum_probs.size(); ++s) {
            for (std::size_t k = 0; k < portfolio.size(); ++k) {
                const double half = 0.5 * fits[k].at(static_cast<double>(s));
                pds[k] = std::sin(half) * std::sin(half);
            }
            detail::add_patterns(portfolio, pds, sum_probs[s], masses);
        }
        return LossDistribution::from_masses(masses);
    }
    const std::uint64_t points = detail::joint_points(portfolio, grids, kDefaultEnumerationBudget);
    std::vector<LinearAngles> angles;
    for (const auto& a : portfolio.assets) {
        angles.push_back(linear_angles(a, grids));
    }
    std::vector<std::uint64_t> idx(grids.size());
    for (std::uint64_t joint = 0; joint < points; ++joint) {
        double pz = 1.0;
        std::uint64_t rest = joint;
        for (std::size_t r = 0; r < grids.size(); ++r) {
            idx[r] = rest % grids[r].size();
            pz *= grids[r].probs[idx[r]];
            rest /= grids[r].size();
        }
        for (std::size_t k = 0; k < portfolio.size(); ++k) {
            const double half = 0.5 * angles[k].at(idx);
            pds[k] = std::sin(half) * std::sin(half);
        }
        detail::add_patterns(portfolio, pds, pz, masses);
    }
    return LossDistribution::from_masses(masses);
}

/// Every distinct total loss reachable by some default pattern, ascending.
inline std::vector<double> loss_support(const Portfolio& portfolio) {
    if (portfolio.size() > 30) {
        throw DomainError("loss_support: too many assets to enumerate");
    }
    std::vector<double> s;
    const std::uint64_t patterns = std::uint64_t{1} << portfolio.size();
    for (std::uint64_t b = 0; b < patterns; ++b) {
        s.push_back(pattern_loss(portfolio, b));
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

struct ExactEstimator {};
struct IqaeEstimator {
    IqaeConfig config;
};
struct ClassicalEstimator {
    LossDistribution distribution;
};
using Estimator = std::variant<ExactEstimator, IqaeEstimator, ClassicalEstimator>;

inline std::string estimator_name(const Estimator& e) {
    switch (e.index()) {
    case 0: return "exact";
    case 1: return "iqae";
    default: return "classical";
    }
}

/// One cdf probe. For IQAE probes the interval is the IQAE confidence
/// interval; for the other estimators it collapses onto the estimate.
struct CdfEstimate {
    double threshold = 0.0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool ok = true;
    int rounds = 0;
    std::uint64_t quantum_samples = 0;
    std::uint64_t shots = 0;
    std::uint64_t oracle_queries = 0;
    std::uint64_t max_power = 0;
    std::string message;
};

namespace detail {

inline CdfEstimate estimate_with_model(const Portfolio& portfolio, const ModelCircuit& model,
                                       double x, const Estimator& estimator,
                                       const PipelineOptions& opts, std::uint64_t probe_index) {
    CdfEstimate ce;
    ce.threshold = x;
    if (const auto* classical = std::get_if<ClassicalEstimator>(&estimator)) {
        ce.estimate = ce.ci_low = ce.ci_high = classical->distribution.cdf(x);
        return ce;
    }
    const ObjectiveCircuit a = build_objective(portfolio, model, x, opts.mode);
    if (std::holds_alternative<ExactEstimator>(estimator)) {
        ce.estimate = ce.ci_low = ce.ci_high = exact_amplitude(a);
        return ce;
    }
    IqaeConfig cfg = std::get<IqaeEstimator>(estimator).config;
    cfg.seed += probe_index;
    const IqaeResult r = iqae(a, cfg);
    ce.estimate = r.estimate;
    ce.ci_low = r.ci_low;
    ce.ci_high = r.ci_high;
    ce.ok = r.success;
    ce.rounds = r.rounds;
    ce.quantum_samples = r.quantum_samples;
    ce.shots = r.shots;
    ce.oracle_queries = r.oracle_queries;
    for (const auto& round : r.trace) {
        ce.max_power = std::max(ce.max_power, round.power);
    }
    ce.message = r.message;
    return ce;
}

} // namespace detail

/// P[L <= x] through the chosen estimator. IQAE probes use the configured
/// seed unchanged.
inline CdfEstimate cdf_point(const Portfolio& portfolio, const std::vector<FactorGrid>& grids,
                             double x, const Estimator& estimator,
                             const PipelineOptions& opts = {}) {
    if (std::holds_alternative<ClassicalEstimator>(estimator)) {
        return detail::estimate_with_model(portfolio, ModelCircuit{}, x, estimator, opts, 0);
    }
    const ModelCircuit model = build_model(portfolio, grids, opts);
    return detail::estimate_with_model(portfolio, model, x, estimator, opts, 0);
}

struct VarResult {
    bool success = true;
    double var = 0.0;
    double alpha = 0.0;
    double cdf_at_var = 0.0;
    double expected_loss = 0.0;
    double economic_capital = 0.0;
    std::vector<CdfEstimate> bisection_trace;
    std::string message;

    std::uint64_t total_quantum_samples() const {
        std::uint64_t s = 0;
        for (const auto& t : bisection_trace) {
            s += t.quantum_samples;
        }
        return s;
    }
};

/// Smallest support point x with estimated P[L <= x] >= alpha, by binary
/// search over the sorted loss support. The decision uses the point estimate;
/// the trace keeps every probe (with intervals) in evaluation order. Probe i
/// of an IQAE search runs with seed config.seed + i.
inline VarResult var_bisection(const Portfolio& portfolio, const std::vector<FactorGrid>& grids,
                               double alpha, const Estimator& estimator,
                               const PipelineOptions& opts = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("var_bisection: alpha must lie in (0,1)");
    }
    VarResult res;
    res.alpha = alpha;

    std::vector<double> support;
    LossDistribution model_dist;
    ModelCircuit model;
    if (const auto* classical = std::get_if<ClassicalEstimator>(&estimator)) {
        support = classical->distribution.support();
        model_dist = classical->distribution;
        if (support.empty()) {
            throw DomainError("var_bisection: empty loss distribution");
        }
    } else {
        model = build_model(portfolio, grids, opts);
        support = loss_support(portfolio);
        model_dist = encoded_loss_distribution(portfolio, grids, opts);
    }
    res.expected_loss = expected_loss(model_dist);

    std::map<std::size_t, std::size_t> probed; // support index -> trace position
    auto probe = [&](std::size_t i) -> const CdfEstimate& {
        if (auto it = probed.find(i); it != probed.end()) {
            return res.bisection_trace[it->second];
        }
        res.bisection_trace.push_back(detail::estimate_with_model(
            portfolio, model, support[i], estimator, opts, res.bisection_trace.size()));
        probed[i] = res.bisection_trace.size() - 1;
        const CdfEstimate& ce = res.bisection_trace.back();
        if (!ce.ok) {
            res.success = false;
            if (res.message.empty()) {
                res.message = "estimator failed at threshold " + std::to_string(ce.threshold) +
                              ": " + ce.message;
            }
        }
        return ce;
    };

    std::size_t lo = 0;
    std::size_t hi = support.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (probe(mid).estimate >= alpha) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    res.var = support[lo];
    res.cdf_at_var = probe(lo).estimate;
    res.economic_capital = economic_capital(res.var, res.expected_loss);
    return res;
}

} // namespace qcra
