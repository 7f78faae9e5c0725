#pragma once

// Implementation of the qcra command-line subcommands. Each command reads a
// config, runs the analysis and writes its report to a file or to `out`;
// diagnostics go to `err`. Return values are process exit codes:
//   0 success, 1 invalid config or arguments, 2 estimator failure (a partial
//   report is still written), 3 consistency check failed (compare only).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qcra/config.hpp"
#include "qcra/estimation.hpp"
#include "qcra/resources.hpp"
#include "qcra/risk.hpp"

namespace qcra {

struct CommandOptions {
    std::string config_path;
    std::optional<std::string> output_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> estimator;
    std::optional<std::string> variant;
    std::optional<std::string> encoding;
    std::optional<std::string> mode;
};

namespace detail {

inline AnalysisConfig resolve_config(const CommandOptions& opts) {
    AnalysisConfig cfg = load_config(opts.config_path);
    std::vector<std::string> errs;
    if (opts.seed) {
        cfg.seed = *opts.seed;
    }
    if (opts.estimator) {
        if (auto v = parse_estimator(*opts.estimator)) cfg.estimator = *v;
        else errs.push_back("--estimator: unknown value '" + *opts.estimator + "'");
    }
    if (opts.variant) {
        if (auto v = parse_variant(*opts.variant)) cfg.variant = *v;
        else errs.push_back("--variant: unknown value '" + *opts.variant + "'");
    }
    if (opts.encoding) {
        if (auto v = parse_encoding(*opts.encoding)) cfg.encoding = *v;
        else errs.push_back("--encoding: unknown value '" + *opts.encoding + "'");
    }
    if (opts.mode) {
        if (auto v = parse_mode(*opts.mode)) cfg.mode = *v;
        else errs.push_back("--mode: unknown value '" + *opts.mode + "'");
    }
    if (!errs.empty()) {
        throw ConfigError(std::move(errs));
    }
    cfg.validate();
    return cfg;
}

inline void emit(const std::string& text, const std::optional<std::string>& path,
                 std::ostream& out) {
    if (path) {
        std::ofstream f(*path, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + *path);
        }
        f << text;
    } else {
        out << text;
    }
}

inline nlohmann::ordered_json to_json(const ResourceReport& r) {
    nlohmann::ordered_json j;
    j["variant"] = r.variant;
    j["mode"] = r.mode;
    j["encoding"] = r.encoding;
    j["num_assets"] = r.num_assets;
    j["num_factors"] = r.num_factors;
    j["factor_qubits"] = r.factor_qubits;
    j["width_paper_layout"] = r.width_paper_layout;
    auto opt = [](const auto& o) {
        return o ? nlohmann::ordered_json(*o) : nlohmann::ordered_json();
    };
    j["width_built"] = opt(r.width_built);
    j["rotation_count"] = r.rotation_count;
    j["comparator_pattern_count"] = r.comparator_pattern_count;
    j["sum_register_width"] = opt(r.sum_register_width);
    j["index_sum_register_width"] = opt(r.index_sum_register_width);
    j["built_gate_count"] = opt(r.built_gate_count);
    j["built_comparator_gates"] = opt(r.built_comparator_gates);
    j["built_asset_rotation_gates"] = opt(r.built_asset_rotation_gates);
    j["note"] = r.note;
    return j;
}

inline nlohmann::ordered_json to_json(const CdfEstimate& c) {
    nlohmann::ordered_json j;
    j["threshold"] = c.threshold;
    j["estimate"] = c.estimate;
    j["ci_low"] = c.ci_low;
    j["ci_high"] = c.ci_high;
    j["ok"] = c.ok;
    j["rounds"] = c.rounds;
    j["quantum_samples"] = c.quantum_samples;
    j["shots"] = c.shots;
    j["oracle_queries"] = c.oracle_queries;
    j["max_grover_power"] = c.max_power;
    if (!c.message.empty()) {
        j["message"] = c.message;
    }
    return j;
}

inline Estimator make_estimator(const AnalysisConfig& cfg, const Portfolio& portfolio,
                                const std::vector<FactorGrid>& grids) {
    switch (cfg.estimator) {
    case EstimatorKind::Exact: return ExactEstimator{};
    case EstimatorKind::Iqae: return IqaeEstimator{cfg.iqae_config()};
    case EstimatorKind::Classical:
        return ClassicalEstimator{encoded_loss_distribution(portfolio, grids, cfg.pipeline())};
    }
    return ExactEstimator{};
}

inline std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const PreconditionError& e) {
        err << "precondition violated: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace detail

/// VaR, expected loss and economic capital via bisection, as a JSON report.
inline int cmd_analyze(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const AnalysisConfig cfg = detail::resolve_config(opts);
        const Portfolio portfolio = cfg.portfolio();
        const auto grids = cfg.grids();
        const Estimator est = detail::make_estimator(cfg, portfolio, grids);
        const VarResult vr = var_bisection(portfolio, grids, cfg.alpha, est, cfg.pipeline());

        double naive_el = 0.0;
        for (const auto& a : portfolio.assets) {
            naive_el += a.lgd * a.p0;
        }

        nlohmann::ordered_json rep;
        rep["config"] = cfg.to_json();
        nlohmann::ordered_json res;
        res["success"] = vr.success;
        res["var"] = vr.var;
        res["alpha"] = vr.alpha;
        res["cdf_at_var"] = vr.cdf_at_var;
        res["expected_loss"] = vr.expected_loss;
        res["economic_capital"] = vr.economic_capital;
        res["naive_expected_loss"] = naive_el;
        res["expected_loss_model_minus_naive"] = vr.expected_loss - naive_el;
        if (!vr.message.empty()) {
            res["message"] = vr.message;
        }
        rep["result"] = res;
        rep["bisection_trace"] = nlohmann::ordered_json::array();
        std::uint64_t shots = 0;
        std::uint64_t queries = 0;
        std::uint64_t max_power = 0;
        for (const auto& t : vr.bisection_trace) {
            rep["bisection_trace"].push_back(detail::to_json(t));
            shots += t.shots;
            queries += t.oracle_queries;
            max_power = std::max(max_power, t.max_power);
        }
        rep["iqae"] = {{"probes", vr.bisection_trace.size()},
                       {"total_quantum_samples", vr.total_quantum_samples()},
                       {"total_shots", shots},
                       {"total_oracle_queries", queries},
                       {"max_grover_power", max_power}};
        rep["resources"] = detail::to_json(
            estimate_resources(portfolio, grids, cfg.variant, cfg.mode, cfg.encoding));
        detail::emit(rep.dump(2) + "\n", opts.output_path, out);
        if (!vr.success) {
            err << "estimation failed: " << vr.message << '\n';
            return 2;
        }
        return 0;
    });
}

/// Loss distribution as CSV (`loss,probability,cdf`). Factor-grid variants
/// emit the exact enumeration of the Gaussian model; the single-rotation
/// variant emits the distribution on its index-sum lattice.
inline int cmd_distribution(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const AnalysisConfig cfg = detail::resolve_config(opts);
        const Portfolio portfolio = cfg.portfolio();
        const auto grids = cfg.grids();
        const LossDistribution dist =
            cfg.variant == ModelVariant::SingleRotation
                ? encoded_loss_distribution(portfolio, grids, cfg.pipeline())
                : exact_loss_distribution(portfolio, grids);
        std::string csv = "loss,probability,cdf\n";
        double running = 0.0;
        for (const auto& pt : dist.points) {
            running += pt.prob;
            csv += detail::format_g12(pt.loss) + "," + detail::format_g12(pt.prob) + "," +
                   detail::format_g12(running) + "\n";
        }
        detail::emit(csv, opts.output_path, out);
        return 0;
    });
}

inline int cmd_resources(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const AnalysisConfig cfg = detail::resolve_config(opts);
        const Portfolio portfolio = cfg.portfolio();
        const auto grids = cfg.grids();
        nlohmann::ordered_json rep;
        rep["config"] = cfg.to_json();
        rep["resources"] = detail::to_json(
            estimate_resources(portfolio, grids, cfg.variant, cfg.mode, cfg.encoding));
        detail::emit(rep.dump(2) + "\n", opts.output_path, out);
        return 0;
    });
}

/// Runs every estimator at each support threshold and prints a consistency
/// table. Checks: quantum exact readout vs classical enumeration of the
/// encoded model (1e-9), IQAE vs exact readout (epsilon), Monte Carlo vs the
/// exact Gaussian model (3 binomial standard deviations).
inline int cmd_compare(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        const AnalysisConfig cfg = detail::resolve_config(opts);
        if (!cfg.epsilon || !cfg.confidence) {
            throw ConfigError({"analysis: epsilon and confidence are required for compare"});
        }
        const Portfolio portfolio = cfg.portfolio();
        const auto grids = cfg.grids();
        const PipelineOptions pipe = cfg.pipeline();
        const ModelCircuit model = build_model(portfolio, grids, pipe);
        const LossDistribution encoded = encoded_loss_distribution(portfolio, grids, pipe);
        const LossDistribution gaussian = cfg.variant == ModelVariant::SingleRotation
                                              ? encoded
                                              : exact_loss_distribution(portfolio, grids);
        const LossDistribution mc =
            monte_carlo_distribution(portfolio, grids, cfg.mc_paths, cfg.seed);
        const IqaeConfig icfg = cfg.iqae_config();

        std::ostringstream table;
        table << std::setw(14) << "threshold" << std::setw(16) << "exact" << std::setw(16)
              << "classical" << std::setw(16) << "iqae" << std::setw(12) << "|iqae-ex|"
              << std::setw(16) << "model" << std::setw(16) << "monte_carlo" << std::setw(10)
              << "mc_sigma" << "  status\n";
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        bool all_ok = true;
        const std::vector<double> support = loss_support(portfolio);
        for (std::size_t i = 0; i < support.size(); ++i) {
            const double x = support[i];
            const ObjectiveCircuit a = build_objective(portfolio, model, x, cfg.mode);
            const double ex = exact_amplitude(a);
            const double cl = encoded.cdf(x);
            IqaeConfig c = icfg;
            c.seed += i;
            const IqaeResult iq = iqae(a, c);
            const double md = gaussian.cdf(x);
            const double mcv = mc.cdf(x);
            const double sd =
                std::sqrt(std::max(md * (1.0 - md), 0.0) / static_cast<double>(cfg.mc_paths));
            const double gap = std::abs(mcv - md);
            // A degenerate cdf (0 or 1) has no sampling noise; exact agreement counts as 0 sigma.
            const double mc_sigmas = sd > 0.0 ? gap / sd
                                     : gap <= 1e-12 ? 0.0
                                                    : std::numeric_limits<double>::infinity();
            const bool ok_cl = std::abs(ex - cl) < 1e-9;
            const bool ok_iq = iq.success && std::abs(iq.estimate - ex) <= *cfg.epsilon;
            const bool ok_mc = gap <= 3.0 * sd + 1e-12;
            const bool ok = ok_cl && ok_iq && ok_mc;
            all_ok = all_ok && ok;
            table << std::setw(14) << detail::format_g12(x) << std::setw(16) << std::setprecision(10)
                  << ex << std::setw(16) << cl << std::setw(16) << iq.estimate << std::setw(12)
                  << std::setprecision(3) << std::abs(iq.estimate - ex) << std::setw(16)
                  << std::setprecision(10) << md << std::setw(16) << mcv << std::setw(10)
                  << std::setprecision(3) << mc_sigmas << "  " << (ok ? "ok" : "MISMATCH")
                  << '\n';
            rows.push_back({{"threshold", x},
                            {"exact", ex},
                            {"classical", cl},
                            {"iqae", iq.estimate},
                            {"iqae_ci", {iq.ci_low, iq.ci_high}},
                            {"iqae_quantum_samples", iq.quantum_samples},
                            {"model", md},
                            {"monte_carlo", mcv},
                            {"mc_sigmas", mc_sigmas},
                            {"exact_vs_classical_ok", ok_cl},
                            {"iqae_within_epsilon", ok_iq},
                            {"mc_within_3_sigma", ok_mc}});
        }
        out << table.str();
        if (opts.output_path) {
            nlohmann::ordered_json rep;
            rep["config"] = cfg.to_json();
            rep["rows"] = rows;
            rep["all_consistent"] = all_ok;
            detail::emit(rep.dump(2) + "\n", opts.output_path, out);
        }
        if (!all_ok) {
            err << "consistency check failed\n";
            return 3;
        }
        return 0;
    });
}

} // namespace qcra
