// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcra/commands.hpp"
#include "qcra/qcra.hpp"

using namespace qcra;

namespace {

Portfolio two_asset() {
    Portfolio p;
    p.num_factors = 2;
    p.assets = {{1000.5, 0.15, 0.10, {0.35, 0.20}}, {2000.5, 0.25, 0.05, {0.10, 0.25}}};
    return p;
}

std::vector<FactorGrid> grids2() {
    const FactorGrid g = discretize_normal(2, 0.0, 1.0, 3.0);
    return {g, g};
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void run(int id, const std::string& name, double limit_s, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (secs >= limit_s) {
        o.pass = false;
        o.detail += " (runtime limit " + std::to_string(limit_s) + " s exceeded)";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2d %-28s %8.3fs  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
}

Outcome oracle_equivalence() {
    const auto p = two_asset();
    const auto g = grids2();
    const LossDistribution d = exact_loss_distribution(p, g);
    const ModelCircuit m = build_multi_rotation(p, g, Encoding::Exact);
    double worst = 0.0;
    for (double x : loss_support(p)) {
        worst = std::max(worst, std::abs(exact_amplitude(build_objective(p, m, x, ObjectiveMode::SFree)) -
                                         d.cdf(x)));
    }
    std::ostringstream s;
    s << "max |a - cdf| = " << worst << " over " << d.points.size() << " thresholds";
    return {worst < 1e-9 && d.points.size() == 4, s.str()};
}

Outcome var_reproduction() {
    const auto p = two_asset();
    const auto g = grids2();
    const LossDistribution d = exact_loss_distribution(p, g);
    const PipelineOptions opts{ModelVariant::MultiRotation, Encoding::Exact, ObjectiveMode::SFree};
    const VarResult r = var_bisection(p, g, 0.95, ExactEstimator{}, opts);
    const auto support = d.support();
    const auto it = std::find(support.begin(), support.end(), r.var);
    bool ok = r.success && r.var == d.quantile(0.95) && it != support.end() && r.cdf_at_var >= 0.95;
    double pred = -1.0;
    if (it != support.end() && it != support.begin()) {
        pred = d.cdf(*(it - 1));
        bool probed = false;
        for (const auto& t : r.bisection_trace) {
            probed = probed || t.threshold == *(it - 1);
            if (t.threshold == *(it - 1)) {
                ok = ok && t.estimate < 0.95;
            }
        }
        ok = ok && (probed || pred < 0.95);
    }
    std::ostringstream s;
    s << "VaR = " << r.var << ", cdf(VaR) = " << r.cdf_at_var << ", cdf(prev) = " << pred
      << ", E[L] = " << r.expected_loss << ", Ecap = " << r.economic_capital;
    return {ok, s.str()};
}

Outcome iqae_contract() {
    const auto p = two_asset();
    const auto g = grids2();
    const ModelCircuit m = build_multi_rotation(p, g, Encoding::Linear);
    std::vector<std::uint64_t> samples;
    std::ostringstream s;
    bool ok = true;
    for (double x : {0.0, 1000.5, 2000.5}) {
        const ObjectiveCircuit a = build_objective(p, m, x, ObjectiveMode::SFree);
        const double exact = exact_amplitude(a);
        int within = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            IqaeConfig cfg;
            cfg.epsilon = 0.002;
            cfg.confidence = 0.99;
            cfg.seed = seed;
            const IqaeResult r = iqae(a, cfg);
            within += (r.success && std::abs(r.estimate - exact) <= 0.002) ? 1 : 0;
            samples.push_back(r.quantum_samples);
        }
        ok = ok && within >= 95;
        s << "x=" << x << ": " << within << "/100; ";
    }
    std::sort(samples.begin(), samples.end());
    const double median =
        0.5 * static_cast<double>(samples[samples.size() / 2 - 1] + samples[samples.size() / 2]);
    ok = ok && median >= 1e4 && median <= 2e5;
    s << "median quantum samples " << median;
    return {ok, s.str()};
}

Outcome width_reproduction() {
    const auto g = grids2();
    Portfolio p = two_asset();
    const ResourceReport base =
        estimate_resources(p, g, ModelVariant::MultiRotation, ObjectiveMode::SFree);
    bool ok = base.width_paper_layout == 9;
    std::ostringstream s;
    s << "K=2: " << base.width_paper_layout;
    int prev = base.width_paper_layout;
    for (int K = 3; K <= 4; ++K) {
        p.assets.push_back(p.assets[static_cast<std::size_t>(K) % 2]);
        const int w = estimate_resources(p, g, ModelVariant::MultiRotation, ObjectiveMode::SFree)
                          .width_paper_layout;
        ok = ok && w - prev == 2;
        s << ", K=" << K << ": " << w;
        prev = w;
    }
    return {ok, s.str()};
}

Outcome legacy_equivalence() {
    Portfolio p = two_asset();
    p.assets[0].lgd = 1.0;
    p.assets[1].lgd = 2.0;
    const auto g = grids2();
    const ModelCircuit m = build_multi_rotation(p, g, Encoding::Exact);
    double worst = 0.0;
    for (int x = -1; x <= 4; ++x) {
        const double ws = exact_amplitude(build_objective(p, m, x, ObjectiveMode::WeightedSum));
        const double sf = exact_amplitude(build_objective(p, m, x, ObjectiveMode::SFree));
        worst = std::max(worst, std::abs(ws - sf));
    }
    const int ns = n_sum_qubits({1, 2});
    std::ostringstream s;
    s << "max |ws - sfree| = " << worst << ", n_sum_qubits({1,2}) = " << ns;
    return {worst < 1e-10 && ns == 2, s.str()};
}

Outcome non_integer() {
    const auto p = two_asset();
    const auto g = grids2();
    const ModelCircuit m = build_multi_rotation(p, g, Encoding::Linear);
    std::string msg;
    try {
        build_objective(p, m, 1500.0, ObjectiveMode::WeightedSum);
    } catch (const PreconditionError& e) {
        msg = e.what();
    }
    const bool rejected = msg.find("asset 0") != std::string::npos &&
                          msg.find("1000.5") != std::string::npos;
    const LossDistribution d = exact_loss_distribution(p, g);
    const double top = exact_amplitude(build_objective(p, m, 3001.0, ObjectiveMode::SFree)) -
                       exact_amplitude(build_objective(p, m, 2000.5, ObjectiveMode::SFree));
    const bool accepted = d.points.size() == 4 && d.points.back().loss == 3001.0 && top > 0.0;
    std::ostringstream s;
    s << "weighted_sum: \"" << msg << "\"; s_free support size " << d.points.size()
      << ", P[L = 3001] = " << top;
    return {rejected && accepted, s.str()};
}

Outcome grover_identity() {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<int> kind(0, 2);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 4;
        std::uniform_int_distribution<int> qd(0, n - 1);
        ObjectiveCircuit a;
        a.circuit = Circuit(n);
        for (int i = 0; i < 10; ++i) {
            const int t = qd(rng);
            const int c = qd(rng);
            std::vector<Control> ctl;
            if (c != t && i % 2 == 1) {
                ctl.push_back({c, i % 4 == 1});
            }
            switch (kind(rng)) {
            case 0: a.circuit.x(t, ctl); break;
            case 1: a.circuit.ry(t, angle(rng), ctl); break;
            default: a.circuit.z(t, ctl); break;
            }
        }
        a.objective_qubit = qd(rng);
        const double theta = std::asin(std::sqrt(exact_amplitude(a)));
        const Circuit q = grover_operator(a);
        Statevector psi = apply(a.circuit, Statevector(n));
        for (int k = 0; k <= 8; ++k) {
            const double want = std::pow(std::sin((2 * k + 1) * theta), 2);
            worst = std::max(worst, std::abs(marginal_probability(psi, a.objective_qubit, 1) - want));
            apply_in_place(q, psi);
        }
    }
    std::ostringstream s;
    s << "max deviation " << worst << " over 40 circuits, k <= 8";
    return {worst < 1e-9, s.str()};
}

Outcome monte_carlo() {
    const auto p = two_asset();
    const auto g = grids2();
    const double tv =
        total_variation(monte_carlo_distribution(p, g, 1'000'000, 20240), exact_loss_distribution(p, g));
    std::ostringstream s;
    s << "TV = " << tv << " at 1e6 paths";
    return {tv < 0.01, s.str()};
}

Outcome linear_sanity() {
    Portfolio p = two_asset();
    const auto g = grids2();
    double fit_err = 0.0;
    for (const auto& asset : p.assets) {
        for (std::size_t r = 0; r < 2; ++r) {
            const LinearRotation fit = fit_linear_rotation(asset, r, g);
            std::vector<double> z{g[0].midpoint(), g[1].midpoint()};
            z[r] = g[r].values.front();
            fit_err = std::max(fit_err, std::abs(fit.at(0.0) - default_angle(asset, z)));
            z[r] = g[r].values.back();
            fit_err = std::max(fit_err, std::abs(fit.at(3.0) - default_angle(asset, z)));
        }
    }
    double amp_err = 0.0;
    for (double rho : {0.0, 1e-12}) {
        for (auto& a : p.assets) {
            a.rho = rho;
        }
        const ModelCircuit ex = build_multi_rotation(p, g, Encoding::Exact);
        const ModelCircuit li = build_multi_rotation(p, g, Encoding::Linear);
        for (double x : loss_support(p)) {
            amp_err = std::max(
                amp_err, std::abs(exact_amplitude(build_objective(p, ex, x, ObjectiveMode::SFree)) -
                                  exact_amplitude(build_objective(p, li, x, ObjectiveMode::SFree))));
        }
    }
    std::ostringstream s;
    s << "endpoint error " << fit_err << ", rho->0 amplitude gap " << amp_err;
    return {fit_err <= 1e-12 && amp_err <= 1e-10, s.str()};
}

Outcome determinism() {
    CommandOptions o;
    o.config_path = std::string(QCRA_SAMPLES_DIR) + "/two_asset.json";
    std::ostringstream a;
    std::ostringstream b;
    std::ostringstream err;
    const int ra = cmd_analyze(o, a, err);
    const int rb = cmd_analyze(o, b, err);
    std::ostringstream s;
    s << "exit codes " << ra << "/" << rb << ", " << a.str().size() << " bytes, "
      << (a.str() == b.str() ? "identical" : "different");
    return {ra == 0 && rb == 0 && !a.str().empty() && a.str() == b.str(), s.str()};
}

} // namespace

int main() {
    run(1, "oracle equivalence", 1.0, oracle_equivalence);
    run(2, "VaR reproduction", 1.0, var_reproduction);
    run(3, "IQAE contract", 600.0, iqae_contract);
    run(4, "width reproduction", 60.0, width_reproduction);
    run(5, "legacy equivalence", 60.0, legacy_equivalence);
    run(6, "non-integer LGD", 60.0, non_integer);
    run(7, "Grover identity", 60.0, grover_identity);
    run(8, "Monte Carlo consistency", 60.0, monte_carlo);
    run(9, "linear encoding sanity", 60.0, linear_sanity);
    run(10, "determinism", 60.0, determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
