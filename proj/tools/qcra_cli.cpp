#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qcra/commands.hpp"

namespace {

struct Flags {
    std::string config;
    std::string output;
    std::uint64_t seed = 0;
    std::string estimator;
    std::string variant;
    std::string encoding;
    std::string mode;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Flags& f) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", f.config, "JSON analysis config")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", f.output, "Write the report here instead of stdout");
    sub->add_option("--seed", f.seed, "Override analysis.seed");
    sub->add_option("--estimator", f.estimator, "exact|iqae|classical")
        ->check(CLI::IsMember({"exact", "iqae", "classical"}));
    sub->add_option("--variant", f.variant, "multi_rotation|single_rotation|single_factor")
        ->check(CLI::IsMember({"multi_rotation", "single_rotation", "single_factor"}));
    sub->add_option("--encoding", f.encoding, "exact|linear")->check(CLI::IsMember({"exact", "linear"}));
    sub->add_option("--mode", f.mode, "s_free|weighted_sum")
        ->check(CLI::IsMember({"s_free", "weighted_sum"}));
    return sub;
}

qcra::CommandOptions to_options(const CLI::App& sub, const Flags& f) {
    qcra::CommandOptions o;
    o.config_path = f.config;
    auto given = [&sub](const char* name) { return sub.count(name) > 0; };
    if (given("--output")) o.output_path = f.output;
    if (given("--seed")) o.seed = f.seed;
    if (given("--estimator")) o.estimator = f.estimator;
    if (given("--variant")) o.variant = f.variant;
    if (given("--encoding")) o.encoding = f.encoding;
    if (given("--mode")) o.mode = f.mode;
    return o;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum credit risk analysis: VaR and economic capital via amplitude estimation"};
    app.require_subcommand(1);
    Flags f;
    auto* analyze = add_command(app, "analyze", "VaR / expected loss / economic capital report (JSON)", f);
    auto* distribution = add_command(app, "distribution", "Loss distribution as CSV", f);
    auto* resources = add_command(app, "resources", "Qubit and gate accounting (JSON)", f);
    auto* compare = add_command(app, "compare", "Exact vs IQAE vs classical vs Monte Carlo table", f);

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) return qcra::cmd_analyze(to_options(*analyze, f), std::cout, std::cerr);
    if (distribution->parsed())
        return qcra::cmd_distribution(to_options(*distribution, f), std::cout, std::cerr);
    if (resources->parsed()) return qcra::cmd_resources(to_options(*resources, f), std::cout, std::cerr);
    if (compare->parsed()) return qcra::cmd_compare(to_options(*compare, f), std::cout, std::cerr);
    return 1;
}
