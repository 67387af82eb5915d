// Command-line front end: closed-form evaluation, scenario simulation,
// figure sweeps and the oracle-vs-analytic validation suite.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vesar/vesar.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::int64_t> seed;
    std::optional<std::int64_t> units;
    std::string out;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required)
{
    auto* opt = cmd->add_option("--config", f.config, "Scenario file (key = value)");
    if (config_required) {
        opt->required();
    }
    cmd->add_option("--seed", f.seed, "Random seed (overrides the config)");
    cmd->add_option("--units", f.units, "Units per arm (overrides the config)");
    cmd->add_option("--out", f.out, "Output CSV path (default: stdout)");
    cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
}

vesar::ScenarioConfig load(const CommonFlags& f, std::int64_t default_units)
{
    vesar::KeyValues kv = f.config.empty() ? vesar::KeyValues{} : vesar::read_key_values(f.config);
    if (f.config.empty()) {
        kv["units"] = std::to_string(default_units);
        kv["seed"] = "0";
    }
    if (f.seed) {
        kv["seed"] = std::to_string(*f.seed);
    }
    if (f.units) {
        kv["units"] = std::to_string(*f.units);
    }
    if (f.threads) {
        kv["threads"] = std::to_string(*f.threads);
    }
    if (!f.out.empty()) {
        kv["output"] = f.out;
    }
    return vesar::build_config(kv);
}

void emit(const vesar::ScenarioConfig& cfg, const std::vector<vesar::ResultRow>& rows)
{
    if (cfg.output.empty() || cfg.output == "-") {
        vesar::write_csv(std::cout, rows);
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) {
        throw vesar::ConfigError("output: cannot open '" + cfg.output + "' for writing");
    }
    vesar::write_csv(out, rows);
}

struct AnalyticFlags {
    std::string quantity;
    double lambda = 0.2;
    double delta = 0.5;
    double nu = 0.6;
    double rho = 0.5;
    double tau = 0.3;
    double rho0 = 14.0;
    double rho1 = 8.0;
    double c = 7.0;
    double nu_daily = 0.7;
    double tau0 = 0.01;
    double k = 7.0;
    double target_ve = 0.5;
    double rho_v = 8.0;
    double tau_v = 0.01;
};

double evaluate(const AnalyticFlags& a)
{
    using namespace vesar;
    const auto symptoms = [&] { return SymptomModelParams(a.lambda, a.delta, a.nu, a.rho, a.tau); };
    const auto durations = [&] { return DurationModelParams(a.rho0, a.rho1, a.c, a.nu_daily, a.tau0); };
    if (a.quantity == "target-mu") {
        return symptom_prompted_target_mu(symptoms());
    }
    if (a.quantity == "actual-mu") {
        return symptom_prompted_actual_mu(symptoms());
    }
    if (a.quantity == "invert-nu") {
        return invert_target_to_nu(a.target_ve, a.lambda, a.delta, a.rho);
    }
    if (a.quantity == "infrequent-target-mu") {
        return infrequent_target_mu(durations());
    }
    if (a.quantity == "infrequent-observed-mu") {
        return infrequent_observed_mu(a.k, durations());
    }
    if (a.quantity == "sampling-fraction") {
        return sampling_fraction(a.k, a.rho_v, a.c);
    }
    if (a.quantity == "observed-component") {
        return infrequent_observed_component(a.k, a.rho_v, a.c, a.tau_v);
    }
    throw ParameterError("unknown quantity '" + a.quantity + "'");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bias of VE-SAR estimates under imperfect testing"};
    app.require_subcommand(1);

    AnalyticFlags an;
    auto* analytic = app.add_subcommand("analytic", "Evaluate a closed-form estimand");
    analytic
        ->add_option("quantity", an.quantity,
                     "target-mu | actual-mu | invert-nu | infrequent-target-mu | infrequent-observed-mu | "
                     "sampling-fraction | observed-component")
        ->required();
    analytic->add_option("--lambda", an.lambda, "Symptom ratio P(S=1|V=1)/P(S=1|V=0)");
    analytic->add_option("--delta", an.delta, "Asymptomatic/symptomatic transmission ratio");
    analytic->add_option("--nu", an.nu, "Vaccinated/unvaccinated transmission ratio");
    analytic->add_option("--rho", an.rho, "Symptomatic fraction, unvaccinated");
    analytic->add_option("--tau", an.tau, "Per-contact transmission probability");
    analytic->add_option("--rho0", an.rho0, "Mean duration, unvaccinated (days)");
    analytic->add_option("--rho1", an.rho1, "Mean duration, vaccinated (days)");
    analytic->add_option("--c", an.c, "Half-width of the duration distribution (days)");
    analytic->add_option("--nu-daily", an.nu_daily, "Daily hazard ratio vaccinated/unvaccinated");
    analytic->add_option("--tau0", an.tau0, "Daily hazard, unvaccinated");
    analytic->add_option("--k", an.k, "Testing interval (days)");
    analytic->add_option("--target-ve", an.target_ve, "Target VE for invert-nu");
    analytic->add_option("--rho-v", an.rho_v, "Arm mean duration for sampling-fraction / observed-component");
    analytic->add_option("--tau-v", an.tau_v, "Arm daily hazard for observed-component");

    CommonFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Run one scenario file and write CSV");
    add_common(simulate, sim, true);

    CommonFlags sw;
    std::string figure;
    auto* sweep = app.add_subcommand("sweep", "Reproduce a figure grid as CSV");
    sweep->add_option("--figure", figure, "1a | 1b | a1")->required()->check(CLI::IsMember({"1a", "1b", "a1"}));
    add_common(sweep, sw, false);

    std::int64_t val_units = 1'000'000;
    std::int64_t val_seed = 20240101;
    int val_threads = 1;
    auto* validate = app.add_subcommand("validate", "Run the oracle-vs-analytic suite");
    validate->add_option("--units", val_units, "Units per arm for Monte Carlo checks");
    validate->add_option("--seed", val_seed, "Random seed");
    validate->add_option("--threads", val_threads, "Worker threads")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analytic) {
            std::cout << vesar::format_csv_number(evaluate(an)) << '\n';
        } else if (*simulate) {
            const auto cfg = load(sim, 0);
            emit(cfg, vesar::run_scenario(cfg));
        } else if (*sweep) {
            const auto cfg = load(sw, 0);
            const auto rows = figure == "1a" ? vesar::sweep_figure_1a(cfg)
                : figure == "1b"            ? vesar::sweep_figure_1b_A1(cfg, vesar::InfrequentFigure::Restricted)
                                            : vesar::sweep_figure_1b_A1(cfg, vesar::InfrequentFigure::Unrestricted);
            emit(cfg, rows);
        } else if (*validate) {
            vesar::ValidationOptions opt;
            opt.units_per_arm = val_units;
            opt.seed = static_cast<std::uint64_t>(val_seed);
            opt.threads = static_cast<unsigned>(val_threads);
            int failures = 0;
            for (const auto& r : vesar::run_validation(opt)) {
                std::cout << (r.passed ? "PASS" : "FAIL") << " [" << r.number << "] " << r.name << " -- " << r.detail
                          << '\n';
                failures += r.passed ? 0 : 1;
            }
            return failures == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
