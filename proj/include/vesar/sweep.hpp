#ifndef VESAR_SWEEP_HPP
#define VESAR_SWEEP_HPP

// Scenario execution and figure sweeps, emitted as CSV rows.
//
// Column order is fixed (see kCsvHeader). Numbers use 12 significant digits
// with '.' as decimal separator; missing values are written as NA.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "vesar/config.hpp"
#include "vesar/estimands.hpp"
#include "vesar/runner.hpp"

namespace vesar {

inline constexpr double kNA = std::numeric_limits<double>::quiet_NaN();

struct ResultRow {
    std::string scenario_id;
    std::string parameter;
    double value = kNA;
    std::string parameter_b;
    double value_b = kNA;
    double asym_reduction = kNA; // 1 - delta, for the symptom-prompted figure
    double nu = kNA;
    double target_ve = kNA;
    double actual_ve_analytic = kNA;
    double actual_ve_mc = kNA;
    double mc_se = kNA;
    double true_ve_mc = kNA;
    std::int64_t n_units = 0;
    std::int64_t analysed_vaccinated = 0;
    std::int64_t analysed_unvaccinated = 0;
    std::int64_t excluded_no_index = 0;
    std::int64_t excluded_coprimary = 0;
    std::string status = "ok";
};

inline constexpr const char* kCsvHeader =
    "scenario_id,parameter,value,parameter_b,value_b,asym_reduction,nu,target_ve,actual_ve_analytic,"
    "actual_ve_mc,mc_se,true_ve_mc,n_units,analysed_vaccinated,analysed_unvaccinated,excluded_no_index,"
    "excluded_coprimary,status";

inline std::string format_csv_number(double v)
{
    if (std::isnan(v)) {
        return "NA";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, ptr);
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        out += ch;
        if (ch == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows)
{
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << csv_field(r.scenario_id) << ',' << csv_field(r.parameter) << ',' << format_csv_number(r.value) << ','
            << csv_field(r.parameter_b) << ',' << format_csv_number(r.value_b) << ','
            << format_csv_number(r.asym_reduction) << ',' << format_csv_number(r.nu) << ','
            << format_csv_number(r.target_ve) << ',' << format_csv_number(r.actual_ve_analytic) << ','
            << format_csv_number(r.actual_ve_mc) << ',' << format_csv_number(r.mc_se) << ','
            << format_csv_number(r.true_ve_mc) << ',' << r.n_units << ',' << r.analysed_vaccinated << ','
            << r.analysed_unvaccinated << ',' << r.excluded_no_index << ',' << r.excluded_coprimary << ','
            << csv_field(r.status) << '\n';
    }
}

inline std::string to_csv(const std::vector<ResultRow>& rows)
{
    std::ostringstream out;
    write_csv(out, rows);
    return out.str();
}

struct AnalyticColumns {
    double nu = kNA;
    double target_ve = kNA;
    double actual_ve = kNA;
};

/// Closed-form columns for a scenario, where a closed form applies:
/// symptom-prompted testing under the per-unit model, scheduled testing
/// under the duration-hazard models.
inline AnalyticColumns analytic_columns(const UnitConfig& unit, const TestingPolicy& policy)
{
    AnalyticColumns out;
    if (unit.transmission_mode == TransmissionMode::PerUnitBernoulli) {
        out.nu = unit.symptom.nu();
        out.target_ve = ve_from_mu(symptom_prompted_target_mu(unit.symptom));
        if (std::holds_alternative<SymptomPrompted>(policy.kind)) {
            out.actual_ve = ve_from_mu(symptom_prompted_actual_mu(unit.symptom));
        }
    } else {
        out.nu = unit.duration.nu_daily();
        out.target_ve = ve_from_mu(infrequent_target_mu(unit.duration));
        if (const auto* s = std::get_if<Scheduled>(&policy.kind)) {
            out.actual_ve = ve_from_mu(infrequent_observed_mu(s->interval_k, unit.duration));
        }
    }
    return out;
}

namespace sweep_detail {

inline void fill_mc(ResultRow& row, const PipelineSpec& spec, std::int64_t units, std::uint64_t seed,
                    unsigned threads, SeMethod se_method = SeMethod::Delta, int bootstrap_reps = 200)
{
    row.n_units = units;
    if (units <= 0) {
        return;
    }
    const auto tally = run_pipeline(spec, units, seed, threads, se_method == SeMethod::Bootstrap);
    row.analysed_vaccinated = tally.observed.vaccinated.units;
    row.analysed_unvaccinated = tally.observed.unvaccinated.units;
    row.excluded_no_index = tally.observed.excluded_no_index;
    row.excluded_coprimary = tally.observed.excluded_coprimary;
    try {
        const auto est = estimate_ve_sar(tally.observed, spec.pooling).ve;
        row.actual_ve_mc = est.ve;
        row.mc_se = se_method == SeMethod::Bootstrap ? bootstrap_se(tally, spec.pooling, bootstrap_reps, seed) : est.se;
    } catch (const EstimationError& e) {
        row.status = std::string("degenerate: ") + e.what();
    }
    try {
        row.true_ve_mc = true_ve_sar(tally.truth).ve;
    } catch (const EstimationError&) {
        // the observed-side status already flags an empty or silent arm
    }
}

// Stream offset per grid point so that each row has its own replicates.
inline std::uint64_t row_seed(std::uint64_t seed, std::size_t row) { return seed + 0x9E3779B97F4A7C15ULL * (row + 1); }

} // namespace sweep_detail

/// Runs the scenario (once, or once per sweep grid value). Deterministic in
/// (config, seed); n_units = 0 yields no rows.
inline std::vector<ResultRow> run_scenario(const ScenarioConfig& cfg)
{
    std::vector<ResultRow> rows;
    if (cfg.units_per_arm == 0) {
        return rows;
    }
    std::vector<std::optional<double>> points;
    if (cfg.sweep) {
        points.assign(cfg.sweep->grid.begin(), cfg.sweep->grid.end());
    } else {
        points.push_back(std::nullopt);
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        ResultRow row;
        row.scenario_id = cfg.id;
        try {
            const ScenarioConfig point = points[i] ? with_parameter(cfg, cfg.sweep->parameter, *points[i]) : cfg;
            if (points[i]) {
                row.parameter = cfg.sweep->parameter;
                row.value = *points[i];
            }
            const auto a = analytic_columns(point.unit, point.policy);
            row.nu = a.nu;
            row.target_ve = a.target_ve;
            row.actual_ve_analytic = a.actual_ve;
            sweep_detail::fill_mc(row, pipeline_of(point), point.units_per_arm, sweep_detail::row_seed(cfg.seed, i),
                                  cfg.threads, point.se_method, point.bootstrap_reps);
        } catch (const ConfigError& e) {
            row.status = std::string("invalid: ") + e.what();
        } catch (const ParameterError& e) {
            row.status = std::string("invalid: ") + e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::vector<double> default_target_grid_1a()
{
    std::vector<double> g;
    for (int i = 0; i <= 20; ++i) {
        g.push_back(i / 20.0);
    }
    return g;
}

/// Symptom-prompted testing: for each (target VE, delta), nu from the
/// inverse map and actual VE = 1 - nu. Infeasible pairs are kept as flagged
/// rows. With cfg.units_per_arm > 0, each feasible row also gets a Monte
/// Carlo estimate from the per-unit model with the enrolled primary as index.
inline std::vector<ResultRow> sweep_figure_1a(const ScenarioConfig& cfg)
{
    const auto targets = cfg.target_ve_grid.empty() ? default_target_grid_1a() : cfg.target_ve_grid;
    const auto deltas = cfg.delta_grid.empty() ? std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0} : cfg.delta_grid;
    const auto& base = cfg.unit.symptom;
    std::vector<ResultRow> rows;
    std::size_t index = 0;
    for (double delta : deltas) {
        for (double target : targets) {
            ResultRow row;
            row.scenario_id = "figure_1a";
            row.parameter = "target_ve";
            row.value = target;
            row.parameter_b = "delta";
            row.value_b = delta;
            row.asym_reduction = 1.0 - delta;
            const std::size_t this_row = index++;
            try {
                const double nu = invert_target_to_nu(target, base.lambda_symptom(), delta, base.rho_symptom());
                const SymptomModelParams p(base.lambda_symptom(), delta, nu, base.rho_symptom(), base.tau());
                row.nu = nu;
                row.target_ve = ve_from_mu(symptom_prompted_target_mu(p));
                row.actual_ve_analytic = ve_from_mu(symptom_prompted_actual_mu(p));
                PipelineSpec spec;
                spec.unit = cfg.unit;
                spec.unit.symptom = p;
                spec.unit.transmission_mode = TransmissionMode::PerUnitBernoulli;
                spec.policy = cfg.policy;
                spec.policy.kind = SymptomPrompted{cfg.policy.symptom_delay().value_or(0.0)};
                spec.policy.prospective_enrollment = true;
                spec.filter = StudyDesignFilter::maximal(cfg.policy.horizon_days);
                spec.filter.index_rule = IndexRule::Enrolled;
                sweep_detail::fill_mc(row, spec, cfg.units_per_arm, sweep_detail::row_seed(cfg.seed, this_row),
                                      cfg.threads);
            } catch (const ParameterError& e) {
                row.status = std::string("infeasible: ") + e.what();
                row.target_ve = target;
            }
            if (cfg.units_per_arm == 0 && row.status == "ok") {
                row.status = "analytic_only";
            }
            rows.push_back(row);
        }
    }
    return rows;
}

enum class InfrequentFigure {
    Restricted,   // intervals up to the longest vaccinated infection
    Unrestricted, // any interval
};

/// Scheduled testing every k days: for each (k, target VE), nu_daily from the
/// target and actual VE from the piecewise observed ratio. Monte Carlo rows
/// use the linear-hazard model with the enrolled primary as index.
inline std::vector<ResultRow> sweep_figure_1b_A1(const ScenarioConfig& cfg, InfrequentFigure which)
{
    const auto& d = cfg.unit.duration;
    std::vector<double> ks = cfg.k_grid;
    if (ks.empty()) {
        const int last = which == InfrequentFigure::Restricted ? 15 : 30;
        for (int k = 1; k <= last; ++k) {
            ks.push_back(k);
        }
    }
    if (which == InfrequentFigure::Restricted) {
        std::erase_if(ks, [&](double k) { return k > d.rho1() + d.c(); });
    }
    const auto targets = cfg.target_ve_grid.empty() ? std::vector<double>{0.5, 0.6, 0.7, 0.8, 0.9} : cfg.target_ve_grid;
    std::vector<ResultRow> rows;
    std::size_t index = 0;
    for (double target : targets) {
        for (double k : ks) {
            ResultRow row;
            row.scenario_id = which == InfrequentFigure::Restricted ? "figure_1b" : "figure_a1";
            row.parameter = "interval_k";
            row.value = k;
            row.parameter_b = "target_ve";
            row.value_b = target;
            const std::size_t this_row = index++;
            try {
                const double nu = invert_target_to_nu_daily(target, d.rho0(), d.rho1());
                const auto p = d.with_nu_daily(nu);
                row.nu = nu;
                row.target_ve = ve_from_mu(infrequent_target_mu(p));
                row.actual_ve_analytic = ve_from_mu(infrequent_observed_mu(k, p));
                PipelineSpec spec;
                spec.unit = cfg.unit;
                spec.unit.duration = p;
                spec.unit.transmission_mode = TransmissionMode::LinearHazard;
                spec.policy = cfg.policy;
                spec.policy.kind = Scheduled{k};
                spec.policy.prospective_enrollment = true;
                spec.filter = StudyDesignFilter::maximal(cfg.policy.horizon_days);
                spec.filter.index_rule = IndexRule::Enrolled;
                sweep_detail::fill_mc(row, spec, cfg.units_per_arm, sweep_detail::row_seed(cfg.seed, this_row),
                                      cfg.threads);
            } catch (const ParameterError& e) {
                row.status = std::string("infeasible: ") + e.what();
                row.target_ve = target;
            }
            if (cfg.units_per_arm == 0 && row.status == "ok") {
                row.status = "analytic_only";
            }
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace vesar

#endif
