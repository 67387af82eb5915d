#ifndef VESAR_VALIDATION_HPP
#define VESAR_VALIDATION_HPP

// Closed forms against Monte Carlo, plus deterministic checks of the
// observation and inference layers. Shared by `vesar validate` and the
// acceptance test binary.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vesar/estimands.hpp"
#include "vesar/infer.hpp"
#include "vesar/observe.hpp"
#include "vesar/runner.hpp"
#include "vesar/simcore.hpp"
#include "vesar/sweep.hpp"

namespace vesar {

struct CheckResult {
    int number = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationOptions {
    std::int64_t units_per_arm = 1'000'000;
    std::uint64_t seed = 20240101;
    unsigned threads = 1;
    // Units per arm for the determinism check (small; it runs three times).
    std::int64_t determinism_units = 2000;
};

namespace validation_detail {

inline std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

inline bool within(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline DurationModelParams reference_durations() { return DurationModelParams::with_reference_durations(0.7, 0.01); }

inline PipelineSpec scheduled_spec(double k)
{
    PipelineSpec spec;
    spec.unit.duration = reference_durations();
    spec.unit.transmission_mode = TransmissionMode::LinearHazard;
    spec.policy.kind = Scheduled{k};
    spec.policy.prospective_enrollment = true;
    spec.filter = StudyDesignFilter::maximal(spec.policy.horizon_days);
    spec.filter.index_rule = IndexRule::Enrolled;
    return spec;
}

inline Infection infection(int id, double at, Source src, int src_id, std::optional<double> onset, double duration)
{
    Infection inf;
    inf.person_id = id;
    inf.acquisition_time = at;
    inf.source = src;
    inf.source_id = src_id;
    inf.symptomatic = onset.has_value();
    inf.symptom_onset_time = onset;
    inf.duration = duration;
    return inf;
}

inline UnitTruth four_person_unit(std::vector<Infection> infections)
{
    UnitTruth u;
    for (int i = 0; i < 4; ++i) {
        u.persons.push_back(Person{i, false});
    }
    u.infections = std::move(infections);
    return u;
}

} // namespace validation_detail

/// Primary 0 infected at day 0 with onset on day 6; contact 1 infected by the
/// primary on day 2 with onset on day 5 (shorter incubation); contact 2
/// infected by the primary on day 3 without symptoms.
inline UnitTruth presymptomatic_primary_unit()
{
    using namespace validation_detail;
    return four_person_unit({infection(0, 0.0, Source::Seed, -1, 6.0, 14.0),
                             infection(1, 2.0, Source::Primary, -1, 5.0, 12.0),
                             infection(2, 3.0, Source::Primary, -1, std::nullopt, 12.0)});
}

/// Primary (onset day 0.5) infects contact 1 (onset day 4.5); contact 2
/// acquires infection in the community and develops symptoms on day 30.5.
inline UnitTruth late_community_unit()
{
    using namespace validation_detail;
    return four_person_unit({infection(0, 0.0, Source::Seed, -1, 0.5, 14.0),
                             infection(1, 1.0, Source::Primary, -1, 4.5, 12.0),
                             infection(2, 28.0, Source::Community, -1, 30.5, 12.0)});
}

/// Primary and contact 1 both develop symptoms on day 0 (co-primaries).
inline UnitTruth same_day_coprimary_unit()
{
    using namespace validation_detail;
    return four_person_unit({infection(0, 0.0, Source::Seed, -1, 0.2, 14.0),
                             infection(1, 0.0, Source::Community, -1, 0.7, 12.0)});
}

inline std::vector<CheckResult> run_validation(const ValidationOptions& opt)
{
    using namespace validation_detail;
    std::vector<CheckResult> out;
    const double ve_tol = 1e-12;

    // 1. delta = 1: actual and target agree across a 50-point target grid.
    {
        CheckResult c{1, "delta=1 agreement (symptom-prompted)", true, ""};
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double target = i / 49.0;
            const double nu = invert_target_to_nu(target, 0.2, 1.0, 0.5);
            const SymptomModelParams p(0.2, 1.0, nu, 0.5, 0.3);
            const double tgt = ve_from_mu(symptom_prompted_target_mu(p));
            const double act = ve_from_mu(symptom_prompted_actual_mu(p));
            worst = std::max({worst, std::abs(tgt - act), std::abs(tgt - target)});
        }
        c.passed = worst <= ve_tol;
        c.detail = "max |actual - target| = " + fmt(worst) + " (tol 1e-12)";
        out.push_back(c);
    }

    // 2. nu = 0: both estimands equal 1 exactly.
    {
        CheckResult c{2, "nu=0 agreement", true, ""};
        for (double lambda : {0.0, 0.2, 1.0}) {
            for (double delta : {0.0, 0.5, 1.0}) {
                for (double rho : {0.1, 0.5, 1.0}) {
                    const SymptomModelParams p(lambda, delta, 0.0, rho, 0.3);
                    c.passed = c.passed && ve_from_mu(symptom_prompted_target_mu(p)) == 1.0
                        && ve_from_mu(symptom_prompted_actual_mu(p)) == 1.0;
                }
            }
        }
        const auto d = reference_durations().with_nu_daily(0.0);
        for (double k : {1.0, 7.0, 10.0, 25.0}) {
            c.passed = c.passed && ve_from_mu(infrequent_target_mu(d)) == 1.0
                && ve_from_mu(infrequent_observed_mu(k, d)) == 1.0;
        }
        c.detail = c.passed ? "target = actual = 1 for all tested (lambda, delta, rho) and k" : "mismatch";
        out.push_back(c);
    }

    // 3. Direction of bias over interior grids.
    {
        CheckResult c{3, "actual VE <= target VE (both testing regimes)", true, ""};
        int violations = 0;
        int checked = 0;
        for (int i = 0; i < 20; ++i) {
            for (int j = 0; j < 20; ++j) {
                for (int l = 0; l < 20; ++l) {
                    const SymptomModelParams p((i + 0.5) / 20, (j + 0.5) / 20, (l + 0.5) / 20, 0.5, 0.3);
                    ++checked;
                    if (ve_from_mu(symptom_prompted_actual_mu(p)) > ve_from_mu(symptom_prompted_target_mu(p))) {
                        ++violations;
                    }
                }
            }
        }
        // Duration ratio must exceed c / rho0 = 0.5.
        for (int i = 0; i < 20; ++i) {
            const double lambda_d = 0.5 + (i + 0.5) / 40.0;
            for (int l = 0; l < 20; ++l) {
                const DurationModelParams d(14.0, 14.0 * lambda_d, 7.0, (l + 0.5) / 20, 0.01);
                for (double k : {21.0, 25.0, 30.0, 60.0}) {
                    ++checked;
                    if (ve_from_mu(infrequent_observed_mu(k, d)) > ve_from_mu(infrequent_target_mu(d))) {
                        ++violations;
                    }
                }
            }
        }
        c.passed = violations == 0;
        c.detail = std::to_string(violations) + " violations in " + std::to_string(checked) + " grid points";
        out.push_back(c);
    }

    // Shared scheduled-testing oracle runs.
    const auto started = std::chrono::steady_clock::now();
    std::map<double, OracleResult> scheduled;
    for (double k : {1.0, 3.0, 7.0, 10.0, 14.0, 21.0, 25.0}) {
        scheduled.emplace(k, mc_oracle(scheduled_spec(k), opt.units_per_arm,
                                       opt.seed + static_cast<std::uint64_t>(k), opt.threads));
    }
    const double grid_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    scheduled.emplace(30.0, mc_oracle(scheduled_spec(30.0), opt.units_per_arm, opt.seed + 30, opt.threads));
    const auto d = reference_durations();

    // 4. Piecewise arbitration.
    {
        CheckResult c{4, "piecewise observed ratio matches Monte Carlo; swapped branches do not", true, ""};
        std::ostringstream detail;
        bool alternate_fails_intermediate = false;
        for (double k : {1.0, 3.0, 7.0, 10.0, 14.0, 21.0, 25.0}) {
            const auto& r = scheduled.at(k);
            const double analytic = ve_from_mu(infrequent_observed_mu(k, d));
            const double alternate = ve_from_mu(alternate_branch_observed_mu(k, d));
            const bool ok = within(r.observed.ve, analytic, 3 * r.observed.se);
            const bool alt_ok = within(r.observed.ve, alternate, 3 * r.observed.se);
            const bool intermediate = k > d.rho1() - d.c() && k < d.rho0() + d.c();
            if (intermediate && !alt_ok) {
                alternate_fails_intermediate = true;
            }
            c.passed = c.passed && ok;
            detail << "k=" << k << " mc=" << fmt(r.observed.ve) << "+-" << fmt(r.observed.se) << " piecewise="
                   << fmt(analytic) << (ok ? "" : "(FAIL)") << " swapped=" << fmt(alternate) << "; ";
        }
        c.passed = c.passed && alternate_fails_intermediate && grid_seconds < 300.0;
        detail << "swapped placement rejected at an intermediate k: " << (alternate_fails_intermediate ? "yes" : "no")
               << "; grid runtime " << fmt(grid_seconds) << "s (limit 300s)";
        c.detail = detail.str();
        out.push_back(c);
    }

    // 5. Long intervals: the observed ratio no longer depends on k.
    {
        CheckResult c{5, "k-independence for k=25 vs k=30", true, ""};
        const auto& a = scheduled.at(25.0);
        const auto& b = scheduled.at(30.0);
        const double an25 = ve_from_mu(infrequent_observed_mu(25.0, d));
        const double an30 = ve_from_mu(infrequent_observed_mu(30.0, d));
        const double se_diff = std::hypot(a.observed.se, b.observed.se);
        c.passed = an25 == an30 && within(a.observed.ve, b.observed.ve, 3 * se_diff)
            && within(a.observed.ve, an25, 3 * a.observed.se) && within(b.observed.ve, an30, 3 * b.observed.se);
        c.detail = "analytic " + fmt(an25) + " vs " + fmt(an30) + "; mc " + fmt(a.observed.ve) + " vs "
            + fmt(b.observed.ve) + " (3 SE of difference " + fmt(3 * se_diff) + ")";
        out.push_back(c);
    }

    // 6. Daily testing recovers the target.
    {
        CheckResult c{6, "k=1 recovers target VE", true, ""};
        const auto& r = scheduled.at(1.0);
        const double target = ve_from_mu(infrequent_target_mu(d));
        const double analytic = ve_from_mu(infrequent_observed_mu(1.0, d));
        c.passed = within(analytic, target, ve_tol) && within(r.observed.ve, target, 3 * r.observed.se);
        c.detail = "target " + fmt(target) + " analytic " + fmt(analytic) + " mc " + fmt(r.observed.ve) + "+-"
            + fmt(r.observed.se);
        out.push_back(c);
    }

    // 7. Symptom-prompted pipeline converges to 1 - nu, not 1 - mu.
    {
        CheckResult c{7, "symptom-prompted pipeline recovers 1-nu", true, ""};
        PipelineSpec spec;
        spec.unit.symptom = SymptomModelParams::with_reference_symptoms(0.5, 0.6, 0.3);
        spec.unit.transmission_mode = TransmissionMode::PerUnitBernoulli;
        spec.policy.kind = SymptomPrompted{0.0};
        spec.policy.prospective_enrollment = true;
        spec.filter = StudyDesignFilter::maximal(spec.policy.horizon_days);
        spec.filter.index_rule = IndexRule::Enrolled;
        const auto r = mc_oracle(spec, opt.units_per_arm, opt.seed + 101, opt.threads);
        const double actual = ve_from_mu(symptom_prompted_actual_mu(spec.unit.symptom));
        const double target = ve_from_mu(symptom_prompted_target_mu(spec.unit.symptom));
        c.passed = within(r.observed.ve, actual, 3 * r.observed.se) && !within(r.observed.ve, target, 3 * r.observed.se);
        c.detail = "mc " + fmt(r.observed.ve) + "+-" + fmt(r.observed.se) + "; 1-nu " + fmt(actual) + "; 1-mu "
            + fmt(target);
        out.push_back(c);
    }

    // 8. A primary with a longer incubation than its secondary case is
    //    misidentified and a transmission is lost.
    {
        CheckResult c{8, "presymptomatic primary misclassified", true, ""};
        const UnitTruth truth = presymptomatic_primary_unit();
        TestingPolicy policy;
        policy.kind = SymptomPrompted{0.0};
        Rng rng = make_stream(opt.seed, 8, 0);
        const ObservedUnit obs = apply_policy(truth, policy, rng);
        const auto index = identify_index(obs);
        const UnitAnalysis a = analyze_unit(obs, StudyDesignFilter::gier());
        const int true_count = truth.transmissions_from_primary();
        c.passed = index && *index != truth.primary_id && !a.excluded() && true_count - a.n_attributed >= 1;
        c.detail = "index " + (index ? std::to_string(*index) : std::string("none")) + " vs primary "
            + std::to_string(truth.primary_id) + "; attributed " + std::to_string(a.n_attributed) + " vs true "
            + std::to_string(true_count);
        out.push_back(c);
    }

    // 9. Study presets drop a late community infection and a co-primary.
    {
        CheckResult c{9, "study filters exclude planted community and co-primary cases", true, ""};
        TestingPolicy policy;
        policy.kind = SymptomPrompted{0.0};
        const std::vector<std::pair<std::string, StudyDesignFilter>> presets = {
            {"harris", StudyDesignFilter::harris()},
            {"eyre", StudyDesignFilter::eyre()},
            {"gier", StudyDesignFilter::gier()},
            {"lyngse", StudyDesignFilter::lyngse()}};
        std::ostringstream detail;
        for (const auto& [name, filter] : presets) {
            Rng rng = make_stream(opt.seed, 9, 0);
            const auto late = analyze_unit(apply_policy(late_community_unit(), policy, rng), filter);
            const bool late_ok = !late.excluded() && late.n_attributed == 1 && late.n_at_risk == 3;
            const auto same_day = analyze_unit(apply_policy(same_day_coprimary_unit(), policy, rng), filter);
            const bool drops_unit = filter.coprimary_exclusion_days.has_value();
            const bool same_ok = drops_unit ? same_day.reason == ExclusionReason::CoPrimary
                                            : (!same_day.excluded() && same_day.n_attributed == 0);
            c.passed = c.passed && late_ok && same_ok;
            detail << name << ": community " << (late_ok ? "excluded" : "COUNTED") << ", co-primary "
                   << (same_ok ? (drops_unit ? "unit dropped" : "not attributed") : "COUNTED") << "; ";
        }
        c.detail = detail.str();
        out.push_back(c);
    }

    // 10. Complete observation: naive estimate equals true VE-SAR.
    {
        CheckResult c{10, "fully observed regime matches true VE-SAR", true, ""};
        PipelineSpec spec;
        spec.unit.transmission_mode = TransmissionMode::PerUnitBernoulli;
        spec.unit.community_daily_hazard = 0.0;
        spec.unit.contact_to_contact = false;
        spec.policy.kind = Scheduled{1.0};
        spec.policy.participation = 1.0;
        spec.policy.prospective_enrollment = true;
        spec.filter = StudyDesignFilter::maximal(spec.policy.horizon_days);
        spec.filter.index_rule = IndexRule::Enrolled;
        const auto r = mc_oracle(spec, opt.units_per_arm, opt.seed + 202, opt.threads);
        c.passed = within(r.observed.ve, r.truth.ve, 3 * r.observed.se);
        c.detail = "naive " + fmt(r.observed.ve) + "+-" + fmt(r.observed.se) + "; true " + fmt(r.truth.ve);
        out.push_back(c);
    }

    // 11. Sweeps are reproducible and independent of the worker count.
    {
        CheckResult c{11, "sweep output byte-identical across runs and worker counts", true, ""};
        ScenarioConfig cfg = build_config(KeyValues{{"seed", std::to_string(opt.seed)}});
        cfg.units_per_arm = opt.determinism_units;
        cfg.threads = 1;
        const auto first = to_csv(sweep_figure_1b_A1(cfg, InfrequentFigure::Restricted));
        const auto second = to_csv(sweep_figure_1b_A1(cfg, InfrequentFigure::Restricted));
        cfg.threads = 8;
        const auto parallel = to_csv(sweep_figure_1b_A1(cfg, InfrequentFigure::Restricted));
        c.passed = first == second && first == parallel;
        c.detail = std::to_string(first.size()) + " bytes; rerun " + (first == second ? "identical" : "DIFFERS")
            + ", 8 workers " + (first == parallel ? "identical" : "DIFFERS");
        out.push_back(c);
    }

    return out;
}

} // namespace vesar

#endif
