#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "vesar/infer.hpp"
#include "vesar/runner.hpp"

using namespace vesar;

namespace {

ObservedUnit unit_with(std::vector<TestRecord> tests, int size = 4, bool index_vaccinated = false)
{
    ObservedUnit obs;
    for (int i = 0; i < size; ++i) {
        obs.persons.push_back(Person{i, i == 0 && index_vaccinated});
    }
    obs.tests = std::move(tests);
    return obs;
}

TestRecord pos(int id, double t) { return TestRecord{id, t, true, std::nullopt}; }
TestRecord neg(int id, double t) { return TestRecord{id, t, false, std::nullopt}; }

} // namespace

TEST(IdentifyIndex, EarliestPositiveWithTieOnId)
{
    EXPECT_FALSE(identify_index(unit_with({neg(0, 1.0), neg(1, 2.0)})).has_value());
    EXPECT_EQ(identify_index(unit_with({neg(0, 1.0), pos(2, 3.0), pos(1, 4.0)})), 2);
    EXPECT_EQ(identify_index(unit_with({pos(1, 3.0), pos(3, 3.0)})), 1);
}

TEST(IdentifyIndex, EnrolledRuleNeedsPositiveEnrollee)
{
    auto obs = unit_with({pos(1, 1.0), neg(0, 2.0)});
    EXPECT_FALSE(identify_index(obs, IndexRule::Enrolled).has_value());
    obs.enrolled_id = 0;
    EXPECT_FALSE(identify_index(obs, IndexRule::Enrolled).has_value());
    obs.tests.push_back(pos(0, 5.0));
    EXPECT_EQ(identify_index(obs, IndexRule::Enrolled), 0);
    EXPECT_EQ(identify_index(obs, IndexRule::EarliestPositive), 1);
}

TEST(StudyDesignFilter, Presets)
{
    const auto h = StudyDesignFilter::harris();
    EXPECT_EQ(h.window_lo, 2.0);
    EXPECT_EQ(h.window_hi, 14.0);
    EXPECT_EQ(h.coprimary_exclusion_days, 2.0);
    const auto e = StudyDesignFilter::eyre();
    EXPECT_EQ(e.window_lo, 1.0);
    EXPECT_EQ(e.window_hi, 10.0);
    EXPECT_FALSE(e.coprimary_exclusion_days);
    const auto g = StudyDesignFilter::gier();
    EXPECT_EQ(g.window_hi, 14.0);
    const auto l = StudyDesignFilter::lyngse();
    EXPECT_EQ(l.window_hi, 7.0);
    EXPECT_EQ(l.coprimary_exclusion_days, 0.0);
    const auto m = StudyDesignFilter::maximal(30.0);
    EXPECT_EQ(m.window_lo, -30.0);
    EXPECT_EQ(m.window_hi, 30.0);

    StudyDesignFilter bad{5.0, 1.0, std::nullopt};
    EXPECT_THROW(bad.validate(), ParameterError);
    bad = StudyDesignFilter{1.0, 5.0, -1.0};
    EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(AnalyzeUnit, NoIndex)
{
    const auto a = analyze_unit(unit_with({neg(0, 1.0)}), StudyDesignFilter::gier());
    EXPECT_EQ(a.reason, ExclusionReason::NoIndex);
    EXPECT_TRUE(a.excluded());
}

TEST(AnalyzeUnit, WindowUsesCalendarDays)
{
    // Index positive at 2.9 (day 2). Contact 1 at 3.1 (day 3, offset 1),
    // contact 2 at 16.5 (day 16, offset 14), contact 3 at 17.0 (offset 15).
    const auto obs = unit_with({pos(0, 2.9), pos(1, 3.1), pos(2, 16.5), pos(3, 17.0)});
    const auto a = analyze_unit(obs, StudyDesignFilter::gier());
    EXPECT_FALSE(a.excluded());
    EXPECT_EQ(a.index_id, 0);
    EXPECT_EQ(a.n_at_risk, 3);
    EXPECT_EQ(a.n_attributed, 2);

    const auto h = analyze_unit(obs, StudyDesignFilter::harris());
    EXPECT_EQ(h.reason, ExclusionReason::CoPrimary); // contact 1 one day after the index
}

TEST(AnalyzeUnit, CoprimarySameDayOnly)
{
    const auto same = unit_with({pos(0, 4.1), pos(1, 4.8)});
    EXPECT_EQ(analyze_unit(same, StudyDesignFilter::lyngse()).reason, ExclusionReason::CoPrimary);
    const auto next = unit_with({pos(0, 4.1), pos(1, 5.0)});
    const auto a = analyze_unit(next, StudyDesignFilter::lyngse());
    EXPECT_FALSE(a.excluded());
    EXPECT_EQ(a.n_attributed, 1);
}

TEST(AnalyzeUnit, UntestedContacts)
{
    const auto obs = unit_with({pos(0, 1.0), neg(1, 3.0)});
    auto f = StudyDesignFilter::gier();
    const auto registry = analyze_unit(obs, f);
    EXPECT_EQ(registry.n_at_risk, 3);
    f.require_contact_tested = true;
    const auto traced = analyze_unit(obs, f);
    EXPECT_EQ(traced.n_at_risk, 1);
    EXPECT_EQ(traced.n_attributed, 0);
}

TEST(AnalyzeUnit, OnsetAnchor)
{
    // Contact's test is 9 days after the index's, but onset only 3 days.
    ObservedUnit obs = unit_with({TestRecord{0, 2.0, true, 2.0}, TestRecord{1, 11.0, true, 5.0}});
    StudyDesignFilter f{1.0, 7.0, std::nullopt};
    EXPECT_EQ(analyze_unit(obs, f).n_attributed, 0);
    f.anchor = WindowAnchor::OnsetTime;
    EXPECT_EQ(analyze_unit(obs, f).n_attributed, 1);
}

TEST(AnalyzeUnit, VaccinationFollowsIndex)
{
    const auto a = analyze_unit(unit_with({pos(0, 1.0)}, 3, true), StudyDesignFilter::gier());
    EXPECT_TRUE(a.index_vaccinated);
    const auto b = analyze_unit(unit_with({pos(1, 1.0)}, 3, true), StudyDesignFilter::gier());
    EXPECT_FALSE(b.index_vaccinated);
}

TEST(AnalyzeUnit, WiderWindowNeverAttributesFewer)
{
    // Nested windows on random observed units.
    Rng rng = make_stream(21, 0, 0);
    for (int i = 0; i < 5000; ++i) {
        std::vector<TestRecord> tests;
        for (int id = 0; id < 5; ++id) {
            if (bernoulli(rng, 0.7)) {
                tests.push_back(TestRecord{id, uniform(rng, 0.0, 40.0), bernoulli(rng, 0.6), std::nullopt});
            }
        }
        std::sort(tests.begin(), tests.end(), [](const auto& a, const auto& b) { return a.test_time < b.test_time; });
        const auto obs = unit_with(tests, 5);
        int previous = -1;
        for (double hi : {3.0, 7.0, 10.0, 14.0, 30.0}) {
            const auto a = analyze_unit(obs, StudyDesignFilter{1.0, hi, std::nullopt});
            if (a.excluded()) {
                break;
            }
            ASSERT_GE(a.n_attributed, previous);
            previous = a.n_attributed;
        }
    }
}

TEST(EstimateVeSar, WorkedExample)
{
    // Vaccinated: 1 of 3 and 0 of 3; unvaccinated: 2 of 3 and 1 of 3.
    std::vector<UnitAnalysis> units = {
        {0, true, 3, 1, ExclusionReason::None},
        {0, true, 3, 0, ExclusionReason::None},
        {0, false, 3, 2, ExclusionReason::None},
        {0, false, 3, 1, ExclusionReason::None},
        {std::nullopt, false, 0, 0, ExclusionReason::NoIndex},
    };
    const auto est = estimate_ve_sar(std::span<const UnitAnalysis>(units));
    EXPECT_NEAR(est.ve.sar_vaccinated, 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(est.ve.sar_unvaccinated, 0.5, 1e-15);
    EXPECT_NEAR(est.ve.ve, 2.0 / 3.0, 1e-15);
    EXPECT_EQ(est.tally.excluded_no_index, 1);
    EXPECT_EQ(est.tally.analysed_units(), 4);
    EXPECT_GT(est.ve.se, 0.0);
}

TEST(EstimateVeSar, PerUnitPooling)
{
    std::vector<UnitAnalysis> units = {
        {0, true, 1, 1, ExclusionReason::None},
        {0, true, 3, 0, ExclusionReason::None},
        {0, false, 2, 1, ExclusionReason::None},
        {0, false, 2, 1, ExclusionReason::None},
    };
    const auto pooled = estimate_ve_sar(std::span<const UnitAnalysis>(units), SarPooling::Pooled);
    const auto per_unit = estimate_ve_sar(std::span<const UnitAnalysis>(units), SarPooling::PerUnitMean);
    EXPECT_NEAR(pooled.ve.sar_vaccinated, 0.25, 1e-15);
    EXPECT_NEAR(per_unit.ve.sar_vaccinated, 0.5, 1e-15);
    EXPECT_NEAR(per_unit.ve.ve, 0.0, 1e-15);
}

TEST(EstimateVeSar, Errors)
{
    std::vector<UnitAnalysis> only_unvacc = {{0, false, 3, 1, ExclusionReason::None}};
    EXPECT_THROW(estimate_ve_sar(std::span<const UnitAnalysis>(only_unvacc)), EstimationError);
    std::vector<UnitAnalysis> silent = {{0, true, 3, 1, ExclusionReason::None}, {0, false, 3, 0, ExclusionReason::None}};
    EXPECT_THROW(estimate_ve_sar(std::span<const UnitAnalysis>(silent)), EstimationError);
}

TEST(EstimateVeSar, BinomialSeWhenContactsIndependent)
{
    // Unit size 2: one contact per unit, so the cluster SE is the binomial one.
    PipelineSpec spec;
    spec.unit.unit_size = 2;
    spec.policy.kind = Scheduled{1.0};
    spec.policy.prospective_enrollment = true;
    spec.filter = StudyDesignFilter::maximal();
    spec.filter.index_rule = IndexRule::Enrolled;
    const auto r = mc_oracle(spec, 50000, 22, 1);
    const double sv = r.observed.sar_vaccinated, su = r.observed.sar_unvaccinated;
    const double nv = static_cast<double>(r.tally.vaccinated.at_risk);
    const double nu = static_cast<double>(r.tally.unvaccinated.at_risk);
    const double mu = sv / su;
    const double binomial = mu * std::sqrt((1 - sv) / (sv * nv) + (1 - su) / (su * nu));
    EXPECT_NEAR(r.observed.se, binomial, 0.02 * binomial);
}

TEST(Community, ExtraInfectionsBiasNaiveEstimateTowardZero)
{
    // Community acquisition adds positives to both arms equally, so with the
    // maximal window the naive VE moves toward zero.
    PipelineSpec spec;
    spec.policy.kind = Scheduled{1.0};
    spec.policy.prospective_enrollment = true;
    spec.filter = StudyDesignFilter::maximal();
    spec.filter.index_rule = IndexRule::Enrolled;
    const auto clean = mc_oracle(spec, 100000, 23, 1);
    spec.unit.community_daily_hazard = 0.005;
    const auto noisy = mc_oracle(spec, 100000, 23, 1);
    EXPECT_LT(noisy.observed.ve, clean.observed.ve - 3 * std::hypot(noisy.observed.se, clean.observed.se));
    // The gap to truth comes from the misattributed community positives.
    EXPECT_GT(noisy.truth.ve - noisy.observed.ve, 3 * std::hypot(noisy.truth.se, noisy.observed.se));
}
