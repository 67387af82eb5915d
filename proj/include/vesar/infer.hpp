#ifndef VESAR_INFER_HPP
#define VESAR_INFER_HPP

// Retrospective analysis of observed units: who is the index case, which
// contact positives count as transmission events, and the resulting SAR and
// VE-SAR estimates.
//
// Windows and co-primary rules work on calendar days: an event at time t
// falls on day floor(t), and offsets are differences of days.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vesar/error.hpp"
#include "vesar/observe.hpp"
#include "vesar/stats.hpp"

namespace vesar {

enum class WindowAnchor {
    TestTime,  // index and contact events dated by positive test
    OnsetTime, // dated by reported symptom onset where a record carries one
};

enum class IndexRule {
    EarliestPositive, // first positive test; ties go to the smallest id
    Enrolled,         // the prospectively enrolled case, if it tested positive
};

enum class ExclusionReason {
    None,
    NoIndex,   // nobody in the unit tested positive
    CoPrimary, // another member tested positive too close to the index
};

struct StudyDesignFilter {
    double window_lo = 1.0;
    double window_hi = 14.0;
    // Drop the unit when another member's first positive falls within this
    // many days of the index's (0 = same day).
    std::optional<double> coprimary_exclusion_days;
    // Contact-tracing style: untested contacts leave the denominator.
    // Registry style (false): untested contacts count as negative.
    bool require_contact_tested = false;
    WindowAnchor anchor = WindowAnchor::TestTime;
    IndexRule index_rule = IndexRule::EarliestPositive;

    void validate() const
    {
        detail::require(window_lo <= window_hi, "filter.window: lo must not exceed hi");
        detail::require(!coprimary_exclusion_days || *coprimary_exclusion_days >= 0.0,
                        "filter.coprimary_days must be non-negative");
    }

    // Contacts positive 2-14 days after the index; units with a second
    // positive within 2 days of the index are dropped.
    static StudyDesignFilter harris() { return {2.0, 14.0, 2.0}; }
    // Contacts tested 1-10 days after the index.
    static StudyDesignFilter eyre() { return {1.0, 10.0, std::nullopt}; }
    // Contacts positive 1-14 days after the index.
    static StudyDesignFilter gier() { return {1.0, 14.0, std::nullopt}; }
    // Contacts positive 1-7 days after the index; units with two positives
    // on the index's day are dropped.
    static StudyDesignFilter lyngse() { return {1.0, 7.0, 0.0}; }
    // Every positive contact within the horizon counts, before or after the index.
    static StudyDesignFilter maximal(double horizon_days = 60.0)
    {
        return {-horizon_days, horizon_days, std::nullopt};
    }
};

struct UnitAnalysis {
    std::optional<int> index_id;
    bool index_vaccinated = false;
    int n_at_risk = 0;
    int n_attributed = 0;
    ExclusionReason reason = ExclusionReason::None;

    bool excluded() const noexcept { return reason != ExclusionReason::None; }
};

namespace detail {

inline double day_of(double t) { return std::floor(t); }

inline double event_time(const TestRecord& r, WindowAnchor anchor)
{
    return anchor == WindowAnchor::OnsetTime && r.reported_onset ? *r.reported_onset : r.test_time;
}

} // namespace detail

/// Person with the earliest positive test, ties broken by smallest id.
inline std::optional<int> identify_index(const ObservedUnit& obs)
{
    std::optional<int> best;
    double best_time = std::numeric_limits<double>::infinity();
    for (const auto& r : obs.tests) {
        if (r.positive && (r.test_time < best_time || (r.test_time == best_time && r.person_id < *best))) {
            best = r.person_id;
            best_time = r.test_time;
        }
    }
    return best;
}

inline std::optional<int> identify_index(const ObservedUnit& obs, IndexRule rule)
{
    if (rule == IndexRule::EarliestPositive) {
        return identify_index(obs);
    }
    if (!obs.enrolled_id) {
        return std::nullopt;
    }
    for (const auto& r : obs.tests) {
        if (r.positive && r.person_id == *obs.enrolled_id) {
            return r.person_id;
        }
    }
    return std::nullopt;
}

/// Applies co-primary exclusion, then counts contacts with a positive test
/// inside the attribution window.
inline UnitAnalysis analyze_unit(const ObservedUnit& obs, const StudyDesignFilter& filter)
{
    UnitAnalysis out;
    out.index_id = identify_index(obs, filter.index_rule);
    if (!out.index_id) {
        out.reason = ExclusionReason::NoIndex;
        return out;
    }
    const int index = *out.index_id;
    for (const auto& p : obs.persons) {
        if (p.id == index) {
            out.index_vaccinated = p.vaccinated;
        }
    }

    const TestRecord* index_first = nullptr;
    for (const auto& r : obs.tests) {
        if (r.positive && r.person_id == index) {
            index_first = &r;
            break;
        }
    }
    const double anchor_day = detail::day_of(detail::event_time(*index_first, filter.anchor));
    const double index_test_day = detail::day_of(index_first->test_time);

    struct ContactState {
        bool tested = false;
        bool has_positive = false;
        double first_positive_day = 0.0;
        bool in_window = false;
    };
    std::vector<ContactState> state(obs.persons.size());
    auto slot = [&](int id) -> ContactState& {
        for (std::size_t i = 0; i < obs.persons.size(); ++i) {
            if (obs.persons[i].id == id) {
                return state[i];
            }
        }
        throw ParameterError("test record for unknown person " + std::to_string(id));
    };

    for (const auto& r : obs.tests) {
        if (r.person_id == index) {
            continue;
        }
        auto& s = slot(r.person_id);
        s.tested = true;
        if (!r.positive) {
            continue;
        }
        if (!s.has_positive) {
            s.has_positive = true;
            s.first_positive_day = detail::day_of(r.test_time);
        }
        const double offset = detail::day_of(detail::event_time(r, filter.anchor)) - anchor_day;
        if (offset >= filter.window_lo && offset <= filter.window_hi) {
            s.in_window = true;
        }
    }

    if (filter.coprimary_exclusion_days) {
        for (const auto& s : state) {
            if (s.has_positive && std::abs(s.first_positive_day - index_test_day) <= *filter.coprimary_exclusion_days) {
                out.reason = ExclusionReason::CoPrimary;
                return out;
            }
        }
    }

    for (std::size_t i = 0; i < obs.persons.size(); ++i) {
        if (obs.persons[i].id == index) {
            continue;
        }
        const auto& s = state[i];
        if (filter.require_contact_tested && !s.tested) {
            continue;
        }
        ++out.n_at_risk;
        out.n_attributed += s.in_window ? 1 : 0;
    }
    return out;
}

/// Running totals over analysed units, split by index vaccination.
struct AnalysisTally {
    ArmTally vaccinated;
    ArmTally unvaccinated;
    std::int64_t excluded_no_index = 0;
    std::int64_t excluded_coprimary = 0;

    void add(const UnitAnalysis& a)
    {
        switch (a.reason) {
        case ExclusionReason::NoIndex: ++excluded_no_index; return;
        case ExclusionReason::CoPrimary: ++excluded_coprimary; return;
        case ExclusionReason::None: break;
        }
        (a.index_vaccinated ? vaccinated : unvaccinated).add(a.n_attributed, a.n_at_risk);
    }

    AnalysisTally& operator+=(const AnalysisTally& o)
    {
        vaccinated += o.vaccinated;
        unvaccinated += o.unvaccinated;
        excluded_no_index += o.excluded_no_index;
        excluded_coprimary += o.excluded_coprimary;
        return *this;
    }

    std::int64_t analysed_units() const { return vaccinated.units + unvaccinated.units; }
};

struct SarEstimate {
    VeEstimate ve;
    AnalysisTally tally;
};

/// Pooled (or per-unit mean) SAR per arm and VE = 1 - sar_v / sar_u.
/// Throws EstimationError when an arm is empty or sar_u is zero.
inline SarEstimate estimate_ve_sar(const AnalysisTally& tally, SarPooling pooling = SarPooling::Pooled)
{
    return SarEstimate{ve_from_tallies(tally.vaccinated, tally.unvaccinated, pooling), tally};
}

inline SarEstimate estimate_ve_sar(std::span<const UnitAnalysis> analyses, SarPooling pooling = SarPooling::Pooled)
{
    AnalysisTally tally;
    for (const auto& a : analyses) {
        tally.add(a);
    }
    return estimate_ve_sar(tally, pooling);
}

inline std::string to_string(ExclusionReason r)
{
    switch (r) {
    case ExclusionReason::None: return "none";
    case ExclusionReason::NoIndex: return "no_index";
    case ExclusionReason::CoPrimary: return "coprimary";
    }
    return "?";
}

} // namespace vesar

#endif
