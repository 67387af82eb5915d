#ifndef VESAR_OBSERVE_HPP
#define VESAR_OBSERVE_HPP

// Turns a fully observed unit into the dated test records a retrospective
// database would hold. Tests are perfectly sensitive and specific: a test is
// positive exactly while the person is infected.

#include <algorithm>
#include <cmath>
#include <optional>
#include <type_traits>
#include <variant>
#include <vector>

#include "vesar/error.hpp"
#include "vesar/rng.hpp"
#include "vesar/simcore.hpp"

namespace vesar {

/// One test at symptom onset plus delay, for symptomatic infected persons.
struct SymptomPrompted {
    double delay_days = 0.0;
};

/// Tests every interval_k days from a per-person uniform phase in [0, k).
struct Scheduled {
    double interval_k = 7.0;
};

struct SymptomPlusScheduled {
    double delay_days = 0.0;
    double interval_k = 7.0;
};

struct NoTesting {};

using TestingKind = std::variant<NoTesting, SymptomPrompted, Scheduled, SymptomPlusScheduled>;

struct TestingPolicy {
    TestingKind kind = SymptomPrompted{};
    // Per-person probability of taking part in testing at all.
    double participation = 1.0;
    // Tests are only generated in [0, horizon_days) from the primary's infection.
    double horizon_days = 60.0;
    // Prospective cohort: the enrolling (true primary) case is known, so the
    // observed unit records who it is.
    bool prospective_enrollment = false;

    void validate() const
    {
        detail::require(detail::in_unit_interval(participation), "policy.participation must lie in [0,1]");
        detail::require(horizon_days > 0.0, "policy.horizon_days must be positive");
        std::visit(
            [](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, SymptomPrompted> || std::is_same_v<K, SymptomPlusScheduled>) {
                    detail::require(k.delay_days >= 0.0, "policy.delay_days must be non-negative");
                }
                if constexpr (std::is_same_v<K, Scheduled> || std::is_same_v<K, SymptomPlusScheduled>) {
                    detail::require(k.interval_k > 0.0, "policy.interval_k must be positive");
                }
            },
            kind);
    }

    std::optional<double> interval() const
    {
        if (const auto* s = std::get_if<Scheduled>(&kind)) {
            return s->interval_k;
        }
        if (const auto* s = std::get_if<SymptomPlusScheduled>(&kind)) {
            return s->interval_k;
        }
        return std::nullopt;
    }

    std::optional<double> symptom_delay() const
    {
        if (const auto* s = std::get_if<SymptomPrompted>(&kind)) {
            return s->delay_days;
        }
        if (const auto* s = std::get_if<SymptomPlusScheduled>(&kind)) {
            return s->delay_days;
        }
        return std::nullopt;
    }
};

struct TestRecord {
    int person_id = 0;
    double test_time = 0.0;
    bool positive = false;
    // Symptom onset reported alongside a symptom-prompted test.
    std::optional<double> reported_onset;

    bool operator==(const TestRecord&) const = default;
};

/// What the database sees. Persons who never tested have no records; the
/// database does not distinguish them from uninfected persons.
struct ObservedUnit {
    std::vector<Person> persons;
    std::vector<TestRecord> tests; // sorted by (test_time, person_id)
    std::optional<int> enrolled_id;

    void clear()
    {
        persons.clear();
        tests.clear();
        enrolled_id.reset();
    }
};

/// Appends tests at phase, phase + k, ... below horizon.
inline void append_scheduled_tests(std::vector<TestRecord>& out, int person_id, const Infection* inf, double phase,
                                   double k, double horizon)
{
    for (long j = 0;; ++j) {
        const double t = phase + static_cast<double>(j) * k;
        if (t >= horizon) {
            break;
        }
        out.push_back(TestRecord{person_id, t, inf != nullptr && inf->positive_at(t), std::nullopt});
    }
}

/// True if a schedule with the given phase catches the infection.
inline bool detected_by_schedule(const Infection& inf, double phase, double k, double horizon)
{
    // First scheduled time at or after acquisition.
    const double j = std::max(0.0, std::ceil((inf.acquisition_time - phase) / k));
    const double t = phase + j * k;
    return t < horizon && inf.positive_at(t);
}

/// Degrades a unit under the policy, writing into `out` (buffers are reused).
/// Random draws per person, in id order: participation, then phase when the
/// policy is scheduled.
inline void apply_policy(const UnitTruth& truth, const TestingPolicy& policy, Rng& rng, ObservedUnit& out)
{
    out.clear();
    out.persons = truth.persons;
    if (policy.prospective_enrollment) {
        out.enrolled_id = truth.primary_id;
    }
    if (std::holds_alternative<NoTesting>(policy.kind)) {
        return;
    }
    const auto interval = policy.interval();
    const auto delay = policy.symptom_delay();
    for (const auto& person : truth.persons) {
        const bool participates = bernoulli(rng, policy.participation);
        const double phase = interval ? uniform01(rng) * *interval : 0.0;
        if (!participates) {
            continue;
        }
        const Infection* inf = truth.infection_of(person.id);
        if (delay && inf != nullptr && inf->symptomatic) {
            const double onset = *inf->symptom_onset_time;
            const double t = onset + *delay;
            if (t < policy.horizon_days) {
                out.tests.push_back(TestRecord{person.id, t, inf->positive_at(t), onset});
            }
        }
        if (interval) {
            append_scheduled_tests(out.tests, person.id, inf, phase, *interval, policy.horizon_days);
        }
    }
    std::sort(out.tests.begin(), out.tests.end(), [](const TestRecord& a, const TestRecord& b) {
        return a.test_time < b.test_time || (a.test_time == b.test_time && a.person_id < b.person_id);
    });
}

inline ObservedUnit apply_policy(const UnitTruth& truth, const TestingPolicy& policy, Rng& rng)
{
    ObservedUnit out;
    apply_policy(truth, policy, rng, out);
    return out;
}

} // namespace vesar

#endif
