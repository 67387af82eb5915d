#ifndef VESAR_SIMCORE_HPP
#define VESAR_SIMCORE_HPP

// Ground-truth generator for transmission units: one primary case at time 0
// plus susceptible contacts, with optional community acquisition and
// contact-to-contact spread. Time is continuous and measured in days.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vesar/error.hpp"
#include "vesar/estimands.hpp"
#include "vesar/rng.hpp"
#include "vesar/stats.hpp"

namespace vesar {

enum class TransmissionMode {
    // P(infect contact) = tau * (delta if asymptomatic) * (nu if vaccinated)
    PerUnitBernoulli,
    // P(infect contact) = 1 - exp(-duration * tau_v)
    PerDayHazard,
    // P(infect contact) = min(1, duration * tau_v), the small-hazard limit of PerDayHazard
    LinearHazard,
};

enum class TransmissionTiming {
    Uniform,               // uniform over the source's infectious window
    ExponentialFirstEvent, // first event of a constant hazard, truncated to the window
};

struct UnitConfig {
    int unit_size = 4;
    double p_primary_vaccinated = 0.5;
    bool contacts_vaccinated = false;
    SymptomModelParams symptom = SymptomModelParams::with_reference_symptoms(0.5, 0.6, 0.3);
    DurationModelParams duration = DurationModelParams::with_reference_durations(0.7);
    double incubation_mean_days = 6.0;
    double incubation_log_sd = 0.5;
    double community_daily_hazard = 0.0;
    double community_horizon_days = 60.0;
    bool contact_to_contact = false;
    TransmissionMode transmission_mode = TransmissionMode::PerUnitBernoulli;
    TransmissionTiming transmission_timing = TransmissionTiming::Uniform;

    void validate() const
    {
        detail::require(unit_size >= 2, "unit.size must be at least 2");
        detail::require(detail::in_unit_interval(p_primary_vaccinated), "unit.p_primary_vaccinated must lie in [0,1]");
        detail::require(incubation_mean_days > 0.0, "unit.incubation_mean_days must be positive");
        detail::require(incubation_log_sd >= 0.0, "unit.incubation_log_sd must be non-negative");
        detail::require(community_daily_hazard >= 0.0 && community_daily_hazard <= 1.0,
                        "unit.community_daily_hazard must lie in [0,1]");
        detail::require(community_horizon_days >= 0.0, "unit.community_horizon_days must be non-negative");
    }
};

struct Person {
    int id = 0;
    bool vaccinated = false;

    bool operator==(const Person&) const = default;
};

enum class Source {
    Seed,      // the unit's true primary case
    Primary,   // infected by the primary case
    Contact,   // infected by another contact (source_id)
    Community, // acquired outside the unit
};

struct Infection {
    int person_id = 0;
    double acquisition_time = 0.0;
    Source source = Source::Seed;
    int source_id = -1;
    bool symptomatic = false;
    std::optional<double> symptom_onset_time;
    double duration = 0.0;

    double end_time() const noexcept { return acquisition_time + duration; }
    bool positive_at(double t) const noexcept { return t >= acquisition_time && t < end_time(); }

    bool operator==(const Infection&) const = default;
};

/// Fully observed unit. Infections are stored in order of acquisition, so the
/// primary case is always first.
struct UnitTruth {
    std::vector<Person> persons;
    std::vector<Infection> infections;
    int primary_id = 0;

    const Infection& primary() const { return infections.front(); }
    bool primary_vaccinated() const { return persons.at(static_cast<std::size_t>(primary_id)).vaccinated; }

    const Infection* infection_of(int person_id) const
    {
        for (const auto& inf : infections) {
            if (inf.person_id == person_id) {
                return &inf;
            }
        }
        return nullptr;
    }

    int transmissions_from_primary() const
    {
        int n = 0;
        for (const auto& inf : infections) {
            n += inf.source == Source::Primary ? 1 : 0;
        }
        return n;
    }
};

namespace detail {

inline Infection sample_infection(const UnitConfig& cfg, Rng& rng, int person_id, bool vaccinated, double at)
{
    Infection inf;
    inf.person_id = person_id;
    inf.acquisition_time = at;
    inf.symptomatic = bernoulli(rng, cfg.symptom.symptomatic_fraction(vaccinated));
    const double mean = cfg.duration.mean_duration(vaccinated);
    inf.duration = uniform(rng, mean - cfg.duration.c(), mean + cfg.duration.c());
    if (inf.symptomatic) {
        inf.symptom_onset_time = at + lognormal_with_mean(rng, cfg.incubation_mean_days, cfg.incubation_log_sd);
    }
    return inf;
}

inline double transmission_probability(const UnitConfig& cfg, const Infection& src, bool src_vaccinated)
{
    switch (cfg.transmission_mode) {
    case TransmissionMode::PerUnitBernoulli:
        return cfg.symptom.transmission_probability(src.symptomatic, src_vaccinated);
    case TransmissionMode::PerDayHazard:
        return -std::expm1(-src.duration * cfg.duration.daily_hazard(src_vaccinated));
    case TransmissionMode::LinearHazard:
        return std::min(1.0, src.duration * cfg.duration.daily_hazard(src_vaccinated));
    }
    return 0.0;
}

// Time of a transmission already known to occur within the source's window.
inline double transmission_time(const UnitConfig& cfg, Rng& rng, const Infection& src, double p)
{
    const double u = uniform01(rng);
    if (cfg.transmission_timing == TransmissionTiming::Uniform || p <= 0.0) {
        return src.acquisition_time + u * src.duration;
    }
    if (p >= 1.0) {
        return src.acquisition_time;
    }
    // Inverse CDF of Exp(h) truncated to [0, duration), with h chosen so
    // that P(event within the window) = p.
    const double h = -std::log1p(-p) / src.duration;
    return src.acquisition_time - std::log1p(-u * p) / h;
}

} // namespace detail

struct SeededPrimary {
    Person person;
    Infection infection;
};

/// Draws the primary case (id 0) infected at time 0.
inline SeededPrimary sample_primary(const UnitConfig& cfg, Rng& rng)
{
    SeededPrimary out;
    out.person = Person{0, bernoulli(rng, cfg.p_primary_vaccinated)};
    out.infection = detail::sample_infection(cfg, rng, 0, out.person.vaccinated, 0.0);
    out.infection.source = Source::Seed;
    return out;
}

/// Simulates one unit to extinction of within-unit transmission.
inline UnitTruth simulate_unit(const UnitConfig& cfg, Rng& rng)
{
    constexpr double never = std::numeric_limits<double>::infinity();
    const auto n = static_cast<std::size_t>(cfg.unit_size);

    UnitTruth truth;
    truth.persons.reserve(n);
    truth.infections.reserve(n);

    auto seed = sample_primary(cfg, rng);
    truth.persons.push_back(seed.person);
    for (std::size_t i = 1; i < n; ++i) {
        truth.persons.push_back(Person{static_cast<int>(i), cfg.contacts_vaccinated});
    }

    struct Candidate {
        double time = never;
        Source source = Source::Community;
        int source_id = -1;
    };
    std::vector<Candidate> pending(n);
    std::vector<char> infected(n, 0);

    if (cfg.community_daily_hazard > 0.0) {
        for (std::size_t i = 1; i < n; ++i) {
            const double day = geometric_failures(rng, cfg.community_daily_hazard);
            const double t = day + uniform01(rng);
            if (t < cfg.community_horizon_days) {
                pending[i] = Candidate{t, Source::Community, -1};
            }
        }
    }

    auto expose_from = [&](const Infection& src) {
        const bool src_vacc = truth.persons[static_cast<std::size_t>(src.person_id)].vaccinated;
        const double p = detail::transmission_probability(cfg, src, src_vacc);
        const bool from_primary = src.person_id == truth.primary_id;
        for (std::size_t j = 0; j < n; ++j) {
            if (infected[j]) {
                continue;
            }
            if (!bernoulli(rng, p)) {
                continue;
            }
            const double t = detail::transmission_time(cfg, rng, src, p);
            if (t < pending[j].time) {
                pending[j] = Candidate{t, from_primary ? Source::Primary : Source::Contact,
                                       from_primary ? -1 : src.person_id};
            }
        }
    };

    infected[0] = 1;
    truth.infections.push_back(seed.infection);
    expose_from(truth.infections.back());

    for (;;) {
        std::size_t next = n;
        for (std::size_t j = 1; j < n; ++j) {
            if (!infected[j] && pending[j].time < never && (next == n || pending[j].time < pending[next].time)) {
                next = j;
            }
        }
        if (next == n) {
            break;
        }
        infected[next] = 1;
        const auto& cand = pending[next];
        Infection inf = detail::sample_infection(cfg, rng, static_cast<int>(next), truth.persons[next].vaccinated,
                                                 cand.time);
        inf.source = cand.source;
        inf.source_id = cand.source_id;
        truth.infections.push_back(inf);
        if (cfg.contact_to_contact) {
            expose_from(truth.infections.back());
        }
    }
    return truth;
}

/// Accumulates primary-sourced transmissions per arm of primary vaccination.
struct TruthTally {
    ArmTally vaccinated;
    ArmTally unvaccinated;

    void add(const UnitTruth& u)
    {
        auto& arm = u.primary_vaccinated() ? vaccinated : unvaccinated;
        arm.add(u.transmissions_from_primary(), static_cast<std::int64_t>(u.persons.size()) - 1);
    }

    TruthTally& operator+=(const TruthTally& o)
    {
        vaccinated += o.vaccinated;
        unvaccinated += o.unvaccinated;
        return *this;
    }
};

/// True VE-SAR: 1 - SAR(vaccinated primary) / SAR(unvaccinated primary),
/// counting only transmissions whose source is the primary.
inline VeEstimate true_ve_sar(const TruthTally& tally)
{
    return ve_from_tallies(tally.vaccinated, tally.unvaccinated);
}

inline VeEstimate true_ve_sar(std::span<const UnitTruth> units)
{
    TruthTally tally;
    for (const auto& u : units) {
        tally.add(u);
    }
    return true_ve_sar(tally);
}

inline std::string to_string(TransmissionMode m)
{
    switch (m) {
    case TransmissionMode::PerUnitBernoulli: return "per_unit_bernoulli";
    case TransmissionMode::PerDayHazard: return "per_day_hazard";
    case TransmissionMode::LinearHazard: return "linear_hazard";
    }
    return "?";
}

} // namespace vesar

#endif
