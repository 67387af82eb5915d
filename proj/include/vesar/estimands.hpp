#ifndef VESAR_ESTIMANDS_HPP
#define VESAR_ESTIMANDS_HPP

// Closed-form target and observed estimands for vaccine efficacy against the
// secondary attack rate (VE-SAR) under symptom-prompted and scheduled testing.
//
// Every quantity here is a ratio mu of per-contact transmission probabilities
// (vaccinated primary over unvaccinated primary); the corresponding VE is
// 1 - mu. All functions are pure and thread-safe.

#include <cmath>
#include <string>

#include "vesar/error.hpp"

namespace vesar {

namespace detail {

inline void require(bool ok, const std::string& msg)
{
    if (!ok) {
        throw ParameterError(msg);
    }
}

inline bool in_unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

} // namespace detail

/// Parameters of the symptom-stratified transmission model.
///
/// `lambda_symptom` is P(S=1|V=1)/P(S=1|V=0), `delta` the asymptomatic to
/// symptomatic transmission ratio, `nu` the vaccinated to unvaccinated
/// transmission ratio at fixed symptom status, `rho_symptom` the symptomatic
/// fraction among unvaccinated infections and `tau` the per-contact
/// transmission probability of a symptomatic unvaccinated primary.
class SymptomModelParams {
public:
    SymptomModelParams(double lambda_symptom, double delta, double nu, double rho_symptom, double tau)
        : lambda_symptom_(lambda_symptom), delta_(delta), nu_(nu), rho_symptom_(rho_symptom), tau_(tau)
    {
        detail::require(detail::in_unit_interval(lambda_symptom), "lambda_symptom must lie in [0,1]");
        detail::require(detail::in_unit_interval(delta), "delta must lie in [0,1]");
        detail::require(detail::in_unit_interval(nu), "nu must lie in [0,1]");
        detail::require(detail::in_unit_interval(rho_symptom), "rho_symptom must lie in [0,1]");
        detail::require(tau > 0.0 && tau <= 1.0, "tau must lie in (0,1]");
    }

    // VE against symptomatic infection 0.9 with VE against infection 0.5
    // gives lambda = 0.1 / 0.5 = 0.2; half of unvaccinated infections are
    // symptomatic.
    static SymptomModelParams with_reference_symptoms(double delta, double nu, double tau)
    {
        return {0.2, delta, nu, 0.5, tau};
    }

    double lambda_symptom() const noexcept { return lambda_symptom_; }
    double delta() const noexcept { return delta_; }
    double nu() const noexcept { return nu_; }
    double rho_symptom() const noexcept { return rho_symptom_; }
    double tau() const noexcept { return tau_; }

    SymptomModelParams with_nu(double nu) const
    {
        return {lambda_symptom_, delta_, nu, rho_symptom_, tau_};
    }
    SymptomModelParams with_delta(double delta) const
    {
        return {lambda_symptom_, delta, nu_, rho_symptom_, tau_};
    }

    /// P(T=1 | S=s, V=v) for a single contact.
    double transmission_probability(bool symptomatic, bool vaccinated) const noexcept
    {
        return tau_ * (symptomatic ? 1.0 : delta_) * (vaccinated ? nu_ : 1.0);
    }

    /// P(S=1 | V=v).
    double symptomatic_fraction(bool vaccinated) const noexcept
    {
        return vaccinated ? lambda_symptom_ * rho_symptom_ : rho_symptom_;
    }

private:
    double lambda_symptom_;
    double delta_;
    double nu_;
    double rho_symptom_;
    double tau_;
};

/// Parameters of the duration model used for scheduled testing.
///
/// Infection durations are Uniform(rho_v - c, rho_v + c) with mean rho0
/// (unvaccinated) or rho1 (vaccinated); the daily transmission hazard is
/// tau0 for the unvaccinated and tau0 * nu_daily for the vaccinated.
class DurationModelParams {
public:
    DurationModelParams(double rho0, double rho1, double c, double nu_daily, double tau0)
        : rho0_(rho0), rho1_(rho1), c_(c), nu_daily_(nu_daily), tau0_(tau0)
    {
        detail::require(c > 0.0, "c must be positive");
        detail::require(rho0 - c > 0.0, "rho0 - c must be positive");
        detail::require(rho1 - c > 0.0, "rho1 - c must be positive (lambda_duration > c/rho0)");
        detail::require(rho1 <= rho0, "rho1 must not exceed rho0");
        detail::require(detail::in_unit_interval(nu_daily), "nu_daily must lie in [0,1]");
        detail::require(tau0 > 0.0, "tau0 must be positive");
    }

    // Durations span 14 days: mean 14 unvaccinated (7..21), 8 vaccinated (1..15).
    static DurationModelParams with_reference_durations(double nu_daily, double tau0 = 0.01)
    {
        return {14.0, 8.0, 7.0, nu_daily, tau0};
    }

    double rho0() const noexcept { return rho0_; }
    double rho1() const noexcept { return rho1_; }
    double c() const noexcept { return c_; }
    double nu_daily() const noexcept { return nu_daily_; }
    double tau0() const noexcept { return tau0_; }
    double tau1() const noexcept { return tau0_ * nu_daily_; }
    double lambda_duration() const noexcept { return rho1_ / rho0_; }

    double mean_duration(bool vaccinated) const noexcept { return vaccinated ? rho1_ : rho0_; }
    double daily_hazard(bool vaccinated) const noexcept { return vaccinated ? tau1() : tau0_; }

    DurationModelParams with_nu_daily(double nu_daily) const
    {
        return {rho0_, rho1_, c_, nu_daily, tau0_};
    }

private:
    double rho0_;
    double rho1_;
    double c_;
    double nu_daily_;
    double tau0_;
};

inline double ve_from_mu(double mu) noexcept { return 1.0 - mu; }

// ---------------------------------------------------------------------------
// Symptom-prompted testing

/// Target ratio mu = nu {lambda rho + delta (1 - lambda rho)} / {rho + delta (1 - rho)}.
inline double symptom_prompted_target_mu(const SymptomModelParams& p)
{
    const double lr = p.lambda_symptom() * p.rho_symptom();
    const double denom = p.rho_symptom() + p.delta() * (1.0 - p.rho_symptom());
    if (denom == 0.0) {
        throw ParameterError("degenerate: no transmission possible");
    }
    return p.nu() * (lr + p.delta() * (1.0 - lr)) / denom;
}

/// Ratio recovered when only symptomatic primaries are sampled: nu itself.
inline double symptom_prompted_actual_mu(const SymptomModelParams& p) noexcept { return p.nu(); }

/// Solves the target-mu expression for nu given a target VE.
inline double invert_target_to_nu(double target_ve, double lambda_symptom, double delta, double rho_symptom)
{
    detail::require(detail::in_unit_interval(target_ve), "target_ve must lie in [0,1]");
    detail::require(detail::in_unit_interval(lambda_symptom), "lambda_symptom must lie in [0,1]");
    detail::require(detail::in_unit_interval(delta), "delta must lie in [0,1]");
    detail::require(detail::in_unit_interval(rho_symptom), "rho_symptom must lie in [0,1]");
    const double lr = lambda_symptom * rho_symptom;
    const double unvacc = rho_symptom + delta * (1.0 - rho_symptom);
    const double vacc = lr + delta * (1.0 - lr);
    if (unvacc == 0.0 || vacc == 0.0) {
        throw ParameterError("degenerate: no transmission possible");
    }
    const double nu = (1.0 - target_ve) * unvacc / vacc;
    if (nu > 1.0 + 1e-12) {
        throw ParameterError("infeasible target VE for these parameters");
    }
    return nu > 1.0 ? 1.0 : nu;
}

// ---------------------------------------------------------------------------
// Scheduled (infrequent) testing

/// Target ratio mu = lambda_duration * nu_daily.
inline double infrequent_target_mu(const DurationModelParams& d) noexcept
{
    return d.lambda_duration() * d.nu_daily();
}

/// Probability that an infection with duration ~ Uniform(rho_v - c, rho_v + c)
/// is caught by a single test placed uniformly in a window of k days,
/// i.e. E[min(N/k, 1)].
inline double sampling_fraction(double k, double rho_v, double c)
{
    detail::require(k > 0.0, "testing interval k must be positive");
    detail::require(c > 0.0 && rho_v - c > 0.0, "duration support must be positive");
    const double lo = rho_v - c;
    const double hi = rho_v + c;
    if (k <= lo) {
        return 1.0;
    }
    if (k >= hi) {
        return rho_v / k;
    }
    return (2.0 * k * hi - lo * lo - k * k) / (4.0 * c * k);
}

/// Transmission probability of a sampled primary with arm-specific duration
/// mean rho_v and daily hazard tau_v. Three regimes:
///   k <= rho_v - c            every infection is sampled: tau_v rho_v
///   rho_v - c < k < rho_v + c partial length bias, normalised by S_k
///   k >= rho_v + c            full length bias: tau_v (rho_v + c^2 / (3 rho_v))
inline double infrequent_observed_component(double k, double rho_v, double c, double tau_v)
{
    detail::require(k > 0.0, "testing interval k must be positive");
    detail::require(c > 0.0 && rho_v - c > 0.0, "duration support must be positive");
    const double lo = rho_v - c;
    const double hi = rho_v + c;
    if (k <= lo) {
        return tau_v * rho_v;
    }
    if (k >= hi) {
        return tau_v * (rho_v + c * c / (3.0 * rho_v));
    }
    const double s_k = sampling_fraction(k, rho_v, c);
    return tau_v * (3.0 * k * hi * hi - k * k * k - 2.0 * lo * lo * lo) / (12.0 * c * k * s_k);
}

/// Same three expressions with the middle and long-interval branches swapped
/// and the boundaries closed on the middle interval. Not a valid model of
/// scheduled testing; kept so simulation can arbitrate between placements.
inline double alternate_branch_component(double k, double rho_v, double c, double tau_v)
{
    detail::require(k > 0.0, "testing interval k must be positive");
    const double lo = rho_v - c;
    const double hi = rho_v + c;
    if (k < lo) {
        return tau_v * rho_v;
    }
    if (k <= hi) {
        return tau_v * (rho_v + c * c / (3.0 * rho_v));
    }
    const double s_k = (2.0 * k * hi - lo * lo - k * k) / (4.0 * c * k);
    return tau_v * (3.0 * k * hi * hi - k * k * k - 2.0 * lo * lo * lo) / (12.0 * c * k * s_k);
}

/// Observed ratio under testing every k days.
inline double infrequent_observed_mu(double k, const DurationModelParams& d)
{
    return infrequent_observed_component(k, d.rho1(), d.c(), d.tau1())
        / infrequent_observed_component(k, d.rho0(), d.c(), d.tau0());
}

inline double alternate_branch_observed_mu(double k, const DurationModelParams& d)
{
    return alternate_branch_component(k, d.rho1(), d.c(), d.tau1())
        / alternate_branch_component(k, d.rho0(), d.c(), d.tau0());
}

/// nu_daily that yields a given target VE under the duration model.
inline double invert_target_to_nu_daily(double target_ve, double rho0, double rho1)
{
    detail::require(detail::in_unit_interval(target_ve), "target_ve must lie in [0,1]");
    detail::require(rho0 > 0.0 && rho1 > 0.0, "mean durations must be positive");
    const double nu = (1.0 - target_ve) * rho0 / rho1;
    if (nu > 1.0 + 1e-12) {
        throw ParameterError("infeasible target VE for these parameters");
    }
    return nu > 1.0 ? 1.0 : nu;
}

} // namespace vesar

#endif
