#ifndef VESAR_STATS_HPP
#define VESAR_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "vesar/error.hpp"

namespace vesar {

enum class SarPooling {
    Pooled,     // sum of attributed / sum of at-risk
    PerUnitMean // mean over units of attributed / at-risk
};

/// Sufficient statistics of (attributed, at_risk) pairs for one arm.
///
/// Integer sums are exact, so merging tallies in any order gives the same
/// pooled estimate. The per-unit sums are doubles and are merged in a fixed
/// order by the callers.
struct ArmTally {
    std::int64_t units = 0;
    std::int64_t attributed = 0;
    std::int64_t at_risk = 0;
    std::int64_t sum_aa = 0;
    std::int64_t sum_rr = 0;
    std::int64_t sum_ar = 0;
    std::int64_t units_with_risk = 0;
    double sum_unit_sar = 0.0;
    double sum_unit_sar_sq = 0.0;

    void add(std::int64_t a, std::int64_t r)
    {
        ++units;
        attributed += a;
        at_risk += r;
        sum_aa += a * a;
        sum_rr += r * r;
        sum_ar += a * r;
        if (r > 0) {
            const double s = static_cast<double>(a) / static_cast<double>(r);
            ++units_with_risk;
            sum_unit_sar += s;
            sum_unit_sar_sq += s * s;
        }
    }

    ArmTally& operator+=(const ArmTally& o)
    {
        units += o.units;
        attributed += o.attributed;
        at_risk += o.at_risk;
        sum_aa += o.sum_aa;
        sum_rr += o.sum_rr;
        sum_ar += o.sum_ar;
        units_with_risk += o.units_with_risk;
        sum_unit_sar += o.sum_unit_sar;
        sum_unit_sar_sq += o.sum_unit_sar_sq;
        return *this;
    }

    bool operator==(const ArmTally&) const = default;

    double sar(SarPooling pooling = SarPooling::Pooled) const
    {
        if (pooling == SarPooling::PerUnitMean) {
            return units_with_risk > 0 ? sum_unit_sar / static_cast<double>(units_with_risk) : 0.0;
        }
        return at_risk > 0 ? static_cast<double>(attributed) / static_cast<double>(at_risk) : 0.0;
    }

    /// Sampling variance of sar() with units as independent clusters.
    /// For the pooled ratio this is the delta-method (linearised) variance
    /// sum (a_i - p r_i)^2 / R^2, scaled by n/(n-1); it reduces to the
    /// binomial p(1-p)/R when contacts within a unit are independent.
    double sar_variance(SarPooling pooling = SarPooling::Pooled) const
    {
        if (pooling == SarPooling::PerUnitMean) {
            const auto n = static_cast<double>(units_with_risk);
            if (n < 2) {
                return 0.0;
            }
            const double mean = sum_unit_sar / n;
            const double var = (sum_unit_sar_sq - n * mean * mean) / (n - 1.0);
            return std::max(var, 0.0) / n;
        }
        const auto n = static_cast<double>(units);
        if (n < 2 || at_risk == 0) {
            return 0.0;
        }
        const double p = sar();
        const double big_r = static_cast<double>(at_risk);
        const double resid = static_cast<double>(sum_aa) - 2.0 * p * static_cast<double>(sum_ar)
            + p * p * static_cast<double>(sum_rr);
        return std::max(resid, 0.0) / (big_r * big_r) * n / (n - 1.0);
    }
};

struct VeEstimate {
    double sar_vaccinated = 0.0;
    double sar_unvaccinated = 0.0;
    double ve = 0.0;
    double se = 0.0;
};

/// VE = 1 - sar_v / sar_u with its delta-method standard error.
/// Var(mu) = mu^2 {Var(sar_v)/sar_v^2 + Var(sar_u)/sar_u^2}, written so that
/// sar_v = 0 needs no special case.
inline VeEstimate ve_from_tallies(const ArmTally& vaccinated, const ArmTally& unvaccinated,
                                  SarPooling pooling = SarPooling::Pooled)
{
    if (vaccinated.units == 0 || unvaccinated.units == 0) {
        throw EstimationError("insufficient data: an arm has no analysed units");
    }
    VeEstimate out;
    out.sar_vaccinated = vaccinated.sar(pooling);
    out.sar_unvaccinated = unvaccinated.sar(pooling);
    if (!(out.sar_unvaccinated > 0.0)) {
        throw EstimationError("undefined VE: no unvaccinated transmission observed");
    }
    const double mu = out.sar_vaccinated / out.sar_unvaccinated;
    const double su2 = out.sar_unvaccinated * out.sar_unvaccinated;
    const double var_mu = vaccinated.sar_variance(pooling) / su2 + mu * mu * unvaccinated.sar_variance(pooling) / su2;
    out.ve = 1.0 - mu;
    out.se = std::sqrt(var_mu);
    return out;
}

} // namespace vesar

#endif
