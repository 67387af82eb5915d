#ifndef VESAR_RUNNER_HPP
#define VESAR_RUNNER_HPP

// Seeded, parallel simulate -> observe -> infer replication.
//
// Replicates are grouped into fixed blocks; block b of arm a always draws
// from make_stream(seed, a, b), and block results are merged in block order.
// Output is therefore identical for any number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "vesar/config.hpp"
#include "vesar/error.hpp"
#include "vesar/infer.hpp"
#include "vesar/observe.hpp"
#include "vesar/rng.hpp"
#include "vesar/simcore.hpp"
#include "vesar/stats.hpp"

namespace vesar {

inline constexpr std::int64_t kBlockSize = 1024;

/// Calls work(i) for i in [0, n) on up to `threads` workers.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& work)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            work(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                work(i);
            }
        });
    }
}

struct PipelineSpec {
    UnitConfig unit;
    TestingPolicy policy;
    StudyDesignFilter filter = StudyDesignFilter::maximal();
    SarPooling pooling = SarPooling::Pooled;
};

inline PipelineSpec pipeline_of(const ScenarioConfig& cfg)
{
    return PipelineSpec{cfg.unit, cfg.policy, cfg.filter, cfg.pooling};
}

struct UnitCounts {
    int attributed = 0;
    int at_risk = 0;
};

struct PipelineTally {
    TruthTally truth;
    AnalysisTally observed;
    // Per-unit observed counts by arm, only filled when requested.
    std::vector<UnitCounts> units_vaccinated;
    std::vector<UnitCounts> units_unvaccinated;

    PipelineTally& operator+=(const PipelineTally& o)
    {
        truth += o.truth;
        observed += o.observed;
        units_vaccinated.insert(units_vaccinated.end(), o.units_vaccinated.begin(), o.units_vaccinated.end());
        units_unvaccinated.insert(units_unvaccinated.end(), o.units_unvaccinated.begin(), o.units_unvaccinated.end());
        return *this;
    }
};

/// Runs `units_per_arm` units with an unvaccinated primary and as many with a
/// vaccinated primary through the full pipeline.
inline PipelineTally run_pipeline(const PipelineSpec& spec, std::int64_t units_per_arm, std::uint64_t seed,
                                  unsigned threads, bool keep_units = false)
{
    spec.unit.validate();
    spec.policy.validate();
    spec.filter.validate();
    if (units_per_arm < 0) {
        throw ParameterError("units per arm must be non-negative");
    }
    const auto blocks_per_arm = static_cast<std::size_t>((units_per_arm + kBlockSize - 1) / kBlockSize);
    std::vector<PipelineTally> blocks(2 * blocks_per_arm);

    parallel_for(blocks.size(), threads, [&](std::size_t job) {
        const std::size_t arm = job / blocks_per_arm;
        const std::size_t block = job % blocks_per_arm;
        UnitConfig cfg = spec.unit;
        cfg.p_primary_vaccinated = arm == 1 ? 1.0 : 0.0;
        Rng rng = make_stream(seed, arm, block);
        const std::int64_t begin = static_cast<std::int64_t>(block) * kBlockSize;
        const std::int64_t end = std::min(units_per_arm, begin + kBlockSize);
        auto& out = blocks[job];
        ObservedUnit obs;
        for (std::int64_t i = begin; i < end; ++i) {
            const UnitTruth truth = simulate_unit(cfg, rng);
            out.truth.add(truth);
            apply_policy(truth, spec.policy, rng, obs);
            const UnitAnalysis a = analyze_unit(obs, spec.filter);
            out.observed.add(a);
            if (keep_units && !a.excluded()) {
                (a.index_vaccinated ? out.units_vaccinated : out.units_unvaccinated)
                    .push_back(UnitCounts{a.n_attributed, a.n_at_risk});
            }
        }
    });

    PipelineTally total;
    for (const auto& b : blocks) {
        total += b;
    }
    return total;
}

/// Standard error of the VE estimate from resampling analysed units within
/// each arm.
inline double bootstrap_se(const PipelineTally& tally, SarPooling pooling, int reps, std::uint64_t seed)
{
    const auto& vu = tally.units_vaccinated;
    const auto& uu = tally.units_unvaccinated;
    if (vu.empty() || uu.empty()) {
        throw EstimationError("insufficient data: an arm has no analysed units");
    }
    auto resample = [](Rng& rng, const std::vector<UnitCounts>& units) {
        ArmTally t;
        const auto n = units.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& u = units[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n))];
            t.add(u.attributed, u.at_risk);
        }
        return t;
    };
    double sum = 0.0;
    double sum_sq = 0.0;
    int used = 0;
    for (int b = 0; b < reps; ++b) {
        Rng rng = make_stream(seed, 0xB007, static_cast<std::uint64_t>(b));
        const ArmTally v = resample(rng, vu);
        const ArmTally u = resample(rng, uu);
        const double su = u.sar(pooling);
        if (!(su > 0.0)) {
            continue;
        }
        const double ve = 1.0 - v.sar(pooling) / su;
        sum += ve;
        sum_sq += ve * ve;
        ++used;
    }
    if (used < 2) {
        throw EstimationError("undefined VE: bootstrap replicates had no unvaccinated transmission");
    }
    const double mean = sum / used;
    return std::sqrt(std::max(0.0, (sum_sq - used * mean * mean) / (used - 1)));
}

struct OracleResult {
    VeEstimate observed; // naive estimator on observed data
    VeEstimate truth;    // true VE-SAR on the same simulated units
    AnalysisTally tally;
};

/// Monte Carlo arbiter for the closed forms: full pipeline with n_reps units
/// per arm. Degenerate arms raise EstimationError rather than yielding NaN.
inline OracleResult mc_oracle(const PipelineSpec& spec, std::int64_t n_reps, std::uint64_t seed, unsigned threads = 1)
{
    if (n_reps < 10000) {
        throw ParameterError("mc_oracle needs at least 10^4 replicates per arm");
    }
    const auto tally = run_pipeline(spec, n_reps, seed, threads);
    OracleResult out;
    out.tally = tally.observed;
    out.observed = estimate_ve_sar(tally.observed, spec.pooling).ve;
    out.truth = true_ve_sar(tally.truth);
    return out;
}

} // namespace vesar

#endif
