#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vesar/estimands.hpp"
#include "vesar/rng.hpp"

using namespace vesar;

namespace {

SymptomModelParams sp(double lambda, double delta, double nu, double rho = 0.5)
{
    return SymptomModelParams(lambda, delta, nu, rho, 0.3);
}

} // namespace

TEST(SymptomModelParams, RejectsOutOfRange)
{
    EXPECT_THROW(SymptomModelParams(1.1, 0.5, 0.5, 0.5, 0.3), ParameterError);
    EXPECT_THROW(SymptomModelParams(0.2, -0.1, 0.5, 0.5, 0.3), ParameterError);
    EXPECT_THROW(SymptomModelParams(0.2, 0.5, 1.5, 0.5, 0.3), ParameterError);
    EXPECT_THROW(SymptomModelParams(0.2, 0.5, 0.5, 2.0, 0.3), ParameterError);
    EXPECT_THROW(SymptomModelParams(0.2, 0.5, 0.5, 0.5, 0.0), ParameterError);
    EXPECT_NO_THROW(SymptomModelParams(0.2, 0.5, 0.5, 0.5, 1.0));
}

TEST(SymptomModelParams, ReferenceValues)
{
    const auto p = SymptomModelParams::with_reference_symptoms(0.5, 0.6, 0.3);
    EXPECT_DOUBLE_EQ(p.lambda_symptom(), 0.2);
    EXPECT_DOUBLE_EQ(p.rho_symptom(), 0.5);
    EXPECT_DOUBLE_EQ(p.symptomatic_fraction(true), 0.1);
}

TEST(DurationModelParams, RejectsInvalidSupport)
{
    EXPECT_THROW(DurationModelParams(14, 8, 8, 0.7, 0.01), ParameterError);  // rho1 - c = 0
    EXPECT_THROW(DurationModelParams(14, 16, 7, 0.7, 0.01), ParameterError); // rho1 > rho0
    EXPECT_THROW(DurationModelParams(6, 6, 7, 0.7, 0.01), ParameterError);   // rho0 - c < 0
    EXPECT_THROW(DurationModelParams(14, 8, 7, 1.2, 0.01), ParameterError);
    EXPECT_THROW(DurationModelParams(14, 8, 7, 0.7, 0.0), ParameterError);
    const auto d = DurationModelParams::with_reference_durations(0.7);
    EXPECT_DOUBLE_EQ(d.rho0(), 14.0);
    EXPECT_DOUBLE_EQ(d.rho1(), 8.0);
    EXPECT_DOUBLE_EQ(d.c(), 7.0);
    EXPECT_GT(d.lambda_duration(), d.c() / d.rho0());
}

TEST(SymptomPromptedTargetMu, Examples)
{
    EXPECT_DOUBLE_EQ(symptom_prompted_target_mu(sp(0.2, 1.0, 0.6)), 0.6);
    EXPECT_EQ(symptom_prompted_target_mu(sp(0.2, 0.3, 0.0)), 0.0);
    // 0.6 * (0.1 + 0.5 * 0.9) / (0.5 + 0.5 * 0.5) = 0.6 * 0.55 / 0.75
    EXPECT_NEAR(symptom_prompted_target_mu(sp(0.2, 0.5, 0.6)), 0.44, 1e-15);
    EXPECT_NEAR(ve_from_mu(symptom_prompted_target_mu(sp(0.2, 0.5, 0.6))), 0.56, 1e-15);
    EXPECT_NEAR(ve_from_mu(symptom_prompted_actual_mu(sp(0.2, 0.5, 0.6))), 0.40, 1e-15);
}

TEST(SymptomPromptedTargetMu, MatchesTotalProbabilityRoute)
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double lambda = u(gen), delta = u(gen), nu = u(gen), rho = 0.05 + 0.95 * u(gen);
        EXPECT_NEAR(symptom_prompted_target_mu(sp(lambda, delta, nu, rho)),
                    oracle::symptom_target_mu(lambda, delta, nu, rho), 1e-13);
    }
}

TEST(SymptomPromptedTargetMu, DegenerateWithoutTransmission)
{
    EXPECT_THROW(symptom_prompted_target_mu(SymptomModelParams(0.2, 0.0, 0.5, 0.0, 0.3)), ParameterError);
}

TEST(SymptomPromptedActualMu, EqualsNu)
{
    EXPECT_EQ(symptom_prompted_actual_mu(sp(0.2, 0.5, 0.6)), 0.6);
    EXPECT_EQ(symptom_prompted_actual_mu(sp(0.2, 0.5, 0.0)), 0.0);
    EXPECT_EQ(symptom_prompted_actual_mu(sp(0.2, 0.5, 1.0)), 1.0);
}

TEST(InvertTargetToNu, Examples)
{
    EXPECT_NEAR(invert_target_to_nu(0.56, 0.2, 0.5, 0.5), 0.6, 1e-14);
    EXPECT_EQ(invert_target_to_nu(1.0, 0.2, 0.5, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(invert_target_to_nu(0.0, 0.2, 1.0, 0.5), 1.0);
}

TEST(InvertTargetToNu, InfeasibleAndInvalid)
{
    // With delta < 1 and lambda < 1, nu would have to exceed 1.
    EXPECT_THROW(invert_target_to_nu(0.0, 0.2, 0.5, 0.5), ParameterError);
    EXPECT_THROW(invert_target_to_nu(1.2, 0.2, 0.5, 0.5), ParameterError);
    EXPECT_THROW(invert_target_to_nu(0.5, 0.0, 0.0, 0.5), ParameterError);
}

TEST(InvertTargetToNu, RoundTrip)
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 5000; ++i) {
        const double lambda = u(gen), delta = 0.01 + 0.99 * u(gen), rho = u(gen), target = u(gen);
        double nu = 0.0;
        try {
            nu = invert_target_to_nu(target, lambda, delta, rho);
        } catch (const ParameterError&) {
            continue;
        }
        ++checked;
        EXPECT_NEAR(ve_from_mu(symptom_prompted_target_mu(sp(lambda, delta, nu, rho))), target, 1e-12);
    }
    EXPECT_GT(checked, 1000);
}

TEST(InfrequentTargetMu, Examples)
{
    EXPECT_NEAR(infrequent_target_mu(DurationModelParams(14, 8, 7, 0.7, 0.01)), 0.4, 1e-15);
    EXPECT_EQ(infrequent_target_mu(DurationModelParams(14, 8, 7, 0.0, 0.01)), 0.0);
    EXPECT_EQ(infrequent_target_mu(DurationModelParams(14, 14, 7, 1.0, 0.01)), 1.0);
}

TEST(SamplingFraction, Examples)
{
    EXPECT_DOUBLE_EQ(sampling_fraction(15.0, 8.0, 7.0), 8.0 / 15.0);
    EXPECT_EQ(sampling_fraction(1.0, 8.0, 7.0), 1.0);
    // (2*10*15 - 1 - 100) / (4*7*10)
    EXPECT_NEAR(sampling_fraction(10.0, 8.0, 7.0), 199.0 / 280.0, 1e-15);
    EXPECT_THROW(sampling_fraction(0.0, 8.0, 7.0), ParameterError);
}

TEST(SamplingFraction, MonteCarloSingleTestPerCycle)
{
    // A test cycle of k days with a uniform phase catches an infection of
    // length n with probability min(n/k, 1).
    Rng rng = make_stream(1, 0, 0);
    const int draws = 1'000'000;
    int caught = 0;
    for (int i = 0; i < draws; ++i) {
        const double n = uniform(rng, 1.0, 15.0);
        const double phase = uniform01(rng) * 10.0;
        const double start = uniform01(rng) * 10.0;
        const double first = phase + std::ceil((start - phase) / 10.0) * 10.0;
        caught += first < start + n ? 1 : 0;
    }
    const double p = static_cast<double>(caught) / draws;
    const double se = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(p, sampling_fraction(10.0, 8.0, 7.0), 3 * se);
}

TEST(SamplingFraction, MatchesQuadratureAndIsNonIncreasing)
{
    for (double rho : {8.0, 14.0, 10.5}) {
        double prev = 2.0;
        for (double k = 0.25; k <= 40.0; k += 0.25) {
            const double v = sampling_fraction(k, rho, 7.0);
            EXPECT_NEAR(v, oracle::sampling_fraction(k, rho, 7.0), 1e-9) << "k=" << k << " rho=" << rho;
            EXPECT_LE(v, prev + 1e-15);
            prev = v;
        }
    }
}

TEST(ObservedComponent, BranchesAndQuadrature)
{
    // Long-interval branch: tau (rho + c^2 / (3 rho)).
    EXPECT_NEAR(infrequent_observed_component(25.0, 14.0, 7.0, 0.01), 0.01 * (14.0 + 49.0 / 42.0), 1e-15);
    // All infections caught: tau rho.
    EXPECT_DOUBLE_EQ(infrequent_observed_component(7.0, 14.0, 7.0, 0.01), 0.14);
    for (double rho : {8.0, 14.0}) {
        for (double k = 0.5; k <= 30.0; k += 0.5) {
            EXPECT_NEAR(infrequent_observed_component(k, rho, 7.0, 0.01), oracle::observed_component(k, rho, 7.0, 0.01),
                        1e-9)
                << "k=" << k << " rho=" << rho;
        }
    }
}

TEST(ObservedComponent, MonteCarloAtBoundaryInterval)
{
    // k = rho - c = 7 for rho = 14: every infection is caught, so the sampled
    // transmission probability is tau * E[N].
    Rng rng = make_stream(2, 0, 0);
    const int draws = 1'000'000;
    double sum = 0.0, sum_sq = 0.0;
    int sampled = 0;
    for (int i = 0; i < draws; ++i) {
        const double n = uniform(rng, 7.0, 21.0);
        if (uniform01(rng) >= std::min(n / 7.0, 1.0)) {
            continue;
        }
        const double t = bernoulli(rng, n * 0.01) ? 1.0 : 0.0;
        sum += t;
        sum_sq += t;
        ++sampled;
    }
    const double mean = sum / sampled;
    const double se = std::sqrt((sum_sq / sampled - mean * mean) / sampled);
    EXPECT_EQ(sampled, draws);
    EXPECT_NEAR(mean, infrequent_observed_component(7.0, 14.0, 7.0, 0.01), 3 * se);
}

TEST(ObservedComponent, ContinuousAtBranchBoundaries)
{
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double c = 0.5 + 10.0 * u(gen);
        const double rho = c + 0.1 + 20.0 * u(gen);
        const double tau = 0.001 + 0.05 * u(gen);
        const double lo = rho - c;
        const double hi = rho + c;
        const double eps = 1e-10;
        EXPECT_NEAR(infrequent_observed_component(lo + eps, rho, c, tau), tau * rho, 1e-9);
        EXPECT_NEAR(infrequent_observed_component(hi - eps, rho, c, tau), tau * (rho + c * c / (3 * rho)), 1e-9);
        EXPECT_NEAR(sampling_fraction(lo + eps, rho, c), 1.0, 1e-9);
        EXPECT_NEAR(sampling_fraction(hi - eps, rho, c), rho / hi, 1e-9);
    }
}

TEST(InfrequentObservedMu, Examples)
{
    const auto d = DurationModelParams(14, 8, 7, 0.7, 0.01);
    EXPECT_NEAR(infrequent_observed_mu(1.0, d), 0.4, 1e-15);
    // (nu / lambda) (lambda^2 rho0^2 + c^2/3) / (rho0^2 + c^2/3) = 1.225 * 241 / 637
    const double tail = 1.225 * 241.0 / 637.0;
    EXPECT_NEAR(infrequent_observed_mu(25.0, d), tail, 1e-15);
    EXPECT_EQ(infrequent_observed_mu(25.0, d), infrequent_observed_mu(30.0, d));
    EXPECT_NEAR(ve_from_mu(infrequent_observed_mu(25.0, d)), 0.536538461538, 1e-12);
    const auto inert = DurationModelParams(14, 14, 7, 1.0, 0.01);
    for (double k : {1.0, 5.0, 10.0, 20.0, 40.0}) {
        EXPECT_NEAR(infrequent_observed_mu(k, inert), 1.0, 1e-15);
    }
}

TEST(InfrequentObservedMu, MixedBranchesMatchQuadrature)
{
    const auto d = DurationModelParams(14, 8, 7, 0.7, 0.01);
    for (double k = 1.0; k <= 30.0; k += 1.0) {
        const double expected = oracle::observed_component(k, 8, 7, d.tau1()) / oracle::observed_component(k, 14, 7, d.tau0());
        EXPECT_NEAR(infrequent_observed_mu(k, d), expected, 1e-9) << "k=" << k;
    }
}

TEST(AlternateBranchPlacement, DiffersInsideTheMiddleInterval)
{
    const auto d = DurationModelParams(14, 8, 7, 0.7, 0.01);
    EXPECT_GT(std::abs(alternate_branch_observed_mu(10.0, d) - infrequent_observed_mu(10.0, d)), 1e-3);
    EXPECT_DOUBLE_EQ(alternate_branch_component(0.5, 8, 7, 0.01), infrequent_observed_component(0.5, 8, 7, 0.01));
}

TEST(Properties, SymptomPromptedUnderestimates)
{
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            for (int l = 0; l < 20; ++l) {
                const auto p = sp((i + 0.5) / 20, (j + 0.5) / 20, (l + 0.5) / 20);
                EXPECT_LE(symptom_prompted_target_mu(p), symptom_prompted_actual_mu(p));
            }
        }
    }
    // Equality when symptoms do not change transmission or vaccination does not change symptoms.
    EXPECT_DOUBLE_EQ(symptom_prompted_target_mu(sp(0.2, 1.0, 0.3)), 0.3);
    EXPECT_DOUBLE_EQ(symptom_prompted_target_mu(sp(1.0, 0.4, 0.3)), 0.3);
}

TEST(Properties, InfrequentLongIntervalUnderestimates)
{
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double c = 1.0 + 6.0 * u(gen);
        const double rho0 = c + 1.0 + 20.0 * u(gen);
        const double rho1 = c + (rho0 - c) * (0.01 + 0.98 * u(gen));
        const DurationModelParams d(rho0, rho1, c, 0.01 + 0.99 * u(gen), 0.01);
        const double k = rho0 + c + 30.0 * u(gen);
        EXPECT_GE(infrequent_observed_mu(k, d), infrequent_target_mu(d) - 1e-15);
    }
}

TEST(InvertTargetToNuDaily, RoundTrip)
{
    for (double target : {0.5, 0.6, 0.75, 1.0}) {
        const double nu = invert_target_to_nu_daily(target, 14, 8);
        EXPECT_NEAR(ve_from_mu(infrequent_target_mu(DurationModelParams(14, 8, 7, nu, 0.01))), target, 1e-12);
    }
    EXPECT_THROW(invert_target_to_nu_daily(0.2, 14, 8), ParameterError);
}
