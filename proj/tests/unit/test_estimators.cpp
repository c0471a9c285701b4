#include "generators.hpp"

#include <spectrwm/errors.hpp>
#include <spectrwm/estimators.hpp>
#include <spectrwm/oracles.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <iostream>
#include <numbers>

using namespace spectrwm;

namespace {

SimulationSpec heat_spec(std::size_t n, double h, double T, Variant variant, double lambda = 1.0) {
    ModelSpec m;
    m.lambda = lambda;
    SimulationSpec s;
    s.disc = discretize(m, n);
    s.kernel.variant = variant;
    s.kernel.h = h;
    s.initial.assign(n, 0.0);
    s.horizon = T;
    return s;
}

ReplicaOptions opts(std::size_t replicas, std::uint64_t seed = 1, unsigned threads = 1) {
    ReplicaOptions o;
    o.replicas = replicas;
    o.seed = seed;
    o.threads = threads;
    return o;
}

}  // namespace

TEST(FixedTime, ConstantObservable) {
    const auto est = estimate_fixed_time(heat_spec(4, 0.3, 0.5, Variant::Fast), Observable::constant(2.5), opts(50));
    EXPECT_EQ(est[0].value, 2.5);
    EXPECT_EQ(est[0].std_error, 0.0);
}

TEST(FixedTime, ZeroHorizonReturnsInitialObservable) {
    auto spec = heat_spec(4, 0.3, 0.0, Variant::Academic);
    spec.initial = {1.0, -2.0, 0.5, 3.0};
    const auto est = estimate_replicas(spec, Observable::squares(4), opts(20));
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_EQ(est.fixed_time[j].value, spec.initial[j] * spec.initial[j]);
        EXPECT_EQ(est.fixed_time[j].std_error, 0.0);
        EXPECT_EQ(est.path_integral[j].value, 0.0);
    }
}

TEST(FixedTime, HeatSecondMomentMatchesOu) {
    const auto spec = heat_spec(16, 0.05, 1.0, Variant::Fast);
    const auto est = estimate_fixed_time(spec, Observable::squares(16), opts(2000, 3, 0));
    const auto oracle = semidiscrete_ou_moments(1.0, *spec.disc, spec.initial).second_moment();
    int misses = 0;
    for (std::size_t j = 0; j < 16; ++j) misses += std::abs(est[j].value - oracle[j]) > 3 * est[j].std_error;
    EXPECT_LE(misses, 1);
    const auto avg = estimate_fixed_time(spec, Observable::mean_square(16), opts(2000, 3, 0));
    double mean_oracle = 0;
    for (double x : oracle) mean_oracle += x / 16;
    EXPECT_NEAR(avg[0].value, mean_oracle, 3 * avg[0].std_error);
}

TEST(PathIntegral, ConstantObservableIsExactlyHorizon) {
    const auto spec = heat_spec(8, 0.1, 0.7, Variant::Academic);
    const JumpKernel kernel(spec.disc, spec.kernel);
    const auto obs = Observable::constant(1.0);
    for (std::uint64_t r = 0; r < 200; ++r) {
        PathIntegralObserver path(obs);
        Observer* list[] = {&path};
        RngStream rng(11, r);
        kernel.simulate(kernel.make_state(spec.initial), spec.horizon, rng, list);
        EXPECT_EQ(path.integral()[0], 0.7);
    }
    const auto est = estimate_path_integral(spec, obs, opts(100));
    EXPECT_EQ(est[0].value, 0.7);
    EXPECT_EQ(est[0].std_error, 0.0);
}

TEST(PathIntegral, HeatSecondMomentMatchesIntegratedOu) {
    const auto spec = heat_spec(16, 0.05, 1.0, Variant::Fast);
    const auto est = estimate_path_integral(spec, Observable::mean_square(16), opts(2000, 4, 0));
    const auto oracle = semidiscrete_ou_integrated_second_moment(1.0, *spec.disc, spec.initial);
    double avg = 0;
    for (double x : oracle) avg += x / 16;
    EXPECT_NEAR(est[0].value, avg, 3 * est[0].std_error);
}

TEST(PathIntegral, LinearObservableHasZeroMean) {
    const auto spec = heat_spec(8, 0.1, 1.0, Variant::Academic);
    const auto est = estimate_replicas(spec, Observable::components(8), opts(1000, 5, 0));
    int misses = 0;
    for (std::size_t j = 0; j < 8; ++j) {
        misses += std::abs(est.fixed_time[j].value) > 3 * est.fixed_time[j].std_error;
        misses += std::abs(est.path_integral[j].value) > 3 * est.path_integral[j].std_error;
    }
    EXPECT_LE(misses, 1);
}

TEST(Replicas, ReproducibleAcrossThreadCounts) {
    const auto spec = heat_spec(8, 0.2, 0.5, Variant::Academic);
    const auto a = estimate_replicas(spec, Observable::squares(8), opts(64, 9, 1));
    const auto b = estimate_replicas(spec, Observable::squares(8), opts(64, 9, 3));
    const auto c = estimate_replicas(spec, Observable::squares(8), opts(64, 10, 1));
    bool differs = false;
    for (std::size_t j = 0; j < 8; ++j) {
        EXPECT_EQ(a.fixed_time[j].value, b.fixed_time[j].value);
        EXPECT_EQ(a.fixed_time[j].std_error, b.fixed_time[j].std_error);
        EXPECT_EQ(a.path_integral[j].value, b.path_integral[j].value);
        differs |= a.fixed_time[j].value != c.fixed_time[j].value;
    }
    EXPECT_TRUE(differs);
}

TEST(Replicas, FailuresAreCountedThenFatal) {
    auto task = [](std::size_t r, RngStream&) -> std::vector<double> {
        if (r % 200 == 0) throw StiffnessError(0, 800.0, 700.0);
        return {1.0};
    };
    const auto summary = run_replicas(1, opts(1000), task);
    EXPECT_EQ(summary.failures, 5u);
    EXPECT_EQ(summary.moments.count(), 995u);
    EXPECT_NE(summary.first_failure.find("exceeds cap"), std::string::npos);

    auto worse = [](std::size_t r, RngStream&) -> std::vector<double> {
        if (r % 50 == 0) throw BudgetError(10, 0.1, 1.0);
        return {1.0};
    };
    EXPECT_THROW(run_replicas(1, opts(1000), worse), ExperimentError);

    auto fatal = [](std::size_t, RngStream&) -> std::vector<double> { throw std::logic_error("bug"); };
    EXPECT_THROW(run_replicas(1, opts(10, 1, 2), fatal), std::logic_error);
    EXPECT_THROW(run_replicas(1, opts(1), [](std::size_t, RngStream&) { return std::vector<double>{1.0}; }),
                 std::invalid_argument);
}

TEST(Replicas, HalvingReplicasDoublesVariance) {
    const auto spec = heat_spec(8, 0.1, 0.5, Variant::Fast);
    const auto big = estimate_fixed_time(spec, Observable::mean_square(8), opts(4000, 12, 0));
    const auto small = estimate_fixed_time(spec, Observable::mean_square(8), opts(2000, 13, 0));
    const double ratio = std::pow(small[0].std_error / big[0].std_error, 2);
    EXPECT_GT(ratio, 1.6);
    EXPECT_LT(ratio, 2.5);
}

TEST(Convergence, ExactEstimatesAreInconclusive) {
    ConvergenceReport report;
    for (double h : {0.1, 0.2, 0.05}) report.rows.push_back({h, 8, 1.0, 0.01, 1.0, 0.0, false});
    fit_convergence(report);
    EXPECT_TRUE(report.inconclusive);
    EXPECT_TRUE(std::isnan(report.slope));
    EXPECT_EQ(report.rows_fitted, 0u);
    EXPECT_EQ(report.rows.front().h, 0.2);
    for (const auto& row : report.rows) EXPECT_EQ(row.abs_error, 0.0);
}

TEST(Convergence, SyntheticQuadraticErrorsAndNoiseFloor) {
    ConvergenceReport report;
    for (double h : {0.2, 0.1, 0.05, 0.025}) report.rows.push_back({h, 8, 1.0 + 3 * h * h, 1e-4, 1.0, 0.0, false});
    fit_convergence(report);
    EXPECT_FALSE(report.inconclusive);
    EXPECT_EQ(report.rows_fitted, 4u);
    EXPECT_NEAR(report.slope, 2.0, 1e-10);
    EXPECT_NEAR(report.slope_std_error, 0.0, 1e-8);

    // The finest row sits under the noise floor and is left out.
    report.rows.back().std_error = 1.0;
    fit_convergence(report);
    EXPECT_EQ(report.rows_fitted, 3u);
    EXPECT_FALSE(report.rows.back().resolved);
    EXPECT_NEAR(report.slope, 2.0, 1e-10);
}

TEST(Convergence, StudyNeedsThreeScalesAndScalarObservable) {
    auto make = [](double h) { return heat_spec(4, h, 0.1, Variant::Fast); };
    EXPECT_THROW(convergence_study(make, {0.2, 0.1}, Observable::mean_square(4), 0.0, opts(10)),
                 std::invalid_argument);
    EXPECT_THROW(convergence_study(make, {0.2, 0.1, 0.05}, Observable::squares(4), 0.0, opts(10)),
                 std::invalid_argument);
}

TEST(Convergence, LogLogSlope) {
    const std::vector<double> x{1, 2, 4, 8};
    const std::vector<double> y{3, 12, 48, 192};
    EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
    EXPECT_THROW(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Holding, FastExample) {
    ModelSpec m;
    const auto rows = holding_time_study(m, Variant::Fast, {0.1}, {16}, 100000, 3);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0].analytic_mean, 6.25e-4, 1e-18);
    EXPECT_NEAR(rows[0].empirical_mean, 6.25e-4, 3 * rows[0].std_error);
}

TEST(Holding, AcademicOverFastIsGridSpacing) {
    for (std::size_t n : {8u, 16u, 32u}) {
        const double ratio = analytic_mean_holding(Variant::Academic, 0.1, n, 1.0) /
                             analytic_mean_holding(Variant::Fast, 0.1, n, 1.0);
        EXPECT_NEAR(ratio, 2 * std::numbers::pi / n, 1e-14);
    }
    EXPECT_NEAR(analytic_mean_holding(Variant::Fast, 0.1, 32, 1.0),
                0.5 * analytic_mean_holding(Variant::Fast, 0.1, 16, 1.0), 1e-18);
    ModelSpec m;
    const auto rows = holding_time_study(m, Variant::Academic, {0.1, 0.05}, {8, 16}, 10000, 4);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& row : rows) EXPECT_NEAR(row.empirical_mean, row.analytic_mean, 3 * row.std_error);
    EXPECT_THROW(holding_time_study(m, Variant::DetailedBalance, {0.1}, {8}, 10, 1), std::invalid_argument);
}

TEST(TimeAverage, LangevinStationaryAgreesWithFixedTime) {
    // A long time average and an ensemble at a late time estimate the same stationary moment.
    ModelSpec m;
    m.kind = ModelKind::Langevin;
    const std::size_t n = 4;
    const auto disc = discretize(m, n);
    const auto target = std::make_shared<const LangevinTarget>(disc->grid, 1.0);
    KernelOptions ko{Variant::DetailedBalance, 0.3};
    const JumpKernel kernel(disc, ko, target);
    const auto obs = Observable::mean_square(n);
    TimeAverageObserver avg(obs, 40.0);
    Observer* list[] = {&avg};
    RngStream rng(21, 0);
    kernel.simulate(kernel.make_state(std::vector<double>(n, 0.0)), 2000.0, rng, list);

    SimulationSpec spec{disc, ko, target, std::vector<double>(n, 0.0), 5.0};
    const auto fixed = estimate_fixed_time(spec, obs, opts(400, 22, 0));
    const double combined = std::hypot(avg.averages().std_error(), fixed[0].std_error);
    EXPECT_NEAR(avg.averages().mean(), fixed[0].value, 3 * combined);
    EXPECT_EQ(avg.averages().batches(), 50u);
}

TEST(Observable, ModesProjectOntoBasis) {
    ModelSpec m;
    const auto disc = discretize(m, 6);
    const auto obs = Observable::modes(disc, {0, 3});
    std::vector<double> coeffs{1.5, 0, 0, -2.0, 0, 0};
    const auto v = disc->basis.from_spectral(coeffs);
    std::vector<double> out(2);
    obs.eval(v, out);
    EXPECT_NEAR(out[0], 1.5, 1e-13);
    EXPECT_NEAR(out[1], -2.0, 1e-13);
}

namespace {

// E[u(T)^2] for one fast-variant mode: a birth-death chain on the lattice h Z with
// rates sigma^2/(2h^2) exp(+-mu u h / sigma^2), solved from the master equation by RK4.
double master_equation_second_moment(double mu, double sigma, double h, double T) {
    const double s2 = sigma * sigma;
    const double var = mu < 0 ? s2 * -std::expm1(2 * mu * T) / (-2 * mu) : s2 * T;
    const long K = static_cast<long>(std::ceil(10 * std::sqrt(var) / h)) + 5;
    const std::size_t size = static_cast<std::size_t>(2 * K + 1);
    std::vector<double> up(size), down(size);
    double max_rate = 0;
    for (std::size_t s = 0; s < size; ++s) {
        const double u = static_cast<double>(static_cast<long>(s) - K) * h;
        const double e = mu * u * h / s2;
        up[s] = s + 1 < size ? s2 / (2 * h * h) * std::exp(e) : 0.0;
        down[s] = s > 0 ? s2 / (2 * h * h) * std::exp(-e) : 0.0;
        max_rate = std::max(max_rate, up[s] + down[s]);
    }
    auto rhs = [&](const std::vector<double>& p) {
        std::vector<double> dp(size, 0.0);
        for (std::size_t s = 0; s < size; ++s) {
            dp[s] -= (up[s] + down[s]) * p[s];
            if (s + 1 < size) dp[s + 1] += up[s] * p[s];
            if (s > 0) dp[s - 1] += down[s] * p[s];
        }
        return dp;
    };
    std::vector<double> p(size, 0.0);
    p[static_cast<std::size_t>(K)] = 1.0;
    const long steps = static_cast<long>(std::ceil(T * max_rate / 0.2));
    const double dt = T / static_cast<double>(steps);
    std::vector<double> tmp(size);
    for (long k = 0; k < steps; ++k) {
        const auto k1 = rhs(p);
        for (std::size_t s = 0; s < size; ++s) tmp[s] = p[s] + 0.5 * dt * k1[s];
        const auto k2 = rhs(tmp);
        for (std::size_t s = 0; s < size; ++s) tmp[s] = p[s] + 0.5 * dt * k2[s];
        const auto k3 = rhs(tmp);
        for (std::size_t s = 0; s < size; ++s) tmp[s] = p[s] + dt * k3[s];
        const auto k4 = rhs(tmp);
        for (std::size_t s = 0; s < size; ++s) p[s] += dt / 6 * (k1[s] + 2 * k2[s] + 2 * k3[s] + k4[s]);
    }
    double m2 = 0;
    for (std::size_t s = 0; s < size; ++s) {
        const double u = static_cast<double>(static_cast<long>(s) - K) * h;
        m2 += p[s] * u * u;
    }
    return m2;
}

}  // namespace

TEST(Convergence, ExactJumpLawWeakErrorIsSecondOrder) {
    // Without Monte Carlo noise the fixed-time error of the spatial mean of u^2 is
    // resolved at every h, and the fitted order is two.
    const std::size_t n = 16;
    ModelSpec m;
    m.lambda = 1.0;
    const auto disc = discretize(m, n);
    const double T = 1.0;
    const auto oracle = semidiscrete_ou_moments(T, *disc, std::vector<double>(n, 0.0)).second_moment();
    double target = 0;
    for (double x : oracle) target += x / n;

    ConvergenceReport report;
    for (double h : {0.2, 0.1, 0.05, 0.025}) {
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i) sum += master_equation_second_moment(disc->basis.eigenvalue(i), 1.0, h, T);
        // L^2 coefficients: (1/n) sum_j v_j^2 = (1/(n dx)) sum_i u_i^2.
        const double estimate = sum / (n * disc->grid.dx());
        report.rows.push_back({h, n, estimate, 0.0, target, 0.0, false});
    }
    fit_convergence(report);
    ASSERT_FALSE(report.inconclusive);
    EXPECT_EQ(report.rows_fitted, 4u);
    EXPECT_NEAR(report.slope, 2.0, 0.2);
    std::cout << "exact-law slope " << report.slope << ", error at h=0.025 " << report.rows.back().abs_error << "\n";
}
