#pragma once

// Monte Carlo estimation over independent replicas of the jump process:
// observables at a fixed time, exact time integrals along piecewise-constant
// paths, convergence studies in h, and holding-time statistics.

#include "spectrwm/jump_kernel.hpp"
#include "spectrwm/semidiscretization.hpp"
#include "spectrwm/statistics.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace spectrwm {

/// Vector-valued function of the grid state.
struct Observable {
    std::size_t dim = 1;
    std::function<void(std::span<const double> v, std::span<double> out)> eval;

    static Observable constant(double c);
    /// u(x_j) for every j.
    static Observable components(std::size_t n);
    /// u(x_j)^2 for every j.
    static Observable squares(std::size_t n);
    /// (1/n) sum_j u(x_j)^2.
    static Observable mean_square(std::size_t n);
    /// <v, e_i> for each listed mode.
    static Observable modes(std::shared_ptr<const Discretization> disc,
                            std::vector<std::size_t> mode_indices);
};

/// Everything needed to run one replica.
struct SimulationSpec {
    std::shared_ptr<const Discretization> disc;
    KernelOptions kernel;
    std::shared_ptr<const LogDensity> target;
    std::vector<double> initial;
    double horizon = 1.0;
};

struct ReplicaOptions {
    std::size_t replicas = 10'000;
    std::uint64_t seed = 0;
    /// 0 uses the hardware concurrency.
    unsigned threads = 0;
    /// A larger fraction of failed replicas raises ExperimentError.
    double max_failure_fraction = 0.01;
};

/// Runs `task(r, rng)` for r = 0..replicas-1 with stream r and reduces the
/// returned vectors in replica order. Kernel failures (stiffness, budget,
/// non-finite densities) drop the replica and are counted.
struct ReplicaSummary {
    MomentAccumulator moments;
    std::size_t failures = 0;
    std::string first_failure;
};

ReplicaSummary run_replicas(std::size_t dim, const ReplicaOptions& options,
                            const std::function<std::vector<double>(std::size_t, RngStream&)>& task);

struct ReplicaEstimates {
    std::vector<Estimate> fixed_time;
    std::vector<Estimate> path_integral;
    std::size_t failures = 0;
};

/// Both estimators from the same replicas: the observable on the state
/// covering the horizon, and its integral over [0, horizon].
ReplicaEstimates estimate_replicas(const SimulationSpec& spec, const Observable& observable,
                                   const ReplicaOptions& options);

std::vector<Estimate> estimate_fixed_time(const SimulationSpec& spec,
                                          const Observable& observable,
                                          const ReplicaOptions& options);
std::vector<Estimate> estimate_path_integral(const SimulationSpec& spec,
                                             const Observable& observable,
                                             const ReplicaOptions& options);

/// Accumulates the integral of an observable along a trajectory. Sums by
/// parts, I = o_last T - o_0 t_0 - sum_k t_k (o_k - o_{k-1}), so an
/// observable that never changes integrates to exactly c (T - t_0).
class PathIntegralObserver final : public Observer {
public:
    explicit PathIntegralObserver(const Observable& observable);

    void on_hold(const JumpState& state, double dwell) override;
    void on_finish(const JumpState& final_state) override;

    const std::vector<double>& integral() const noexcept { return integral_; }

private:
    const Observable& observable_;
    std::vector<double> current_;
    std::vector<double> previous_;
    std::vector<double> first_;
    std::vector<double> correction_;
    std::vector<double> integral_;
    double t0_ = 0.0;
    bool started_ = false;
};

/// Time averages with batch-means errors for one long trajectory.
class TimeAverageObserver final : public Observer {
public:
    TimeAverageObserver(const Observable& observable, double batch_length);

    void on_hold(const JumpState& state, double dwell) override;
    const TimeBatchMeans& averages() const noexcept { return averages_; }

private:
    const Observable& observable_;
    std::vector<double> value_;
    TimeBatchMeans averages_;
};

struct ConvergenceRow {
    double h = 0.0;
    std::size_t n = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double oracle = 0.0;
    double abs_error = 0.0;
    /// |error| >= 3 stderr, so the row enters the slope fit.
    bool resolved = false;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;  // h descending
    double slope = 0.0;
    double slope_std_error = 0.0;
    std::size_t rows_fitted = 0;
    /// Fewer than two rows rise above the noise floor; slope is NaN.
    bool inconclusive = false;
};

/// Least-squares slope of log y against log x; needs two or more points.
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log|error| against log h over the resolved rows.
void fit_convergence(ConvergenceReport& report);

/// `make_spec(h)` builds the simulation for one jump size; `observable` must be
/// scalar. Throws std::invalid_argument for fewer than three h values.
ConvergenceReport convergence_study(const std::function<SimulationSpec(double)>& make_spec,
                                    std::vector<double> h_list, const Observable& observable,
                                    double oracle, const ReplicaOptions& options,
                                    bool path_integral = false);

struct HoldingRow {
    Variant variant = Variant::Fast;
    double h = 0.0;
    std::size_t n = 0;
    double empirical_mean = 0.0;
    double analytic_mean = 0.0;
    double std_error = 0.0;
};

/// Mean holding time at the zero state: h^2 dx / (n sigma^2) for academic,
/// h^2 / (n sigma^2) for fast.
double analytic_mean_holding(Variant variant, double h, std::size_t n, double sigma);

std::vector<HoldingRow> holding_time_study(const ModelSpec& model, Variant variant,
                                           const std::vector<double>& h_list,
                                           const std::vector<std::size_t>& n_list,
                                           std::size_t samples, std::uint64_t seed);

}  // namespace spectrwm
