#include "spectrwm/estimators.hpp"
#include "spectrwm/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

namespace spectrwm {

Observable Observable::constant(double c) {
    return {1, [c](std::span<const double>, std::span<double> out) { out[0] = c; }};
}

Observable Observable::components(std::size_t n) {
    return {n, [](std::span<const double> v, std::span<double> out) {
                std::copy(v.begin(), v.end(), out.begin());
            }};
}

Observable Observable::squares(std::size_t n) {
    return {n, [](std::span<const double> v, std::span<double> out) {
                for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[j] * v[j];
            }};
}

Observable Observable::mean_square(std::size_t n) {
    return {1, [n](std::span<const double> v, std::span<double> out) {
                double s = 0.0;
                for (double x : v) s += x * x;
                out[0] = s / static_cast<double>(n);
            }};
}

Observable Observable::modes(std::shared_ptr<const Discretization> disc,
                             std::vector<std::size_t> mode_indices) {
    const std::size_t dim = mode_indices.size();
    return {dim, [disc = std::move(disc), idx = std::move(mode_indices)](
                     std::span<const double> v, std::span<double> out) {
                for (std::size_t k = 0; k < idx.size(); ++k) out[k] = disc->basis.project(v, idx[k]);
            }};
}

ReplicaSummary run_replicas(std::size_t dim, const ReplicaOptions& options,
                            const std::function<std::vector<double>(std::size_t, RngStream&)>& task) {
    if (options.replicas < 2) throw std::invalid_argument("need at least two replicas");
    const std::size_t total = options.replicas;
    std::vector<std::optional<std::vector<double>>> results(total);
    std::vector<std::string> errors(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= total) return;
            try {
                RngStream rng(options.seed, r);
                results[r] = task(r, rng);
            } catch (const StiffnessError& e) {
                errors[r] = e.what();
            } catch (const BudgetError& e) {
                errors[r] = e.what();
            } catch (const std::domain_error& e) {
                errors[r] = e.what();
            } catch (...) {
                std::lock_guard<std::mutex> lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next.store(total);
                return;
            }
        }
    };

    unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(total)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (fatal) std::rethrow_exception(fatal);

    ReplicaSummary summary;
    summary.moments = MomentAccumulator(dim);
    for (std::size_t r = 0; r < total; ++r) {
        if (results[r]) {
            summary.moments.add(*results[r]);
        } else {
            if (summary.failures == 0) summary.first_failure = errors[r];
            ++summary.failures;
        }
    }
    const double fraction = static_cast<double>(summary.failures) / static_cast<double>(total);
    if (fraction > options.max_failure_fraction) {
        throw ExperimentError(std::to_string(summary.failures) + " of " + std::to_string(total) +
                              " replicas failed; first: " + summary.first_failure);
    }
    return summary;
}

PathIntegralObserver::PathIntegralObserver(const Observable& observable)
    : observable_(observable),
      current_(observable.dim),
      previous_(observable.dim),
      first_(observable.dim),
      correction_(observable.dim, 0.0),
      integral_(observable.dim, 0.0) {}

void PathIntegralObserver::on_hold(const JumpState& state, double /*dwell*/) {
    observable_.eval(state.v, current_);
    if (!started_) {
        started_ = true;
        t0_ = state.t;
        first_ = current_;
    } else {
        for (std::size_t k = 0; k < current_.size(); ++k) {
            correction_[k] += state.t * (current_[k] - previous_[k]);
        }
    }
    std::swap(previous_, current_);
}

void PathIntegralObserver::on_finish(const JumpState& final_state) {
    if (!started_) {
        std::fill(integral_.begin(), integral_.end(), 0.0);
        return;
    }
    for (std::size_t k = 0; k < integral_.size(); ++k) {
        integral_[k] = previous_[k] * final_state.t - first_[k] * t0_ - correction_[k];
    }
}

TimeAverageObserver::TimeAverageObserver(const Observable& observable, double batch_length)
    : observable_(observable), value_(observable.dim), averages_(observable.dim, batch_length) {}

void TimeAverageObserver::on_hold(const JumpState& state, double dwell) {
    observable_.eval(state.v, value_);
    averages_.add(value_, dwell);
}

ReplicaEstimates estimate_replicas(const SimulationSpec& spec, const Observable& observable,
                                   const ReplicaOptions& options) {
    if (!spec.disc) throw std::invalid_argument("simulation spec has no discretization");
    const JumpKernel kernel(spec.disc, spec.kernel, spec.target);
    const std::size_t dim = observable.dim;
    const auto start = kernel.make_state(spec.initial);

    auto task = [&](std::size_t, RngStream& rng) {
        PathIntegralObserver path(observable);
        Observer* observers[] = {&path};
        const JumpState end = kernel.simulate(start, spec.horizon, rng, observers);
        std::vector<double> out(2 * dim);
        observable.eval(end.v, std::span<double>(out.data(), dim));
        std::copy(path.integral().begin(), path.integral().end(), out.begin() + dim);
        return out;
    };
    const ReplicaSummary summary = run_replicas(2 * dim, options, task);

    ReplicaEstimates out;
    out.failures = summary.failures;
    out.fixed_time.resize(dim);
    out.path_integral.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        out.fixed_time[k] = summary.moments.estimate(k);
        out.path_integral[k] = summary.moments.estimate(dim + k);
    }
    return out;
}

std::vector<Estimate> estimate_fixed_time(const SimulationSpec& spec,
                                          const Observable& observable,
                                          const ReplicaOptions& options) {
    return estimate_replicas(spec, observable, options).fixed_time;
}

std::vector<Estimate> estimate_path_integral(const SimulationSpec& spec,
                                             const Observable& observable,
                                             const ReplicaOptions& options) {
    return estimate_replicas(spec, observable, options).path_integral;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("log-log slope needs two or more paired points");
    }
    const double m = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += std::log(x[k]);
        my += std::log(y[k]);
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = std::log(x[k]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[k]) - my);
    }
    return sxy / sxx;
}

void fit_convergence(ConvergenceReport& report) {
    std::sort(report.rows.begin(), report.rows.end(),
              [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.h > b.h; });
    std::vector<double> xs;
    std::vector<double> ys;
    for (auto& row : report.rows) {
        row.abs_error = std::abs(row.estimate - row.oracle);
        row.resolved = row.abs_error > 0.0 && row.abs_error >= 3.0 * row.std_error;
        if (row.resolved) {
            xs.push_back(std::log(row.h));
            ys.push_back(std::log(row.abs_error));
        }
    }
    report.rows_fitted = xs.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (xs.size() < 2) {
        report.inconclusive = true;
        report.slope = nan;
        report.slope_std_error = nan;
        return;
    }
    report.inconclusive = false;
    const double m = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    report.slope = sxy / sxx;
    if (xs.size() > 2) {
        const double intercept = my - report.slope * mx;
        double rss = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const double r = ys[k] - intercept - report.slope * xs[k];
            rss += r * r;
        }
        report.slope_std_error = std::sqrt(rss / (m - 2.0) / sxx);
    } else {
        report.slope_std_error = nan;
    }
}

ConvergenceReport convergence_study(const std::function<SimulationSpec(double)>& make_spec,
                                    std::vector<double> h_list, const Observable& observable,
                                    double oracle, const ReplicaOptions& options,
                                    bool path_integral) {
    if (h_list.size() < 3) throw std::invalid_argument("convergence study needs >= 3 h values");
    if (observable.dim != 1) throw std::invalid_argument("convergence study needs a scalar observable");
    ConvergenceReport report;
    for (double h : h_list) {
        const SimulationSpec spec = make_spec(h);
        const ReplicaEstimates est = estimate_replicas(spec, observable, options);
        const Estimate e = path_integral ? est.path_integral[0] : est.fixed_time[0];
        ConvergenceRow row;
        row.h = h;
        row.n = spec.disc->grid.size();
        row.estimate = e.value;
        row.std_error = e.std_error;
        row.oracle = oracle;
        report.rows.push_back(row);
    }
    fit_convergence(report);
    return report;
}

double analytic_mean_holding(Variant variant, double h, std::size_t n, double sigma) {
    const double nd = static_cast<double>(n);
    const double base = h * h / (nd * sigma * sigma);
    if (variant == Variant::Fast) return base;
    return base * Grid::kLength / nd;
}

std::vector<HoldingRow> holding_time_study(const ModelSpec& model, Variant variant,
                                           const std::vector<double>& h_list,
                                           const std::vector<std::size_t>& n_list,
                                           std::size_t samples, std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("need at least two holding-time samples");
    if (variant == Variant::DetailedBalance) {
        throw std::invalid_argument("holding-time study covers the academic and fast variants");
    }
    std::vector<HoldingRow> rows;
    std::uint64_t stream = 0;
    for (std::size_t n : n_list) {
        const auto disc = discretize(model, n);
        for (double h : h_list) {
            KernelOptions opts;
            opts.variant = variant;
            opts.h = h;
            const JumpKernel kernel(disc, opts);
            const std::vector<double> zero(n, 0.0);
            const JumpState state = kernel.make_state(zero);
            const RateTable rates = kernel.rates(state);
            RngStream rng(seed, stream++);
            MomentAccumulator acc(1);
            for (std::size_t s = 0; s < samples; ++s) acc.add(sample_holding(rates.total, rng));
            HoldingRow row;
            row.variant = variant;
            row.h = h;
            row.n = n;
            row.empirical_mean = acc.mean();
            row.std_error = acc.std_error();
            row.analytic_mean = analytic_mean_holding(variant, h, n, model.sigma);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace spectrwm
