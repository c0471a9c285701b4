#include "spectrwm/experiments.hpp"

#include "spectrwm/baselines.hpp"
#include "spectrwm/csv.hpp"
#include "spectrwm/errors.hpp"
#include "spectrwm/estimators.hpp"
#include "spectrwm/jump_kernel.hpp"
#include "spectrwm/oracles.hpp"
#include "spectrwm/semidiscretization.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#ifndef SPECTRWM_VERSION
#define SPECTRWM_VERSION "unknown"
#endif

namespace spectrwm {

std::string library_version() { return SPECTRWM_VERSION; }

namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool within(double estimate, double reference, double tolerance) {
    return std::abs(estimate - reference) <= tolerance;
}

void prepare_output(const ExperimentConfig& c) {
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec || !fs::is_directory(c.out)) {
        throw std::runtime_error("cannot create output directory '" + c.out.string() + "'");
    }
    std::ofstream meta(c.out / "meta.txt");
    if (!meta) throw std::runtime_error("cannot write '" + (c.out / "meta.txt").string() + "'");
    meta << "# spectrwm " << library_version() << '\n';
    meta << "# compiler " << __VERSION__ << ", C++ " << __cplusplus << '\n';
    meta << "# rerun with: spectrwm --config meta.txt\n";
    meta << to_config_text(c);
}

void write_summary(const ExperimentConfig& c, const std::string& text) {
    std::ofstream out(c.out / "summary.txt");
    if (!out) throw std::runtime_error("cannot write '" + (c.out / "summary.txt").string() + "'");
    out << text;
}

ModelSpec heat_model(const ExperimentConfig& c) {
    ModelSpec m;
    m.kind = ModelKind::Heat;
    m.sigma = *c.sigma;
    m.lambda = c.lambda.value_or(0.0);
    if (c.initial) m.initial = initial_condition_from_name(*c.initial);
    return m;
}

KernelOptions kernel_options(const ExperimentConfig& c, double h) {
    KernelOptions k;
    k.variant = variant_from_name(*c.variant);
    k.h = h;
    if (c.max_steps) k.max_steps = static_cast<std::uint64_t>(*c.max_steps);
    return k;
}

ReplicaOptions replica_options(const ExperimentConfig& c) {
    ReplicaOptions r;
    r.replicas = *c.replicas;
    r.seed = *c.seed;
    r.threads = *c.threads;
    return r;
}

// ---------------------------------------------------------------- heat-accuracy

int run_heat_accuracy(const ExperimentConfig& c, std::ostream& log) {
    const ModelSpec model = heat_model(c);
    const auto disc = discretize(model, *c.n);
    const std::size_t n = *c.n;
    const auto v0 = initial_condition(model, disc->grid);
    const double T = *c.T;

    const auto fixed_oracle = semidiscrete_ou_moments(T, *disc, v0).second_moment();
    const auto path_oracle = semidiscrete_ou_integrated_second_moment(T, *disc, v0);
    auto spatial_mean = [n](const std::vector<double>& xs) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s / static_cast<double>(n);
    };
    const double fixed_scalar = spatial_mean(fixed_oracle);
    const double path_scalar = spatial_mean(path_oracle);

    // u_j^2 for every j, then their spatial mean.
    const Observable observable{n + 1, [n](std::span<const double> v, std::span<double> out) {
                                    double s = 0.0;
                                    for (std::size_t j = 0; j < n; ++j) {
                                        out[j] = v[j] * v[j];
                                        s += out[j];
                                    }
                                    out[n] = s / static_cast<double>(n);
                                }};

    ConvergenceReport fixed_report;
    ConvergenceReport path_report;
    ReplicaEstimates finest;
    double finest_h = std::numeric_limits<double>::infinity();
    for (double h : *c.h_list) {
        SimulationSpec spec{disc, kernel_options(c, h), nullptr, v0, T};
        log << "  h = " << h << " ..." << std::flush;
        const ReplicaEstimates est = estimate_replicas(spec, observable, replica_options(c));
        log << " done (" << est.failures << " failed replicas)\n";
        fixed_report.rows.push_back({h, n, est.fixed_time[n].value, est.fixed_time[n].std_error,
                                     fixed_scalar, 0.0, false});
        path_report.rows.push_back({h, n, est.path_integral[n].value,
                                    est.path_integral[n].std_error, path_scalar, 0.0, false});
        if (h < finest_h) {
            finest_h = h;
            finest = est;
        }
    }
    fit_convergence(fixed_report);
    fit_convergence(path_report);

    auto report_table = [](const ConvergenceReport& r) {
        CsvTable t;
        t.header = {"h", "n", "estimate", "stderr", "oracle", "abs_error"};
        for (const auto& row : r.rows) {
            t.add_row({row.h, static_cast<std::int64_t>(row.n), row.estimate, row.std_error,
                       row.oracle, row.abs_error});
        }
        return t;
    };
    emit_csv(report_table(fixed_report), c.out / "results.csv");
    emit_csv(report_table(path_report), c.out / "convergence_path.csv");

    CsvTable pointwise;
    pointwise.header = {"j",          "x",           "fixed_estimate", "fixed_stderr",
                        "fixed_oracle", "path_estimate", "path_stderr",    "path_oracle"};
    bool fixed_ok = true;
    bool path_ok = true;
    for (std::size_t j = 0; j < n; ++j) {
        const Estimate f = finest.fixed_time[j];
        const Estimate p = finest.path_integral[j];
        fixed_ok = fixed_ok && within(f.value, fixed_oracle[j], 3.0 * f.std_error);
        path_ok = path_ok && within(p.value, path_oracle[j], 3.0 * p.std_error);
        pointwise.add_row({static_cast<std::int64_t>(j), disc->grid.x(j), f.value, f.std_error,
                           fixed_oracle[j], p.value, p.std_error, path_oracle[j]});
    }
    emit_csv(pointwise, c.out / "pointwise.csv");

    const bool slope_ok =
        !fixed_report.inconclusive && fixed_report.slope >= 1.6 && fixed_report.slope <= 2.4;
    std::ostringstream s;
    s << "pointwise fixed-time at h=" << finest_h << ": " << (fixed_ok ? "PASS" : "FAIL") << '\n';
    s << "pointwise path-integral at h=" << finest_h << ": " << (path_ok ? "PASS" : "FAIL") << '\n';
    s << "fixed-time slope: ";
    if (fixed_report.inconclusive) {
        s << "inconclusive (" << fixed_report.rows_fitted << " rows above the noise floor)";
    } else {
        s << fixed_report.slope << " +- " << fixed_report.slope_std_error;
    }
    s << (slope_ok ? " PASS" : " FAIL") << '\n';
    s << "path-integral slope: ";
    if (path_report.inconclusive) {
        s << "inconclusive (" << path_report.rows_fitted << " rows above the noise floor)\n";
    } else {
        s << path_report.slope << " +- " << path_report.slope_std_error << '\n';
    }
    log << s.str();
    write_summary(c, s.str());
    return fixed_ok && path_ok && slope_ok ? kExitSuccess : kExitThreshold;
}

// -------------------------------------------------------------- heat-cn-compare

int run_heat_cn_compare(const ExperimentConfig& c, std::ostream& log) {
    const ModelSpec model = heat_model(c);
    const double T = *c.T;

    const auto cn_disc = discretize(model, *c.cn_n);
    const CrankNicolson cn(cn_disc, *c.dt);
    const auto cn_v0 = initial_condition(model, cn_disc->grid);
    const auto cn_end = cn.evolve(cn_v0, T, nullptr);

    const auto jump_disc = discretize(model, *c.n);
    const auto jump_v0 = initial_condition(model, jump_disc->grid);
    const std::size_t m = jump_disc->basis.size();
    std::vector<std::size_t> all_modes(m);
    for (std::size_t i = 0; i < m; ++i) all_modes[i] = i;
    const SimulationSpec spec{jump_disc, kernel_options(c, *c.h), nullptr, jump_v0, T};
    const auto jump_est =
        estimate_fixed_time(spec, Observable::modes(jump_disc, all_modes), replica_options(c));
    const auto ou = semidiscrete_ou_moments(T, *jump_disc, jump_v0);

    bool jump_ok = true;
    for (std::size_t i = 0; i < m; ++i) {
        jump_ok = jump_ok && within(jump_est[i].value, ou.mode_mean[i], 3.0 * jump_est[i].std_error);
    }

    CsvTable table;
    table.header = {"wavenumber",       "mu",           "exact_factor",    "cn_factor",
                    "cn_over_exact",    "cn_amplitude", "spectrwm_amplitude", "spectrwm_stderr",
                    "spectrwm_oracle"};
    const auto& cb = cn_disc->basis;
    const auto cn_coeff = cb.to_spectral(cn_end);
    const std::size_t max_k = (*c.cn_n - 1) / 2;
    for (std::size_t k = 1; k <= max_k; ++k) {
        const std::size_t i = 2 * k - 1;  // cosine mode of wavenumber k
        const double mu = cb.eigenvalue(i);
        const double exact = std::exp(mu * T);
        const double factor = cn.mode_factor(i, T);
        double amp = kNaN;
        double amp_err = kNaN;
        double amp_oracle = kNaN;
        if (2 * k < m) {
            const std::size_t jm = 2 * k - 1;
            amp = jump_est[jm].value;
            amp_err = jump_est[jm].std_error;
            amp_oracle = ou.mode_mean[jm];
        }
        table.add_row({static_cast<std::int64_t>(k), mu, exact, factor, std::abs(factor) / exact,
                       cn_coeff[i], amp, amp_err, amp_oracle});
    }
    emit_csv(table, c.out / "results.csv");

    CsvTable modes;
    modes.header = {"mode", "kind", "wavenumber", "estimate", "stderr", "oracle"};
    for (std::size_t i = 0; i < m; ++i) {
        const auto shape = jump_disc->basis.shape(i);
        const char* kind = shape.kind == ModeShape::Kind::Constant ? "constant"
                           : shape.kind == ModeShape::Kind::Cosine ? "cosine"
                           : shape.kind == ModeShape::Kind::Sine   ? "sine"
                                                                   : "nyquist";
        modes.add_row({static_cast<std::int64_t>(i), std::string(kind),
                       static_cast<std::int64_t>(shape.wavenumber), jump_est[i].value,
                       jump_est[i].std_error, ou.mode_mean[i]});
    }
    emit_csv(modes, c.out / "spectrwm_modes.csv");

    // The stiffest wavenumber present in the initial condition.
    std::size_t k_star = max_k;
    if (model.initial.kind == InitialConditionKind::HighFrequency &&
        !model.initial.wavenumbers.empty()) {
        k_star = static_cast<std::size_t>(
            *std::max_element(model.initial.wavenumbers.begin(), model.initial.wavenumbers.end()));
    }
    k_star = std::min(k_star, max_k);
    const std::size_t i_star = 2 * k_star - 1;
    const double ratio = std::abs(cn.mode_factor(i_star, T)) / std::exp(cb.eigenvalue(i_star) * T);
    const bool cn_ok = ratio > 10.0;

    std::ostringstream s;
    s << "CN/exact decay at wavenumber " << k_star << ": " << ratio << (cn_ok ? " PASS" : " FAIL")
      << '\n';
    s << "SPECTRWM mode means within 3 stderr of the OU mean (n=" << *c.n
      << "): " << (jump_ok ? "PASS" : "FAIL") << '\n';
    log << s.str();
    write_summary(c, s.str());
    return cn_ok && jump_ok ? kExitSuccess : kExitThreshold;
}

// ------------------------------------------------------------- langevin-ergodic

struct TrajectoryAverages {
    std::vector<Estimate> values;
    double horizon = 0.0;
    std::uint64_t events = 0;
};

// Time averages of `observable` over a long run of about `events` jumps; the
// first `burn_in` fraction of the time is discarded.
TrajectoryAverages long_run(const JumpKernel& kernel, std::span<const double> v0,
                            const Observable& observable, double events, double burn_in,
                            RngStream& rng) {
    JumpState state = kernel.make_state(v0);
    constexpr std::uint64_t kPilot = 10'000;
    for (std::uint64_t k = 0; k < kPilot; ++k) kernel.step(state, rng);
    const double mean_dt = state.t / static_cast<double>(kPilot);
    const double total = events * mean_dt;
    const double burn = burn_in * total;

    state.t = 0.0;
    state.step_count = 0;
    state = kernel.simulate(std::move(state), burn, rng);
    const double measured = total - burn;
    TimeAverageObserver averages(observable, measured / 50.0);
    Observer* observers[] = {&averages};
    const std::uint64_t before = state.step_count;
    state = kernel.simulate(std::move(state), total, rng, observers);

    TrajectoryAverages out;
    out.horizon = total;
    out.events = state.step_count - before + kPilot;
    for (std::size_t k = 0; k < observable.dim; ++k) out.values.push_back(averages.averages().estimate(k));
    return out;
}

Observable moments_observable(std::size_t n) {
    return {2 * n, [n](std::span<const double> v, std::span<double> out) {
                for (std::size_t j = 0; j < n; ++j) {
                    out[j] = v[j];
                    out[n + j] = v[j] * v[j];
                }
            }};
}

int run_langevin_ergodic(const ExperimentConfig& c, std::ostream& log) {
    ModelSpec model;
    model.kind = ModelKind::Langevin;
    model.sigma = *c.sigma;
    if (c.initial) model.initial = initial_condition_from_name(*c.initial);
    const std::size_t n = *c.n;
    const auto disc = discretize(model, n);
    const auto target = std::make_shared<const LangevinTarget>(disc->grid, model.sigma);
    const JumpKernel kernel(disc, kernel_options(c, *c.h), target);
    const auto v0 = initial_condition(model, disc->grid);

    RngStream jump_rng(*c.seed, 0);
    log << "  jump process, about " << *c.events << " events ..." << std::flush;
    const auto jump = long_run(kernel, v0, moments_observable(n), *c.events, *c.burn_in, jump_rng);
    log << " T = " << jump.horizon << '\n';

    const PcnSampler pcn(target, {*c.rho, *c.mass});
    RngStream pcn_rng(*c.seed, 1);
    const auto burn_steps = static_cast<std::size_t>(*c.burn_in * static_cast<double>(*c.chain_steps));
    log << "  pCN chain, " << *c.chain_steps << " steps ..." << std::flush;
    const ChainResult chain = run_chain(pcn, v0, *c.chain_steps, burn_steps, pcn_rng);
    log << " acceptance " << chain.acceptance_rate << '\n';

    CsvTable moments;
    moments.header = {"component",     "mean",          "stderr",           "second_moment",
                      "stderr2",       "benchmark_mean", "benchmark_second"};
    CsvTable bench;
    bench.header = {"component", "benchmark_mean_stderr", "benchmark_second_stderr"};
    bool mean_ok = true;
    bool second_ok = true;
    for (std::size_t j = 0; j < n; ++j) {
        const Estimate m1 = jump.values[j];
        const Estimate m2 = jump.values[n + j];
        mean_ok = mean_ok && within(m1.value, 0.0, 3.0 * m1.std_error);
        const double combined = std::hypot(m2.std_error, chain.second[j].std_error);
        second_ok = second_ok && within(m2.value, chain.second[j].value, 3.0 * combined);
        moments.add_row({static_cast<std::int64_t>(j), m1.value, m1.std_error, m2.value,
                         m2.std_error, chain.first[j].value, chain.second[j].value});
        bench.add_row({static_cast<std::int64_t>(j), chain.first[j].std_error,
                       chain.second[j].std_error});
    }
    emit_csv(moments, c.out / "results.csv");
    emit_csv(bench, c.out / "benchmark_errors.csv");

    // One-cell surrogate against the closed-form second moment.
    const Grid cell = Grid::single_cell();
    const auto cell_disc = discretize(model, cell);
    const auto cell_target = std::make_shared<const LangevinTarget>(cell, model.sigma);
    const double oracle = langevin_single_cell_second_moment(model.sigma);
    KernelOptions cell_opts = kernel_options(c, *c.surrogate_h);
    const JumpKernel cell_kernel(cell_disc, cell_opts, cell_target);
    RngStream cell_rng(*c.seed, 2);
    const std::vector<double> zero{0.0};
    const auto cell_jump =
        long_run(cell_kernel, zero, moments_observable(1), *c.events, *c.burn_in, cell_rng);
    const PcnSampler cell_pcn(cell_target, {*c.rho, *c.mass});
    RngStream cell_pcn_rng(*c.seed, 3);
    const ChainResult cell_chain = run_chain(cell_pcn, zero, *c.chain_steps, burn_steps, cell_pcn_rng);

    CsvTable surrogate;
    surrogate.header = {"method", "second_moment", "stderr", "oracle"};
    surrogate.add_row({std::string("jump"), cell_jump.values[1].value, cell_jump.values[1].std_error,
                       oracle});
    surrogate.add_row({std::string("pcn"), cell_chain.second[0].value,
                       cell_chain.second[0].std_error, oracle});
    emit_csv(surrogate, c.out / "surrogate.csv");
    const bool cell_ok =
        within(cell_jump.values[1].value, oracle, 3.0 * cell_jump.values[1].std_error) &&
        within(cell_chain.second[0].value, oracle, 3.0 * cell_chain.second[0].std_error);

    std::ostringstream s;
    s << "first moments within 3 stderr of 0: " << (mean_ok ? "PASS" : "FAIL") << '\n';
    s << "second moments within 3 combined stderr of pCN: " << (second_ok ? "PASS" : "FAIL")
      << '\n';
    s << "one-cell second moment (jump " << cell_jump.values[1].value << ", pCN "
      << cell_chain.second[0].value << ", oracle " << oracle << "): " << (cell_ok ? "PASS" : "FAIL")
      << '\n';
    s << "events " << jump.events << ", horizon " << jump.horizon << ", pCN acceptance "
      << chain.acceptance_rate << '\n';
    log << s.str();
    write_summary(c, s.str());
    return mean_ok && second_ok && cell_ok ? kExitSuccess : kExitThreshold;
}

// ------------------------------------------------------------------- burgers/kpz

struct DivergenceSignal {
    double t;
};

class DivergenceMonitor final : public Observer {
public:
    explicit DivergenceMonitor(double threshold) : threshold_(threshold) {}

    void on_hold(const JumpState& state, double /*dwell*/) override {
        double mx = 0.0;
        double mean = 0.0;
        for (double x : state.v) {
            mx = std::max(mx, std::abs(x));
            mean += x;
        }
        mean /= static_cast<double>(state.v.size());
        max_abs = std::max(max_abs, mx);
        abs_mean = std::max(abs_mean, std::abs(mean));
        if (!(mx < threshold_) || !(std::abs(mean) < threshold_)) throw DivergenceSignal{state.t};
    }

    double max_abs = 0.0;
    double abs_mean = 0.0;

private:
    double threshold_;
};

class SnapshotObserver final : public Observer {
public:
    explicit SnapshotObserver(std::vector<double> times) : times_(std::move(times)) {}

    void on_hold(const JumpState& state, double dwell) override {
        while (next_ < times_.size() && times_[next_] < state.t + dwell) record(state);
    }
    void on_finish(const JumpState& state) override {
        while (next_ < times_.size()) record(state);
    }

    CsvTable table(std::size_t n) const {
        CsvTable t;
        t.header.push_back("t");
        for (std::size_t j = 0; j < n; ++j) t.header.push_back("x_" + std::to_string(j));
        for (const auto& row : rows_) t.add_row(row);
        return t;
    }

private:
    void record(const JumpState& state) {
        std::vector<CsvCell> row{times_[next_]};
        for (double x : state.v) row.emplace_back(x);
        rows_.push_back(std::move(row));
        ++next_;
    }

    std::vector<double> times_;
    std::size_t next_ = 0;
    std::vector<std::vector<CsvCell>> rows_;
};

int run_boundedness(const ExperimentConfig& c, std::ostream& log, ModelKind kind) {
    ModelSpec model;
    model.kind = kind;
    model.sigma = *c.sigma;
    if (kind == ModelKind::Burgers) model.nu = *c.nu;
    if (kind == ModelKind::Kpz) model.lambda = *c.lambda;
    model.scheme = scheme_from_name(*c.scheme);
    if (c.initial) model.initial = initial_condition_from_name(*c.initial);
    const std::size_t n = *c.n;
    const auto disc = discretize(model, n);
    const JumpKernel kernel(disc, kernel_options(c, *c.h));
    const auto v0 = initial_condition(model, disc->grid);
    const double T = *c.T;

    std::vector<double> times(64);
    for (std::size_t s = 0; s < times.size(); ++s) {
        times[s] = T * static_cast<double>(s) / static_cast<double>(times.size() - 1);
    }

    CsvTable results;
    results.header = {"run", "verdict", "t_end", "max_abs", "max_abs_mean", "events", "cause"};
    std::size_t diverged = 0;
    std::size_t bounded = 0;
    for (std::size_t r = 0; r < *c.runs; ++r) {
        RngStream rng(*c.seed, r);
        DivergenceMonitor monitor(*c.threshold);
        SnapshotObserver snapshots(times);
        std::vector<Observer*> observers{&monitor};
        if (r == 0) observers.push_back(&snapshots);
        JumpState state = kernel.make_state(v0);
        std::string verdict = "BOUNDED";
        std::string cause = "none";
        double t_end = T;
        std::uint64_t events = 0;
        try {
            state = kernel.simulate(state, T, rng, observers);
            events = state.step_count;
        } catch (const DivergenceSignal& d) {
            verdict = "DIVERGED";
            cause = "threshold";
            t_end = d.t;
        } catch (const StiffnessError& e) {
            verdict = "DIVERGED";
            cause = "stiffness";
            t_end = kNaN;
        } catch (const BudgetError& e) {
            verdict = "INCONCLUSIVE";
            cause = "budget";
            t_end = e.time_reached();
            events = e.steps();
        }
        if (verdict == "DIVERGED") ++diverged;
        if (verdict == "BOUNDED") ++bounded;
        results.add_row({static_cast<std::int64_t>(r), verdict, t_end, monitor.max_abs,
                         monitor.abs_mean, static_cast<std::int64_t>(events), cause});
        if (r == 0) emit_csv(snapshots.table(n), c.out / "trajectory.csv");
        log << "  run " << r << ": " << verdict << " (" << cause << ")\n";
    }
    emit_csv(results, c.out / "results.csv");

    const std::size_t runs = *c.runs;
    const std::string overall = diverged == runs ? "DIVERGED" : bounded == runs ? "BOUNDED" : "MIXED";
    const bool expect_diverge = model.scheme == NonlinearityScheme::OneSided;
    const bool ok = expect_diverge ? diverged == runs : bounded == runs;
    std::ostringstream s;
    s << "verdict: " << overall << " (" << diverged << "/" << runs << " diverged, expected "
      << (expect_diverge ? "DIVERGED" : "BOUNDED") << ")\n";
    log << s.str();
    write_summary(c, s.str());
    return ok ? kExitSuccess : kExitThreshold;
}

// -------------------------------------------------------------- holding-scaling

int run_holding_scaling(const ExperimentConfig& c, std::ostream& log) {
    const ModelSpec model = heat_model(c);
    std::vector<Variant> variants;
    std::istringstream list(*c.variant);
    for (std::string item; std::getline(list, item, ',');) {
        variants.push_back(variant_from_name(item));
    }

    CsvTable table;
    table.header = {"variant", "h", "n", "empirical_mean_dt", "analytic_mean_dt", "stderr"};
    bool ok = true;
    std::vector<std::vector<HoldingRow>> per_variant;
    for (std::size_t k = 0; k < variants.size(); ++k) {
        auto rows = holding_time_study(model, variants[k], *c.h_list, *c.n_list, *c.samples,
                                       *c.seed + k);
        for (const auto& row : rows) {
            ok = ok && within(row.empirical_mean, row.analytic_mean, 3.0 * row.std_error);
            table.add_row({std::string(to_string(row.variant)), row.h,
                           static_cast<std::int64_t>(row.n), row.empirical_mean,
                           row.analytic_mean, row.std_error});
        }
        per_variant.push_back(std::move(rows));
    }
    emit_csv(table, c.out / "results.csv");

    // Academic over fast at equal (h, n) should be dx.
    const auto find = [&](Variant v) -> const std::vector<HoldingRow>* {
        for (std::size_t k = 0; k < variants.size(); ++k) {
            if (variants[k] == v) return &per_variant[k];
        }
        return nullptr;
    };
    const auto* academic = find(Variant::Academic);
    const auto* fast = find(Variant::Fast);
    bool ratio_ok = true;
    if (academic && fast) {
        CsvTable ratios;
        ratios.header = {"h", "n", "ratio", "ratio_stderr", "dx"};
        for (std::size_t r = 0; r < academic->size(); ++r) {
            const auto& a = (*academic)[r];
            const auto& f = (*fast)[r];
            const double ratio = a.empirical_mean / f.empirical_mean;
            const double err = ratio * std::hypot(a.std_error / a.empirical_mean,
                                                  f.std_error / f.empirical_mean);
            const double dx = Grid::kLength / static_cast<double>(a.n);
            ratio_ok = ratio_ok && within(ratio, dx, 3.0 * err);
            ratios.add_row({a.h, static_cast<std::int64_t>(a.n), ratio, err, dx});
        }
        emit_csv(ratios, c.out / "ratios.csv");
    }

    std::ostringstream s;
    s << "mean holding times within 3 stderr: " << (ok ? "PASS" : "FAIL") << '\n';
    if (academic && fast) {
        s << "academic/fast ratio equals dx within 3 stderr: " << (ratio_ok ? "PASS" : "FAIL")
          << '\n';
    }
    log << s.str();
    write_summary(c, s.str());
    return ok && ratio_ok ? kExitSuccess : kExitThreshold;
}

// ------------------------------------------------------------------ consistency

int run_consistency(const ExperimentConfig& c, std::ostream& log) {
    const ModelSpec model = heat_model(c);
    const auto disc = discretize(model, *c.n);
    const std::size_t n = *c.n;
    const auto& hs = *c.h_list;
    RngStream rng(*c.seed, 0);

    std::vector<double> total(hs.size(), 0.0);
    std::vector<double> lo(hs.size(), std::numeric_limits<double>::infinity());
    std::vector<double> hi(hs.size(), 0.0);
    CsvTable pairs;
    pairs.header = {"function", "state", "slope"};
    double slope_min = std::numeric_limits<double>::infinity();
    double slope_max = -std::numeric_limits<double>::infinity();
    for (std::size_t fi = 0; fi < *c.functions; ++fi) {
        QuadraticTestFunction f;
        f.a.assign(n * n, 0.0);
        f.b.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const double x = rng.normal();
                f.a[i * n + j] = x;
                f.a[j * n + i] = x;
            }
            f.b[i] = rng.normal();
        }
        for (std::size_t si = 0; si < *c.states; ++si) {
            std::vector<double> v(n);
            for (double& x : v) x = *c.state_scale * rng.normal();
            std::vector<double> res(hs.size());
            for (std::size_t k = 0; k < hs.size(); ++k) {
                res[k] = generator_residual(f, v, *disc, hs[k]);
                total[k] += res[k];
                lo[k] = std::min(lo[k], res[k]);
                hi[k] = std::max(hi[k], res[k]);
            }
            const double slope = loglog_slope(hs, res);
            slope_min = std::min(slope_min, slope);
            slope_max = std::max(slope_max, slope);
            pairs.add_row({static_cast<std::int64_t>(fi), static_cast<std::int64_t>(si), slope});
        }
    }
    const double count = static_cast<double>(*c.functions * *c.states);
    CsvTable table;
    table.header = {"h", "mean_residual", "min_residual", "max_residual"};
    std::vector<double> mean(hs.size());
    for (std::size_t k = 0; k < hs.size(); ++k) {
        mean[k] = total[k] / count;
        table.add_row({hs[k], mean[k], lo[k], hi[k]});
    }
    emit_csv(table, c.out / "results.csv");
    emit_csv(pairs, c.out / "pairs.csv");

    const double slope = loglog_slope(hs, mean);
    const bool ok = slope >= 1.6 && slope <= 2.4;
    std::ostringstream s;
    s << "residual slope " << slope << " (per pair " << slope_min << " .. " << slope_max
      << "): " << (ok ? "PASS" : "FAIL") << '\n';
    log << s.str();
    write_summary(c, s.str());
    return ok ? kExitSuccess : kExitThreshold;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
    const ExperimentConfig c = resolve_defaults(config);
    prepare_output(c);
    log << "spectrwm " << to_string(c.experiment) << " -> " << c.out.string() << '\n';
    switch (c.experiment) {
        case ExperimentKind::HeatAccuracy: return run_heat_accuracy(c, log);
        case ExperimentKind::HeatCnCompare: return run_heat_cn_compare(c, log);
        case ExperimentKind::LangevinErgodic: return run_langevin_ergodic(c, log);
        case ExperimentKind::Burgers: return run_boundedness(c, log, ModelKind::Burgers);
        case ExperimentKind::Kpz: return run_boundedness(c, log, ModelKind::Kpz);
        case ExperimentKind::HoldingScaling: return run_holding_scaling(c, log);
        case ExperimentKind::Consistency: return run_consistency(c, log);
    }
    return kExitError;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    try {
        const ParseResult parsed = parse_config(argc, argv);
        if (parsed.help) {
            out << parsed.help_text;
            return kExitSuccess;
        }
        return run_experiment(parsed.config, out);
    } catch (const std::exception& e) {
        err << "spectrwm: error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace spectrwm
