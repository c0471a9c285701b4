#include "spectrwm/jump_kernel.hpp"
#include "spectrwm/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spectrwm {

Variant variant_from_name(std::string_view name) {
    if (name == "academic") return Variant::Academic;
    if (name == "fast") return Variant::Fast;
    if (name == "detailed-balance") return Variant::DetailedBalance;
    throw std::invalid_argument("unknown variant '" + std::string(name) +
                                "' (expected academic, fast, detailed-balance)");
}

std::string_view to_string(Variant variant) {
    switch (variant) {
        case Variant::Academic: return "academic";
        case Variant::Fast: return "fast";
        case Variant::DetailedBalance: return "detailed-balance";
    }
    return "unknown";
}

void RateTable::recompute_total() {
    double sum = 0.0;
    for (std::size_t i = 0; i < forward.size(); ++i) sum += forward[i] + backward[i];
    total = sum;
}

void LogDensity::increments(const SpectralBasis& basis, std::span<const double> v,
                            std::span<const double> /*vhat*/, double step,
                            std::span<double> forward, std::span<double> backward) const {
    const std::size_t n = v.size();
    const double base = (*this)(v);
    std::vector<double> moved(v.begin(), v.end());
    for (std::size_t i = 0; i < n; ++i) {
        auto e = basis.vector(i);
        for (std::size_t j = 0; j < n; ++j) moved[j] = v[j] + step * e[j];
        forward[i] = (*this)(moved) - base;
        for (std::size_t j = 0; j < n; ++j) moved[j] = v[j] - step * e[j];
        backward[i] = (*this)(moved) - base;
    }
}

namespace {

void check_state(const JumpState& state, std::size_t n) {
    if (state.v.size() != n || state.vhat.size() != n) {
        throw std::invalid_argument("jump state does not match the discretization size");
    }
}

void check_jump_size(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("jump size h must be positive and finite");
    }
}

// Fills both directions of one mode from a signed exponent.
inline void set_symmetric(RateTable& out, std::size_t i, double prefactor, double exponent,
                          double cap) {
    if (!(std::abs(exponent) <= cap)) throw StiffnessError(i, exponent, cap);
    out.forward[i] = prefactor * std::exp(exponent);
    out.backward[i] = prefactor * std::exp(-exponent);
}

void finish_total(RateTable& out) {
    out.recompute_total();
    if (!std::isfinite(out.total) || !(out.total > 0.0)) {
        std::size_t worst = 0;
        double worst_rate = -1.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double r = std::max(out.forward[i], out.backward[i]);
            if (r > worst_rate) {
                worst_rate = r;
                worst = i;
            }
        }
        throw StiffnessError(worst, std::log(worst_rate), std::log(out.total));
    }
}

void resize(RateTable& out, std::size_t n) {
    out.forward.resize(n);
    out.backward.resize(n);
}

}  // namespace

void academic_rates(const JumpState& state, const Discretization& disc, double h,
                    RateTable& out, double exponent_cap) {
    check_jump_size(h);
    const std::size_t n = disc.basis.size();
    check_state(state, n);
    resize(out, n);
    const double sigma2 = disc.model.sigma * disc.model.sigma;
    const double dx = disc.grid.dx();
    const double prefactor = sigma2 / (2.0 * h * h * dx);
    const double scale = h * dx / sigma2;
    const bool has_f = state.fhat.size() == n;
    for (std::size_t i = 0; i < n; ++i) {
        const double drift =
            disc.basis.eigenvalue(i) * state.vhat[i] + (has_f ? state.fhat[i] : 0.0);
        set_symmetric(out, i, prefactor, drift * scale, exponent_cap);
    }
    finish_total(out);
}

RateTable academic_rates(const JumpState& state, const Discretization& disc, double h,
                         double exponent_cap) {
    RateTable out;
    academic_rates(state, disc, h, out, exponent_cap);
    return out;
}

void fast_rates(const JumpState& state, const Discretization& disc, double h, RateTable& out,
                double exponent_cap) {
    check_jump_size(h);
    const std::size_t n = disc.basis.size();
    check_state(state, n);
    resize(out, n);
    const double sigma2 = disc.model.sigma * disc.model.sigma;
    // L^2 normalisation of the grid eigenvectors.
    const double l2 = std::sqrt(disc.grid.dx());
    const double prefactor = sigma2 / (2.0 * h * h);
    const double scale = h / sigma2;
    const bool has_f = state.fhat.size() == n;
    for (std::size_t i = 0; i < n; ++i) {
        const double coeff = l2 * state.vhat[i];
        const double f_coeff = has_f ? l2 * state.fhat[i] : 0.0;
        const double drift = disc.basis.eigenvalue(i) * coeff + f_coeff;
        set_symmetric(out, i, prefactor, drift * scale, exponent_cap);
    }
    finish_total(out);
}

RateTable fast_rates(const JumpState& state, const Discretization& disc, double h,
                     double exponent_cap) {
    RateTable out;
    fast_rates(state, disc, h, out, exponent_cap);
    return out;
}

void detailed_balance_rates(const JumpState& state, const LogDensity& target,
                            const Discretization& disc, double h, RateTable& out,
                            double exponent_cap) {
    check_jump_size(h);
    const std::size_t n = disc.basis.size();
    check_state(state, n);
    resize(out, n);
    const double sigma2 = disc.model.sigma * disc.model.sigma;
    const double prefactor = sigma2 / (2.0 * h * h * disc.grid.dx());
    target.increments(disc.basis, state.v, state.vhat, h, out.forward, out.backward);
    for (std::size_t i = 0; i < n; ++i) {
        const double up = 0.5 * out.forward[i];
        const double down = 0.5 * out.backward[i];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw std::domain_error("non-finite log-density increment on mode " +
                                    std::to_string(i));
        }
        if (!(std::abs(up) <= exponent_cap)) throw StiffnessError(i, up, exponent_cap);
        if (!(std::abs(down) <= exponent_cap)) throw StiffnessError(i, down, exponent_cap);
        out.forward[i] = prefactor * std::exp(up);
        out.backward[i] = prefactor * std::exp(down);
    }
    finish_total(out);
}

RateTable detailed_balance_rates(const JumpState& state, const LogDensity& target,
                                 const Discretization& disc, double h, double exponent_cap) {
    RateTable out;
    detailed_balance_rates(state, target, disc, h, out, exponent_cap);
    return out;
}

double holding_from_uniform(double total_rate, double u) {
    if (!(total_rate > 0.0) || !std::isfinite(total_rate)) {
        throw std::invalid_argument("total jump rate must be positive and finite");
    }
    return -std::log(u) / total_rate;
}

double sample_holding(double total_rate, RngStream& rng) {
    return holding_from_uniform(total_rate, rng.uniform());
}

JumpChoice select_jump(const RateTable& rates, double u) {
    const double target = u * rates.total;
    double acc = 0.0;
    const std::size_t n = rates.size();
    for (std::size_t i = 0; i < n; ++i) {
        acc += rates.forward[i];
        if (target < acc) return {i, +1};
        acc += rates.backward[i];
        if (target < acc) return {i, -1};
    }
    // Rounding left the target at the very top; take the last live outcome.
    for (std::size_t i = n; i-- > 0;) {
        if (rates.backward[i] > 0.0) return {i, -1};
        if (rates.forward[i] > 0.0) return {i, +1};
    }
    return {0, +1};
}

JumpChoice sample_jump(const RateTable& rates, RngStream& rng) {
    return select_jump(rates, rng.uniform());
}

struct JumpKernel::Workspace {
    RateTable rates;
    std::vector<double> drift;
};

JumpKernel::JumpKernel(std::shared_ptr<const Discretization> disc, KernelOptions options,
                       std::shared_ptr<const LogDensity> target)
    : disc_(std::move(disc)), options_(options), target_(std::move(target)) {
    if (!disc_) throw std::invalid_argument("JumpKernel needs a discretization");
    check_jump_size(options_.h);
    if (options_.variant == Variant::DetailedBalance && !target_) {
        throw std::invalid_argument("detailed-balance variant needs a target log-density");
    }
    if (options_.refresh_interval == 0) {
        throw std::invalid_argument("refresh interval must be positive");
    }
    jump_length_ = options_.variant == Variant::Fast ? options_.h / std::sqrt(disc_->grid.dx())
                                                     : options_.h;
    tracks_drift_ = disc_->model.has_nonlinearity() && options_.variant != Variant::DetailedBalance;
}

JumpState JumpKernel::make_state(std::span<const double> v0, double t0) const {
    const std::size_t n = disc_->basis.size();
    if (v0.size() != n) throw std::invalid_argument("initial state has the wrong length");
    JumpState state;
    state.t = t0;
    state.v.assign(v0.begin(), v0.end());
    state.vhat = disc_->basis.to_spectral(state.v);
    if (tracks_drift_) {
        Workspace work;
        update_drift_cache(state, work);
    }
    return state;
}

void JumpKernel::update_drift_cache(JumpState& state, Workspace& work) const {
    const std::size_t n = disc_->basis.size();
    work.drift.resize(n);
    state.fhat.resize(n);
    drift_nonlinear(disc_->model, disc_->grid, state.v, work.drift);
    disc_->basis.to_spectral(work.drift, state.fhat);
}

void JumpKernel::compute_rates(const JumpState& state, RateTable& out) const {
    switch (options_.variant) {
        case Variant::Academic:
            academic_rates(state, *disc_, options_.h, out, options_.exponent_cap);
            return;
        case Variant::Fast:
            fast_rates(state, *disc_, options_.h, out, options_.exponent_cap);
            return;
        case Variant::DetailedBalance:
            detailed_balance_rates(state, *target_, *disc_, options_.h, out,
                                   options_.exponent_cap);
            return;
    }
}

RateTable JumpKernel::rates(const JumpState& state) const {
    RateTable out;
    compute_rates(state, out);
    return out;
}

void JumpKernel::update_mode_rates(const JumpState& state, std::size_t mode,
                                   RateTable& rates) const {
    const double sigma2 = disc_->model.sigma * disc_->model.sigma;
    const double dx = disc_->grid.dx();
    const double h = options_.h;
    const double mu = disc_->basis.eigenvalue(mode);
    double prefactor = 0.0;
    double exponent = 0.0;
    if (options_.variant == Variant::Fast) {
        prefactor = sigma2 / (2.0 * h * h);
        exponent = mu * std::sqrt(dx) * state.vhat[mode] * h / sigma2;
    } else {
        prefactor = sigma2 / (2.0 * h * h * dx);
        exponent = mu * state.vhat[mode] * h * dx / sigma2;
    }
    set_symmetric(rates, mode, prefactor, exponent, options_.exponent_cap);
}

void JumpKernel::refresh(JumpState& state) const {
    if (options_.variant == Variant::Fast) {
        disc_->basis.from_spectral(state.vhat, state.v);
    } else {
        disc_->basis.to_spectral(state.v, state.vhat);
    }
    if (tracks_drift_) {
        Workspace work;
        update_drift_cache(state, work);
    }
}

void JumpKernel::apply_jump(JumpState& state, JumpChoice choice) const {
    const double d = static_cast<double>(choice.direction) * jump_length_;
    auto e = disc_->basis.vector(choice.mode);
    for (std::size_t j = 0; j < state.v.size(); ++j) state.v[j] += d * e[j];
    state.vhat[choice.mode] += d;
}

EventRecord JumpKernel::step(JumpState& state, RngStream& rng) const {
    Workspace work;
    check_state(state, disc_->basis.size());
    compute_rates(state, work.rates);
    const double dt = sample_holding(work.rates.total, rng);
    const JumpChoice choice = sample_jump(work.rates, rng);
    EventRecord record{state.t, dt, choice.mode, choice.direction};
    apply_jump(state, choice);
    if (tracks_drift_) update_drift_cache(state, work);
    state.t += dt;
    ++state.step_count;
    if (state.step_count % options_.refresh_interval == 0) refresh(state);
    return record;
}

JumpState JumpKernel::simulate(JumpState state, double horizon, RngStream& rng,
                               std::span<Observer* const> observers) const {
    check_state(state, disc_->basis.size());
    if (!(horizon >= state.t)) {
        throw std::invalid_argument("horizon precedes the current time");
    }
    if (horizon == state.t) {
        for (Observer* obs : observers) obs->on_finish(state);
        return state;
    }

    const bool incremental = !disc_->model.has_nonlinearity() &&
                             options_.variant != Variant::DetailedBalance;
    Workspace work;
    compute_rates(state, work.rates);

    std::uint64_t taken = 0;
    for (;;) {
        const double dt = sample_holding(work.rates.total, rng);
        if (state.t + dt >= horizon) {
            for (Observer* obs : observers) obs->on_hold(state, horizon - state.t);
            state.t = horizon;
            for (Observer* obs : observers) obs->on_finish(state);
            return state;
        }
        if (taken == options_.max_steps) throw BudgetError(taken, state.t, horizon);

        for (Observer* obs : observers) obs->on_hold(state, dt);
        const JumpChoice choice = sample_jump(work.rates, rng);
        if (!observers.empty()) {
            const EventRecord record{state.t, dt, choice.mode, choice.direction};
            for (Observer* obs : observers) obs->on_jump(state, record);
        }

        apply_jump(state, choice);
        state.t += dt;
        ++state.step_count;
        ++taken;

        if (state.step_count % options_.refresh_interval == 0) {
            refresh(state);
            compute_rates(state, work.rates);
        } else if (incremental) {
            update_mode_rates(state, choice.mode, work.rates);
            finish_total(work.rates);
        } else {
            if (tracks_drift_) update_drift_cache(state, work);
            compute_rates(state, work.rates);
        }
    }
}

}  // namespace spectrwm
