#include "spectrwm/baselines.hpp"
#include "spectrwm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spectrwm {

CrankNicolson::CrankNicolson(std::shared_ptr<const Discretization> disc, double dt)
    : disc_(std::move(disc)), dt_(dt) {
    if (!disc_) throw std::invalid_argument("CrankNicolson needs a discretization");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (disc_->model.has_nonlinearity()) {
        throw UnsupportedModelError("Crank-Nicolson baseline handles the linear heat model only");
    }
}

double CrankNicolson::amplification_factor(double mu, double dt) {
    const double half = 0.5 * dt * mu;
    return (1.0 + half) / (1.0 - half);
}

double CrankNicolson::amplification(std::size_t mode) const {
    return amplification_factor(disc_->basis.eigenvalue(mode), dt_);
}

double CrankNicolson::noise_variance(std::size_t mode) const {
    const double denom = 1.0 - 0.5 * dt_ * disc_->basis.eigenvalue(mode);
    const double s2 = disc_->model.sigma * disc_->model.sigma;
    return s2 / disc_->grid.dx() * dt_ / (denom * denom);
}

void CrankNicolson::step_with(std::span<double> u, double dt, RngStream* rng) const {
    const auto& basis = disc_->basis;
    const std::size_t n = basis.size();
    if (u.size() != n) throw std::invalid_argument("state has the wrong length");
    auto coeffs = basis.to_spectral(u);
    const double s2 = disc_->model.sigma * disc_->model.sigma;
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = basis.eigenvalue(i);
        coeffs[i] *= amplification_factor(mu, dt);
        if (rng != nullptr) {
            const double denom = 1.0 - 0.5 * dt * mu;
            coeffs[i] += std::sqrt(s2 / disc_->grid.dx() * dt) / denom * rng->normal();
        }
    }
    basis.from_spectral(coeffs, u);
}

void CrankNicolson::step(std::span<double> u, RngStream* rng) const { step_with(u, dt_, rng); }

std::vector<double> CrankNicolson::evolve(std::vector<double> u, double horizon,
                                          RngStream* rng) const {
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
    const auto whole = static_cast<std::size_t>(std::floor(horizon / dt_));
    for (std::size_t k = 0; k < whole; ++k) step_with(u, dt_, rng);
    const double rest = horizon - static_cast<double>(whole) * dt_;
    if (rest > 1e-12 * dt_) step_with(u, rest, rng);
    return u;
}

double CrankNicolson::mode_factor(std::size_t mode, double horizon) const {
    const double mu = disc_->basis.eigenvalue(mode);
    const auto whole = static_cast<std::size_t>(std::floor(horizon / dt_));
    double factor = std::pow(amplification_factor(mu, dt_), static_cast<double>(whole));
    const double rest = horizon - static_cast<double>(whole) * dt_;
    if (rest > 1e-12 * dt_) factor *= amplification_factor(mu, rest);
    return factor;
}

PcnSampler::PcnSampler(std::shared_ptr<const LangevinTarget> target, PcnConfig config)
    : target_(std::move(target)),
      config_(config),
      basis_(laplacian_eigenbasis(target_ ? target_->grid() : Grid::single_cell())) {
    if (!target_) throw std::invalid_argument("pCN needs a target");
    if (!(config_.rho > 0.0 && config_.rho < 1.0)) {
        throw std::invalid_argument("pCN rho must lie in (0, 1)");
    }
    if (!(config_.mass > 0.0)) throw std::invalid_argument("pCN mass must be positive");
    const std::size_t n = basis_.size();
    const double beta = target_->beta();
    ref_variance_.resize(n);
    correction_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = basis_.eigenvalue(i);
        const double mu_ref = mu < 0.0 ? mu : -config_.mass;
        ref_variance_[i] = 1.0 / (-beta * mu_ref);
        correction_[i] = 0.5 * beta * (mu - mu_ref);
    }
}

double PcnSampler::phi(std::span<const double> v) const {
    double quartic = 0.0;
    for (double x : v) {
        const double x2 = x * x;
        quartic += x2 * x2;
    }
    double value = 0.25 * target_->beta() * quartic;
    for (std::size_t i = 0; i < correction_.size(); ++i) {
        if (correction_[i] == 0.0) continue;
        const double c = basis_.project(v, i);
        value -= correction_[i] * c * c;
    }
    return value;
}

bool PcnSampler::step(std::vector<double>& v, double& phi_v, RngStream& rng) const {
    const std::size_t n = basis_.size();
    std::vector<double> xi(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = std::sqrt(ref_variance_[i]) * rng.normal();
    auto proposal = basis_.from_spectral(xi);
    const double rho = config_.rho;
    const double spread = std::sqrt(1.0 - rho * rho);
    for (std::size_t j = 0; j < n; ++j) proposal[j] = rho * v[j] + spread * proposal[j];
    const double phi_new = phi(proposal);
    const double log_accept = phi_v - phi_new;
    if (log_accept >= 0.0 || std::log(rng.uniform()) < log_accept) {
        v = std::move(proposal);
        phi_v = phi_new;
        return true;
    }
    return false;
}

ChainResult run_chain(const PcnSampler& sampler, std::vector<double> initial,
                      std::size_t steps, std::size_t burn_in, RngStream& rng,
                      std::size_t num_batches) {
    if (steps <= burn_in) throw std::invalid_argument("chain needs steps > burn_in");
    if (num_batches < 2) throw std::invalid_argument("need at least two batches");
    const std::size_t n = initial.size();
    const std::size_t kept = steps - burn_in;
    const std::size_t batch = std::max<std::size_t>(1, kept / num_batches);
    BatchMeans moments(2 * n, batch);
    std::vector<double> sample(2 * n);

    std::vector<double> v = std::move(initial);
    double phi_v = sampler.phi(v);
    std::size_t accepted = 0;
    for (std::size_t s = 0; s < steps; ++s) {
        if (sampler.step(v, phi_v, rng)) ++accepted;
        if (s < burn_in) continue;
        for (std::size_t j = 0; j < n; ++j) {
            sample[j] = v[j];
            sample[n + j] = v[j] * v[j];
        }
        moments.add(sample);
    }

    ChainResult out;
    out.samples = kept;
    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
    out.first.resize(n);
    out.second.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.first[j] = moments.estimate(j);
        out.second[j] = moments.estimate(n + j);
    }
    return out;
}

}  // namespace spectrwm
