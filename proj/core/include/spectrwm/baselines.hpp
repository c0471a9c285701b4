#pragma once

// Classical comparison schemes: Crank-Nicolson time stepping for the linear
// semi-discrete system and a preconditioned Crank-Nicolson (pCN) Metropolis
// sampler for the Langevin stationary law.

#include "spectrwm/oracles.hpp"
#include "spectrwm/rng.hpp"
#include "spectrwm/semidiscretization.hpp"
#include "spectrwm/statistics.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace spectrwm {

/// theta = 1/2 on the drift, explicit additive noise, applied per eigenmode.
class CrankNicolson {
public:
    /// Throws UnsupportedModelError for nonlinear models.
    CrankNicolson(std::shared_ptr<const Discretization> disc, double dt);

    static double amplification_factor(double mu, double dt);

    double dt() const noexcept { return dt_; }
    double amplification(std::size_t mode) const;
    /// (sigma^2 / dx) dt / (1 - dt mu / 2)^2.
    double noise_variance(std::size_t mode) const;

    /// One step of size dt. A null `rng` gives the zero-noise (mean) evolution.
    void step(std::span<double> u, RngStream* rng) const;
    /// Whole steps up to `horizon`, then one shorter step to land on it exactly.
    std::vector<double> evolve(std::vector<double> u, double horizon, RngStream* rng) const;

    /// Per-mode mean factor after whole steps plus the remainder step.
    double mode_factor(std::size_t mode, double horizon) const;

private:
    void step_with(std::span<double> u, double dt, RngStream* rng) const;

    std::shared_ptr<const Discretization> disc_;
    double dt_;
};

struct PcnConfig {
    double rho = 0.9;
    /// Reference precision floor for modes whose linear drift does not damp.
    double mass = 1e-2;
};

/// Metropolis sampler exact for the Langevin target. The proposal is
/// rho v + sqrt(1 - rho^2) xi with xi from a Gaussian reference that is
/// diagonal in the Laplacian eigenbasis.
class PcnSampler {
public:
    PcnSampler(std::shared_ptr<const LangevinTarget> target, PcnConfig config = {});

    const PcnConfig& config() const noexcept { return config_; }
    /// Reference variance of mode i in Euclidean coefficients.
    double reference_variance(std::size_t mode) const { return ref_variance_[mode]; }
    /// Target energy not carried by the reference: -log pi(v) - (Gaussian part).
    double phi(std::span<const double> v) const;

    /// One Metropolis step. `phi_v` caches phi(v) and is updated on acceptance.
    bool step(std::vector<double>& v, double& phi_v, RngStream& rng) const;

private:
    std::shared_ptr<const LangevinTarget> target_;
    PcnConfig config_;
    SpectralBasis basis_;
    std::vector<double> ref_variance_;
    /// (beta / 2)(mu_i - mu_ref_i); nonzero only for mass-shifted modes.
    std::vector<double> correction_;
};

struct ChainResult {
    /// Per-component v_j and v_j^2 with batch-means standard errors.
    std::vector<Estimate> first;
    std::vector<Estimate> second;
    double acceptance_rate = 0.0;
    std::size_t samples = 0;
};

/// Runs `steps` proposals, discarding the first `burn_in` from the moments.
/// Throws std::invalid_argument unless steps > burn_in.
ChainResult run_chain(const PcnSampler& sampler, std::vector<double> initial,
                      std::size_t steps, std::size_t burn_in, RngStream& rng,
                      std::size_t num_batches = 50);

}  // namespace spectrwm
