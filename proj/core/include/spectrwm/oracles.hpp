#pragma once

// Reference solutions: continuum heat SPDE statistics, exact moments of the
// semi-discrete Ornstein-Uhlenbeck system, the Langevin stationary target, and
// the local-consistency residual between the jump generator and the SDE
// generator.

#include "spectrwm/jump_kernel.hpp"
#include "spectrwm/semidiscretization.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace spectrwm {

struct HeatParams {
    double lambda = 0.0;
    double sigma = 1.0;
    /// Number of Fourier modes kept; the dropped variance tail is at most sigma^2 / (pi K).
    std::size_t truncation = 1000;
};

/// E u(t, x) for the continuum heat SPDE with mu_k = k^2 + lambda.
double heat_mean(double t, double x, const FourierCoefficients& ic, const HeatParams& params);

/// Cov(u(t, x), u(t, y)). For lambda = 0 the constant mode is a Brownian
/// motion and contributes sigma^2 t / (2 pi).
double heat_covariance(double t, double x, double y, const HeatParams& params);

/// int_0^T Cov(u(t, x), u(t, y)) dt, integrated term by term.
double heat_covariance_time_integral(double T, double x, double y, const HeatParams& params);

/// Exact law of the semi-discrete linear system du = L_n u dt + sigma/sqrt(dx) dW.
struct OuMoments {
    std::vector<double> mode_mean;
    std::vector<double> mode_variance;
    std::vector<double> mean;
    std::vector<double> variance;

    std::vector<double> second_moment() const;
};

/// Throws UnsupportedModelError unless the model is linear (Heat).
OuMoments semidiscrete_ou_moments(double t, const Discretization& disc,
                                  std::span<const double> v0);

/// int_0^T E[u_j(t)^2] dt for every grid point j.
std::vector<double> semidiscrete_ou_integrated_second_moment(double T,
                                                             const Discretization& disc,
                                                             std::span<const double> v0);

/// Stationary density of the semi-discrete overdamped Langevin system,
///   log pi(v) = -(2 dx / sigma^2) (sum v_i^4 / 4 - v^T L_n v / 2),
/// with L_n the periodic discrete Laplacian.
class LangevinTarget final : public LogDensity {
public:
    explicit LangevinTarget(const Grid& grid, double sigma);

    double beta() const noexcept { return beta_; }
    const Grid& grid() const noexcept { return grid_; }

    /// sum v_i^4 / 4 - v^T L_n v / 2.
    double potential(std::span<const double> v) const;
    double operator()(std::span<const double> v) const override;
    std::vector<double> gradient(std::span<const double> v) const;

    /// Closed-form increments from per-mode power sums; O(n^2). Assumes `basis`
    /// holds the Laplacian eigenvectors, which every model shares.
    void increments(const SpectralBasis& basis, std::span<const double> v,
                    std::span<const double> vhat, double step, std::span<double> forward,
                    std::span<double> backward) const override;

private:
    Grid grid_;
    double beta_;
    SpectralBasis laplacian_;
    std::vector<double> squares_;  // e_ij^2
    std::vector<double> cubes_;    // e_ij^3
    std::vector<double> quartic_;  // sum_j e_ij^4
};

/// E[v^2] under exp(-beta v^4 / 4) with beta = 4 pi / sigma^2, the one-cell
/// version of the Langevin target.
double langevin_single_cell_second_moment(double sigma);

/// f(v) = v^T A v + b^T v with A symmetric (row-major).
struct QuadraticTestFunction {
    std::vector<double> a;
    std::vector<double> b;

    std::size_t size() const noexcept { return b.size(); }
    double value(std::span<const double> v) const;
    std::vector<double> gradient(std::span<const double> v) const;
    /// trace(D^2 f) = 2 trace(A).
    double hessian_trace() const;
};

/// L_n v computed from the stencil (independent of the spectral basis).
std::vector<double> linear_drift(const Discretization& disc, std::span<const double> v);

/// v^T L_n grad f + F_n^T grad f + sigma^2 / (2 dx) trace(D^2 f).
double sde_generator(const QuadraticTestFunction& f, std::span<const double> v,
                     const Discretization& disc);

/// sum_i J_i^+ (f(v + h e_i) - f(v)) + J_i^- (f(v - h e_i) - f(v)) with academic rates.
double jump_generator(const QuadraticTestFunction& f, std::span<const double> v,
                      const Discretization& disc, double h,
                      double exponent_cap = kDefaultExponentCap);

/// |jump generator - SDE generator|; shrinks like h^2.
double generator_residual(const QuadraticTestFunction& f, std::span<const double> v,
                          const Discretization& disc, double h,
                          double exponent_cap = kDefaultExponentCap);

}  // namespace spectrwm
