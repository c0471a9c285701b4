#include "spectrwm/oracles.hpp"
#include "spectrwm/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spectrwm {

namespace {

constexpr double kPi = std::numbers::pi;

// (1 - exp(-2 mu t)) / (2 mu), continuous through mu = 0.
double damped_variance(double mu, double t) {
    const double x = 2.0 * mu * t;
    if (std::abs(x) < 1e-8) return t * (1.0 - 0.5 * x);
    return -std::expm1(-x) / (2.0 * mu);
}

// int_0^T (1 - exp(-2 mu t)) / (2 mu) dt.
double damped_variance_integral(double mu, double T) {
    const double x = 2.0 * mu * T;
    if (std::abs(x) < 1e-4) {
        return T * T * (0.5 - x / 6.0 + x * x / 24.0);
    }
    return T / (2.0 * mu) + std::expm1(-x) / (4.0 * mu * mu);
}

// int_0^T exp(a t) dt.
double exp_integral(double a, double T) {
    const double x = a * T;
    if (std::abs(x) < 1e-10) return T * (1.0 + 0.5 * x);
    return std::expm1(x) / a;
}

void require_linear(const Discretization& disc) {
    if (disc.model.has_nonlinearity()) {
        throw UnsupportedModelError("semi-discrete OU moments need a linear (heat) model");
    }
}

}  // namespace

double heat_mean(double t, double x, const FourierCoefficients& ic, const HeatParams& params) {
    double value = ic.c0 / std::sqrt(2.0 * kPi) * std::exp(-params.lambda * t);
    const std::size_t terms =
        std::min(params.truncation, std::max(ic.cosine.size(), ic.sine.size()));
    double series = 0.0;
    for (std::size_t k = 1; k <= terms; ++k) {
        const double kd = static_cast<double>(k);
        const double decay = std::exp(-(kd * kd + params.lambda) * t);
        const double c_cos = k <= ic.cosine.size() ? ic.cosine[k - 1] : 0.0;
        const double c_sin = k <= ic.sine.size() ? ic.sine[k - 1] : 0.0;
        series += decay * (c_cos * std::cos(kd * x) + c_sin * std::sin(kd * x));
    }
    return value + series / std::sqrt(kPi);
}

double heat_covariance(double t, double x, double y, const HeatParams& params) {
    const double s2 = params.sigma * params.sigma;
    // lambda = 0 reduces damped_variance to t: the Brownian secular term.
    double value = s2 / (2.0 * kPi) * damped_variance(params.lambda, t);
    double series = 0.0;
    for (std::size_t k = 1; k <= params.truncation; ++k) {
        const double kd = static_cast<double>(k);
        series += damped_variance(kd * kd + params.lambda, t) * std::cos(kd * (x - y));
    }
    return value + s2 / kPi * series;
}

double heat_covariance_time_integral(double T, double x, double y, const HeatParams& params) {
    const double s2 = params.sigma * params.sigma;
    double value = s2 / (2.0 * kPi) * damped_variance_integral(params.lambda, T);
    double series = 0.0;
    for (std::size_t k = 1; k <= params.truncation; ++k) {
        const double kd = static_cast<double>(k);
        series += damped_variance_integral(kd * kd + params.lambda, T) * std::cos(kd * (x - y));
    }
    return value + s2 / kPi * series;
}

std::vector<double> OuMoments::second_moment() const {
    std::vector<double> out(mean.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = mean[j] * mean[j] + variance[j];
    return out;
}

OuMoments semidiscrete_ou_moments(double t, const Discretization& disc,
                                  std::span<const double> v0) {
    require_linear(disc);
    if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
    const auto& basis = disc.basis;
    const std::size_t n = basis.size();
    const double noise = disc.model.sigma * disc.model.sigma / disc.grid.dx();

    OuMoments out;
    out.mode_mean = basis.to_spectral(v0);
    out.mode_variance.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = basis.eigenvalue(i);
        out.mode_mean[i] *= std::exp(mu * t);
        // (1 - e^{2 mu t}) / (-2 mu) is damped_variance at -mu.
        out.mode_variance[i] = noise * damped_variance(-mu, t);
    }
    out.mean = basis.from_spectral(out.mode_mean);
    out.variance.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto e = basis.vector(i);
        for (std::size_t j = 0; j < n; ++j) out.variance[j] += out.mode_variance[i] * e[j] * e[j];
    }
    return out;
}

std::vector<double> semidiscrete_ou_integrated_second_moment(double T,
                                                             const Discretization& disc,
                                                             std::span<const double> v0) {
    require_linear(disc);
    if (!(T >= 0.0)) throw std::invalid_argument("time must be non-negative");
    const auto& basis = disc.basis;
    const std::size_t n = basis.size();
    const double noise = disc.model.sigma * disc.model.sigma / disc.grid.dx();
    const auto c = basis.to_spectral(v0);

    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double var_integral = noise * damped_variance_integral(-basis.eigenvalue(i), T);
        auto ei = basis.vector(i);
        for (std::size_t j = 0; j < n; ++j) out[j] += var_integral * ei[j] * ei[j];
        if (c[i] == 0.0) continue;
        for (std::size_t k = 0; k < n; ++k) {
            if (c[k] == 0.0) continue;
            const double w =
                c[i] * c[k] * exp_integral(basis.eigenvalue(i) + basis.eigenvalue(k), T);
            auto ek = basis.vector(k);
            for (std::size_t j = 0; j < n; ++j) out[j] += w * ei[j] * ek[j];
        }
    }
    return out;
}

LangevinTarget::LangevinTarget(const Grid& grid, double sigma)
    : grid_(grid),
      beta_(2.0 * grid.dx() / (sigma * sigma)),
      laplacian_(laplacian_eigenbasis(grid)) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    const std::size_t n = grid.size();
    squares_.resize(n * n);
    cubes_.resize(n * n);
    quartic_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto e = laplacian_.vector(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double e2 = e[j] * e[j];
            squares_[i * n + j] = e2;
            cubes_[i * n + j] = e2 * e[j];
            quartic_[i] += e2 * e2;
        }
    }
}

double LangevinTarget::potential(std::span<const double> v) const {
    const auto lv = laplacian_matvec(grid_, v);
    double quartic = 0.0;
    double quadratic = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double v2 = v[j] * v[j];
        quartic += 0.25 * v2 * v2;
        quadratic += v[j] * lv[j];
    }
    return quartic - 0.5 * quadratic;
}

double LangevinTarget::operator()(std::span<const double> v) const {
    return -beta_ * potential(v);
}

std::vector<double> LangevinTarget::gradient(std::span<const double> v) const {
    auto grad = laplacian_matvec(grid_, v);
    for (std::size_t j = 0; j < v.size(); ++j) grad[j] = beta_ * (grad[j] - v[j] * v[j] * v[j]);
    return grad;
}

void LangevinTarget::increments(const SpectralBasis& basis, std::span<const double> v,
                                std::span<const double> vhat, double step,
                                std::span<double> forward, std::span<double> backward) const {
    const std::size_t n = grid_.size();
    if (basis.size() != n || v.size() != n || vhat.size() != n) {
        throw std::invalid_argument("LangevinTarget::increments size mismatch");
    }
    const double s = step;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double s4 = s2 * s2;
    for (std::size_t i = 0; i < n; ++i) {
        auto e = laplacian_.vector(i);
        const double* sq = squares_.data() + i * n;
        const double* cu = cubes_.data() + i * n;
        double p3 = 0.0;
        double p2 = 0.0;
        double p1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double vj = v[j];
            const double vj2 = vj * vj;
            p3 += e[j] * vj2 * vj;
            p2 += sq[j] * vj2;
            p1 += cu[j] * vj;
        }
        const double mu = laplacian_.eigenvalue(i);
        // Even and odd parts in the step of sum (v + s e)^4 / 4 - (v + s e)^T L (v + s e) / 2.
        const double even = 1.5 * s2 * p2 + 0.25 * s4 * quartic_[i] - 0.5 * s2 * mu;
        const double odd = s * p3 + s3 * p1 - s * mu * vhat[i];
        forward[i] = -beta_ * (even + odd);
        backward[i] = -beta_ * (even - odd);
    }
}

double langevin_single_cell_second_moment(double sigma) {
    const double beta = 2.0 * Grid::kLength / (sigma * sigma);
    return std::sqrt(4.0 / beta) * std::tgamma(0.75) / std::tgamma(0.25);
}

double QuadraticTestFunction::value(std::span<const double> v) const {
    const std::size_t n = size();
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += a[i * n + j] * v[j];
        quad += v[i] * row;
        lin += b[i] * v[i];
    }
    return quad + lin;
}

std::vector<double> QuadraticTestFunction::gradient(std::span<const double> v) const {
    const std::size_t n = size();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += a[i * n + j] * v[j];
        g[i] = 2.0 * row + b[i];
    }
    return g;
}

double QuadraticTestFunction::hessian_trace() const {
    const std::size_t n = size();
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += a[i * n + i];
    return 2.0 * tr;
}

std::vector<double> linear_drift(const Discretization& disc, std::span<const double> v) {
    auto out = laplacian_matvec(disc.grid, v);
    switch (disc.model.kind) {
        case ModelKind::Heat:
            for (std::size_t j = 0; j < out.size(); ++j) out[j] -= disc.model.lambda * v[j];
            break;
        case ModelKind::Burgers:
            for (double& x : out) x *= disc.model.nu;
            break;
        case ModelKind::Langevin:
        case ModelKind::Kpz:
            break;
    }
    return out;
}

double sde_generator(const QuadraticTestFunction& f, std::span<const double> v,
                     const Discretization& disc) {
    const auto grad = f.gradient(v);
    const auto lv = linear_drift(disc, v);
    const auto fn = drift_nonlinear(disc.model, disc.grid, v);
    double drift = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) drift += (lv[j] + fn[j]) * grad[j];
    const double s2 = disc.model.sigma * disc.model.sigma;
    return drift + s2 / (2.0 * disc.grid.dx()) * f.hessian_trace();
}

double jump_generator(const QuadraticTestFunction& f, std::span<const double> v,
                      const Discretization& disc, double h, double exponent_cap) {
    const std::size_t n = disc.basis.size();
    JumpState state;
    state.v.assign(v.begin(), v.end());
    state.vhat = disc.basis.to_spectral(v);
    if (disc.model.has_nonlinearity()) {
        state.fhat = disc.basis.to_spectral(drift_nonlinear(disc.model, disc.grid, v));
    }
    const RateTable rates = academic_rates(state, disc, h, exponent_cap);

    const double base = f.value(v);
    std::vector<double> moved(n);
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto e = disc.basis.vector(i);
        for (std::size_t j = 0; j < n; ++j) moved[j] = v[j] + h * e[j];
        q += rates.forward[i] * (f.value(moved) - base);
        for (std::size_t j = 0; j < n; ++j) moved[j] = v[j] - h * e[j];
        q += rates.backward[i] * (f.value(moved) - base);
    }
    return q;
}

double generator_residual(const QuadraticTestFunction& f, std::span<const double> v,
                          const Discretization& disc, double h, double exponent_cap) {
    return std::abs(jump_generator(f, v, disc, h, exponent_cap) - sde_generator(f, v, disc));
}

}  // namespace spectrwm
