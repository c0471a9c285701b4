#include "generators.hpp"

#include <spectrwm/errors.hpp>
#include <spectrwm/oracles.hpp>
#include <spectrwm/rng.hpp>
#include <spectrwm/statistics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace spectrwm;

namespace {

constexpr double kPi = std::numbers::pi;

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// Adaptive Simpson on 16 equal panels, so symmetric integrands cannot fool the first estimate.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    const int panels = 16;
    double sum = 0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + (b - a) * p / panels, hi = a + (b - a) * (p + 1) / panels;
        const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
        sum += simpson(f, lo, hi, fa, fm, fb, (hi - lo) / 6 * (fa + 4 * fm + fb), tol / panels, 50);
    }
    return sum;
}

std::shared_ptr<const Discretization> heat(std::size_t n, double lambda, double sigma = 1.0) {
    ModelSpec m;
    m.lambda = lambda;
    m.sigma = sigma;
    return discretize(m, n);
}

// Dense A = L_n - lambda I.
std::vector<double> dense_drift(std::size_t n, double lambda) {
    const double dx = 2 * kPi / n;
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a[i * n + i] += -2 / (dx * dx) - lambda;
        a[i * n + (i + 1) % n] += 1 / (dx * dx);
        a[i * n + (i + n - 1) % n] += 1 / (dx * dx);
    }
    return a;
}

double loglog_slope_for_test(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += std::log(x[k]) / x.size();
        my += std::log(y[k]) / x.size();
    }
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
        sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    }
    return sxy / sxx;
}

}  // namespace

TEST(HeatMean, Examples) {
    FourierCoefficients ic;
    HeatParams p;
    EXPECT_EQ(heat_mean(0.7, 1.2, ic, p), 0.0);
    ic.c0 = std::sqrt(2 * kPi);
    p.lambda = 1.0;
    EXPECT_NEAR(heat_mean(1.0, 0.3, ic, p), std::exp(-1.0), 1e-15);
    ic.c0 = 0.4;
    ic.cosine = {0.0, 1.0};
    ic.sine = {-0.5};
    const double x = 0.9;
    EXPECT_NEAR(heat_mean(0.0, x, ic, p),
                0.4 / std::sqrt(2 * kPi) + (std::cos(2 * x) - 0.5 * std::sin(x)) / std::sqrt(kPi), 1e-14);
    EXPECT_NEAR(heat_mean(0.5, x, ic, p),
                0.4 / std::sqrt(2 * kPi) * std::exp(-0.5) +
                    (std::exp(-2.5) * std::cos(2 * x) - 0.5 * std::exp(-1.0) * std::sin(x)) / std::sqrt(kPi),
                1e-14);
}

TEST(HeatCovariance, ZeroAtTimeZero) {
    EXPECT_EQ(heat_covariance(0.0, 1.0, 1.0, {}), 0.0);
    EXPECT_EQ(heat_covariance_time_integral(0.0, 1.0, 2.0, {1.0, 1.0, 100}), 0.0);
}

TEST(HeatCovariance, BrownianSeriesAtUnitTime) {
    double series = 0;
    for (int k = 1; k <= 1000; ++k) series += (1 - std::exp(-2.0 * k * k)) / (2.0 * k * k);
    const double expect = 1 / (2 * kPi) + series / kPi;
    EXPECT_NEAR(heat_covariance(1.0, 0.4, 0.4, {0.0, 1.0, 1000}), expect, 1e-12);
}

TEST(HeatCovariance, StationaryLimitClosedForm) {
    const double expect = 1 / (4 * kPi) + (kPi / std::tanh(kPi) - 1) / (4 * kPi);
    EXPECT_NEAR(expect, 0.2509, 1e-4);
    EXPECT_NEAR(heat_covariance(40.0, 1.0, 1.0, {1.0, 1.0, 100000}), expect, 1e-5);
}

TEST(HeatCovariance, TruncationTail) {
    for (double t : {0.1, 1.0, 5.0}) {
        for (double sigma : {0.5, 1.0, 2.0}) {
            const double s2 = sigma * sigma;
            const double off1 = heat_covariance(t, 0.3, 1.3, {1.0, sigma, 1000});
            const double off2 = heat_covariance(t, 0.3, 1.3, {1.0, sigma, 10000});
            EXPECT_LT(std::abs(off1 - off2), 1e-4 * s2);
            // On the diagonal the dropped terms are positive and bounded by sigma^2 / (pi K).
            const double d1 = heat_covariance(t, 0.3, 0.3, {1.0, sigma, 1000});
            const double d2 = heat_covariance(t, 0.3, 0.3, {1.0, sigma, 10000});
            EXPECT_GE(d2, d1);
            EXPECT_LE(d2 - d1, s2 / (kPi * 1000));
        }
    }
}

TEST(HeatCovarianceIntegral, SingleModeByHand) {
    const double expect = (0.5 - (1 - std::exp(-2.0)) / 4) / (2 * kPi);
    EXPECT_NEAR(heat_covariance_time_integral(1.0, 0.0, 0.0, {1.0, 1.0, 0}), expect, 1e-15);
}

TEST(HeatCovarianceIntegral, MatchesQuadrature) {
    for (double lambda : {0.0, 1.0}) {
        for (double dxy : {0.0, 0.8, 2.5}) {
            const HeatParams p{lambda, 1.3, 40};
            const double T = 0.9;
            const double quad = integrate([&](double t) { return heat_covariance(t, 0.2, 0.2 + dxy, p); }, 0.0, T);
            EXPECT_NEAR(heat_covariance_time_integral(T, 0.2, 0.2 + dxy, p), quad, 1e-8);
        }
    }
}

TEST(OuMoments, TimeZeroZeroInitial) {
    const auto d = heat(8, 1.0);
    const auto m = semidiscrete_ou_moments(0.0, *d, std::vector<double>(8, 0.0));
    for (std::size_t j = 0; j < 8; ++j) {
        EXPECT_EQ(m.mean[j], 0.0);
        EXPECT_EQ(m.variance[j], 0.0);
    }
}

TEST(OuMoments, BrownianConstantMode) {
    const auto d = heat(8, 0.0, 1.5);
    for (double t : {0.5, 1.0, 2.0}) {
        const auto m = semidiscrete_ou_moments(t, *d, std::vector<double>(8, 0.0));
        EXPECT_NEAR(m.mode_variance[0], 2.25 / d->grid.dx() * t, 1e-12);
    }
}

TEST(OuMoments, CovarianceOdeByRungeKutta) {
    // dm/dt = A m, dC/dt = A C + C A + (sigma^2/dx) I integrated with RK4 in grid coordinates.
    const std::size_t n = 5;
    const double lambda = 0.7, sigma = 1.2, T = 0.6;
    const auto d = heat(n, lambda, sigma);
    const std::vector<double> v0{0.5, -1.0, 0.2, 0.0, 1.1};
    const auto a = dense_drift(n, lambda);
    const double q = sigma * sigma / d->grid.dx();
    const std::size_t dim = n + n * n;
    auto rhs = [&](const std::vector<double>& y) {
        std::vector<double> out(dim, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) out[i] += a[i * n + k] * y[k];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = i == j ? q : 0.0;
                for (std::size_t k = 0; k < n; ++k)
                    s += a[i * n + k] * y[n + k * n + j] + y[n + i * n + k] * a[j * n + k];
                out[n + i * n + j] = s;
            }
        return out;
    };
    std::vector<double> y(dim, 0.0);
    std::copy(v0.begin(), v0.end(), y.begin());
    const int steps = 20000;
    const double dt = T / steps;
    for (int s = 0; s < steps; ++s) {
        const auto k1 = rhs(y);
        auto tmp = y;
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        const auto k2 = rhs(tmp);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        const auto k3 = rhs(tmp);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
        const auto k4 = rhs(tmp);
        for (std::size_t i = 0; i < dim; ++i) y[i] += dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    const auto m = semidiscrete_ou_moments(T, *d, v0);
    for (std::size_t j = 0; j < n; ++j) {
        EXPECT_NEAR(m.mean[j], y[j], 1e-9);
        EXPECT_NEAR(m.variance[j], y[n + j * n + j], 1e-9);
    }
}

TEST(OuMoments, TwoPointEulerMaruyama) {
    const std::size_t n = 2;
    const double lambda = 1.0, T = 0.5;
    const auto d = heat(n, lambda);
    const std::vector<double> v0{1.0, -0.5};
    const auto a = dense_drift(n, lambda);
    const double noise = std::sqrt(1.0 / d->grid.dx());
    const int steps = 1000;
    const double dt = T / steps;
    MomentAccumulator acc(4);
    for (std::uint64_t p = 0; p < 20000; ++p) {
        RngStream rng(77, p);
        double x0 = v0[0], x1 = v0[1];
        for (int s = 0; s < steps; ++s) {
            const double d0 = a[0] * x0 + a[1] * x1;
            const double d1 = a[2] * x0 + a[3] * x1;
            x0 += d0 * dt + noise * std::sqrt(dt) * rng.normal();
            x1 += d1 * dt + noise * std::sqrt(dt) * rng.normal();
        }
        acc.add(std::vector<double>{x0, x1, x0 * x0, x1 * x1});
    }
    const auto m = semidiscrete_ou_moments(T, *d, v0);
    const auto second = m.second_moment();
    for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_NEAR(acc.mean(j), m.mean[j], 3 * acc.std_error(j));
        EXPECT_NEAR(acc.mean(2 + j), second[j], 3 * acc.std_error(2 + j));
    }
}

TEST(OuMoments, IntegratedSecondMomentMatchesQuadrature) {
    const auto d = heat(6, 0.5, 0.8);
    const std::vector<double> v0{0.3, 0.0, -0.7, 1.0, 0.2, -0.1};
    const double T = 1.3;
    const auto got = semidiscrete_ou_integrated_second_moment(T, *d, v0);
    for (std::size_t j = 0; j < 6; ++j) {
        const double quad = integrate(
            [&](double t) { return semidiscrete_ou_moments(t, *d, v0).second_moment()[j]; }, 0.0, T, 1e-12);
        EXPECT_NEAR(got[j], quad, 1e-8);
    }
    const auto zero = semidiscrete_ou_integrated_second_moment(0.0, *d, v0);
    for (double z : zero) EXPECT_EQ(z, 0.0);
}

TEST(OuMoments, ApproachesContinuumAsGridRefines) {
    // Grid variance equals the continuum covariance on the diagonal up to O(dx) corrections.
    const double t = 0.5;
    const double cont = heat_covariance(t, 0.0, 0.0, {1.0, 1.0, 100000});
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {32u, 64u, 128u}) {
        const auto d = heat(n, 1.0);
        const auto m = semidiscrete_ou_moments(t, *d, std::vector<double>(n, 0.0));
        const double diff = std::abs(m.variance[0] - cont);
        EXPECT_LT(diff, prev);
        prev = diff;
    }
}

TEST(OuMoments, RejectNonlinearModels) {
    ModelSpec m;
    m.kind = ModelKind::Burgers;
    const auto d = discretize(m, 4);
    EXPECT_THROW(semidiscrete_ou_moments(1.0, *d, std::vector<double>(4, 0.0)), UnsupportedModelError);
    EXPECT_THROW(semidiscrete_ou_integrated_second_moment(1.0, *d, std::vector<double>(4, 0.0)),
                 UnsupportedModelError);
}

TEST(LangevinTarget, ModeAtZeroAndEvenSymmetry) {
    testgen::Gen gen(21);
    const LangevinTarget target(Grid(10), 1.0);
    for (double g : target.gradient(std::vector<double>(10, 0.0))) EXPECT_EQ(g, 0.0);
    for (int c = 0; c < testgen::kCases; ++c) {
        const auto v = gen.vec(10);
        auto w = v;
        for (auto& x : w) x = -x;
        EXPECT_DOUBLE_EQ(target(v), target(w));
        EXPECT_LE(target(v), target(std::vector<double>(10, 0.0)));
    }
}

TEST(LangevinTarget, GradientIsScaledDrift) {
    // drift = L v - v^3 = (sigma^2 / (2 dx)) grad log pi, so the drift ascends the log-density.
    testgen::Gen gen(22);
    for (int c = 0; c < testgen::kCases; ++c) {
        const std::size_t n = gen.size(2, 16);
        const double sigma = gen.uniform(0.5, 2.0);
        const Grid g(n);
        const LangevinTarget target(g, sigma);
        const auto v = gen.vec(n);
        const auto grad = target.gradient(v);
        const auto lv = laplacian_matvec(g, v);
        double ascent = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double drift = lv[j] - v[j] * v[j] * v[j];
            EXPECT_NEAR(drift, sigma * sigma / (2 * g.dx()) * grad[j], 1e-9 * (1 + std::abs(drift)));
            ascent += drift * grad[j];
            // Central finite difference of log pi.
            auto vp = v, vm = v;
            const double eps = 1e-5;
            vp[j] += eps;
            vm[j] -= eps;
            EXPECT_NEAR((target(vp) - target(vm)) / (2 * eps), grad[j], 1e-5 * (1 + std::abs(grad[j])));
        }
        EXPECT_GE(ascent, 0.0);
    }
}

TEST(LangevinTarget, SingleCellQuadrature) {
    const auto density = [](double u) { return std::exp(-kPi * u * u * u * u); };
    const double z = integrate(density, -4.0, 4.0);
    const double m2 = integrate([&](double u) { return u * u * density(u); }, -4.0, 4.0);
    EXPECT_NEAR(langevin_single_cell_second_moment(1.0), m2 / z, 1e-9);
    EXPECT_NEAR(m2 / z, 0.1907, 1e-4);
    const LangevinTarget cell(Grid::single_cell(), 1.0);
    EXPECT_NEAR(cell(std::vector<double>{0.7}) - cell(std::vector<double>{0.0}), -kPi * std::pow(0.7, 4), 1e-13);
}

TEST(Generator, SquaredNormAtZero) {
    const std::size_t n = 8;
    const auto d = heat(n, 0.0, 1.3);
    QuadraticTestFunction f;
    f.a.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) f.a[i * n + i] = 1.0;
    f.b.assign(n, 0.0);
    const std::vector<double> zero(n, 0.0);
    EXPECT_NEAR(sde_generator(f, zero, *d), n * 1.69 / d->grid.dx(), 1e-12);
    const double r1 = generator_residual(f, zero, *d, 0.1);
    const double r2 = generator_residual(f, zero, *d, 0.05);
    EXPECT_LT(r2, r1 + 1e-9);
    EXPECT_LT(r1, 1e-8 * sde_generator(f, zero, *d) + 1e-9);
}

TEST(Generator, ResidualSlopeTwo) {
    testgen::Gen gen(23);
    const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
    for (double sigma : {0.5, 1.0, 2.0}) {
        for (auto kind : {ModelKind::Heat, ModelKind::Langevin}) {
            ModelSpec m;
            m.kind = kind;
            m.sigma = sigma;
            m.lambda = 1.0;
            const std::size_t n = 6;
            const auto d = discretize(m, n);
            QuadraticTestFunction f;
            f.a = gen.symmetric(n, 0.5);
            f.b = gen.vec(n);
            const auto v = gen.vec(n, 0.5);
            std::vector<double> res;
            for (double h : hs) res.push_back(generator_residual(f, v, *d, h));
            EXPECT_NEAR(loglog_slope_for_test(hs, res), 2.0, 0.2) << "sigma=" << sigma;
        }
    }
}

TEST(Generator, LinearFunctionSlopeTwo) {
    const std::size_t n = 8;
    const auto d = heat(n, 0.0);
    QuadraticTestFunction f;
    f.a.assign(n * n, 0.0);
    testgen::Gen gen(24);
    f.b = gen.vec(n);
    const auto v = gen.vec(n, 0.5);
    const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
    std::vector<double> res;
    for (double h : hs) res.push_back(generator_residual(f, v, *d, h));
    EXPECT_NEAR(loglog_slope_for_test(hs, res), 2.0, 0.2);
}

TEST(Generator, LinearDriftFromStencil) {
    testgen::Gen gen(25);
    ModelSpec m;
    m.lambda = 0.6;
    const auto d = discretize(m, 7);
    const auto v = gen.vec(7);
    const auto got = linear_drift(*d, v);
    const auto via_basis = d->basis.from_spectral([&] {
        auto c = d->basis.to_spectral(v);
        for (std::size_t i = 0; i < 7; ++i) c[i] *= d->basis.eigenvalue(i);
        return c;
    }());
    for (std::size_t j = 0; j < 7; ++j) EXPECT_NEAR(got[j], via_basis[j], 1e-10);
}
