#include "spectrwm/semidiscretization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spectrwm {

namespace {

void require_length(std::size_t expected, std::size_t actual, const char* what) {
    if (expected != actual) {
        throw std::invalid_argument(std::string(what) + ": expected length " +
                                    std::to_string(expected) + ", got " +
                                    std::to_string(actual));
    }
}

}  // namespace

Grid::Grid(std::size_t n) : n_(n), dx_(0.0) {
    if (n < 2) {
        throw std::invalid_argument("grid needs at least 2 points, got " + std::to_string(n));
    }
    dx_ = kLength / static_cast<double>(n);
}

Grid::Grid(std::size_t n, Unchecked) : n_(n), dx_(kLength / static_cast<double>(n)) {}

Grid Grid::single_cell() { return Grid(1, Unchecked{}); }

Grid build_grid(std::size_t n) { return Grid(n); }

void laplacian_matvec(const Grid& grid, std::span<const double> v, std::span<double> out) {
    const std::size_t n = grid.size();
    require_length(n, v.size(), "laplacian_matvec input");
    require_length(n, out.size(), "laplacian_matvec output");
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    for (std::size_t i = 0; i < n; ++i) {
        const double right = v[(i + 1) % n];
        const double left = v[(i + n - 1) % n];
        out[i] = (right - 2.0 * v[i] + left) * inv_dx2;
    }
}

std::vector<double> laplacian_matvec(const Grid& grid, std::span<const double> v) {
    std::vector<double> out(grid.size());
    laplacian_matvec(grid, v, out);
    return out;
}

InitialCondition initial_condition_from_name(std::string_view name) {
    InitialCondition ic;
    if (name == "trivial") {
        ic.kind = InitialConditionKind::Trivial;
    } else if (name == "bump") {
        ic.kind = InitialConditionKind::Bump;
    } else if (name == "sinusoid") {
        ic.kind = InitialConditionKind::Sinusoid;
    } else if (name == "high-frequency") {
        ic.kind = InitialConditionKind::HighFrequency;
    } else if (name == "high-energy") {
        ic.kind = InitialConditionKind::HighEnergy;
    } else if (name == "fourier") {
        ic.kind = InitialConditionKind::FourierCoeffs;
    } else {
        throw std::invalid_argument(
            "unknown initial condition '" + std::string(name) +
            "' (expected trivial, bump, sinusoid, high-frequency, high-energy, fourier)");
    }
    return ic;
}

std::string_view to_string(InitialConditionKind kind) {
    switch (kind) {
        case InitialConditionKind::Trivial: return "trivial";
        case InitialConditionKind::Bump: return "bump";
        case InitialConditionKind::Sinusoid: return "sinusoid";
        case InitialConditionKind::HighFrequency: return "high-frequency";
        case InitialConditionKind::HighEnergy: return "high-energy";
        case InitialConditionKind::FourierCoeffs: return "fourier";
    }
    return "unknown";
}

ModelKind model_kind_from_name(std::string_view name) {
    if (name == "heat") return ModelKind::Heat;
    if (name == "langevin") return ModelKind::Langevin;
    if (name == "burgers") return ModelKind::Burgers;
    if (name == "kpz") return ModelKind::Kpz;
    throw std::invalid_argument("unknown model '" + std::string(name) +
                                "' (expected heat, langevin, burgers, kpz)");
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Heat: return "heat";
        case ModelKind::Langevin: return "langevin";
        case ModelKind::Burgers: return "burgers";
        case ModelKind::Kpz: return "kpz";
    }
    return "unknown";
}

NonlinearityScheme scheme_from_name(std::string_view name) {
    if (name == "central") return NonlinearityScheme::Central;
    if (name == "one-sided") return NonlinearityScheme::OneSided;
    throw std::invalid_argument("unknown nonlinearity scheme '" + std::string(name) +
                                "' (expected central, one-sided)");
}

std::string_view to_string(NonlinearityScheme scheme) {
    return scheme == NonlinearityScheme::Central ? "central" : "one-sided";
}

void ModelSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("sigma must be positive and finite");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be non-negative and finite");
    }
    if (kind == ModelKind::Burgers && (!(nu > 0.0) || !std::isfinite(nu))) {
        throw std::invalid_argument("nu must be positive and finite");
    }
    if (initial.kind == InitialConditionKind::Bump && !(initial.bump_width > 0.0)) {
        throw std::invalid_argument("bump width must be positive");
    }
}

SpectralBasis::SpectralBasis(std::vector<double> eigenvalues, std::vector<double> vectors,
                             std::vector<ModeShape> shapes)
    : n_(eigenvalues.size()),
      eigenvalues_(std::move(eigenvalues)),
      vectors_(std::move(vectors)),
      shapes_(std::move(shapes)) {
    require_length(n_ * n_, vectors_.size(), "SpectralBasis vectors");
    require_length(n_, shapes_.size(), "SpectralBasis shapes");
}

void SpectralBasis::to_spectral(std::span<const double> v, std::span<double> coeffs) const {
    require_length(n_, v.size(), "to_spectral input");
    require_length(n_, coeffs.size(), "to_spectral output");
    for (std::size_t i = 0; i < n_; ++i) {
        const double* row = vectors_.data() + i * n_;
        double acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) acc += row[j] * v[j];
        coeffs[i] = acc;
    }
}

std::vector<double> SpectralBasis::to_spectral(std::span<const double> v) const {
    std::vector<double> coeffs(n_);
    to_spectral(v, coeffs);
    return coeffs;
}

void SpectralBasis::from_spectral(std::span<const double> coeffs, std::span<double> v) const {
    require_length(n_, coeffs.size(), "from_spectral input");
    require_length(n_, v.size(), "from_spectral output");
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        const double c = coeffs[i];
        if (c == 0.0) continue;
        const double* row = vectors_.data() + i * n_;
        for (std::size_t j = 0; j < n_; ++j) v[j] += c * row[j];
    }
}

std::vector<double> SpectralBasis::from_spectral(std::span<const double> coeffs) const {
    std::vector<double> v(n_);
    from_spectral(coeffs, v);
    return v;
}

double SpectralBasis::project(std::span<const double> v, std::size_t i) const {
    require_length(n_, v.size(), "project input");
    const double* row = vectors_.data() + i * n_;
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += row[j] * v[j];
    return acc;
}

SpectralBasis laplacian_eigenbasis(const Grid& grid) {
    const std::size_t n = grid.size();
    const double nd = static_cast<double>(n);
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());

    std::vector<double> eigenvalues;
    std::vector<double> vectors;
    std::vector<ModeShape> shapes;
    eigenvalues.reserve(n);
    vectors.reserve(n * n);
    shapes.reserve(n);

    // -(2 - 2cos(2 pi k / n)) / dx^2, evaluated as -4 sin^2(pi k / n) / dx^2.
    auto eigenvalue_of = [&](std::size_t k) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(k) / nd);
        return -4.0 * s * s * inv_dx2;
    };
    auto push_mode = [&](ModeShape::Kind kind, std::size_t k, double scale, auto&& fn) {
        eigenvalues.push_back(eigenvalue_of(k));
        shapes.push_back({kind, k});
        for (std::size_t j = 0; j < n; ++j) {
            const double phase = 2.0 * std::numbers::pi * static_cast<double>(k * j % n) / nd;
            vectors.push_back(scale * fn(phase, j));
        }
    };

    const double flat = 1.0 / std::sqrt(nd);
    const double paired = std::sqrt(2.0 / nd);
    push_mode(ModeShape::Kind::Constant, 0, flat, [](double, std::size_t) { return 1.0; });
    for (std::size_t k = 1; 2 * k < n; ++k) {
        push_mode(ModeShape::Kind::Cosine, k, paired,
                  [](double phase, std::size_t) { return std::cos(phase); });
        push_mode(ModeShape::Kind::Sine, k, paired,
                  [](double phase, std::size_t) { return std::sin(phase); });
    }
    if (n % 2 == 0 && n >= 2) {
        push_mode(ModeShape::Kind::Nyquist, n / 2, flat,
                  [](double, std::size_t j) { return j % 2 == 0 ? 1.0 : -1.0; });
    }
    return SpectralBasis(std::move(eigenvalues), std::move(vectors), std::move(shapes));
}

SpectralBasis eigenbasis(const Grid& grid, const ModelSpec& model) {
    SpectralBasis lap = laplacian_eigenbasis(grid);
    if (model.kind != ModelKind::Heat && model.kind != ModelKind::Burgers) return lap;

    std::vector<double> eigenvalues(lap.eigenvalues().begin(), lap.eigenvalues().end());
    for (double& mu : eigenvalues) {
        mu = model.kind == ModelKind::Heat ? mu - model.lambda : model.nu * mu;
    }
    std::vector<double> vectors;
    vectors.reserve(lap.size() * lap.size());
    std::vector<ModeShape> shapes;
    for (std::size_t i = 0; i < lap.size(); ++i) {
        auto row = lap.vector(i);
        vectors.insert(vectors.end(), row.begin(), row.end());
        shapes.push_back(lap.shape(i));
    }
    return SpectralBasis(std::move(eigenvalues), std::move(vectors), std::move(shapes));
}

void drift_nonlinear(const ModelSpec& model, const Grid& grid, std::span<const double> v,
                     std::span<double> out) {
    const std::size_t n = grid.size();
    require_length(n, v.size(), "drift_nonlinear input");
    require_length(n, out.size(), "drift_nonlinear output");
    const double dx = grid.dx();
    const bool central = model.scheme == NonlinearityScheme::Central;

    switch (model.kind) {
        case ModelKind::Heat:
            std::fill(out.begin(), out.end(), 0.0);
            return;
        case ModelKind::Langevin:
            for (std::size_t i = 0; i < n; ++i) out[i] = -v[i] * v[i] * v[i];
            return;
        case ModelKind::Burgers: {
            const double central_scale = (model.burgers_half_factor ? 0.25 : 0.5) / dx;
            for (std::size_t i = 0; i < n; ++i) {
                const double right = v[(i + 1) % n];
                if (central) {
                    const double left = v[(i + n - 1) % n];
                    out[i] = -central_scale * (right * right - left * left);
                } else {
                    out[i] = -(right - v[i]) * v[i] / dx;
                }
            }
            return;
        }
        case ModelKind::Kpz:
            for (std::size_t i = 0; i < n; ++i) {
                const double right = v[(i + 1) % n];
                const double slope = central ? (right - v[(i + n - 1) % n]) / (2.0 * dx)
                                             : (right - v[i]) / dx;
                out[i] = model.lambda * slope * slope;
            }
            return;
    }
}

std::vector<double> drift_nonlinear(const ModelSpec& model, const Grid& grid,
                                    std::span<const double> v) {
    std::vector<double> out(grid.size());
    drift_nonlinear(model, grid, v, out);
    return out;
}

std::vector<double> initial_condition(const InitialCondition& ic, const Grid& grid) {
    const std::size_t n = grid.size();
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.x(i);
        switch (ic.kind) {
            case InitialConditionKind::Trivial:
                break;
            case InitialConditionKind::Bump: {
                const double d = x - ic.bump_center;
                u[i] = std::exp(-d * d / (2.0 * ic.bump_width));
                break;
            }
            case InitialConditionKind::Sinusoid:
                u[i] = std::sin(x);
                break;
            case InitialConditionKind::HighFrequency:
                for (int k : ic.wavenumbers) u[i] += std::cos(static_cast<double>(k) * x);
                break;
            case InitialConditionKind::HighEnergy:
                u[i] = ic.amplitude * std::sin(3.0 * x);
                break;
            case InitialConditionKind::FourierCoeffs: {
                const auto& c = ic.coefficients;
                const std::size_t nyquist = n / 2;
                double value = c.c0 / std::sqrt(2.0 * std::numbers::pi);
                const double scale = 1.0 / std::sqrt(std::numbers::pi);
                for (std::size_t k = 1; k <= nyquist; ++k) {
                    const double kx = static_cast<double>(k) * x;
                    if (k <= c.cosine.size()) value += scale * c.cosine[k - 1] * std::cos(kx);
                    if (k <= c.sine.size()) value += scale * c.sine[k - 1] * std::sin(kx);
                }
                u[i] = value;
                break;
            }
        }
    }
    return u;
}

std::vector<double> initial_condition(const ModelSpec& model, const Grid& grid) {
    return initial_condition(model.initial, grid);
}

std::shared_ptr<const Discretization> discretize(const ModelSpec& model, const Grid& grid) {
    model.validate();
    return std::make_shared<const Discretization>(
        Discretization{grid, model, eigenbasis(grid, model)});
}

std::shared_ptr<const Discretization> discretize(const ModelSpec& model, std::size_t n) {
    return discretize(model, Grid(n));
}

}  // namespace spectrwm
