#pragma once

// Space discretization of 1D periodic SPDEs on [0, 2*pi): the grid, the
// periodic discrete Laplacian and its trigonometric eigenbasis, the nonlinear
// drift stencils, and named initial conditions.

#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spectrwm {

class Grid {
public:
    static constexpr double kLength = 2.0 * std::numbers::pi;

    /// Evenly spaced periodic grid with n points. Throws std::invalid_argument for n < 2.
    explicit Grid(std::size_t n);

    /// One-cell surrogate (n = 1, dx = 2*pi). The Laplacian is identically zero
    /// there; it exists so one-dimensional quadrature checks can run through
    /// the same code paths as real grids.
    static Grid single_cell();

    std::size_t size() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    double length() const noexcept { return kLength; }
    double x(std::size_t i) const noexcept { return static_cast<double>(i) * dx_; }

private:
    struct Unchecked {};
    Grid(std::size_t n, Unchecked);

    std::size_t n_;
    double dx_;
};

Grid build_grid(std::size_t n);

/// (Lv)_i = (v_{i+1} - 2 v_i + v_{i-1}) / dx^2 with periodic wrap. Matrix-free.
void laplacian_matvec(const Grid& grid, std::span<const double> v, std::span<double> out);
std::vector<double> laplacian_matvec(const Grid& grid, std::span<const double> v);

enum class ModelKind { Heat, Langevin, Burgers, Kpz };
enum class NonlinearityScheme { Central, OneSided };

enum class InitialConditionKind {
    Trivial,        // u = 0
    Bump,           // exp(-(x - center)^2 / (2 * width))
    Sinusoid,       // sin(x)
    HighFrequency,  // sum of cos(kx) over `wavenumbers`
    HighEnergy,     // amplitude * sin(3x)
    FourierCoeffs,  // c0/sqrt(2pi) + (1/sqrt(pi)) sum_k (c_{-k} cos kx + c_k sin kx)
};

/// Fourier coefficients of an initial condition: `cosine[k-1]` holds c_{-k},
/// `sine[k-1]` holds c_k.
struct FourierCoefficients {
    double c0 = 0.0;
    std::vector<double> cosine;
    std::vector<double> sine;
};

struct InitialCondition {
    InitialConditionKind kind = InitialConditionKind::Trivial;
    double bump_center = std::numbers::pi;
    double bump_width = 0.25;
    std::vector<int> wavenumbers{1, 5, 10};
    double amplitude = 5.0;
    FourierCoefficients coefficients;
};

InitialCondition initial_condition_from_name(std::string_view name);
std::string_view to_string(InitialConditionKind kind);

struct ModelSpec {
    ModelKind kind = ModelKind::Heat;
    double sigma = 1.0;
    /// Damping for Heat, coefficient of the squared gradient for KPZ.
    double lambda = 0.0;
    /// Burgers viscosity.
    double nu = 1.0;
    NonlinearityScheme scheme = NonlinearityScheme::Central;
    /// Use (1/(4dx))(u^2_{i+1} - u^2_{i-1}) for central Burgers instead of 1/(2dx).
    bool burgers_half_factor = false;
    InitialCondition initial;

    /// Throws std::invalid_argument if a parameter is out of range.
    void validate() const;
    bool has_nonlinearity() const noexcept { return kind != ModelKind::Heat; }
};

ModelKind model_kind_from_name(std::string_view name);
std::string_view to_string(ModelKind kind);
NonlinearityScheme scheme_from_name(std::string_view name);
std::string_view to_string(NonlinearityScheme scheme);

/// Which trigonometric function a basis vector samples.
struct ModeShape {
    enum class Kind { Constant, Cosine, Sine, Nyquist };
    Kind kind = Kind::Constant;
    std::size_t wavenumber = 0;
};

/// Orthonormal eigenpairs of the linear drift operator, eigenvalues descending.
/// Vectors are stored contiguously, one row per mode.
class SpectralBasis {
public:
    SpectralBasis(std::vector<double> eigenvalues, std::vector<double> vectors,
                  std::vector<ModeShape> shapes);

    std::size_t size() const noexcept { return n_; }
    double eigenvalue(std::size_t i) const noexcept { return eigenvalues_[i]; }
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    std::span<const double> vector(std::size_t i) const noexcept {
        return {vectors_.data() + i * n_, n_};
    }
    const ModeShape& shape(std::size_t i) const noexcept { return shapes_[i]; }

    /// coeffs_i = <v, e_i>.
    void to_spectral(std::span<const double> v, std::span<double> coeffs) const;
    std::vector<double> to_spectral(std::span<const double> v) const;
    /// v = sum_i coeffs_i e_i.
    void from_spectral(std::span<const double> coeffs, std::span<double> v) const;
    std::vector<double> from_spectral(std::span<const double> coeffs) const;

    double project(std::span<const double> v, std::size_t i) const;

private:
    std::size_t n_;
    std::vector<double> eigenvalues_;
    std::vector<double> vectors_;
    std::vector<ModeShape> shapes_;
};

/// Analytic eigenbasis of the periodic discrete Laplacian: the constant mode,
/// then cosine/sine pairs of increasing wavenumber (cosine first), then the
/// Nyquist mode for even n.
SpectralBasis laplacian_eigenbasis(const Grid& grid);

/// Eigenbasis of the model's linear part: Heat shifts by -lambda, Burgers
/// scales by nu. Eigenvectors are those of the Laplacian.
SpectralBasis eigenbasis(const Grid& grid, const ModelSpec& model);

/// Nonlinear drift F_n as a full additive contribution (sign included).
void drift_nonlinear(const ModelSpec& model, const Grid& grid, std::span<const double> v,
                     std::span<double> out);
std::vector<double> drift_nonlinear(const ModelSpec& model, const Grid& grid,
                                    std::span<const double> v);

std::vector<double> initial_condition(const InitialCondition& ic, const Grid& grid);
std::vector<double> initial_condition(const ModelSpec& model, const Grid& grid);

/// Immutable bundle shared by kernels, oracles and baselines.
struct Discretization {
    Grid grid;
    ModelSpec model;
    SpectralBasis basis;
};

std::shared_ptr<const Discretization> discretize(const ModelSpec& model, std::size_t n);
std::shared_ptr<const Discretization> discretize(const ModelSpec& model, const Grid& grid);

}  // namespace spectrwm
