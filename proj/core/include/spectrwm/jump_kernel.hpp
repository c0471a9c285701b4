#pragma once

// Markov jump process approximation of the semi-discrete SPDE: jumps of fixed
// size along eigenvectors of the linear drift, exponential holding times, and
// the event loop that strings them together.

#include "spectrwm/rng.hpp"
#include "spectrwm/semidiscretization.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace spectrwm {

inline constexpr double kDefaultExponentCap = 700.0;
inline constexpr std::uint64_t kDefaultRefreshInterval = 1024;

/// Academic: jumps of size h along Euclidean-orthonormal eigenvectors of the
/// finite-difference system. Fast: jumps of size h in the L^2-normalised
/// spectral coefficients (u_hat = sqrt(dx) <v, e_i>) of the same system.
/// DetailedBalance: academic geometry with rates that are exactly reversible
/// with respect to a supplied target density.
enum class Variant { Academic, Fast, DetailedBalance };

Variant variant_from_name(std::string_view name);
std::string_view to_string(Variant variant);

struct JumpState {
    double t = 0.0;
    /// Physical grid values.
    std::vector<double> v;
    /// <v, e_i> in the Euclidean basis, for every variant.
    std::vector<double> vhat;
    /// <F_n(v), e_i>; maintained only by the academic and fast variants.
    std::vector<double> fhat;
    std::uint64_t step_count = 0;
};

struct RateTable {
    RateTable() = default;
    explicit RateTable(std::size_t n) : forward(n), backward(n) {}

    std::size_t size() const noexcept { return forward.size(); }
    void recompute_total();

    std::vector<double> forward;
    std::vector<double> backward;
    double total = 0.0;
};

struct EventRecord {
    double t_before = 0.0;
    double holding = 0.0;
    std::size_t mode = 0;
    int direction = 0;
};

struct JumpChoice {
    std::size_t mode = 0;
    int direction = 0;
};

/// Unnormalised log-density for reversible rates.
class LogDensity {
public:
    virtual ~LogDensity() = default;

    virtual double operator()(std::span<const double> v) const = 0;

    /// forward[i] = log pi(v + step e_i) - log pi(v); backward[i] is the same
    /// for -step. The default evaluates the density 2n + 1 times.
    virtual void increments(const SpectralBasis& basis, std::span<const double> v,
                            std::span<const double> vhat, double step, std::span<double> forward,
                            std::span<double> backward) const;
};

// J_i^+- = sigma^2/(2 h^2 dx) exp(+-(mu_i v.e_i + F(v).e_i) h dx / sigma^2).
void academic_rates(const JumpState& state, const Discretization& disc, double h,
                    RateTable& out, double exponent_cap = kDefaultExponentCap);
RateTable academic_rates(const JumpState& state, const Discretization& disc, double h,
                         double exponent_cap = kDefaultExponentCap);

// J_i^+- = sigma^2/(2 h^2) exp(+-(mu_i u_i + F_i) h / sigma^2) on L^2 coefficients.
void fast_rates(const JumpState& state, const Discretization& disc, double h, RateTable& out,
                double exponent_cap = kDefaultExponentCap);
RateTable fast_rates(const JumpState& state, const Discretization& disc, double h,
                     double exponent_cap = kDefaultExponentCap);

// J_i^+- = sigma^2/(2 h^2 dx) exp((log pi(v +- h e_i) - log pi(v)) / 2).
void detailed_balance_rates(const JumpState& state, const LogDensity& target,
                            const Discretization& disc, double h, RateTable& out,
                            double exponent_cap = kDefaultExponentCap);
RateTable detailed_balance_rates(const JumpState& state, const LogDensity& target,
                                 const Discretization& disc, double h,
                                 double exponent_cap = kDefaultExponentCap);

/// Inverse-CDF exponential draw, -ln(u) / total. Throws for total <= 0.
double holding_from_uniform(double total_rate, double u);
double sample_holding(double total_rate, RngStream& rng);

/// Categorical selection over the 2n outcomes by a linear cumulative scan of
/// (forward_0, backward_0, forward_1, ...). `u` is uniform on (0, 1).
JumpChoice select_jump(const RateTable& rates, double u);
JumpChoice sample_jump(const RateTable& rates, RngStream& rng);

/// Receives the trajectory as it is generated. `on_hold` sees each holding
/// interval [state.t, state.t + dwell); the last one is clipped at the horizon.
/// `on_jump` sees the pre-jump state and the event about to be applied.
class Observer {
public:
    virtual ~Observer() = default;
    virtual void on_hold(const JumpState& /*state*/, double /*dwell*/) {}
    virtual void on_jump(const JumpState& /*pre_jump*/, const EventRecord& /*event*/) {}
    virtual void on_finish(const JumpState& /*final_state*/) {}
};

struct KernelOptions {
    Variant variant = Variant::Academic;
    double h = 0.1;
    double exponent_cap = kDefaultExponentCap;
    /// Incremental spectral caches are rebuilt from scratch this often.
    std::uint64_t refresh_interval = kDefaultRefreshInterval;
    /// Events allowed per simulate() call.
    std::uint64_t max_steps = 4'000'000'000ULL;
};

class JumpKernel {
public:
    JumpKernel(std::shared_ptr<const Discretization> disc, KernelOptions options,
               std::shared_ptr<const LogDensity> target = nullptr);

    const Discretization& discretization() const noexcept { return *disc_; }
    const KernelOptions& options() const noexcept { return options_; }

    /// Euclidean length of one jump in physical space: h, or h / sqrt(dx) for Fast.
    double jump_length() const noexcept { return jump_length_; }

    JumpState make_state(std::span<const double> v0, double t0 = 0.0) const;

    void compute_rates(const JumpState& state, RateTable& out) const;
    RateTable rates(const JumpState& state) const;

    /// Rebuilds the incremental caches from the primary coordinates (physical
    /// values for academic/detailed-balance, spectral coefficients for fast).
    void refresh(JumpState& state) const;

    /// Applies a jump without touching time or step count.
    void apply_jump(JumpState& state, JumpChoice choice) const;

    /// One full event: rates, holding time, jump.
    EventRecord step(JumpState& state, RngStream& rng) const;

    /// Runs until the holding interval covering `horizon`. The returned state is
    /// the state occupied at `horizon` and carries t = horizon; the jump
    /// scheduled past the horizon is not applied.
    JumpState simulate(JumpState state, double horizon, RngStream& rng,
                       std::span<Observer* const> observers = {}) const;

private:
    struct Workspace;
    void update_drift_cache(JumpState& state, Workspace& work) const;
    void update_mode_rates(const JumpState& state, std::size_t mode, RateTable& rates) const;

    std::shared_ptr<const Discretization> disc_;
    KernelOptions options_;
    std::shared_ptr<const LogDensity> target_;
    double jump_length_;
    bool tracks_drift_;
};

}  // namespace spectrwm
