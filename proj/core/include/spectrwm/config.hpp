#pragma once

// Experiment configuration: command-line flags over a flat `key = value`
// file, with per-experiment defaults filled in by resolve_defaults().

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spectrwm {

enum class ExperimentKind {
    HeatAccuracy,
    HeatCnCompare,
    LangevinErgodic,
    Burgers,
    Kpz,
    HoldingScaling,
    Consistency,
};

const std::vector<std::string>& experiment_names();
ExperimentKind experiment_from_name(std::string_view name);
std::string_view to_string(ExperimentKind kind);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unset fields take the experiment's default. Every key is also a flag of the
/// same name (`--h-list 0.1,0.05`).
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::HeatAccuracy;

    std::optional<std::string> variant;  // academic | fast | detailed-balance; lists for holding-scaling
    std::optional<std::string> scheme;   // central | one-sided
    std::optional<std::string> initial;  // trivial | bump | sinusoid | high-frequency | high-energy

    std::optional<std::size_t> n;
    std::optional<double> h;
    std::optional<double> T;
    std::optional<std::size_t> replicas;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;

    std::optional<double> sigma;
    std::optional<double> lambda;
    std::optional<double> nu;

    std::optional<std::vector<double>> h_list;
    std::optional<std::vector<std::size_t>> n_list;

    // heat-cn-compare
    std::optional<std::size_t> cn_n;
    std::optional<double> dt;

    // langevin-ergodic
    std::optional<double> events;
    std::optional<double> rho;
    std::optional<double> mass;
    std::optional<std::size_t> chain_steps;
    std::optional<double> burn_in;
    std::optional<double> surrogate_h;

    // holding-scaling
    std::optional<std::size_t> samples;

    // burgers / kpz
    std::optional<std::size_t> runs;
    std::optional<double> threshold;
    std::optional<double> max_steps;

    // consistency
    std::optional<std::size_t> functions;
    std::optional<std::size_t> states;
    std::optional<double> state_scale;

    std::filesystem::path out = "spectrwm-out";
};

struct ParseResult {
    ExperimentConfig config;
    bool help = false;
    std::string help_text;
};

/// argv without the program name. Throws ConfigError naming the offending
/// flag, key or value.
ParseResult parse_config(const std::vector<std::string>& args);
ParseResult parse_config(int argc, const char* const* argv);

/// Fills every field the experiment uses; validates ranges.
ExperimentConfig resolve_defaults(ExperimentConfig config);

/// `key = value` lines, loadable with --config.
std::string to_config_text(const ExperimentConfig& config);

std::vector<double> parse_real_list(std::string_view text, std::string_view key);
std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view key);

}  // namespace spectrwm
