#include "spectrwm/config.hpp"

#include "spectrwm/jump_kernel.hpp"
#include "spectrwm/semidiscretization.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace spectrwm {

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{
        "heat-accuracy", "heat-cn-compare", "langevin-ergodic", "burgers",
        "kpz",           "holding-scaling", "consistency"};
    return names;
}

ExperimentKind experiment_from_name(std::string_view name) {
    const auto& names = experiment_names();
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k] == name) return static_cast<ExperimentKind>(k);
    }
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown experiment '" + std::string(name) + "' (valid: " + valid + ")");
}

std::string_view to_string(ExperimentKind kind) {
    return experiment_names().at(static_cast<std::size_t>(kind));
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

double to_real(const std::string& text, std::string_view key) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
        throw ConfigError("invalid value '" + text + "' for " + std::string(key) +
                          " (expected a real number)");
    }
    return value;
}

std::uint64_t to_unsigned(const std::string& text, std::string_view key) {
    const std::string t = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ConfigError("invalid value '" + text + "' for " + std::string(key) +
                          " (expected a non-negative integer)");
    }
    return value;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t k = 0; k < values.size(); ++k) out << (k ? "," : "") << values[k];
    return out.str();
}

std::string real_text(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text, std::string_view key) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_real(item, key));
    if (out.empty()) throw ConfigError("empty list for " + std::string(key));
    return out;
}

std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view key) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) out.push_back(to_unsigned(item, key));
    if (out.empty()) throw ConfigError("empty list for " + std::string(key));
    return out;
}

namespace {

struct KeyInfo {
    const char* name;
    const char* help;
};

constexpr KeyInfo kKeys[] = {
    {"variant", "academic | fast | detailed-balance (comma list for holding-scaling)"},
    {"scheme", "central | one-sided nonlinearity stencil"},
    {"initial", "trivial | bump | sinusoid | high-frequency | high-energy"},
    {"n", "grid points"},
    {"h", "jump size"},
    {"T", "final time"},
    {"replicas", "independent replicas"},
    {"seed", "master seed (fallback: SPECTRWM_SEED)"},
    {"threads", "worker threads (0 = all cores)"},
    {"sigma", "noise strength"},
    {"lambda", "heat damping or KPZ coefficient"},
    {"nu", "Burgers viscosity"},
    {"h-list", "comma-separated jump sizes"},
    {"n-list", "comma-separated grid sizes"},
    {"cn-n", "grid points for the Crank-Nicolson run"},
    {"dt", "Crank-Nicolson time step"},
    {"events", "target event count of the long Langevin run"},
    {"rho", "pCN step parameter"},
    {"mass", "pCN reference mass for undamped modes"},
    {"chain-steps", "pCN chain length"},
    {"burn-in", "discarded fraction of chain or trajectory"},
    {"surrogate-h", "jump size of the one-cell Langevin run"},
    {"samples", "holding-time draws per row"},
    {"runs", "seeded runs per boundedness verdict"},
    {"threshold", "divergence threshold on max|u| and |mean u|"},
    {"max-steps", "event budget per trajectory"},
    {"functions", "random quadratic test functions"},
    {"states", "random states per test function"},
    {"state-scale", "standard deviation of the random states"},
};

void assign(ExperimentConfig& c, const std::string& key, const std::string& value) {
    const std::string flag = "--" + key;
    if (key == "variant") c.variant = trim(value);
    else if (key == "scheme") c.scheme = trim(value);
    else if (key == "initial") c.initial = trim(value);
    else if (key == "n") c.n = to_unsigned(value, flag);
    else if (key == "h") c.h = to_real(value, flag);
    else if (key == "T") c.T = to_real(value, flag);
    else if (key == "replicas") c.replicas = to_unsigned(value, flag);
    else if (key == "seed") c.seed = to_unsigned(value, flag);
    else if (key == "threads") c.threads = static_cast<unsigned>(to_unsigned(value, flag));
    else if (key == "sigma") c.sigma = to_real(value, flag);
    else if (key == "lambda") c.lambda = to_real(value, flag);
    else if (key == "nu") c.nu = to_real(value, flag);
    else if (key == "h-list") c.h_list = parse_real_list(value, flag);
    else if (key == "n-list") c.n_list = parse_size_list(value, flag);
    else if (key == "cn-n") c.cn_n = to_unsigned(value, flag);
    else if (key == "dt") c.dt = to_real(value, flag);
    else if (key == "events") c.events = to_real(value, flag);
    else if (key == "rho") c.rho = to_real(value, flag);
    else if (key == "mass") c.mass = to_real(value, flag);
    else if (key == "chain-steps") c.chain_steps = to_unsigned(value, flag);
    else if (key == "burn-in") c.burn_in = to_real(value, flag);
    else if (key == "surrogate-h") c.surrogate_h = to_real(value, flag);
    else if (key == "samples") c.samples = to_unsigned(value, flag);
    else if (key == "runs") c.runs = to_unsigned(value, flag);
    else if (key == "threshold") c.threshold = to_real(value, flag);
    else if (key == "max-steps") c.max_steps = to_real(value, flag);
    else if (key == "functions") c.functions = to_unsigned(value, flag);
    else if (key == "states") c.states = to_unsigned(value, flag);
    else if (key == "state-scale") c.state_scale = to_real(value, flag);
    else throw ConfigError("unknown key '" + key + "'");
}

}  // namespace

ParseResult parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Markov jump process simulation of 1D periodic SPDEs", "spectrwm"};
    app.set_help_flag("--help", "print this help and exit");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "flat `key = value` file; flags take precedence");

    std::string experiment;
    std::string out;
    app.add_option("experiment,--experiment", experiment, "experiment to run")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    app.add_option("--out", out, "output directory (default spectrwm-out)");

    // Config-file values are split at commas, so every key collects a list and
    // is rejoined before conversion.
    std::map<std::string, std::vector<std::string>> raw;
    std::map<std::string, CLI::Option*> options;
    for (const auto& key : kKeys) {
        auto* opt = app.add_option(std::string("--") + key.name, raw[key.name], key.help)
                        ->delimiter(',')
                        ->expected(1);
        const std::string_view name = key.name;
        opt->multi_option_policy(name == "h-list" || name == "n-list" || name == "variant"
                                     ? CLI::MultiOptionPolicy::TakeAll
                                     : CLI::MultiOptionPolicy::TakeLast);
        if (std::string_view(key.name) == "seed") opt->envname("SPECTRWM_SEED");
        options[key.name] = opt;
    }

    ParseResult result;
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        result.help = true;
        result.help_text = app.help();
        return result;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    result.config.experiment = experiment_from_name(experiment);
    if (!out.empty()) result.config.out = out;
    for (const auto& [key, opt] : options) {
        if (opt->count() == 0 && raw[key].empty()) continue;
        std::string joined;
        for (const auto& part : raw[key]) joined += (joined.empty() ? "" : ",") + part;
        assign(result.config, key, joined);
    }
    return result;
}

ParseResult parse_config(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return parse_config(args);
}

namespace {

template <typename T>
void default_to(std::optional<T>& field, T value) {
    if (!field) field = std::move(value);
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

ExperimentConfig resolve_defaults(ExperimentConfig c) {
    default_to(c.seed, std::uint64_t{20240611});
    default_to(c.threads, 0u);
    switch (c.experiment) {
        case ExperimentKind::HeatAccuracy:
            default_to(c.variant, std::string("fast"));
            default_to(c.initial, std::string("trivial"));
            default_to(c.n, std::size_t{16});
            default_to(c.lambda, 1.0);
            default_to(c.T, 1.0);
            default_to(c.h_list, std::vector<double>{0.2, 0.1, 0.05, 0.025});
            default_to(c.replicas, std::size_t{10'000});
            default_to(c.max_steps, 4e9);
            break;
        case ExperimentKind::HeatCnCompare:
            default_to(c.variant, std::string("fast"));
            default_to(c.initial, std::string("high-frequency"));
            default_to(c.n, std::size_t{11});
            default_to(c.cn_n, std::size_t{101});
            default_to(c.dt, Grid::kLength / static_cast<double>(*c.cn_n));
            default_to(c.lambda, 0.0);
            default_to(c.T, 1.0);
            default_to(c.h, 0.05);
            default_to(c.replicas, std::size_t{1'000});
            default_to(c.max_steps, 4e9);
            break;
        case ExperimentKind::LangevinErgodic:
            default_to(c.variant, std::string("detailed-balance"));
            default_to(c.initial, std::string("trivial"));
            default_to(c.n, std::size_t{20});
            default_to(c.h, std::sqrt(Grid::kLength / static_cast<double>(*c.n)));
            default_to(c.events, 1e7);
            default_to(c.rho, 0.9);
            default_to(c.mass, 1e-2);
            default_to(c.chain_steps, std::size_t{1'000'000});
            default_to(c.burn_in, 0.2);
            default_to(c.surrogate_h, 0.1);
            default_to(c.max_steps, 4e9);
            break;
        case ExperimentKind::Burgers:
            default_to(c.variant, std::string("academic"));
            default_to(c.scheme, std::string("central"));
            default_to(c.initial, std::string("trivial"));
            default_to(c.n, std::size_t{16});
            default_to(c.sigma, 2.0);
            default_to(c.nu, 0.3);
            default_to(c.h, 0.1);
            default_to(c.T, 1.0);
            default_to(c.runs, std::size_t{10});
            default_to(c.threshold, 1e3);
            default_to(c.max_steps, 1e8);
            break;
        case ExperimentKind::Kpz:
            default_to(c.variant, std::string("academic"));
            default_to(c.scheme, std::string("central"));
            default_to(c.initial, std::string("trivial"));
            default_to(c.n, std::size_t{16});
            default_to(c.lambda, 3.0);
            default_to(c.h, 0.1);
            default_to(c.T, 1.0);
            default_to(c.runs, std::size_t{10});
            default_to(c.threshold, 1e3);
            default_to(c.max_steps, 1e8);
            break;
        case ExperimentKind::HoldingScaling:
            default_to(c.variant, std::string("academic,fast"));
            default_to(c.h_list, std::vector<double>{0.1, 0.05});
            default_to(c.n_list, std::vector<std::size_t>{8, 16, 32});
            default_to(c.lambda, 0.0);
            default_to(c.samples, std::size_t{100'000});
            break;
        case ExperimentKind::Consistency:
            default_to(c.n, std::size_t{8});
            default_to(c.lambda, 1.0);
            default_to(c.h_list, std::vector<double>{0.2, 0.1, 0.05, 0.025});
            default_to(c.functions, std::size_t{5});
            default_to(c.states, std::size_t{5});
            default_to(c.state_scale, 0.5);
            break;
    }

    default_to(c.sigma, 1.0);
    require(*c.sigma > 0.0, "--sigma must be positive");
    if (c.n) require(*c.n >= 2, "--n must be at least 2");
    if (c.h) require(*c.h > 0.0, "--h must be positive");
    if (c.T) require(*c.T >= 0.0, "--T must be non-negative");
    if (c.replicas) require(*c.replicas >= 2, "--replicas must be at least 2");
    if (c.nu) require(*c.nu > 0.0, "--nu must be positive");
    if (c.h_list) {
        require(c.h_list->size() >= 3 || c.experiment == ExperimentKind::HoldingScaling,
                "--h-list needs at least three values");
        for (double h : *c.h_list) require(h > 0.0, "--h-list values must be positive");
    }
    if (c.n_list) {
        for (std::size_t n : *c.n_list) require(n >= 2, "--n-list values must be at least 2");
    }
    if (c.cn_n) require(*c.cn_n >= 2, "--cn-n must be at least 2");
    if (c.dt) require(*c.dt > 0.0, "--dt must be positive");
    if (c.rho) require(*c.rho > 0.0 && *c.rho < 1.0, "--rho must lie in (0, 1)");
    if (c.mass) require(*c.mass > 0.0, "--mass must be positive");
    if (c.burn_in) require(*c.burn_in >= 0.0 && *c.burn_in < 1.0, "--burn-in must lie in [0, 1)");
    if (c.events) require(*c.events >= 1.0, "--events must be at least 1");
    if (c.chain_steps) require(*c.chain_steps >= 100, "--chain-steps must be at least 100");
    if (c.samples) require(*c.samples >= 2, "--samples must be at least 2");
    if (c.runs) require(*c.runs >= 1, "--runs must be at least 1");
    if (c.threshold) require(*c.threshold > 0.0, "--threshold must be positive");
    if (c.max_steps) require(*c.max_steps >= 1.0, "--max-steps must be at least 1");
    if (c.functions) require(*c.functions >= 1, "--functions must be at least 1");
    if (c.states) require(*c.states >= 1, "--states must be at least 1");
    if (c.state_scale) require(*c.state_scale > 0.0, "--state-scale must be positive");

    try {
        if (c.initial) (void)initial_condition_from_name(*c.initial);
        if (c.scheme) (void)scheme_from_name(*c.scheme);
        if (c.variant) {
            for (const auto& v : split_list(*c.variant)) (void)variant_from_name(v);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

std::string to_config_text(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "experiment = " << to_string(c.experiment) << '\n';
    out << "out = \"" << c.out.generic_string() << "\"\n";
    auto put = [&](const char* key, const auto& field) {
        if (!field) return;
        using T = std::decay_t<decltype(*field)>;
        out << key << " = ";
        if constexpr (std::is_same_v<T, std::string>) {
            out << '"' << *field << '"';
        } else if constexpr (std::is_same_v<T, double>) {
            out << real_text(*field);
        } else if constexpr (std::is_same_v<T, std::vector<double>> ||
                             std::is_same_v<T, std::vector<std::size_t>>) {
            out << '"' << join(*field) << '"';
        } else {
            out << *field;
        }
        out << '\n';
    };
    put("variant", c.variant);
    put("scheme", c.scheme);
    put("initial", c.initial);
    put("n", c.n);
    put("h", c.h);
    put("T", c.T);
    put("replicas", c.replicas);
    put("seed", c.seed);
    put("threads", c.threads);
    put("sigma", c.sigma);
    put("lambda", c.lambda);
    put("nu", c.nu);
    put("h-list", c.h_list);
    put("n-list", c.n_list);
    put("cn-n", c.cn_n);
    put("dt", c.dt);
    put("events", c.events);
    put("rho", c.rho);
    put("mass", c.mass);
    put("chain-steps", c.chain_steps);
    put("burn-in", c.burn_in);
    put("surrogate-h", c.surrogate_h);
    put("samples", c.samples);
    put("runs", c.runs);
    put("threshold", c.threshold);
    put("max-steps", c.max_steps);
    put("functions", c.functions);
    put("states", c.states);
    put("state-scale", c.state_scale);
    return out.str();
}

}  // namespace spectrwm
