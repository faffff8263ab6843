#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace qfreq {

// One experiment invocation: a subcommand plus the effective configuration
// after flag overrides. `canonical` is the single-line, sorted-key
// serialization of the effective config; the digest and every report header
// derive from it, so identical config + seed reproduce reports byte for byte.
struct ExperimentConfig {
    std::string subcommand;
    std::string config_path;  // empty when no file was given
    std::string out_dir = ".";
    unsigned long long rng_seed = 1;
    std::string canonical;
    std::uint64_t digest = 0;
};

// Reads the config file (JSON object), applies --out/--seed overrides,
// verifies that referenced input files exist. Throws std::invalid_argument
// with a one-line message on any problem.
ExperimentConfig load_experiment_config(const std::string& subcommand,
                                        const std::string& config_path,
                                        const std::string& out_override,
                                        const long long* seed_override);

// Dispatches to the subcommand runner; writes reports under cfg.out_dir and
// progress lines to `status`. Returns 0 when every asserted check passed,
// 1 when a check failed. Config and input problems surface as
// std::invalid_argument.
int run_experiment(const ExperimentConfig& cfg, std::ostream& status);

// Full command-line entry: parse, load, run. Exit codes: 0 ok, 1 check
// failure, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qfreq
