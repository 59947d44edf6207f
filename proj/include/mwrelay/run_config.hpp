// SPDX-License-Identifier: MIT
//
// mwrelay — CLI configuration and dispatch. Powers cross this boundary in dB
// and are converted to linear exactly once (in RunConfig::params / fading /
// scaled_powers). A flat key=value config file can seed any run; explicit
// flags override file entries.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mwrelay/channel.hpp"
#include "mwrelay/experiments.hpp"
#include "mwrelay/result_table.hpp"

namespace mwrelay {

struct RunConfig {
    std::string subcommand;

    int M = 64;
    int K = 5;
    int T = 200;
    int tau = -1;  // -1: defaults to K
    double snr_db = 0.0;
    double pp_db = 0.0;
    double pr_db = 10.0;

    std::string beta = "1";  // uniform value or comma-separated per-user list
    bool use_geometry = false;
    double disk_diameter = 1000.0;
    double ref_distance = 200.0;
    double path_loss_exp = 4.0;
    double shadow_std_db = 8.0;

    long trials = 100000;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string engines = "both";  // closed | mc | both

    std::string m_grid = "10,20,50,100,200,300,400,500";
    std::string snr_list = "-10,-5,0,5,10";
    std::string scale_m_grid = "64,128,256,512,1024,2048,4096";
    bool full_tau_range = false;
    int drops = 500;
    double eu_db = 10.0;
    double er_db = 10.0;

    std::string out;  // empty or "-": stdout
    bool json = false;

    SystemParams params() const;   // validated; dB -> linear here
    FadingSpec fading() const;
    EngineChoice engine_choice() const;
    std::vector<double> m_grid_values() const;
    std::vector<double> snr_list_values() const;
    std::vector<double> scale_m_grid_values() const;
    double E_u() const;
    double E_r() const;

    bool operator==(const RunConfig&) const = default;
};

// Thrown after printing --help/--version; carries the exit code.
struct CliExit {
    int code = 0;
};

// Parses tokens (argv without the program name). Supports
// `--config <file>` with flat key=value lines; every other token is a
// subcommand name or a flag. Throws ConfigError on invalid input, CliExit
// after help output.
RunConfig parse_config(const std::vector<std::string>& args);

// Runs the configured experiment and builds the output table (config echo,
// columns, rows, derived scalars).
ResultTable dispatch(const RunConfig& cfg);

// Echo of every setting as (key, value) pairs; feeding them back through
// parse_config reproduces cfg exactly.
std::vector<std::pair<std::string, std::string>> echo_config(const RunConfig& cfg);

// Full entry point: parse, dispatch, write. Exit codes: 0 success, 1 config
// or I/O error, 2 result flagged as undersampled.
int run_cli(int argc, const char* const* argv);

}  // namespace mwrelay
