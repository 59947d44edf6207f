// SPDX-License-Identifier: MIT
//
// mwrelay — experiment drivers: sum-SE sweeps over antennas / pilot length /
// SNR, the optimal-pilot-length search, CDFs over random user drops with the
// two-way baseline, and the three power-scaling convergence studies.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mwrelay/channel.hpp"

namespace mwrelay {

enum class SweepVariable { antennas, pilot_length, snr_db };
enum class EngineChoice { closed_form, monte_carlo, both };

// Large-scale fading source: a fixed uniform beta, or one random drop from a
// disk geometry (drawn deterministically from the seed).
struct FadingSpec {
    bool use_geometry = false;
    double beta = 1.0;
    std::vector<double> beta_list;  // optional explicit per-user profile
    CellGeometry geometry;
};

struct SweepSpec {
    SweepVariable variable = SweepVariable::antennas;
    std::vector<double> grid;  // strictly increasing; tau grid within [K, T]
    SystemParams base;
    FadingSpec fading;
    EngineChoice engines = EngineChoice::both;
    long n_trials = 100000;
    std::uint64_t seed = 0;
    int workers = 1;
};

struct CdfSpec {
    int n_drops = 500;  // at least 100
    CellGeometry geometry;
    SystemParams base;
    bool include_two_way = true;
    std::uint64_t seed = 0;
};

// Tabular experiment output: config echo, named columns, numeric rows, and
// derived scalars (argmax tau, quantiles, ...).
struct ExperimentRecord {
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, double>> derived;
    bool undersampled = false;
};

// Resolves the fading spec to a per-user profile (geometry draws one drop
// from substream 2^63 of the seed, disjoint from all trial substreams).
FadingProfile resolve_profile(const FadingSpec& fading, const SystemParams& params,
                              std::uint64_t seed);

// Evaluates sum SE on the grid with the requested engines. SNR grids are in
// dB and map to P_u.
ExperimentRecord sweep(const SweepSpec& spec);

struct OptimalTau {
    double snr_db = 0;
    int tau_star = 0;
    double se_sum = 0;
};

// Integer argmax of closed-form sum SE over tau in [K, T/2] (full range
// [K, T] on request); ties break toward smaller tau. One result per SNR.
std::vector<OptimalTau> optimal_tau(const SystemParams& base, const FadingSpec& fading,
                                    const std::vector<double>& snr_list_dB,
                                    bool full_range = false, std::uint64_t seed = 0);

// Closed-form sum-SE samples over random user drops, sorted per protocol
// (multi-way and pairwise two-way share each drop's beta vector). Derived
// outputs: median and 90th percentile per protocol.
ExperimentRecord cdf_over_drops(const CdfSpec& spec);

// For each M on the (geometrically spaced) grid, closed-form per-user SE of
// user 0 under the three 1/M power-scaling regimes against their limits.
ExperimentRecord power_scaling_study(const SystemParams& base, const FadingSpec& fading,
                                     double E_u, double E_r, const std::vector<double>& M_grid,
                                     std::uint64_t seed = 0);

}  // namespace mwrelay
