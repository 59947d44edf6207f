// SPDX-License-Identifier: MIT
//
// mwrelay — experiment driver implementation.

#include "mwrelay/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "mwrelay/analytics.hpp"
#include "mwrelay/simulator.hpp"

namespace mwrelay {

namespace {

// Substream index reserved for drop draws; trial indices cannot reach it.
constexpr std::uint64_t kDropStream = 1ull << 63;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void check_grid(const std::vector<double>& grid, const char* name) {
    if (grid.empty()) throw ConfigError(std::string(name) + ": grid must be nonempty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw ConfigError(std::string(name) + ": grid must be strictly increasing");
}

// Order statistic x_{ceil(q n)} of an ascending sample.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const long n = static_cast<long>(sorted.size());
    long idx = static_cast<long>(std::ceil(q * n)) - 1;
    idx = std::max(0L, std::min(n - 1, idx));
    return sorted[static_cast<std::size_t>(idx)];
}

double closed_form_se_sum(const SystemParams& params, const FadingProfile& profile) {
    return se_per_user(params, profile).se_sum;
}

}  // namespace

FadingProfile resolve_profile(const FadingSpec& fading, const SystemParams& params,
                              std::uint64_t seed) {
    Eigen::VectorXd beta;
    if (fading.use_geometry) {
        rng::Xoshiro256pp rng = rng::trial_rng(seed, kDropStream);
        beta = draw_user_drop(fading.geometry, params.K, rng);
    } else if (!fading.beta_list.empty()) {
        if (static_cast<int>(fading.beta_list.size()) != params.K)
            throw ConfigError("beta: profile lists " + std::to_string(fading.beta_list.size()) +
                              " users but K=" + std::to_string(params.K));
        beta = Eigen::Map<const Eigen::VectorXd>(fading.beta_list.data(),
                                                 static_cast<long>(fading.beta_list.size()));
    } else {
        beta = Eigen::VectorXd::Constant(params.K, fading.beta);
    }
    return estimation_moments(beta, params.tau, params.P_p);
}

ExperimentRecord sweep(const SweepSpec& spec) {
    spec.base.validate();
    check_grid(spec.grid, "grid");

    ExperimentRecord rec;
    const bool closed =
        spec.engines == EngineChoice::closed_form || spec.engines == EngineChoice::both;
    const bool mc =
        spec.engines == EngineChoice::monte_carlo || spec.engines == EngineChoice::both;

    switch (spec.variable) {
        case SweepVariable::antennas: rec.columns.push_back("M"); break;
        case SweepVariable::pilot_length: rec.columns.push_back("tau"); break;
        case SweepVariable::snr_db: rec.columns.push_back("snr_db"); break;
    }
    if (closed) rec.columns.push_back("se_sum_closed");
    if (mc) {
        rec.columns.push_back("se_sum_mc");
        rec.columns.push_back("mc_halfwidth");
    }

    for (double v : spec.grid) {
        SystemParams params = spec.base;
        switch (spec.variable) {
            case SweepVariable::antennas:
                params.M = static_cast<int>(v);
                if (params.M != v) throw ConfigError("grid: M values must be integers");
                break;
            case SweepVariable::pilot_length:
                params.tau = static_cast<int>(v);
                if (params.tau != v) throw ConfigError("grid: tau values must be integers");
                break;
            case SweepVariable::snr_db: params.P_u = db_to_linear(v); break;
        }
        params.validate();
        // tau and P_p shape the estimation moments, so resolve per point.
        const FadingProfile profile = resolve_profile(spec.fading, params, spec.seed);

        std::vector<double> row{v};
        if (closed) row.push_back(closed_form_se_sum(params, profile));
        if (mc) {
            const McSummary s =
                run_trials_summary(params, profile, spec.n_trials, spec.seed, spec.workers);
            row.push_back(s.se_sum);
            row.push_back(s.se_sum_half_width);
            rec.undersampled = rec.undersampled || s.undersampled;
        }
        rec.rows.push_back(std::move(row));
    }
    return rec;
}

std::vector<OptimalTau> optimal_tau(const SystemParams& base, const FadingSpec& fading,
                                    const std::vector<double>& snr_list_dB, bool full_range,
                                    std::uint64_t seed) {
    base.validate();
    if (snr_list_dB.empty()) throw ConfigError("snr-list: must be nonempty");
    const int tau_hi = full_range ? base.T : std::max(base.K, base.T / 2);

    std::vector<OptimalTau> out;
    out.reserve(snr_list_dB.size());
    for (double snr_db : snr_list_dB) {
        SystemParams params = base;
        params.P_u = db_to_linear(snr_db);
        OptimalTau best{snr_db, 0, -1.0};
        for (int tau = base.K; tau <= tau_hi; ++tau) {
            params.tau = tau;
            const FadingProfile profile = resolve_profile(fading, params, seed);
            const double se = closed_form_se_sum(params, profile);
            if (se > best.se_sum) best = {snr_db, tau, se};  // strict: ties keep smaller tau
        }
        out.push_back(best);
    }
    return out;
}

ExperimentRecord cdf_over_drops(const CdfSpec& spec) {
    spec.base.validate();
    if (spec.n_drops < 100)
        throw ConfigError("drops: need at least 100 drops for a CDF, got " +
                          std::to_string(spec.n_drops));

    std::vector<double> mw(spec.n_drops), tw;
    if (spec.include_two_way) tw.resize(spec.n_drops);
    for (int d = 0; d < spec.n_drops; ++d) {
        rng::Xoshiro256pp rng = rng::trial_rng(spec.seed, static_cast<std::uint64_t>(d));
        const Eigen::VectorXd beta = draw_user_drop(spec.geometry, spec.base.K, rng);
        const FadingProfile profile = estimation_moments(beta, spec.base.tau, spec.base.P_p);
        mw[d] = closed_form_se_sum(spec.base, profile);
        if (spec.include_two_way) {
            double sum = 0;
            for (int k = 0; k < spec.base.K; ++k) sum += two_way_se(spec.base, profile, k);
            tw[d] = sum;
        }
    }
    std::sort(mw.begin(), mw.end());
    if (spec.include_two_way) std::sort(tw.begin(), tw.end());

    ExperimentRecord rec;
    rec.columns = {"cdf", "se_sum_multiway"};
    if (spec.include_two_way) rec.columns.push_back("se_sum_twoway");
    for (int d = 0; d < spec.n_drops; ++d) {
        std::vector<double> row{static_cast<double>(d + 1) / spec.n_drops, mw[d]};
        if (spec.include_two_way) row.push_back(tw[d]);
        rec.rows.push_back(std::move(row));
    }
    rec.derived.emplace_back("multiway_median", quantile_sorted(mw, 0.5));
    rec.derived.emplace_back("multiway_p90", quantile_sorted(mw, 0.9));
    if (spec.include_two_way) {
        rec.derived.emplace_back("twoway_median", quantile_sorted(tw, 0.5));
        rec.derived.emplace_back("twoway_p90", quantile_sorted(tw, 0.9));
    }
    return rec;
}

ExperimentRecord power_scaling_study(const SystemParams& base, const FadingSpec& fading,
                                     double E_u, double E_r, const std::vector<double>& M_grid,
                                     std::uint64_t seed) {
    base.validate();
    check_grid(M_grid, "scale-m-grid");
    if (E_u <= 0 || E_r <= 0) throw ConfigError("eu-db/er-db: scaled powers must be positive");

    const FadingProfile profile = resolve_profile(fading, base, seed);
    const AsymptoticLimits lim = asymptotic_limits(base, profile, E_u, E_r, 0);

    ExperimentRecord rec;
    rec.columns = {"M",           "se_user_scaled",  "gap_user",  "se_relay_scaled",
                   "gap_relay",   "se_both_scaled",  "gap_both"};
    for (double Mv : M_grid) {
        SystemParams p = base;
        p.M = static_cast<int>(Mv);
        if (p.M != Mv || p.M < 1) throw ConfigError("scale-m-grid: M values must be integers >= 1");

        SystemParams user = p, relay = p, both = p;
        user.P_u = E_u / p.M;
        relay.P_r = E_r / p.M;
        both.P_u = E_u / p.M;
        both.P_r = E_r / p.M;

        const double se_u = se_per_user(user, profile).se(0);
        const double se_r = se_per_user(relay, profile).se(0);
        const double se_b = se_per_user(both, profile).se(0);
        rec.rows.push_back({Mv, se_u, std::abs(1.0 - se_u / lim.se_user_scaled), se_r,
                            std::abs(1.0 - se_r / lim.se_relay_scaled), se_b,
                            std::abs(1.0 - se_b / lim.se_both_scaled)});
    }
    rec.derived.emplace_back("limit_user_scaled", lim.se_user_scaled);
    rec.derived.emplace_back("limit_relay_scaled", lim.se_relay_scaled);
    rec.derived.emplace_back("limit_both_scaled", lim.se_both_scaled);
    rec.derived.emplace_back("xi", lim.xi);
    return rec;
}

}  // namespace mwrelay
