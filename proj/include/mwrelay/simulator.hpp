// SPDX-License-Identifier: MIT
//
// mwrelay — Monte-Carlo protocol simulator: pilot phase, multiple-access
// phase, maximum-ratio combine/precode, broadcast phase, and batch-means
// estimators of the detection-statistic moments.
//
// Determinism contract: every estimate is a pure function of
// (params, profile, n_trials, seed); the worker count never changes results.
// Trials are split into 30 contiguous batches, each trial gets its own
// counter-derived RNG stream, and threads claim whole batches.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "mwrelay/channel.hpp"
#include "mwrelay/rng.hpp"

namespace mwrelay {

// Broadcast-slot permutation: (P v)_a = v_{(a+t) mod K}. t = K yields the
// identity (useful for tests); throws ConfigError outside [1, K].
Eigen::MatrixXd permutation(int t, int K);

// Everything drawn for one coherence interval. Draw order is fixed:
// channel, estimation noise, data symbols, relay noise, user noise.
struct TrialState {
    ChannelRealization ch;
    Eigen::VectorXcd x;    // K unit-power QPSK symbols
    Eigen::VectorXcd n;    // M relay noise, CN(0,1)
    Eigen::VectorXcd w;    // K user noise, CN(0,1)
    Eigen::VectorXcd y_R;  // relay receive vector (after ma_phase)
    Eigen::VectorXcd s_R;  // relay transmit vector (after mr_combine_and_precode)
    Eigen::MatrixXcd A;    // filled only when materialize was requested
    Eigen::MatrixXcd B;
};

// Draws a full trial. full_pilot runs the explicit pilot phase (tau-symbol
// noise matrix); otherwise the distribution-identical shortcut is used.
TrialState make_trial(const SystemParams& params, const FadingProfile& profile,
                      rng::Xoshiro256pp& rng, bool full_pilot = false);

// Multiple-access phase: y_R = sqrt(P_u) G x + n.
void ma_phase(TrialState& state, const SystemParams& params);

// Maximum-ratio combine + precode for broadcast slot t:
// s_R = sqrt(alpha) Ghat* P (Ghat^H y_R). With materialize, also forms
// A = Ghat* P Ghat^H G and B = Ghat* P Ghat^H and verifies
// s_R = sqrt(alpha P_u) A x + sqrt(alpha) B n to 1e-10 (throws otherwise).
void mr_combine_and_precode(TrialState& state, const SystemParams& params, int t, double alpha,
                            bool materialize = false);

// Broadcast phase: y = G^T s_R + w, one entry per user.
Eigen::VectorXcd bc_receive(const TrialState& state, const SystemParams& params);

struct HalfWidths {
    double mean_desired = 0;
    double var_desired = 0;
    double iu = 0;
    double an = 0;
    double alpha = 0;
    double sinr = 0;
    double se = 0;
};

// Batch-means estimate of one user's first-slot statistics. Moments carry
// the same prefactors as the closed-form report (iu_hat and an_hat include
// alpha*P_u and alpha; the normalization alpha itself is taken from the
// closed form, while alpha_hat reports its sample-moment estimate).
// Half-widths are 95% confidence intervals over 30 batch means.
struct TrialBatchResult {
    long n_trials = 0;
    std::complex<double> mean_desired{0.0, 0.0};
    double var_desired = 0;
    double iu_hat = 0;
    double an_hat = 0;
    double alpha_hat = 0;
    double sinr_hat = 0;
    double se_hat = 0;
    HalfWidths half_width;
    HalfWidths std_error;
    bool undersampled = false;  // some half-width exceeds 10% of its statistic
};

// One full accumulation pass: per-user statistics plus the sum SE.
struct McSummary {
    long n_trials = 0;
    std::vector<TrialBatchResult> per_user;
    double alpha_hat = 0;
    double alpha_half_width = 0;
    double se_sum = 0;
    double se_sum_half_width = 0;
    double se_sum_std_error = 0;
    bool undersampled = false;
};

// Sample-moment estimate of the relay normalization:
// P_r / (P_u mean||A||_F^2 + mean||B||_F^2), slot 1.
double empirical_alpha(const SystemParams& params, const FadingProfile& profile, long n_trials,
                       std::uint64_t seed, int workers = 1);

// Batch-means statistics for user k (slot 1).
TrialBatchResult empirical_sinr(const SystemParams& params, const FadingProfile& profile, int k,
                                long n_trials, std::uint64_t seed, int workers = 1);

// Batch-means statistics for all users (slot 1).
McSummary run_trials_summary(const SystemParams& params, const FadingProfile& profile,
                             long n_trials, std::uint64_t seed, int workers = 1);

std::vector<TrialBatchResult> run_trials(const SystemParams& params, const FadingProfile& profile,
                                         long n_trials, std::uint64_t seed, int workers = 1);

// Protocol-path estimate of E||s_R||^2 for a given normalization (slot t).
double empirical_relay_power(const SystemParams& params, const FadingProfile& profile,
                             double alpha, int t, long n_trials, std::uint64_t seed,
                             int workers = 1);

}  // namespace mwrelay
