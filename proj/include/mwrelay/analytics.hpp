// SPDX-License-Identifier: MIT
//
// mwrelay — closed-form engine: relay normalization factor, exact SINR/SE
// moments for maximum-ratio multi-way relaying under MMSE channel estimates,
// power-scaling limits, and the two-way baseline.
//
// The second-order moments here are the exact finite-(M, K) expectations of
// the defining statistics (validated against independent sampling oracles),
// including the K = 2 wrap-around case where the cyclic neighbor sets
// collapse.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "mwrelay/channel.hpp"

namespace mwrelay {

// Per-user moment terms of the first-slot detection statistic
// g_k^T a_{k+1}. iu_k and an_k include their alpha/P_u prefactors.
struct ClosedFormTerms {
    double a_ki = 0;       // M^3-order variance coefficient for the pair (k, k+1)
    double b_ki = 0;       // M^2-order coefficient
    double c_ki = 0;       // M^1-order coefficient
    double var_k = 0;      // Var{g_k^T a_{k+1}}
    double iu_k = 0;       // inter-user interference power
    double an_k = 0;       // amplified-noise power
    double desired_k = 0;  // |E{g_k^T a_{k+1}}|^2
};

struct ClosedFormReport {
    double alpha1 = 0;
    std::vector<ClosedFormTerms> terms;  // per user
    Eigen::VectorXd sinr;
    Eigen::VectorXd se;
    double se_sum = 0;
};

// Limits of the per-user spectral efficiency under 1/M power scaling, with
// pilot power (and hence the sigma2 profile) held fixed.
struct AsymptoticLimits {
    double se_user_scaled = 0;   // P_u = E_u/M
    double se_relay_scaled = 0;  // P_r = E_r/M
    double se_both_scaled = 0;   // both scaled
    double xi = 0;               // constant of the both-scaled limit
};

// Intermediate defining expectations behind the normalization factor and the
// variance decomposition, exposed separately for oracle cross-checks.
// Q1_k = E||[Ghat* Pi Ghat^H Ghat]_k||^2, Q2_k the same with the estimation
// error in place of the estimate column, Q3 per antenna from E||B||_F^2;
// T1..T4 split E|g_k^T a_{k+1}|^2 over the estimate/error decomposition of
// the two outer channel vectors.
struct AppendixMoments {
    Eigen::VectorXd Q1, Q2;
    double Q3_per_antenna = 0;
    Eigen::VectorXd T1, T2, T3, T4;
};

// Relay normalization factor enforcing the long-term transmit power budget
// in the first slot.
double alpha1_closed_form(const SystemParams& params, const FadingProfile& profile);

// Exact per-user moment terms for the first slot.
ClosedFormTerms closed_form_terms(const SystemParams& params, const FadingProfile& profile, int k);

// First-slot SINR of user k.
double sinr_k(const SystemParams& params, const FadingProfile& profile, int k);

// SINR of user k in broadcast slot t (detection target x_{k+t}), via cyclic
// relabeling onto the first-slot closed form. Requires gcd(t, K) = 1; the
// simulator handles arbitrary slots. Assumes the relay scales slot t to meet
// the power budget in that slot, i.e. uses the relabeled profile's
// normalization (slots differ under asymmetric fading).
double sinr_k_slot(const SystemParams& params, const FadingProfile& profile, int k, int t);

// Full report: alpha, per-user terms, SINR, SE, and the sum SE.
ClosedFormReport se_per_user(const SystemParams& params, const FadingProfile& profile);

// Spectral-efficiency limits under 1/M power scaling, evaluated for user k.
AsymptoticLimits asymptotic_limits(const SystemParams& params, const FadingProfile& profile,
                                   double E_u, double E_r, int k = 0);

// Two-way baseline: user k exchanges with `partner` (default cyclic k+1)
// through the relay as a 2-user system with the profile restricted to the
// pair; per-user pre-log is (T-tau)/T * 1/K.
double two_way_se(const SystemParams& params, const FadingProfile& profile, int k,
                  int partner = -1);

// Defining-expectation intermediates (see struct docs).
AppendixMoments appendix_moment_oracles(const SystemParams& params, const FadingProfile& profile);

inline double prelog_multi_way(const SystemParams& p) {
    return (static_cast<double>(p.T - p.tau) / p.T) *
           (static_cast<double>(p.K - 1) / p.K);
}

}  // namespace mwrelay
