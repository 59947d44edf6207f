// SPDX-License-Identifier: MIT
//
// mwrelay — system parameters, fading profiles, pilot books, user drops, and
// MMSE channel estimation for the multi-way MIMO relay link.

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "mwrelay/rng.hpp"

namespace mwrelay {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// All scalar system constants. Powers are linear here; dB exists only at the
// CLI boundary.
struct SystemParams {
    int M = 1;        // relay antennas
    int K = 2;        // users
    int T = 200;      // coherence interval (symbols)
    int tau = 2;      // pilot length (symbols)
    double P_p = 1.0; // pilot power
    double P_u = 1.0; // per-user data power
    double P_r = 1.0; // relay power budget

    // Throws ConfigError naming the offending field.
    void validate() const;
};

// Per-user large-scale coefficients and the derived estimation moments:
// sigma2[k] is the channel-estimate variance, sigma2_e[k] the estimation-error
// variance; sigma2[k] + sigma2_e[k] == beta[k].
struct FadingProfile {
    Eigen::VectorXd beta;
    Eigen::VectorXd sigma2;
    Eigen::VectorXd sigma2_e;

    int users() const { return static_cast<int>(beta.size()); }
};

// Orthonormal pilot sequences; column k is user k's pilot.
struct PilotBook {
    Eigen::MatrixXcd Phi;  // tau x K, Phi^H Phi = I_K
};

// One coherence interval: true channel, MMSE estimate, estimation error.
struct ChannelRealization {
    Eigen::MatrixXcd G;      // M x K true channel
    Eigen::MatrixXcd G_hat;  // M x K MMSE estimate
    Eigen::MatrixXcd E;      // M x K error, G = G_hat + E
    FadingProfile profile;
};

// Disk cell with the relay at the center; path loss with log-normal shadowing.
struct CellGeometry {
    double D_d = 1000.0;      // disk diameter (m)
    double d_0 = 200.0;       // reference distance (m)
    double nu = 4.0;          // path-loss exponent
    double sigma_z_dB = 8.0;  // shadowing std dev (dB)
};

// First K columns of the unitary tau x tau DFT matrix (unit-norm, pairwise
// orthogonal). Throws ConfigError if tau < K.
PilotBook make_pilot_book(int tau, int K);

// Estimate/error variances of the per-user MMSE channel estimate:
// sigma2 = tau*P_p*beta^2 / (tau*P_p*beta + 1), sigma2_e = beta - sigma2.
FadingProfile estimation_moments(const Eigen::VectorXd& beta, int tau, double P_p);

// Convenience: uniform beta profile.
FadingProfile uniform_profile(int K, double beta, int tau, double P_p);

// Large-scale coefficient at distance d with shadowing gain z:
// beta = z / (1 + (d/d_0)^nu).
double beta_from_distance(const CellGeometry& geom, double d, double z);

// One random user drop: positions uniform over the disk, shadowing
// z = 10^(x/10) with x ~ N(0, sigma_z_dB^2). Draw order per user: radius
// uniform, then shadowing normal.
template <class Rng>
Eigen::VectorXd draw_user_drop(const CellGeometry& geom, int K, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Eigen::VectorXd beta(K);
    for (int k = 0; k < K; ++k) {
        const double r = 0.5 * geom.D_d * std::sqrt(u01(rng));
        std::normal_distribution<double> shadow(0.0, geom.sigma_z_dB);
        const double z = std::pow(10.0, shadow(rng) / 10.0);
        beta(k) = beta_from_distance(geom, r, z);
    }
    return beta;
}

// i.i.d. Rayleigh small-scale fading scaled by sqrt(beta_k): entries
// g_mk ~ CN(0, beta_k). Column-major draw order.
template <class Rng>
Eigen::MatrixXcd draw_channel(const SystemParams& params, const Eigen::VectorXd& beta, Rng& rng) {
    Eigen::MatrixXcd G(params.M, params.K);
    for (int k = 0; k < params.K; ++k) {
        const double scale = std::sqrt(beta(k));
        for (int m = 0; m < params.M; ++m) G(m, k) = scale * rng::cnormal(rng);
    }
    return G;
}

// MMSE estimate from an explicit pilot-phase noise matrix N_p (M x tau):
// Y_p = sqrt(tau P_p) G Phi^H + N_p, G_hat = Y_p Phi D_tilde / sqrt(tau P_p)
// with D_tilde = diag(tau P_p beta / (1 + tau P_p beta)).
ChannelRealization mmse_estimate_with_noise(const Eigen::MatrixXcd& G, const SystemParams& params,
                                            const FadingProfile& profile, const PilotBook& pilots,
                                            const Eigen::MatrixXcd& N_p);

// Equivalent shortcut given N_tilde = N_p Phi (M x K, i.i.d. CN(0,1)):
// G_hat = (G + N_tilde / sqrt(tau P_p)) D_tilde.
ChannelRealization mmse_shortcut_with_noise(const Eigen::MatrixXcd& G, const SystemParams& params,
                                            const FadingProfile& profile,
                                            const Eigen::MatrixXcd& N_tilde);

// Full pilot-phase simulation (draws N_p).
template <class Rng>
ChannelRealization mmse_estimate(const Eigen::MatrixXcd& G, const SystemParams& params,
                                 const FadingProfile& profile, const PilotBook& pilots, Rng& rng) {
    Eigen::MatrixXcd N_p(params.M, params.tau);
    for (int t = 0; t < params.tau; ++t)
        for (int m = 0; m < params.M; ++m) N_p(m, t) = rng::cnormal(rng);
    return mmse_estimate_with_noise(G, params, profile, pilots, N_p);
}

// Distribution-identical shortcut (draws N_tilde directly); the statistics
// of (G_hat, E) do not depend on which form produced them.
template <class Rng>
ChannelRealization mmse_shortcut(const Eigen::MatrixXcd& G, const SystemParams& params,
                                 const FadingProfile& profile, Rng& rng) {
    Eigen::MatrixXcd N_tilde(params.M, params.K);
    for (int k = 0; k < params.K; ++k)
        for (int m = 0; m < params.M; ++m) N_tilde(m, k) = rng::cnormal(rng);
    return mmse_shortcut_with_noise(G, params, profile, N_tilde);
}

}  // namespace mwrelay
