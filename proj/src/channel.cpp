// SPDX-License-Identifier: MIT

#include "mwrelay/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace mwrelay {

void SystemParams::validate() const {
    const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (M < 1) fail("M: antenna count must be >= 1 (got " + std::to_string(M) + ")");
    if (K < 2) fail("K: user count must be >= 2 (got " + std::to_string(K) + ")");
    if (tau < K || tau > T) {
        std::ostringstream os;
        os << "tau: pilot length must satisfy K <= tau <= T (got tau=" << tau << ", K=" << K
           << ", T=" << T << ")";
        fail(os.str());
    }
    if (!(P_p > 0.0)) fail("P_p: pilot power must be positive");
    if (!(P_u > 0.0)) fail("P_u: data power must be positive");
    if (!(P_r > 0.0)) fail("P_r: relay power must be positive");
}

PilotBook make_pilot_book(int tau, int K) {
    if (K < 1) throw ConfigError("K: user count must be >= 1");
    if (tau < K)
        throw ConfigError("tau: pilot length must be >= K (got tau=" + std::to_string(tau) +
                          ", K=" + std::to_string(K) + ")");
    PilotBook book;
    book.Phi.resize(tau, K);
    const double scale = 1.0 / std::sqrt(static_cast<double>(tau));
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < tau; ++j) {
            const double angle =
                -2.0 * std::numbers::pi * static_cast<double>(j) * static_cast<double>(k) / tau;
            book.Phi(j, k) = std::polar(scale, angle);
        }
    }
    return book;
}

FadingProfile estimation_moments(const Eigen::VectorXd& beta, int tau, double P_p) {
    if (tau < 1) throw ConfigError("tau: pilot length must be >= 1");
    if (!(P_p > 0.0)) throw ConfigError("P_p: pilot power must be positive");
    FadingProfile profile;
    const int K = static_cast<int>(beta.size());
    profile.beta = beta;
    profile.sigma2.resize(K);
    profile.sigma2_e.resize(K);
    for (int k = 0; k < K; ++k) {
        if (!(beta(k) > 0.0))
            throw ConfigError("beta: large-scale coefficients must be positive (index " +
                              std::to_string(k) + ")");
        const double tp = static_cast<double>(tau) * P_p;
        profile.sigma2(k) = tp * beta(k) * beta(k) / (tp * beta(k) + 1.0);
        profile.sigma2_e(k) = beta(k) - profile.sigma2(k);
    }
    return profile;
}

FadingProfile uniform_profile(int K, double beta, int tau, double P_p) {
    return estimation_moments(Eigen::VectorXd::Constant(K, beta), tau, P_p);
}

double beta_from_distance(const CellGeometry& geom, double d, double z) {
    return z / (1.0 + std::pow(d / geom.d_0, geom.nu));
}

namespace {

Eigen::VectorXd estimator_gain(const FadingProfile& profile, int tau, double P_p) {
    // D_tilde diagonal: tau P_p beta / (1 + tau P_p beta).
    const double tp = static_cast<double>(tau) * P_p;
    return (tp * profile.beta.array() / (1.0 + tp * profile.beta.array())).matrix();
}

}  // namespace

ChannelRealization mmse_estimate_with_noise(const Eigen::MatrixXcd& G, const SystemParams& params,
                                            const FadingProfile& profile, const PilotBook& pilots,
                                            const Eigen::MatrixXcd& N_p) {
    const double root_tp = std::sqrt(static_cast<double>(params.tau) * params.P_p);
    const Eigen::MatrixXcd Y_p = root_tp * G * pilots.Phi.adjoint() + N_p;
    const Eigen::VectorXd d_tilde = estimator_gain(profile, params.tau, params.P_p);
    ChannelRealization out;
    out.G = G;
    out.G_hat = (Y_p * pilots.Phi / root_tp) * d_tilde.asDiagonal();
    out.E = G - out.G_hat;
    out.profile = profile;
    return out;
}

ChannelRealization mmse_shortcut_with_noise(const Eigen::MatrixXcd& G, const SystemParams& params,
                                            const FadingProfile& profile,
                                            const Eigen::MatrixXcd& N_tilde) {
    const double root_tp = std::sqrt(static_cast<double>(params.tau) * params.P_p);
    const Eigen::VectorXd d_tilde = estimator_gain(profile, params.tau, params.P_p);
    ChannelRealization out;
    out.G = G;
    out.G_hat = (G + N_tilde / root_tp) * d_tilde.asDiagonal();
    out.E = G - out.G_hat;
    out.profile = profile;
    return out;
}

}  // namespace mwrelay
