// SPDX-License-Identifier: MIT

#include <cmath>
#include <string>

#include "doctest.h"
#include "mwrelay/channel.hpp"

using namespace mwrelay;

namespace {

SystemParams small_params() {
    SystemParams p;
    p.M = 8;
    p.K = 3;
    p.T = 200;
    p.tau = 5;
    p.P_p = 1.0;
    p.P_u = 1.0;
    p.P_r = 10.0;
    return p;
}

bool message_names(const ConfigError& e, const std::string& key) {
    return std::string(e.what()).find(key) != std::string::npos;
}

}  // namespace

TEST_CASE("parameter validation names the offending field") {
    SystemParams p = small_params();
    p.M = 0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("M"), ConfigError);
    p = small_params();
    p.K = 1;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("K"), ConfigError);
    p = small_params();
    p.tau = 2;  // < K
    try {
        p.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(message_names(e, "tau"));
    }
    p = small_params();
    p.tau = p.T + 1;
    try {
        p.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(message_names(e, "tau"));
    }
    p = small_params();
    p.P_u = 0.0;
    try {
        p.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(message_names(e, "P_u"));
    }
    CHECK_NOTHROW(small_params().validate());
}

TEST_CASE("estimation moments match hand values") {
    // tau*P_p*beta = 1 halves the energy: sigma2 = 1/2.
    auto p1 = estimation_moments(Eigen::VectorXd::Constant(2, 1.0), 2, 0.5);
    CHECK(p1.sigma2(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p1.sigma2_e(0) == doctest::Approx(0.5).epsilon(1e-15));

    // tau*P_p = 10, beta = 1: sigma2 = 10/11.
    auto p2 = estimation_moments(Eigen::VectorXd::Constant(3, 1.0), 10, 1.0);
    CHECK(p2.sigma2(1) == doctest::Approx(10.0 / 11.0).epsilon(1e-15));

    // Asymmetric: beta = 1/2, tau = 3, P_p = 1 -> 3*(1/4)/(3*(1/2)+1) = 3/10.
    Eigen::VectorXd beta(3);
    beta << 1.0, 0.5, 2.0;
    auto p3 = estimation_moments(beta, 3, 1.0);
    CHECK(p3.sigma2(0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(p3.sigma2(1) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(p3.sigma2(2) == doctest::Approx(12.0 / 7.0).epsilon(1e-15));
    for (int k = 0; k < 3; ++k)
        CHECK(p3.sigma2(k) + p3.sigma2_e(k) == doctest::Approx(beta(k)).epsilon(1e-15));

    CHECK_THROWS_AS(estimation_moments(Eigen::VectorXd::Constant(2, -1.0), 2, 1.0), ConfigError);
}

TEST_CASE("pilot book columns are orthonormal") {
    for (int tau : {2, 3, 5, 8, 64, 512}) {
        const int K = std::min(tau, 7);
        const PilotBook pb = make_pilot_book(tau, K);
        REQUIRE(pb.Phi.rows() == tau);
        REQUIRE(pb.Phi.cols() == K);
        const Eigen::MatrixXcd gram = pb.Phi.adjoint() * pb.Phi;
        CHECK((gram - Eigen::MatrixXcd::Identity(K, K)).cwiseAbs().maxCoeff() < 1e-12);
    }
    try {
        make_pilot_book(3, 4);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(message_names(e, "tau"));
    }
}

TEST_CASE("full pilot phase and shortcut agree on shared noise") {
    const SystemParams p = small_params();
    Eigen::VectorXd beta(3);
    beta << 1.0, 0.5, 2.0;
    const FadingProfile profile = estimation_moments(beta, p.tau, p.P_p);
    const PilotBook pb = make_pilot_book(p.tau, p.K);

    auto g = rng::trial_rng(11, 0);
    const Eigen::MatrixXcd G = draw_channel(p, beta, g);
    Eigen::MatrixXcd N_p(p.M, p.tau);
    for (int t = 0; t < p.tau; ++t)
        for (int m = 0; m < p.M; ++m) N_p(m, t) = rng::cnormal(g);

    const ChannelRealization full = mmse_estimate_with_noise(G, p, profile, pb, N_p);
    // The shortcut consumes the projected noise N_tilde = N_p * Phi.
    const ChannelRealization sc = mmse_shortcut_with_noise(G, p, profile, N_p * pb.Phi);

    CHECK((full.G_hat - sc.G_hat).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((full.E - sc.E).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((full.G - (full.G_hat + full.E)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("estimate and error have the predicted variances and are uncorrelated") {
    SystemParams p = small_params();
    p.M = 16;
    Eigen::VectorXd beta(3);
    beta << 1.0, 0.5, 2.0;
    const FadingProfile profile = estimation_moments(beta, p.tau, p.P_p);

    const int n_trials = 4000;
    Eigen::VectorXd sum_ghat2 = Eigen::VectorXd::Zero(p.K);
    Eigen::VectorXd sum_e2 = Eigen::VectorXd::Zero(p.K);
    Eigen::VectorXcd sum_cross = Eigen::VectorXcd::Zero(p.K);
    for (int i = 0; i < n_trials; ++i) {
        auto g = rng::trial_rng(12, static_cast<std::uint64_t>(i));
        const Eigen::MatrixXcd G = draw_channel(p, beta, g);
        const ChannelRealization ch = mmse_shortcut(G, p, profile, g);
        for (int k = 0; k < p.K; ++k) {
            sum_ghat2(k) += ch.G_hat.col(k).squaredNorm();
            sum_e2(k) += ch.E.col(k).squaredNorm();
            sum_cross(k) += ch.G_hat.col(k).dot(ch.E.col(k));  // conjugated dot
        }
    }
    // |entry|^2 of CN(0, s) has mean s and variance s^2, so the relative
    // standard error of the mean over n samples is 1/sqrt(n) ~ 0.4%.
    const double n_samples = static_cast<double>(n_trials) * p.M;
    const double rel_tol = 5.0 / std::sqrt(n_samples);
    for (int k = 0; k < p.K; ++k) {
        CHECK(sum_ghat2(k) / n_samples ==
              doctest::Approx(profile.sigma2(k)).epsilon(rel_tol));
        CHECK(sum_e2(k) / n_samples ==
              doctest::Approx(profile.sigma2_e(k)).epsilon(rel_tol));
        // MMSE orthogonality: E{ghat^H e} = 0.
        CHECK(std::abs(sum_cross(k)) / n_samples <
              5.0 * std::sqrt(profile.sigma2(k) * profile.sigma2_e(k) / n_samples));
    }
}

TEST_CASE("perfect-CSI limit: estimate converges to the channel") {
    SystemParams p = small_params();
    p.P_p = 1e12;
    const Eigen::VectorXd beta = Eigen::VectorXd::Constant(p.K, 1.0);
    const FadingProfile profile = estimation_moments(beta, p.tau, p.P_p);
    CHECK(profile.sigma2_e(0) < 1e-12);
    auto g = rng::trial_rng(13, 0);
    const Eigen::MatrixXcd G = draw_channel(p, beta, g);
    const ChannelRealization ch = mmse_shortcut(G, p, profile, g);
    CHECK((ch.G_hat - G).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("disk drops respect the path-loss envelope") {
    CellGeometry geom;  // defaults: D_d=1000, d_0=200, nu=4, sigma_z=8 dB
    auto g = rng::trial_rng(14, 0);
    const Eigen::VectorXd beta = draw_user_drop(geom, 64, g);
    CHECK(beta.minCoeff() > 0.0);

    // With no shadowing, beta is bounded by the path loss at r=0 and r=D_d/2.
    geom.sigma_z_dB = 0.0;
    const double lo = 1.0 / (1.0 + std::pow(2.5, 4));  // r = 500, d_0 = 200
    for (int i = 0; i < 500; ++i) {
        auto h = rng::trial_rng(15, static_cast<std::uint64_t>(i));
        const Eigen::VectorXd b = draw_user_drop(geom, 4, h);
        CHECK(b.maxCoeff() <= 1.0);
        CHECK(b.minCoeff() >= lo);
    }
    CHECK(beta_from_distance(geom, 200.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
}
