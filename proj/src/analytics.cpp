// SPDX-License-Identifier: MIT
//
// mwrelay — closed-form engine implementation. All second-order moments are
// exact finite-(M, K) expectations over channel, estimation noise, symbols,
// and receiver noise; the K = 2 case carries additional wrap-around terms
// because the cyclic neighbors k-1 and k+1 coincide there.

#include "mwrelay/analytics.hpp"

#include <cmath>
#include <numeric>

namespace mwrelay {

namespace {

// Cyclic profile accessors.
struct Cyc {
    const FadingProfile& p;
    int K;
    double s(int j) const { return p.sigma2(mod(j)); }   // estimate variance
    double e(int j) const { return p.sigma2_e(mod(j)); } // error variance
    double b(int j) const { return p.beta(mod(j)); }
    int mod(int j) const { return ((j % K) + K) % K; }
};

double pair_sum(const Cyc& c) {  // S = sum_k s_k s_{k+1}
    double S = 0;
    for (int j = 0; j < c.K; ++j) S += c.s(j) * c.s(j + 1);
    return S;
}

void check_inputs(const SystemParams& params, const FadingProfile& profile) {
    params.validate();
    if (profile.users() != params.K)
        throw ConfigError("beta: fading profile has " + std::to_string(profile.users()) +
                          " users but K=" + std::to_string(params.K));
}

// Raw (pre-normalization) per-user moments of the first-slot statistic.
struct RawMoments {
    double mean_d;   // E{g_k^T a_{k+1}} (real)
    double var;      // Var{g_k^T a_{k+1}}
    double iu_raw;   // sum_{i != k+1} E|g_k^T a_i|^2
    double an_raw;   // E||g_k^T B||^2
};

RawMoments raw_moments(const SystemParams& params, const Cyc& c, int k) {
    const double M = params.M;
    const int K = params.K;
    const double S = pair_sum(c);

    auto a_ki = [&](int kk, int i) {
        return c.s(kk) * c.s(kk) * c.s(kk + 1) * c.b(i) + c.s(i) * c.s(i) * c.s(i - 1) * c.b(kk);
    };
    auto b_ki = [&](int kk, int i) { return c.b(kk) * c.b(i) * S; };
    auto c_ki = [&](int kk, int i) {
        return c.s(kk) * c.s(kk) * c.s(kk - 1) * c.b(i) + c.s(i) * c.s(i) * c.s(i + 1) * c.b(kk);
    };

    RawMoments r{};
    const double sk = c.s(k), sk1 = c.s(k + 1), skm = c.s(k - 1);
    const double ek = c.e(k), bk = c.b(k);

    r.mean_d = (K == 2 ? M * (M + 1) : M * M) * sk * sk1;
    r.var = M * M * M * a_ki(k, k + 1) + M * M * b_ki(k, k + 1) + M * c_ki(k, k + 1);

    r.iu_raw = 0;
    for (int i = 0; i < K; ++i) {
        if (i == c.mod(k + 1)) continue;
        r.iu_raw += M * M * M * a_ki(k, i) + M * M * b_ki(k, i) + M * c_ki(k, i);
    }
    r.iu_raw += M * M * skm * skm * sk * sk;
    r.iu_raw += M * (2 * sk * sk * sk * sk1 + 2 * sk * sk * sk * skm +
                     (2 * sk * sk + bk * bk - 2 * bk * sk) * 2 * S);

    r.an_raw = M * M * M * sk * sk * sk1 + M * M * bk * S;

    if (K == 2) {
        const double ek1 = c.e(k + 1);
        r.var += 2 * M * sk * sk1 *
                 (ek * ek1 + M * ek * sk1 + ek * sk1 + M * ek1 * sk + ek1 * sk +
                  2 * M * sk * sk1 + sk * sk1);
        r.iu_raw += M * sk * sk1 *
                    (2 * ek * ek * M + 2 * ek * M * M * sk + 12 * ek * M * sk + 10 * ek * sk +
                     2 * M * M * sk * sk + 10 * M * sk * sk - M * sk * sk1 - 2 * sk * sk);
        r.an_raw += M * sk * sk1 * (2 * ek + 2 * M * sk + 3 * sk);
    } else {
        r.iu_raw += 2 * M * M * sk * sk * bk * (sk1 + skm) - 2 * M * sk * sk * sk * (sk1 + skm) -
                    M * (sk - ek) * (sk - ek) * S;
        r.an_raw += M * sk * sk * skm;
    }
    return r;
}

}  // namespace

double alpha1_closed_form(const SystemParams& params, const FadingProfile& profile) {
    check_inputs(params, profile);
    const Cyc c{profile, params.K};
    const double M = params.M, Pu = params.P_u;
    const double S = pair_sum(c);

    double sum_sm_s2 = 0, sum_s2_sp = 0, sum_beta = 0;
    for (int j = 0; j < params.K; ++j) {
        sum_sm_s2 += c.s(j - 1) * c.s(j) * c.s(j);
        sum_s2_sp += c.s(j) * c.s(j) * c.s(j + 1);
        sum_beta += c.b(j);
    }
    double den = M * M * M * Pu * sum_sm_s2 + M * M * S * (Pu * sum_beta + 1.0) +
                 M * Pu * sum_s2_sp;
    if (params.K == 2) {
        for (int j = 0; j < 2; ++j)
            den += Pu * (2 * M * (M + 1) * c.s(j) * c.s(j) * c.s(j + 1) +
                         2 * M * c.e(j) * c.s(j) * c.s(j + 1));
        den += 2 * M * c.s(0) * c.s(1);
    }
    return params.P_r / den;
}

ClosedFormTerms closed_form_terms(const SystemParams& params, const FadingProfile& profile, int k) {
    check_inputs(params, profile);
    if (k < 0 || k >= params.K)
        throw ConfigError("k: user index must lie in [0, K), got " + std::to_string(k));
    const Cyc c{profile, params.K};
    const double alpha = alpha1_closed_form(params, profile);
    const RawMoments r = raw_moments(params, c, k);

    ClosedFormTerms t;
    const double S = pair_sum(c);
    t.a_ki = c.s(k) * c.s(k) * c.s(k + 1) * c.b(k + 1) +
             c.s(k + 1) * c.s(k + 1) * c.s(k) * c.b(k);
    t.b_ki = c.b(k) * c.b(k + 1) * S;
    t.c_ki = c.s(k) * c.s(k) * c.s(k - 1) * c.b(k + 1) +
             c.s(k + 1) * c.s(k + 1) * c.s(k + 2) * c.b(k);
    t.var_k = r.var;
    t.iu_k = alpha * params.P_u * r.iu_raw;
    t.an_k = alpha * r.an_raw;
    t.desired_k = r.mean_d * r.mean_d;
    return t;
}

double sinr_k(const SystemParams& params, const FadingProfile& profile, int k) {
    const ClosedFormTerms t = closed_form_terms(params, profile, k);
    const double alpha = alpha1_closed_form(params, profile);
    const double num = alpha * params.P_u * t.desired_k;
    const double den = alpha * params.P_u * t.var_k + t.iu_k + t.an_k + 1.0;
    return num / den;
}

double sinr_k_slot(const SystemParams& params, const FadingProfile& profile, int k, int t) {
    check_inputs(params, profile);
    const int K = params.K;
    if (t < 1 || t >= K)
        throw ConfigError("t: closed-form slot index must lie in [1, K), got " +
                          std::to_string(t));
    if (std::gcd(t, K) != 1)
        throw ConfigError("t: closed-form slot relabeling needs gcd(t, K) = 1, got t=" +
                          std::to_string(t) + ", K=" + std::to_string(K) +
                          " (the simulator supports every slot)");
    // Relabel users along the t-step cycle: new index j holds old user (j*t) % K,
    // so slot-t pairs (a, a+t) become cyclic neighbors (j, j+1).
    FadingProfile relabeled;
    relabeled.beta.resize(K);
    relabeled.sigma2.resize(K);
    relabeled.sigma2_e.resize(K);
    int j_of_k = 0;
    for (int j = 0; j < K; ++j) {
        const int orig = static_cast<int>((static_cast<long long>(j) * t) % K);
        relabeled.beta(j) = profile.beta(orig);
        relabeled.sigma2(j) = profile.sigma2(orig);
        relabeled.sigma2_e(j) = profile.sigma2_e(orig);
        if (orig == k) j_of_k = j;
    }
    return sinr_k(params, relabeled, j_of_k);
}

ClosedFormReport se_per_user(const SystemParams& params, const FadingProfile& profile) {
    check_inputs(params, profile);
    ClosedFormReport rep;
    rep.alpha1 = alpha1_closed_form(params, profile);
    rep.terms.resize(params.K);
    rep.sinr.resize(params.K);
    rep.se.resize(params.K);
    const double prelog = prelog_multi_way(params);
    for (int k = 0; k < params.K; ++k) {
        rep.terms[k] = closed_form_terms(params, profile, k);
        rep.sinr(k) = sinr_k(params, profile, k);
        rep.se(k) = prelog * std::log2(1.0 + rep.sinr(k));
    }
    rep.se_sum = rep.se.sum();
    return rep;
}

AsymptoticLimits asymptotic_limits(const SystemParams& params, const FadingProfile& profile,
                                   double E_u, double E_r, int k) {
    check_inputs(params, profile);
    if (E_u <= 0 || E_r <= 0) throw ConfigError("E_u/E_r: scaled powers must be positive");
    if (k < 0 || k >= params.K)
        throw ConfigError("k: user index must lie in [0, K), got " + std::to_string(k));
    const Cyc c{profile, params.K};
    const double prelog = prelog_multi_way(params);

    double sum_sm_s2 = 0, sum_scaled = 0;
    for (int j = 0; j < params.K; ++j) {
        sum_sm_s2 += c.s(j - 1) * c.s(j) * c.s(j);
        sum_scaled += E_u * c.s(j - 1) * c.s(j) * c.s(j) + c.s(j) * c.s(j + 1);
    }
    const double sk = c.s(k), sk1 = c.s(k + 1);

    AsymptoticLimits lim;
    lim.se_user_scaled = prelog * std::log2(1.0 + E_u * sk1);
    lim.se_relay_scaled = prelog * std::log2(1.0 + E_r * sk * sk * sk1 * sk1 / sum_sm_s2);
    lim.xi = E_r / sum_scaled;
    lim.se_both_scaled =
        prelog * std::log2(1.0 + lim.xi * E_u * sk * sk * sk1 * sk1 / (lim.xi * sk * sk * sk1 + 1.0));
    return lim;
}

double two_way_se(const SystemParams& params, const FadingProfile& profile, int k, int partner) {
    check_inputs(params, profile);
    const int K = params.K;
    if (k < 0 || k >= K)
        throw ConfigError("k: user index must lie in [0, K), got " + std::to_string(k));
    if (partner < 0) partner = (k + 1) % K;
    if (partner < 0 || partner >= K || partner == k)
        throw ConfigError("partner: must be a user index distinct from k, got " +
                          std::to_string(partner));

    // Pairwise exchange through the same relay: 2-user system with the
    // estimation moments of the pair (trained with the full pilot phase).
    SystemParams pp = params;
    pp.K = 2;
    FadingProfile pair;
    pair.beta.resize(2);
    pair.sigma2.resize(2);
    pair.sigma2_e.resize(2);
    const int idx[2] = {k, partner};
    for (int j = 0; j < 2; ++j) {
        pair.beta(j) = profile.beta(idx[j]);
        pair.sigma2(j) = profile.sigma2(idx[j]);
        pair.sigma2_e(j) = profile.sigma2_e(idx[j]);
    }
    const double gamma = sinr_k(pp, pair, 0);
    const double prelog = (static_cast<double>(params.T - params.tau) / params.T) / K;
    return prelog * std::log2(1.0 + gamma);
}

AppendixMoments appendix_moment_oracles(const SystemParams& params, const FadingProfile& profile) {
    check_inputs(params, profile);
    const Cyc c{profile, params.K};
    const double M = params.M;
    const int K = params.K;
    const double S = pair_sum(c);

    AppendixMoments m;
    m.Q1.resize(K);
    m.Q2.resize(K);
    m.T1.resize(K);
    m.T2.resize(K);
    m.T3.resize(K);
    m.T4.resize(K);
    m.Q3_per_antenna = M * S;

    for (int k = 0; k < K; ++k) {
        const double sk = c.s(k), sk1 = c.s(k + 1), skm = c.s(k - 1), sk2 = c.s(k + 2);
        const double ek = c.e(k), ek1 = c.e(k + 1);
        m.Q1(k) = M * M * M * skm * sk * sk + M * sk * sk * sk1 + M * M * sk * S;
        m.Q2(k) = M * M * ek * S;
        m.T1(k) = M * M * M * (M + 2) * sk * sk * sk1 * sk1 + M * skm * sk * sk * sk1 +
                  M * sk * sk1 * sk1 * sk2 + M * M * sk * sk1 * S;
        m.T2(k) = M * M * M * ek1 * sk * sk * sk1 + M * ek1 * skm * sk * sk + M * M * sk * ek1 * S;
        m.T3(k) = M * M * M * ek * sk * sk1 * sk1 + M * ek * sk1 * sk1 * sk2 + M * M * ek * sk1 * S;
        m.T4(k) = M * M * ek * ek1 * S;
        if (K == 2) {
            m.Q1(k) += 2 * M * (M + 1) * sk * sk * sk1;
            m.Q2(k) += 2 * M * ek * sk * sk1;
            m.T1(k) += M * (M + 2) * (2 * M + 1) * sk * sk * sk1 * sk1;
            m.T2(k) += 2 * M * (M + 1) * ek1 * sk * sk * sk1;
            m.T3(k) += 2 * M * (M + 1) * ek * sk * sk1 * sk1;
            m.T4(k) += 2 * M * ek * ek1 * sk * sk1;
        }
    }
    if (K == 2) m.Q3_per_antenna += 2 * c.s(0) * c.s(1);
    return m;
}

}  // namespace mwrelay
