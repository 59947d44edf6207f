// SPDX-License-Identifier: MIT
//
// mwrelay — Monte-Carlo engine implementation.
//
// The hot path never materializes the M x M relay matrices: with
// F = Ghat^H G and C = Ghat^H Ghat (both K x K), every first-slot statistic
// reduces to O(K^3) algebra,
//   g_k^T a_i       = sum_r F(r, k) F(r+1, i)          (R = F^T Fup)
//   ||g_k^T B||^2   = u_k^T Cup u_k^*,  u_k = F.col(k), Cup(a,b) = C(a+1, b+1)
//   ||A||_F^2       = tr(Fup^H C^* Fup)
//   ||B||_F^2       = sum_{a,b} C^*(a,b) C(b+1, a+1)
// because data symbols, relay noise, and user noise enter the defining
// expectations only through their (unit) second moments.

#include "mwrelay/simulator.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "mwrelay/analytics.hpp"

namespace mwrelay {

namespace {

constexpr int kBatches = 30;
// Student-t 0.975 quantile, 29 degrees of freedom.
constexpr double kT95 = 2.0452296421327034;

void check_inputs(const SystemParams& params, const FadingProfile& profile) {
    params.validate();
    if (profile.users() != params.K)
        throw ConfigError("beta: fading profile has " + std::to_string(profile.users()) +
                          " users but K=" + std::to_string(params.K));
}

std::vector<long> batch_sizes(long n_trials) {
    if (n_trials < 2 * kBatches)
        throw ConfigError("trials: need at least " + std::to_string(2 * kBatches) +
                          " trials (two per batch mean), got " + std::to_string(n_trials));
    std::vector<long> sizes(kBatches, n_trials / kBatches);
    for (long b = 0; b < n_trials % kBatches; ++b) sizes[b] += 1;
    return sizes;
}

// Runs kernel(trial_index, rng, batch_row) over all trials. Batches own
// contiguous trial ranges; worker threads claim whole batches, so the
// per-batch sums (and their final order) are identical for any worker count.
std::vector<Eigen::ArrayXd> accumulate_batches(
    long n_trials, std::uint64_t seed, int workers, int n_cols,
    const std::function<void(long, rng::Xoshiro256pp&, Eigen::ArrayXd&)>& kernel) {
    const std::vector<long> sizes = batch_sizes(n_trials);
    std::vector<long> offsets(kBatches, 0);
    for (int b = 1; b < kBatches; ++b) offsets[b] = offsets[b - 1] + sizes[b - 1];

    std::vector<Eigen::ArrayXd> sums(kBatches, Eigen::ArrayXd::Zero(n_cols));
    std::atomic<int> next{0};
    auto work = [&]() {
        for (int b = next.fetch_add(1); b < kBatches; b = next.fetch_add(1)) {
            Eigen::ArrayXd& row = sums[b];
            for (long i = offsets[b]; i < offsets[b] + sizes[b]; ++i) {
                rng::Xoshiro256pp rng = rng::trial_rng(seed, static_cast<std::uint64_t>(i));
                kernel(i, rng, row);
            }
        }
    };

    const int n_threads = std::max(1, std::min(workers, kBatches));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return sums;
}

struct Ci {
    double half_width = 0;
    double std_error = 0;
};

Ci ci_from_replicates(const std::vector<double>& reps) {
    const double nb = static_cast<double>(reps.size());
    double mean = 0;
    for (double r : reps) mean += r;
    mean /= nb;
    double ss = 0;
    for (double r : reps) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / (nb - 1.0));
    Ci ci;
    ci.std_error = sd / std::sqrt(nb);
    ci.half_width = kT95 * ci.std_error;
    return ci;
}

bool exceeds_tenth(double half_width, double value) {
    return half_width > 0.1 * std::abs(value);
}

// Column layout of the moment accumulator: per user k at offset 5k,
// [Re d, Im d, |d|^2, iu, an]; then the two Frobenius sums.
struct Cols {
    int K;
    int d_re(int k) const { return 5 * k; }
    int d_im(int k) const { return 5 * k + 1; }
    int d2(int k) const { return 5 * k + 2; }
    int iu(int k) const { return 5 * k + 3; }
    int an(int k) const { return 5 * k + 4; }
    int afro() const { return 5 * K; }
    int bfro() const { return 5 * K + 1; }
    int total() const { return 5 * K + 2; }
};

void moment_kernel(const SystemParams& params, const FadingProfile& profile, const Cols& col,
                   rng::Xoshiro256pp& rng, Eigen::ArrayXd& row) {
    const int K = params.K;
    const Eigen::MatrixXcd G = draw_channel(params, profile.beta, rng);
    const ChannelRealization ch = mmse_shortcut(G, params, profile, rng);

    const Eigen::MatrixXcd F = ch.G_hat.adjoint() * ch.G;
    const Eigen::MatrixXcd C = ch.G_hat.adjoint() * ch.G_hat;

    Eigen::MatrixXcd Fup(K, K), Cup(K, K);
    for (int r = 0; r < K; ++r) {
        Fup.row(r) = F.row((r + 1) % K);
        for (int c = 0; c < K; ++c) Cup(r, c) = C((r + 1) % K, (c + 1) % K);
    }
    const Eigen::MatrixXcd R = F.transpose() * Fup;  // R(k, i) = g_k^T a_i

    for (int k = 0; k < K; ++k) {
        const std::complex<double> d = R(k, (k + 1) % K);
        row[col.d_re(k)] += d.real();
        row[col.d_im(k)] += d.imag();
        row[col.d2(k)] += std::norm(d);
        double iu = 0;
        for (int i = 0; i < K; ++i)
            if (i != (k + 1) % K) iu += std::norm(R(k, i));
        row[col.iu(k)] += iu;
        const Eigen::VectorXcd tmp = Cup * F.col(k).conjugate();
        row[col.an(k)] += (F.col(k).array() * tmp.array()).sum().real();
    }
    row[col.afro()] += (Fup.adjoint() * C.conjugate() * Fup).trace().real();
    double bf = 0;
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b)
            bf += (std::conj(C(a, b)) * C((b + 1) % K, (a + 1) % K)).real();
    row[col.bfro()] += bf;
}

double alpha_from_sums(const SystemParams& params, const Cols& col, const Eigen::ArrayXd& sums,
                       double n) {
    return params.P_r / (params.P_u * sums[col.afro()] / n + sums[col.bfro()] / n);
}

}  // namespace

Eigen::MatrixXd permutation(int t, int K) {
    if (K < 2) throw ConfigError("K: permutation needs K >= 2, got " + std::to_string(K));
    if (t < 1 || t > K)
        throw ConfigError("t: broadcast slot must lie in [1, K], got " + std::to_string(t));
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(K, K);
    for (int a = 0; a < K; ++a) P(a, (a + t) % K) = 1.0;
    return P;
}

TrialState make_trial(const SystemParams& params, const FadingProfile& profile,
                      rng::Xoshiro256pp& rng, bool full_pilot) {
    check_inputs(params, profile);
    TrialState st;
    const Eigen::MatrixXcd G = draw_channel(params, profile.beta, rng);
    if (full_pilot) {
        const PilotBook pilots = make_pilot_book(params.tau, params.K);
        st.ch = mmse_estimate(G, params, profile, pilots, rng);
    } else {
        st.ch = mmse_shortcut(G, params, profile, rng);
    }
    st.x.resize(params.K);
    for (int k = 0; k < params.K; ++k) st.x(k) = rng::qpsk(rng);
    st.n.resize(params.M);
    for (int m = 0; m < params.M; ++m) st.n(m) = rng::cnormal(rng);
    st.w.resize(params.K);
    for (int k = 0; k < params.K; ++k) st.w(k) = rng::cnormal(rng);
    return st;
}

void ma_phase(TrialState& state, const SystemParams& params) {
    state.y_R = std::sqrt(params.P_u) * state.ch.G * state.x + state.n;
}

void mr_combine_and_precode(TrialState& state, const SystemParams& params, int t, double alpha,
                            bool materialize) {
    if (alpha <= 0) throw ConfigError("alpha: normalization must be positive");
    if (state.y_R.size() != params.M)
        throw std::logic_error("mr_combine_and_precode called before ma_phase");
    const int K = params.K;
    (void)permutation(t, K);  // validates t

    const Eigen::VectorXcd y_t = state.ch.G_hat.adjoint() * state.y_R;
    Eigen::VectorXcd z(K);
    for (int a = 0; a < K; ++a) z(a) = y_t((a + t) % K);
    state.s_R = std::sqrt(alpha) * state.ch.G_hat.conjugate() * z;

    if (materialize) {
        const Eigen::MatrixXcd P = permutation(t, K).cast<std::complex<double>>();
        state.A = state.ch.G_hat.conjugate() * P * state.ch.G_hat.adjoint() * state.ch.G;
        state.B = state.ch.G_hat.conjugate() * P * state.ch.G_hat.adjoint();
        const Eigen::VectorXcd ref = std::sqrt(alpha * params.P_u) * state.A * state.x +
                                     std::sqrt(alpha) * state.B * state.n;
        const double scale = std::max(1.0, state.s_R.cwiseAbs().maxCoeff());
        if ((state.s_R - ref).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw std::logic_error("relay transmit decomposition identity violated");
    }
}

Eigen::VectorXcd bc_receive(const TrialState& state, const SystemParams& params) {
    if (state.s_R.size() != params.M)
        throw std::logic_error("bc_receive called before mr_combine_and_precode");
    return state.ch.G.transpose() * state.s_R + state.w;
}

double empirical_alpha(const SystemParams& params, const FadingProfile& profile, long n_trials,
                       std::uint64_t seed, int workers) {
    check_inputs(params, profile);
    const Cols col{params.K};
    auto kernel = [&](long, rng::Xoshiro256pp& rng, Eigen::ArrayXd& row) {
        moment_kernel(params, profile, col, rng, row);
    };
    const auto sums = accumulate_batches(n_trials, seed, workers, col.total(), kernel);
    Eigen::ArrayXd total = Eigen::ArrayXd::Zero(col.total());
    for (const auto& s : sums) total += s;
    return alpha_from_sums(params, col, total, static_cast<double>(n_trials));
}

McSummary run_trials_summary(const SystemParams& params, const FadingProfile& profile,
                             long n_trials, std::uint64_t seed, int workers) {
    check_inputs(params, profile);
    const int K = params.K;
    const Cols col{K};
    auto kernel = [&](long, rng::Xoshiro256pp& rng, Eigen::ArrayXd& row) {
        moment_kernel(params, profile, col, rng, row);
    };
    const auto sums = accumulate_batches(n_trials, seed, workers, col.total(), kernel);
    const std::vector<long> sizes = batch_sizes(n_trials);

    Eigen::ArrayXd total = Eigen::ArrayXd::Zero(col.total());
    for (const auto& s : sums) total += s;
    const double n = static_cast<double>(n_trials);

    const double alpha = alpha1_closed_form(params, profile);
    const double prelog = prelog_multi_way(params);
    const double Pu = params.P_u;

    // Per-batch statistic replicates share this evaluation.
    struct UserStats {
        std::complex<double> mean;
        double var, iu, an, sinr, se;
    };
    auto eval_user = [&](const Eigen::ArrayXd& s, double nn, int k) {
        UserStats u;
        u.mean = {s[col.d_re(k)] / nn, s[col.d_im(k)] / nn};
        u.var = (s[col.d2(k)] - nn * std::norm(u.mean)) / (nn - 1.0);
        u.iu = alpha * Pu * s[col.iu(k)] / nn;
        u.an = alpha * s[col.an(k)] / nn;
        u.sinr = alpha * Pu * std::norm(u.mean) / (alpha * Pu * u.var + u.iu + u.an + 1.0);
        u.se = prelog * std::log2(1.0 + u.sinr);
        return u;
    };

    McSummary out;
    out.n_trials = n_trials;
    out.per_user.resize(K);

    // alpha_hat and its CI (shared across users).
    out.alpha_hat = alpha_from_sums(params, col, total, n);
    std::vector<double> alpha_reps(kBatches);
    for (int b = 0; b < kBatches; ++b)
        alpha_reps[b] = alpha_from_sums(params, col, sums[b], static_cast<double>(sizes[b]));
    const Ci alpha_ci = ci_from_replicates(alpha_reps);
    out.alpha_half_width = alpha_ci.half_width;

    std::vector<double> sum_se_reps(kBatches, 0.0);
    for (int k = 0; k < K; ++k) {
        const UserStats pooled = eval_user(total, n, k);
        std::vector<double> rep_mean(kBatches), rep_var(kBatches), rep_iu(kBatches),
            rep_an(kBatches), rep_sinr(kBatches), rep_se(kBatches);
        for (int b = 0; b < kBatches; ++b) {
            const UserStats ub = eval_user(sums[b], static_cast<double>(sizes[b]), k);
            rep_mean[b] = ub.mean.real();
            rep_var[b] = ub.var;
            rep_iu[b] = ub.iu;
            rep_an[b] = ub.an;
            rep_sinr[b] = ub.sinr;
            rep_se[b] = ub.se;
            sum_se_reps[b] += ub.se;
        }
        TrialBatchResult& r = out.per_user[k];
        r.n_trials = n_trials;
        r.mean_desired = pooled.mean;
        r.var_desired = pooled.var;
        r.iu_hat = pooled.iu;
        r.an_hat = pooled.an;
        r.alpha_hat = out.alpha_hat;
        r.sinr_hat = pooled.sinr;
        r.se_hat = pooled.se;
        const Ci ci_mean = ci_from_replicates(rep_mean);
        const Ci ci_var = ci_from_replicates(rep_var);
        const Ci ci_iu = ci_from_replicates(rep_iu);
        const Ci ci_an = ci_from_replicates(rep_an);
        const Ci ci_sinr = ci_from_replicates(rep_sinr);
        const Ci ci_se = ci_from_replicates(rep_se);
        r.half_width = {ci_mean.half_width, ci_var.half_width,  ci_iu.half_width,
                        ci_an.half_width,   alpha_ci.half_width, ci_sinr.half_width,
                        ci_se.half_width};
        r.std_error = {ci_mean.std_error, ci_var.std_error,  ci_iu.std_error,
                       ci_an.std_error,   alpha_ci.std_error, ci_sinr.std_error,
                       ci_se.std_error};
        r.undersampled = exceeds_tenth(r.half_width.mean_desired, r.mean_desired.real()) ||
                         exceeds_tenth(r.half_width.var_desired, r.var_desired) ||
                         exceeds_tenth(r.half_width.iu, r.iu_hat) ||
                         exceeds_tenth(r.half_width.an, r.an_hat) ||
                         exceeds_tenth(r.half_width.alpha, r.alpha_hat) ||
                         exceeds_tenth(r.half_width.sinr, r.sinr_hat) ||
                         exceeds_tenth(r.half_width.se, r.se_hat);
        out.undersampled = out.undersampled || r.undersampled;
        out.se_sum += r.se_hat;
    }
    const Ci ci_sum = ci_from_replicates(sum_se_reps);
    out.se_sum_half_width = ci_sum.half_width;
    out.se_sum_std_error = ci_sum.std_error;
    out.undersampled = out.undersampled || exceeds_tenth(ci_sum.half_width, out.se_sum);
    return out;
}

TrialBatchResult empirical_sinr(const SystemParams& params, const FadingProfile& profile, int k,
                                long n_trials, std::uint64_t seed, int workers) {
    if (k < 0 || k >= params.K)
        throw ConfigError("k: user index must lie in [0, K), got " + std::to_string(k));
    return run_trials_summary(params, profile, n_trials, seed, workers).per_user[k];
}

std::vector<TrialBatchResult> run_trials(const SystemParams& params, const FadingProfile& profile,
                                         long n_trials, std::uint64_t seed, int workers) {
    return run_trials_summary(params, profile, n_trials, seed, workers).per_user;
}

double empirical_relay_power(const SystemParams& params, const FadingProfile& profile,
                             double alpha, int t, long n_trials, std::uint64_t seed,
                             int workers) {
    check_inputs(params, profile);
    auto kernel = [&](long, rng::Xoshiro256pp& rng, Eigen::ArrayXd& row) {
        TrialState st = make_trial(params, profile, rng, false);
        ma_phase(st, params);
        mr_combine_and_precode(st, params, t, alpha, false);
        row[0] += st.s_R.squaredNorm();
    };
    const auto sums = accumulate_batches(n_trials, seed, workers, 1, kernel);
    double total = 0;
    for (const auto& s : sums) total += s[0];
    return total / static_cast<double>(n_trials);
}

}  // namespace mwrelay
