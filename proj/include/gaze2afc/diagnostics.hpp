#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "gaze2afc/error.hpp"

namespace gaze2afc::diagnostics {

namespace detail {

/// Splits each chain in half so within-chain trends show up as
/// between-sequence variance. Odd lengths drop the middle draw.
inline std::vector<Eigen::VectorXd> split_chains(const std::vector<Eigen::VectorXd>& chains) {
    std::vector<Eigen::VectorXd> seqs;
    for (const Eigen::VectorXd& c : chains) {
        const Eigen::Index half = c.size() / 2;
        if (half < 1) throw Error("chain too short to split");
        seqs.push_back(c.head(half));
        seqs.push_back(c.tail(half));
    }
    return seqs;
}

struct SeqStats {
    double mean_var = 0.0;  // W: mean within-sequence variance
    double var_plus = 0.0;  // overestimate of the marginal variance
    Eigen::Index n = 0;
    std::size_t m = 0;
};

inline SeqStats seq_stats(const std::vector<Eigen::VectorXd>& seqs) {
    SeqStats st;
    st.m = seqs.size();
    st.n = seqs.front().size();
    Eigen::VectorXd means(static_cast<Eigen::Index>(st.m));
    double w = 0.0;
    for (std::size_t c = 0; c < st.m; ++c) {
        means(static_cast<Eigen::Index>(c)) = seqs[c].mean();
        w += (seqs[c].array() - means(static_cast<Eigen::Index>(c))).square().sum() /
             double(st.n - 1);
    }
    st.mean_var = w / double(st.m);
    const double grand = means.mean();
    const double b_over_n = (means.array() - grand).square().sum() / double(st.m - 1);
    st.var_plus = st.mean_var * double(st.n - 1) / double(st.n) + b_over_n;
    return st;
}

/// Biased (1/n) autocovariance of one sequence at one lag.
inline double autocov(const Eigen::VectorXd& x, Eigen::Index lag) {
    const Eigen::Index n = x.size();
    const double mean = x.mean();
    double s = 0.0;
    for (Eigen::Index i = 0; i + lag < n; ++i) s += (x(i) - mean) * (x(i + lag) - mean);
    return s / double(n);
}

} // namespace detail

/// Split-Rhat over one scalar parameter, given post-warmup chains.
/// Values near 1 indicate the chains agree; constant chains return 1.
inline double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
    if (chains.empty()) throw Error("no chains");
    const auto seqs = detail::split_chains(chains);
    const auto st = detail::seq_stats(seqs);
    if (st.mean_var <= 0.0)
        return st.var_plus <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(st.var_plus / st.mean_var);
}

/// Effective sample size over one scalar parameter, given post-warmup
/// chains. Combined-chain autocorrelations are summed with Geyer's initial
/// monotone sequence rule, so the sum stops at the first non-positive pair
/// of consecutive lags. The estimate is capped at the raw draw count.
inline double effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
    if (chains.empty()) throw Error("no chains");
    const auto seqs = detail::split_chains(chains);
    const auto st = detail::seq_stats(seqs);
    const double mn = double(st.m) * double(st.n);
    if (st.var_plus <= 0.0) return mn; // constant draws: nothing to estimate

    const auto rho = [&](Eigen::Index lag) {
        double acov = 0.0;
        for (const Eigen::VectorXd& s : seqs) acov += detail::autocov(s, lag);
        acov /= double(st.m);
        return 1.0 - (st.mean_var - acov) / st.var_plus;
    };

    // pair sums of consecutive-lag autocorrelations, P_k = rho(2k)+rho(2k+1)
    double tau = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; 2 * k + 1 < st.n; ++k) {
        const double r_even = k == 0 ? 1.0 : rho(2 * k);
        const double r_odd = rho(2 * k + 1);
        double pair = r_even + r_odd;
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair); // enforce monotone decrease
        prev_pair = pair;
        tau += 2.0 * pair;
    }
    tau -= 1.0;
    if (tau < 1e-12) tau = 1e-12;
    return std::min(mn, mn / tau);
}

} // namespace gaze2afc::diagnostics
