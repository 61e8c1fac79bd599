#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "gaze2afc/diagnostics.hpp"
#include "gaze2afc/error.hpp"
#include "gaze2afc/rng.hpp"

namespace gaze2afc::inference {

// ---------------------------------------------------------------------------
// numerics
// ---------------------------------------------------------------------------

inline double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

/// log(1 + exp(z)) without overflow.
inline double log1pexp(double z) { return z > 35.0 ? z : std::log1p(std::exp(z)); }

inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056; // log(sqrt(2*pi))

// ---------------------------------------------------------------------------
// Bernoulli logistic model with standard normal priors
// ---------------------------------------------------------------------------

/// x_i ~ Bernoulli(sigma(alpha + y_i . beta)), alpha and each beta_j iid
/// standard normal a priori. Parameter vector layout: (alpha, beta_1..J).
struct LogisticModel {
    Eigen::VectorXi x;              // outcomes in {0, 1}
    Eigen::MatrixXd y;              // n x J design, J may be zero
    std::vector<std::string> feature_names;

    Eigen::Index n() const { return x.size(); }
    Eigen::Index j() const { return y.cols(); }
    Eigen::Index dim() const { return j() + 1; }

    void validate() const {
        if (y.rows() != x.size()) throw Error("design rows do not match outcomes");
        if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != j())
            throw Error("feature name count does not match design columns");
        if (!y.allFinite()) throw NonFiniteInput("design matrix contains non-finite values");
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) != 0 && x(i) != 1) throw Error("outcomes must be 0 or 1");
    }

    /// Model without column `drop`, for leave-one-feature-out comparisons.
    LogisticModel without_feature(Eigen::Index drop) const {
        LogisticModel m;
        m.x = x;
        m.y.resize(y.rows(), y.cols() - 1);
        Eigen::Index c = 0;
        for (Eigen::Index jj = 0; jj < y.cols(); ++jj) {
            if (jj == drop) continue;
            m.y.col(c++) = y.col(jj);
        }
        for (std::size_t k = 0; k < feature_names.size(); ++k)
            if (static_cast<Eigen::Index>(k) != drop) m.feature_names.push_back(feature_names[k]);
        return m;
    }

    std::vector<std::string> param_names() const {
        std::vector<std::string> names = {"alpha"};
        for (Eigen::Index jj = 0; jj < j(); ++jj)
            names.push_back(feature_names.empty() ? "beta_" + std::to_string(jj + 1)
                                                  : "beta_" + feature_names[static_cast<std::size_t>(jj)]);
        return names;
    }
};

/// Log joint density (likelihood times prior) with all normalizing
/// constants, so it doubles as the integrand for evidence estimation.
/// Uses x*eta - log(1+exp(eta)) for the Bernoulli term, which is exact and
/// stable for any eta.
inline double log_posterior(const Eigen::VectorXd& params, const LogisticModel& m,
                            Eigen::VectorXd* grad = nullptr) {
    const Eigen::Index d = m.dim();
    if (params.size() != d) throw Error("parameter vector has wrong length");
    if (!params.allFinite()) throw NonFiniteInput("parameters contain non-finite values");

    double lp = -double(d) * kLogSqrt2Pi - 0.5 * params.squaredNorm();
    if (grad) *grad = -params;

    const double alpha = params(0);
    for (Eigen::Index i = 0; i < m.n(); ++i) {
        double eta = alpha;
        for (Eigen::Index jj = 0; jj < m.j(); ++jj) eta += params(jj + 1) * m.y(i, jj);
        lp += double(m.x(i)) * eta - log1pexp(eta);
        if (grad) {
            const double resid = double(m.x(i)) - sigmoid(eta);
            (*grad)(0) += resid;
            for (Eigen::Index jj = 0; jj < m.j(); ++jj) (*grad)(jj + 1) += resid * m.y(i, jj);
        }
    }
    return lp;
}

/// Adapter exposing the model to the sampler and evidence code.
class LogisticTarget {
  public:
    explicit LogisticTarget(const LogisticModel& m) : model_(&m) {}
    Eigen::Index dim() const { return model_->dim(); }
    double log_density(const Eigen::VectorXd& q) const { return log_posterior(q, *model_); }
    double log_density_gradient(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const {
        return log_posterior(q, *model_, &grad);
    }
    const LogisticModel& model() const { return *model_; }

  private:
    const LogisticModel* model_;
};

// ---------------------------------------------------------------------------
// sampler configuration and results
// ---------------------------------------------------------------------------

struct SamplerConfig {
    int chains = 4;
    int draws = 1000;  // kept draws per chain
    int warmup = 1000; // adaptation draws, discarded
    std::uint64_t seed = 1;
    double target_accept = 0.8;
    int max_treedepth = 10;
    double delta_max = 1000.0; // energy-error bound marking a divergence
    double init_radius = 2.0;  // initial positions uniform on [-r, r]^d
    bool parallel_chains = true;

    // convergence gate, enforced after sampling
    bool check_convergence = true;
    double max_rhat = 1.01;
    double min_ess = 400.0;
    double max_divergence_rate = 0.01;

    void validate() const {
        if (chains < 1 || draws < 2 || warmup < 0) throw InvalidConfig("sampler sizes out of range");
        if (!(target_accept > 0.0 && target_accept < 1.0))
            throw InvalidConfig("target_accept must lie in (0,1)");
        if (max_treedepth < 1 || max_treedepth > 14) throw InvalidConfig("max_treedepth out of range");
    }
};

struct Diagnostics {
    Eigen::VectorXd rhat;
    Eigen::VectorXd ess;
    int divergences = 0;
    double divergence_rate = 0.0;
    int max_treedepth_hits = 0;
    bool converged = false;
};

struct PosteriorSamples {
    Eigen::MatrixXd draws;     // (chains*draws) x dim, chain-major row order
    Eigen::VectorXd log_post;  // log joint density at each draw
    int n_chains = 0;
    int n_draws = 0; // per chain
    std::vector<std::string> param_names;
    std::vector<double> step_sizes; // adapted step size per chain
    Diagnostics diag;

    Eigen::Index dim() const { return draws.cols(); }
    Eigen::Index rows() const { return draws.rows(); }

    double mean(Eigen::Index p) const { return draws.col(p).mean(); }

    double sd(Eigen::Index p) const {
        const double mu = mean(p);
        return std::sqrt((draws.col(p).array() - mu).square().sum() / double(draws.rows() - 1));
    }

    double quantile(Eigen::Index p, double q) const {
        std::vector<double> v(draws.col(p).data(), draws.col(p).data() + draws.rows());
        std::sort(v.begin(), v.end());
        const double pos = q * double(v.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
    }

    /// Draws of one chain for one parameter (for diagnostics).
    Eigen::VectorXd chain_param(int chain, Eigen::Index p) const {
        return draws.block(static_cast<Eigen::Index>(chain) * n_draws, p, n_draws, 1);
    }
};

// ---------------------------------------------------------------------------
// dual-averaging step size adaptation
// ---------------------------------------------------------------------------

/// Nesterov dual averaging on log(step size), driving the average accept
/// statistic toward the target.
class DualAverage {
  public:
    DualAverage(double eps0, double target)
        : mu_(std::log(10.0 * eps0)), log_eps_(std::log(eps0)), target_(target) {}

    void update(double accept_stat) {
        ++m_;
        const double frac = 1.0 / (double(m_) + t0_);
        h_bar_ = (1.0 - frac) * h_bar_ + frac * (target_ - accept_stat);
        log_eps_ = mu_ - std::sqrt(double(m_)) / gamma_ * h_bar_;
        const double w = std::pow(double(m_), -kappa_);
        log_eps_bar_ = w * log_eps_ + (1.0 - w) * log_eps_bar_;
    }

    double eps() const { return std::exp(log_eps_); }
    double eps_final() const { return m_ > 0 ? std::exp(log_eps_bar_) : std::exp(log_eps_); }

  private:
    double mu_;
    double log_eps_;
    double log_eps_bar_ = 0.0;
    double h_bar_ = 0.0;
    double target_;
    long m_ = 0;
    static constexpr double gamma_ = 0.05;
    static constexpr double t0_ = 10.0;
    static constexpr double kappa_ = 0.75;
};

// ---------------------------------------------------------------------------
// No-U-Turn sampler
// ---------------------------------------------------------------------------

namespace detail {

template <class Target>
struct Leaf {
    Eigen::VectorXd q, p, grad;
    double logp = 0.0;

    double hamiltonian() const { return logp - 0.5 * p.squaredNorm(); }

    static Leaf at(const Target& target, Eigen::VectorXd q0) {
        Leaf l;
        l.q = std::move(q0);
        l.grad.resize(l.q.size());
        l.logp = target.log_density_gradient(l.q, l.grad);
        l.p = Eigen::VectorXd::Zero(l.q.size());
        return l;
    }
};

template <class Target>
inline Leaf<Target> leapfrog(const Target& target, const Leaf<Target>& from, double eps) {
    Leaf<Target> out;
    out.p = from.p + 0.5 * eps * from.grad;
    out.q = from.q + eps * out.p;
    out.grad.resize(out.q.size());
    out.logp = target.log_density_gradient(out.q, out.grad);
    if (!std::isfinite(out.logp)) {
        out.logp = -std::numeric_limits<double>::infinity();
        out.grad.setZero();
    }
    out.p += 0.5 * eps * out.grad;
    return out;
}

inline bool no_u_turn(const Eigen::VectorXd& q_minus, const Eigen::VectorXd& p_minus,
                      const Eigen::VectorXd& q_plus, const Eigen::VectorXd& p_plus) {
    const Eigen::VectorXd dq = q_plus - q_minus;
    return dq.dot(p_minus) >= 0.0 && dq.dot(p_plus) >= 0.0;
}

template <class Target>
struct Subtree {
    Leaf<Target> minus, plus, prop;
    double n_slice = 0.0;
    bool ok = true; // no U-turn and no divergence inside
    bool divergent = false;
    double alpha_sum = 0.0;
    int n_alpha = 0;
};

/// Doubling step of the trajectory tree. `lu` is the log slice level,
/// `h0` the Hamiltonian at the trajectory start.
template <class Target>
Subtree<Target> build_tree(const Target& target, Rng& rng, const Leaf<Target>& from, int dir,
                           int depth, double lu, double eps, double h0, double delta_max) {
    Subtree<Target> t;
    if (depth == 0) {
        Leaf<Target> leaf = leapfrog(target, from, dir * eps);
        const double h = leaf.hamiltonian();
        t.n_slice = lu <= h ? 1.0 : 0.0;
        t.divergent = lu > h + delta_max;
        t.ok = !t.divergent;
        t.alpha_sum = std::isfinite(h) ? std::min(1.0, std::exp(h - h0)) : 0.0;
        t.n_alpha = 1;
        t.minus = leaf;
        t.plus = leaf;
        t.prop = std::move(leaf);
        return t;
    }

    t = build_tree(target, rng, from, dir, depth - 1, lu, eps, h0, delta_max);
    if (!t.ok) return t;

    const Leaf<Target>& edge = dir > 0 ? t.plus : t.minus;
    Subtree<Target> t2 = build_tree(target, rng, edge, dir, depth - 1, lu, eps, h0, delta_max);

    if (dir > 0)
        t.plus = t2.plus;
    else
        t.minus = t2.minus;

    const double total = t.n_slice + t2.n_slice;
    if (t2.ok && total > 0.0 && rng.uniform() * total < t2.n_slice) t.prop = std::move(t2.prop);
    t.n_slice = total;
    t.divergent = t.divergent || t2.divergent;
    t.ok = t2.ok && no_u_turn(t.minus.q, t.minus.p, t.plus.q, t.plus.p);
    t.alpha_sum += t2.alpha_sum;
    t.n_alpha += t2.n_alpha;
    return t;
}

/// Step size giving roughly even odds of acceptance from q0, found by
/// doubling or halving.
template <class Target>
double find_initial_step(const Target& target, Rng& rng, const Leaf<Target>& start) {
    double eps = 1.0;
    Leaf<Target> from = start;
    for (Eigen::Index i = 0; i < from.p.size(); ++i) from.p(i) = rng.normal();
    const double h0 = from.hamiltonian();

    const auto log_ratio = [&](double e) {
        const Leaf<Target> next = leapfrog(target, from, e);
        const double h = next.hamiltonian();
        return std::isfinite(h) ? h - h0 : -std::numeric_limits<double>::infinity();
    };

    const double dir = log_ratio(eps) > std::log(0.5) ? 1.0 : -1.0;
    for (int iter = 0; iter < 100; ++iter) {
        if (dir * log_ratio(eps) <= -dir * std::log(2.0)) break;
        eps *= std::pow(2.0, dir);
        if (eps < 1e-10 || eps > 1e10) break;
    }
    return eps;
}

template <class Target>
struct ChainResult {
    Eigen::MatrixXd draws;
    Eigen::VectorXd log_post;
    int divergences = 0;
    int max_depth_hits = 0;
    double step_size = 0.0;
};

template <class Target>
ChainResult<Target> run_chain(const Target& target, const SamplerConfig& cfg, Rng rng) {
    const Eigen::Index d = target.dim();
    Eigen::VectorXd q0(d);
    for (Eigen::Index i = 0; i < d; ++i) q0(i) = rng.uniform(-cfg.init_radius, cfg.init_radius);
    Leaf<Target> current = Leaf<Target>::at(target, q0);
    if (!std::isfinite(current.logp))
        throw NonFiniteInput("log density is not finite at the chain's initial position");

    double eps = find_initial_step(target, rng, current);
    DualAverage adapt(eps, cfg.target_accept);

    ChainResult<Target> res;
    res.draws.resize(cfg.draws, d);
    res.log_post.resize(cfg.draws);

    const int total = cfg.warmup + cfg.draws;
    for (int it = 0; it < total; ++it) {
        const bool warm = it < cfg.warmup;
        eps = warm ? adapt.eps() : adapt.eps_final();

        for (Eigen::Index i = 0; i < d; ++i) current.p(i) = rng.normal();
        const double h0 = current.hamiltonian();
        const double lu = h0 + std::log(rng.uniform_pos());

        Leaf<Target> minus = current, plus = current, prop = current;
        double n_slice = 1.0;
        bool ok = true, divergent = false;
        double alpha_sum = 0.0;
        int n_alpha = 0;
        int depth = 0;

        while (ok && depth < cfg.max_treedepth) {
            const int dir = rng.bernoulli(0.5) ? 1 : -1;
            Subtree<Target> t = build_tree(target, rng, dir > 0 ? plus : minus, dir, depth, lu, eps,
                                           h0, cfg.delta_max);
            if (dir > 0)
                plus = t.plus;
            else
                minus = t.minus;

            if (t.ok && rng.uniform() * n_slice < t.n_slice) prop = t.prop;
            n_slice += t.n_slice;
            divergent = divergent || t.divergent;
            alpha_sum += t.alpha_sum;
            n_alpha += t.n_alpha;
            ok = t.ok && no_u_turn(minus.q, minus.p, plus.q, plus.p);
            ++depth;
        }

        current = prop;
        if (warm) {
            adapt.update(n_alpha > 0 ? alpha_sum / double(n_alpha) : 0.0);
        } else {
            if (divergent) ++res.divergences;
            if (depth >= cfg.max_treedepth) ++res.max_depth_hits;
            res.draws.row(it - cfg.warmup) = current.q.transpose();
            res.log_post(it - cfg.warmup) = current.logp;
        }
    }
    res.step_size = adapt.eps_final();
    return res;
}

} // namespace detail

/// Draws from the target with the No-U-Turn sampler: multiplicative
/// doubling of a leapfrog trajectory until the endpoints turn back, a slice
/// variable selecting among valid states, and dual-averaged step size
/// adaptation during warmup. The mass matrix is the identity. Chains run
/// concurrently; each owns a substream derived from the seed, so results
/// are reproducible regardless of scheduling.
template <class Target>
PosteriorSamples sample_posterior(const Target& target, const SamplerConfig& cfg = {},
                                  std::vector<std::string> param_names = {}) {
    cfg.validate();
    const Eigen::Index d = target.dim();
    const Rng root(cfg.seed);

    std::vector<detail::ChainResult<Target>> results(static_cast<std::size_t>(cfg.chains));
    if (cfg.parallel_chains && cfg.chains > 1) {
        std::vector<std::future<detail::ChainResult<Target>>> futs;
        for (int c = 0; c < cfg.chains; ++c)
            futs.push_back(std::async(std::launch::async, [&, c] {
                return detail::run_chain(target, cfg, root.derive(static_cast<std::uint64_t>(c)));
            }));
        for (int c = 0; c < cfg.chains; ++c) results[static_cast<std::size_t>(c)] = futs[static_cast<std::size_t>(c)].get();
    } else {
        for (int c = 0; c < cfg.chains; ++c)
            results[static_cast<std::size_t>(c)] =
                detail::run_chain(target, cfg, root.derive(static_cast<std::uint64_t>(c)));
    }

    PosteriorSamples out;
    out.n_chains = cfg.chains;
    out.n_draws = cfg.draws;
    out.param_names = param_names.empty() ? std::vector<std::string>(static_cast<std::size_t>(d), "")
                                          : std::move(param_names);
    if (out.param_names.front().empty())
        for (Eigen::Index i = 0; i < d; ++i) out.param_names[static_cast<std::size_t>(i)] = "theta_" + std::to_string(i);
    out.draws.resize(static_cast<Eigen::Index>(cfg.chains) * cfg.draws, d);
    out.log_post.resize(static_cast<Eigen::Index>(cfg.chains) * cfg.draws);
    int divergences = 0, depth_hits = 0;
    for (int c = 0; c < cfg.chains; ++c) {
        const auto& r = results[static_cast<std::size_t>(c)];
        out.draws.middleRows(static_cast<Eigen::Index>(c) * cfg.draws, cfg.draws) = r.draws;
        out.log_post.segment(static_cast<Eigen::Index>(c) * cfg.draws, cfg.draws) = r.log_post;
        out.step_sizes.push_back(r.step_size);
        divergences += r.divergences;
        depth_hits += r.max_depth_hits;
    }

    out.diag.divergences = divergences;
    out.diag.divergence_rate = double(divergences) / double(cfg.chains * cfg.draws);
    out.diag.max_treedepth_hits = depth_hits;
    out.diag.rhat.resize(d);
    out.diag.ess.resize(d);
    for (Eigen::Index p = 0; p < d; ++p) {
        std::vector<Eigen::VectorXd> chains;
        for (int c = 0; c < cfg.chains; ++c) chains.push_back(out.chain_param(c, p));
        out.diag.rhat(p) = diagnostics::split_rhat(chains);
        out.diag.ess(p) = diagnostics::effective_sample_size(chains);
    }
    out.diag.converged = out.diag.rhat.maxCoeff() <= cfg.max_rhat &&
                         out.diag.ess.minCoeff() >= cfg.min_ess &&
                         out.diag.divergence_rate <= cfg.max_divergence_rate;

    if (cfg.check_convergence) {
        if (out.diag.divergence_rate > cfg.max_divergence_rate) {
            std::ostringstream os;
            os << "divergence rate " << out.diag.divergence_rate << " exceeds "
               << cfg.max_divergence_rate;
            throw DivergenceRateTooHigh(os.str());
        }
        if (out.diag.rhat.maxCoeff() > cfg.max_rhat || out.diag.ess.minCoeff() < cfg.min_ess) {
            std::ostringstream os;
            os << "chains not converged:";
            for (Eigen::Index p = 0; p < d; ++p)
                if (out.diag.rhat(p) > cfg.max_rhat || out.diag.ess(p) < cfg.min_ess)
                    os << " " << out.param_names[static_cast<std::size_t>(p)] << " (rhat="
                       << out.diag.rhat(p) << ", ess=" << out.diag.ess(p) << ")";
            throw NotConverged(os.str());
        }
    }
    return out;
}

inline PosteriorSamples sample_posterior(const LogisticModel& model, const SamplerConfig& cfg = {}) {
    model.validate();
    return sample_posterior(LogisticTarget(model), cfg, model.param_names());
}

// ---------------------------------------------------------------------------
// posterior predictions
// ---------------------------------------------------------------------------

/// Success probability for one feature row under each posterior draw.
inline Eigen::VectorXd predictive_prob_draws(const PosteriorSamples& post, const Eigen::VectorXd& row) {
    if (row.size() + 1 != post.dim()) throw Error("feature row has wrong length");
    Eigen::VectorXd probs(post.rows());
    for (Eigen::Index s = 0; s < post.rows(); ++s) {
        double eta = post.draws(s, 0);
        for (Eigen::Index jj = 0; jj < row.size(); ++jj) eta += post.draws(s, jj + 1) * row(jj);
        probs(s) = sigmoid(eta);
    }
    return probs;
}

/// Posterior-mean success probability, clamped away from 0 and 1 so
/// downstream entropies stay finite.
inline double predictive_prob(const PosteriorSamples& post, const Eigen::VectorXd& row) {
    const double p = predictive_prob_draws(post, row).mean();
    return std::min(1.0 - 1e-12, std::max(1e-12, p));
}

// ---------------------------------------------------------------------------
// posterior summary with a normal overlay
// ---------------------------------------------------------------------------

/// Moment-matched normal for each marginal, with a pdf grid for plotting.
struct NormalFit {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    std::vector<double> grid_x;
    std::vector<double> pdf;
};

inline std::vector<NormalFit> posterior_normal_fit(const PosteriorSamples& post, int grid_points = 101) {
    std::vector<NormalFit> fits;
    for (Eigen::Index p = 0; p < post.dim(); ++p) {
        NormalFit f;
        f.name = post.param_names[static_cast<std::size_t>(p)];
        f.mean = post.mean(p);
        f.sd = post.sd(p);
        const double x0 = f.mean - 4.0 * f.sd, x1 = f.mean + 4.0 * f.sd;
        for (int i = 0; i < grid_points; ++i) {
            const double x = x0 + (x1 - x0) * double(i) / double(grid_points - 1);
            const double z = (x - f.mean) / f.sd;
            f.grid_x.push_back(x);
            f.pdf.push_back(std::exp(-0.5 * z * z) / (f.sd * std::sqrt(2.0 * M_PI)));
        }
        fits.push_back(std::move(f));
    }
    return fits;
}

} // namespace gaze2afc::inference
