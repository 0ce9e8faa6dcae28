#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "regmdp/mdp.hpp"

namespace regmdp {

/// Regularization coefficients in the reparameterized form:
/// alpha = tau + lambda (temperature), kappa = lambda / (tau + lambda).
/// tau and lambda are derived so that tau + lambda reconstructs alpha.
class RegParams {
  public:
    RegParams(double alpha, double kappa) : alpha_(alpha), kappa_(kappa) {
        if (!std::isfinite(alpha) || alpha < 0.0)
            throw std::invalid_argument("RegParams: alpha must be finite and >= 0");
        if (!std::isfinite(kappa) || kappa < 0.0 || kappa >= 1.0)
            throw std::invalid_argument("RegParams: kappa must lie in [0, 1)");
    }

    double alpha() const { return alpha_; }
    double kappa() const { return kappa_; }
    double lambda() const { return kappa_ * alpha_; }
    double tau() const { return alpha_ - lambda(); }

  private:
    double alpha_;
    double kappa_;
};

/// L^alpha over one action row: alpha * log sum_a exp(psi(a)/alpha),
/// stabilized by max subtraction. alpha = 0 returns the row max
/// (the limit of L^alpha).
inline double log_sum_exp(std::span<const double> psi_row, double alpha) {
    if (psi_row.empty()) throw std::invalid_argument("log_sum_exp: empty row");
    double m = -std::numeric_limits<double>::infinity();
    for (double v : psi_row) {
        if (!std::isfinite(v)) throw std::invalid_argument("log_sum_exp: non-finite input");
        m = std::max(m, v);
    }
    if (alpha == 0.0) return m;
    double sum = 0.0;
    for (double v : psi_row) sum += std::exp((v - m) / alpha);
    return m + alpha * std::log(sum);
}

/// Per-state soft value V(s) = L^alpha Psi(s, .).
inline ValueVector soft_value(const QTable& psi, double alpha) {
    ValueVector out(psi.num_states);
    for (int s = 0; s < psi.num_states; ++s)
        out[s] = log_sum_exp(std::span<const double>(psi.row(s), psi.num_actions), alpha);
    return out;
}

/// Lowest state-row index attaining the max; the tie-break convention for
/// all hard (alpha = 0) operators.
inline int argmax_index(std::span<const double> row) {
    int best = 0;
    for (int a = 1; a < static_cast<int>(row.size()); ++a)
        if (row[a] > row[best]) best = a;
    return best;
}

/// One-hot greedy policy with lowest-index tie-break.
inline PolicyTable argmax_policy(const QTable& q) {
    PolicyTable pi(q.num_states, q.num_actions, 0.0);
    for (int s = 0; s < q.num_states; ++s)
        pi(s, argmax_index(std::span<const double>(q.row(s), q.num_actions))) = 1.0;
    return pi;
}

/// Boltzmann policy pi(a|s) = exp(psi(s,a)/alpha) / sum_b exp(psi(s,b)/alpha).
/// Requires alpha > 0; use argmax_policy for the hard limit.
inline PolicyTable softmax_policy(const QTable& psi, double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("softmax_policy: alpha must be positive (argmax_policy handles alpha = 0)");
    PolicyTable pi(psi.num_states, psi.num_actions);
    for (int s = 0; s < psi.num_states; ++s) {
        const double* row = psi.row(s);
        double m = row[0];
        for (int a = 1; a < psi.num_actions; ++a) m = std::max(m, row[a]);
        double sum = 0.0;
        for (int a = 0; a < psi.num_actions; ++a) {
            const double e = std::exp((row[a] - m) / alpha);
            pi(s, a) = e;
            sum += e;
        }
        for (int a = 0; a < psi.num_actions; ++a) pi(s, a) /= sum;
    }
    return pi;
}

/// Soft advantage A = Psi - L^alpha Psi, broadcast per state. Non-positive
/// everywhere and equal to alpha * log softmax_policy(psi, alpha).
inline QTable soft_advantage(const QTable& psi, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("soft_advantage: alpha must be positive");
    const ValueVector v = soft_value(psi, alpha);
    QTable adv = psi;
    for (int s = 0; s < psi.num_states; ++s)
        for (int a = 0; a < psi.num_actions; ++a) adv(s, a) -= v[s];
    return adv;
}

/// Per-state entropy of a policy; range [0, log|A|].
inline ValueVector entropy(const PolicyTable& pi) { return policy_entropy(pi); }

/// Per-state KL(p || q) = sum_a p log(p/q), with 0 log(0/q) = 0 and a
/// +infinity sentinel where p(a) > 0 meets q(a) = 0. Clamped at zero so
/// rounding can never produce a negative divergence.
inline ValueVector kl_divergence(const PolicyTable& p, const PolicyTable& q) {
    if (!p.same_shape(q)) throw std::invalid_argument("kl_divergence: shape mismatch");
    ValueVector out(p.num_states, 0.0);
    for (int s = 0; s < p.num_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < p.num_actions; ++a) {
            const double pa = p(s, a);
            if (pa == 0.0) continue;
            const double qa = q(s, a);
            if (qa == 0.0) {
                acc = std::numeric_limits<double>::infinity();
                break;
            }
            acc += pa * std::log(pa / qa);
        }
        out[s] = std::max(acc, 0.0);
    }
    return out;
}

/// Regularized greedy policy
///   argmax_pi <pi, Q> + tau H(pi) - lambda KL(pi || mu),
/// closed form pi ~ mu^(lambda/alpha) * exp(Q/alpha), computed as a
/// softmax of (Q + lambda log mu) / alpha. Zero-probability entries of mu
/// stay zero when lambda > 0; a row with no admissible action is an error.
inline PolicyTable regularized_greedy(const QTable& q, const PolicyTable& mu,
                                      const RegParams& params) {
    if (!(params.alpha() > 0.0))
        throw std::invalid_argument("regularized_greedy: tau + lambda must be positive");
    if (q.num_states != mu.num_states || q.num_actions != mu.num_actions)
        throw std::invalid_argument("regularized_greedy: shape mismatch");
    const double alpha = params.alpha();
    const double lambda = params.lambda();
    PolicyTable pi(q.num_states, q.num_actions);
    for (int s = 0; s < q.num_states; ++s) {
        double m = -std::numeric_limits<double>::infinity();
        std::vector<double> score(q.num_actions);
        for (int a = 0; a < q.num_actions; ++a) {
            double v = q(s, a);
            if (lambda > 0.0)
                v = (mu(s, a) > 0.0) ? v + lambda * std::log(mu(s, a))
                                     : -std::numeric_limits<double>::infinity();
            score[a] = v;
            m = std::max(m, v);
        }
        if (!std::isfinite(m))
            throw std::invalid_argument("regularized_greedy: reference policy row " +
                                        std::to_string(s) + " has no admissible action");
        double sum = 0.0;
        for (int a = 0; a < q.num_actions; ++a) {
            const double e = std::isfinite(score[a]) ? std::exp((score[a] - m) / alpha) : 0.0;
            pi(s, a) = e;
            sum += e;
        }
        for (int a = 0; a < q.num_actions; ++a) pi(s, a) /= sum;
    }
    return pi;
}

/// Regularized Bellman operator
///   T^{lambda,tau}_{pi|mu} Q = R + gamma P (<pi, Q> + tau H(pi) - lambda KL(pi||mu)).
/// An infinite KL (pi leaving mu's support) is an error here.
inline QTable regularized_bellman(const TabularMdp& mdp, const QTable& q, const PolicyTable& pi,
                                  const PolicyTable& mu, const RegParams& params) {
    ValueVector v = policy_dot(pi, q);
    const ValueVector h = policy_entropy(pi);
    const ValueVector kl = kl_divergence(pi, mu);
    const double tau = params.tau();
    const double lambda = params.lambda();
    for (int s = 0; s < mdp.num_states; ++s) {
        if (lambda > 0.0 && std::isinf(kl[s]))
            throw std::runtime_error("regularized_bellman: infinite KL at state " +
                                     std::to_string(s));
        v[s] += tau * h[s] - lambda * kl[s];
    }
    QTable out = apply_transition(mdp, v);
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a)
            out(s, a) = mdp.reward(s, a) + mdp.discount * out(s, a);
    return out;
}

/// Fixed point of T^tau V = L^tau(R + gamma P V), iterated from zero.
/// temperature = 0 recovers exact_v_star's operator.
inline ValueVector soft_optimal_value(const TabularMdp& mdp, double temperature,
                                      double tol = 1e-10) {
    if (!(tol > 0.0)) throw std::invalid_argument("soft_optimal_value: tol must be positive");
    if (temperature < 0.0)
        throw std::invalid_argument("soft_optimal_value: temperature must be >= 0");
    ValueVector v(mdp.num_states, 0.0);
    const long cap = fixed_point_iteration_cap(mdp, tol, v_max(mdp, temperature));
    for (long it = 0; it < cap; ++it) {
        QTable q = apply_transition(mdp, v);
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a)
                q(s, a) = mdp.reward(s, a) + mdp.discount * q(s, a);
        ValueVector tv = soft_value(q, temperature);
        const double resid = max_abs_diff(tv, v);
        v = std::move(tv);
        if (resid <= tol) return v;
    }
    throw std::runtime_error("soft_optimal_value: iteration cap exceeded");
}

}  // namespace regmdp
