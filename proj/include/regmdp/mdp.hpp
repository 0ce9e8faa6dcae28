#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace regmdp {

/// Per-state values (length num_states).
using ValueVector = std::vector<double>;

/// Dense per-(state, action) table. Stores Q, Psi, advantages, rewards.
struct QTable {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> values;

    QTable() = default;
    QTable(int s, int a, double fill = 0.0)
        : num_states(s), num_actions(a),
          values(static_cast<std::size_t>(s) * a, fill) {}

    double& operator()(int s, int a) { return values[static_cast<std::size_t>(s) * num_actions + a]; }
    double operator()(int s, int a) const { return values[static_cast<std::size_t>(s) * num_actions + a]; }

    const double* row(int s) const { return values.data() + static_cast<std::size_t>(s) * num_actions; }
    double* row(int s) { return values.data() + static_cast<std::size_t>(s) * num_actions; }

    bool same_shape(const QTable& o) const {
        return num_states == o.num_states && num_actions == o.num_actions;
    }
};

/// Row-stochastic policy table pi(a|s).
struct PolicyTable {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> probs;

    PolicyTable() = default;
    PolicyTable(int s, int a, double fill = 0.0)
        : num_states(s), num_actions(a),
          probs(static_cast<std::size_t>(s) * a, fill) {}

    static PolicyTable uniform(int s, int a) {
        return PolicyTable(s, a, 1.0 / static_cast<double>(a));
    }

    double& operator()(int s, int a) { return probs[static_cast<std::size_t>(s) * num_actions + a]; }
    double operator()(int s, int a) const { return probs[static_cast<std::size_t>(s) * num_actions + a]; }

    const double* row(int s) const { return probs.data() + static_cast<std::size_t>(s) * num_actions; }
    double* row(int s) { return probs.data() + static_cast<std::size_t>(s) * num_actions; }

    bool same_shape(const PolicyTable& o) const {
        return num_states == o.num_states && num_actions == o.num_actions;
    }
};

/// Finite MDP (S, A, P, R, gamma) with a known reward bound r_max.
///
/// transition is a flat S*A*S tensor, P[s][a][s'] row-stochastic in s'.
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> transition;  // S * A * S
    QTable reward;                   // S x A
    double discount = 0.0;
    double r_max = 0.0;

    double p(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
    }
    double& p(int s, int a, int s2) {
        return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
    }
    const double* p_row(int s, int a) const {
        return transition.data() + (static_cast<std::size_t>(s) * num_actions + a) * num_states;
    }
};

inline void validate_policy(const PolicyTable& pi, double tol = 1e-12) {
    for (int s = 0; s < pi.num_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < pi.num_actions; ++a) {
            const double v = pi(s, a);
            if (!(v >= 0.0))
                throw std::invalid_argument("policy: negative probability at (s=" +
                                            std::to_string(s) + ", a=" + std::to_string(a) + ")");
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol)
            throw std::invalid_argument("policy: row s=" + std::to_string(s) +
                                        " sums to " + std::to_string(sum));
    }
}

/// Checks all TabularMdp invariants; throws on the first violation,
/// naming the offending indices.
inline void validate_mdp(const TabularMdp& mdp) {
    if (mdp.num_states <= 0 || mdp.num_actions <= 0)
        throw std::invalid_argument("mdp: num_states and num_actions must be positive");
    if (!(mdp.discount > 0.0) || !(mdp.discount < 1.0))
        throw std::invalid_argument("mdp: discount must lie in (0, 1), got " +
                                    std::to_string(mdp.discount));
    const std::size_t want_p = static_cast<std::size_t>(mdp.num_states) * mdp.num_actions * mdp.num_states;
    if (mdp.transition.size() != want_p)
        throw std::invalid_argument("mdp: transition tensor has wrong size");
    if (mdp.reward.num_states != mdp.num_states || mdp.reward.num_actions != mdp.num_actions)
        throw std::invalid_argument("mdp: reward table has wrong shape");
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                const double v = mdp.p(s, a, s2);
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw std::invalid_argument("mdp: P(s'|s,a) negative or non-finite at (s=" +
                                                std::to_string(s) + ", a=" + std::to_string(a) +
                                                ", s'=" + std::to_string(s2) + ")");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("mdp: transition row (s=" + std::to_string(s) +
                                            ", a=" + std::to_string(a) + ") sums to " +
                                            std::to_string(sum));
            const double r = mdp.reward(s, a);
            if (!std::isfinite(r) || std::abs(r) > mdp.r_max + 1e-12)
                throw std::invalid_argument("mdp: |R| exceeds r_max at (s=" + std::to_string(s) +
                                            ", a=" + std::to_string(a) + ")");
        }
    }
}

/// V^tau_max = (R_max + tau log|A|) / (1 - gamma), the sup-norm bound on
/// tau-regularized values.
inline double v_max(const TabularMdp& mdp, double tau = 0.0) {
    return (mdp.r_max + tau * std::log(static_cast<double>(mdp.num_actions))) /
           (1.0 - mdp.discount);
}

/// (P v)(s,a) = sum_s' P(s'|s,a) v(s').
inline QTable apply_transition(const TabularMdp& mdp, const ValueVector& v) {
    QTable out(mdp.num_states, mdp.num_actions);
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double* p = mdp.p_row(s, a);
            double acc = 0.0;
            for (int s2 = 0; s2 < mdp.num_states; ++s2) acc += p[s2] * v[s2];
            out(s, a) = acc;
        }
    }
    return out;
}

/// (P^pi v)(s) = sum_a pi(a|s) sum_s' P(s'|s,a) v(s').
inline ValueVector apply_policy_transition(const TabularMdp& mdp, const PolicyTable& pi,
                                           const ValueVector& v) {
    ValueVector out(mdp.num_states, 0.0);
    for (int s = 0; s < mdp.num_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double w = pi(s, a);
            if (w == 0.0) continue;
            const double* p = mdp.p_row(s, a);
            double dot = 0.0;
            for (int s2 = 0; s2 < mdp.num_states; ++s2) dot += p[s2] * v[s2];
            acc += w * dot;
        }
        out[s] = acc;
    }
    return out;
}

/// <pi, X>(s) = sum_a pi(a|s) X(s,a).
inline ValueVector policy_dot(const PolicyTable& pi, const QTable& x) {
    ValueVector out(pi.num_states, 0.0);
    for (int s = 0; s < pi.num_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < pi.num_actions; ++a) acc += pi(s, a) * x(s, a);
        out[s] = acc;
    }
    return out;
}

inline double max_abs_diff(const ValueVector& a, const ValueVector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(const ValueVector& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// Entropy of each policy row, -sum_a pi log pi, with 0 log 0 = 0.
inline ValueVector policy_entropy(const PolicyTable& pi) {
    ValueVector out(pi.num_states, 0.0);
    for (int s = 0; s < pi.num_states; ++s) {
        double h = 0.0;
        for (int a = 0; a < pi.num_actions; ++a) {
            const double p = pi(s, a);
            if (p > 0.0) h -= p * std::log(p);
        }
        out[s] = h;
    }
    return out;
}

/// Default cap for fixed-point iterations: iterations needed to contract
/// the value scale down to tol, plus margin.
inline long fixed_point_iteration_cap(const TabularMdp& mdp, double tol, double value_scale) {
    if (value_scale <= tol) return 1000;
    const double need = std::log(tol * (1.0 - mdp.discount) / value_scale) / std::log(mdp.discount);
    return static_cast<long>(std::ceil(need)) + 1000;
}

/// Fixed point of T^{0,tau}_pi V = <pi, R + gamma P V> + tau H(pi),
/// iterated from the zero vector until ||T V - V||_inf <= tol.
inline ValueVector soft_policy_evaluation(const TabularMdp& mdp, const PolicyTable& pi,
                                          double tau, double tol = 1e-10) {
    if (!(tol > 0.0)) throw std::invalid_argument("soft_policy_evaluation: tol must be positive");
    if (!pi.same_shape(PolicyTable(mdp.num_states, mdp.num_actions)))
        throw std::invalid_argument("soft_policy_evaluation: policy shape mismatch");
    const ValueVector h = policy_entropy(pi);
    ValueVector r_pi(mdp.num_states, 0.0);
    for (int s = 0; s < mdp.num_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) acc += pi(s, a) * mdp.reward(s, a);
        r_pi[s] = acc + tau * h[s];
    }
    ValueVector v(mdp.num_states, 0.0);
    const long cap = fixed_point_iteration_cap(mdp, tol, v_max(mdp, tau));
    for (long it = 0; it < cap; ++it) {
        ValueVector tv = apply_policy_transition(mdp, pi, v);
        for (int s = 0; s < mdp.num_states; ++s) {
            tv[s] = r_pi[s] + mdp.discount * tv[s];
            if (!std::isfinite(tv[s]))
                throw std::runtime_error("soft_policy_evaluation: non-finite value at state " +
                                         std::to_string(s));
        }
        const double resid = max_abs_diff(tv, v);
        v = std::move(tv);
        if (resid <= tol) return v;
    }
    throw std::runtime_error("soft_policy_evaluation: iteration cap exceeded");
}

/// Same fixed point solved directly via (I - gamma P^pi) V = r^pi + tau H(pi).
/// Used where per-iteration evaluations would make iterative solves the
/// bottleneck (suboptimality curves).
inline ValueVector soft_policy_evaluation_direct(const TabularMdp& mdp, const PolicyTable& pi,
                                                 double tau) {
    const int n = mdp.num_states;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double w = pi(s, a);
            if (w == 0.0) continue;
            const double* p = mdp.p_row(s, a);
            for (int s2 = 0; s2 < n; ++s2) m(s, s2) -= mdp.discount * w * p[s2];
        }
    }
    const ValueVector h = policy_entropy(pi);
    Eigen::VectorXd b(n);
    for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) acc += pi(s, a) * mdp.reward(s, a);
        b(s) = acc + tau * h[s];
    }
    const Eigen::VectorXd x = m.partialPivLu().solve(b);
    return ValueVector(x.data(), x.data() + n);
}

/// Non-regularized optimal value via value iteration from zero,
/// T V = max_a (R + gamma P V), to residual tol.
inline ValueVector exact_v_star(const TabularMdp& mdp, double tol = 1e-10) {
    if (!(tol > 0.0)) throw std::invalid_argument("exact_v_star: tol must be positive");
    ValueVector v(mdp.num_states, 0.0);
    const long cap = fixed_point_iteration_cap(mdp, tol, v_max(mdp));
    for (long it = 0; it < cap; ++it) {
        QTable q = apply_transition(mdp, v);
        ValueVector tv(mdp.num_states);
        for (int s = 0; s < mdp.num_states; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.num_actions; ++a)
                best = std::max(best, mdp.reward(s, a) + mdp.discount * q(s, a));
            tv[s] = best;
        }
        const double resid = max_abs_diff(tv, v);
        v = std::move(tv);
        if (resid <= tol) return v;
    }
    throw std::runtime_error("exact_v_star: iteration cap exceeded");
}

}  // namespace regmdp
