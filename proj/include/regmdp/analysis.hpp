#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "regmdp/bounding.hpp"
#include "regmdp/mdp.hpp"
#include "regmdp/soft_ops.hpp"
#include "regmdp/solvers.hpp"

namespace regmdp {

/// Interquartile mean: drops floor(n/4) order statistics from each tail and
/// averages the rest. For n divisible by 4 this is the mean of the middle
/// half.
inline double iqm(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("iqm: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t k = values.size() / 4;
    double acc = 0.0;
    for (std::size_t i = k; i < values.size() - k; ++i) acc += values[i];
    return acc / static_cast<double>(values.size() - 2 * k);
}

/// ||V^{pi_k}_tau - V*_tau||_inf per iteration, normalized by the
/// iteration-0 value so the curve starts at exactly 1. Uses stored policy
/// tables when present, otherwise the suboptimality recorded during the run.
inline std::vector<double> suboptimality_curve(const TabularMdp& mdp, const RunTrace& trace,
                                               double tau, const ValueVector& v_star_tau) {
    std::vector<double> raw;
    raw.reserve(trace.records.size());
    for (const IterationRecord& rec : trace.records) {
        if (rec.diverged) break;
        if (rec.pi.has_value()) {
            const ValueVector v_pi = soft_policy_evaluation_direct(mdp, *rec.pi, tau);
            raw.push_back(max_abs_diff(v_pi, v_star_tau));
        } else if (std::isfinite(rec.suboptimality)) {
            raw.push_back(rec.suboptimality);
        } else {
            throw std::invalid_argument(
                "suboptimality_curve: trace has neither policy tables nor recorded suboptimality");
        }
    }
    if (raw.empty()) return raw;
    const double base = raw[0] > 0.0 ? raw[0] : 1.0;
    for (double& v : raw) v /= base;
    return raw;
}

/// Convergence-bound report for a finished run (limit bounds of the
/// convergent-operator family, with the explicit lower-bound width
/// kappa c_f + gamma alpha delta_bar(g) log|A|).
struct BoundReport {
    ValueVector v_star_alpha;
    ValueVector v_star_tau;
    ValueVector v_tilde;
    ValueVector upper_slack;  // V*_alpha - V~ per state
    ValueVector lower_slack;  // V~ - (V*_alpha - width/(1-gamma)) per state
    double c_f = 0.0;
    double delta_bar_g = 0.0;
    double bound_width = 0.0;  // kappa c_f + gamma alpha delta_bar_g log|A|
    bool converged = false;    // trailing-window V change below tolerance
    bool upper_satisfied = false;        // V~ <= V*_alpha
    bool lower_satisfied = false;        // V~ >= V*_alpha - width/(1-gamma)
    bool theorem3_lower_applicable = false;  // g = Identity
    bool theorem3_lower_satisfied = false;   // V~ >= V*_tau
    bool psi_upper_satisfied = false;    // limsup Psi_k <= Q*_alpha
    bool psi_lower_satisfied = false;    // liminf Psi_k >= Q~ - width
};

/// Checks the limit bounds on a (nominally converged) trace with stored
/// tables. "Converged" means ||V_k - V_{k-1}||_inf <= conv_tol over the
/// trailing window of up to 10 iterations; limsup/liminf over the trace are
/// approximated by the elementwise max/min over that window. Non-converged
/// traces are flagged but still reported.
inline BoundReport limit_bound_check(const TabularMdp& mdp, const RunTrace& trace,
                                     const RegParams& params, const BoundingFn& f,
                                     const BoundingFn& g, double tol = 1e-6,
                                     double conv_tol = 1e-8, double value_tol = 1e-10) {
    std::vector<const IterationRecord*> with_tables;
    for (const IterationRecord& rec : trace.records)
        if (rec.psi.has_value() && rec.v.has_value()) with_tables.push_back(&rec);
    if (with_tables.empty())
        throw std::invalid_argument("limit_bound_check: trace has no stored tables");

    const double alpha = params.alpha();
    const double gamma = mdp.discount;
    BoundReport report;
    report.v_star_alpha = soft_optimal_value(mdp, alpha, value_tol);
    report.v_star_tau = soft_optimal_value(mdp, params.tau(), value_tol);
    report.v_tilde = *with_tables.back()->v;
    report.c_f = f.c_h();
    report.delta_bar_g = alpha > 0.0 ? delta_bar(g, alpha) : 0.0;
    report.bound_width = params.kappa() * report.c_f +
                         gamma * alpha * report.delta_bar_g *
                             std::log(static_cast<double>(mdp.num_actions));

    const std::size_t window = std::min<std::size_t>(10, with_tables.size());
    const std::size_t begin = with_tables.size() - window;
    report.converged = window >= 2;
    for (std::size_t i = begin + 1; i < with_tables.size(); ++i) {
        if (max_abs_diff(*with_tables[i]->v, *with_tables[i - 1]->v) > conv_tol)
            report.converged = false;
    }

    report.upper_slack.resize(mdp.num_states);
    report.lower_slack.resize(mdp.num_states);
    const double horizon_width = report.bound_width / (1.0 - gamma);
    report.upper_satisfied = true;
    report.lower_satisfied = true;
    report.theorem3_lower_applicable = g.variant == BoundingFn::Variant::kIdentity;
    report.theorem3_lower_satisfied = true;
    for (int s = 0; s < mdp.num_states; ++s) {
        report.upper_slack[s] = report.v_star_alpha[s] - report.v_tilde[s];
        if (report.upper_slack[s] < -tol) report.upper_satisfied = false;
        report.lower_slack[s] = report.v_tilde[s] - (report.v_star_alpha[s] - horizon_width);
        if (report.lower_slack[s] < -tol) report.lower_satisfied = false;
        if (report.v_tilde[s] < report.v_star_tau[s] - tol) report.theorem3_lower_satisfied = false;
    }

    // limsup / liminf of Psi over the trailing window, elementwise
    QTable psi_sup = *with_tables[begin]->psi;
    QTable psi_inf = psi_sup;
    for (std::size_t i = begin + 1; i < with_tables.size(); ++i) {
        const QTable& p = *with_tables[i]->psi;
        for (std::size_t j = 0; j < psi_sup.values.size(); ++j) {
            psi_sup.values[j] = std::max(psi_sup.values[j], p.values[j]);
            psi_inf.values[j] = std::min(psi_inf.values[j], p.values[j]);
        }
    }
    const QTable p_v_star = apply_transition(mdp, report.v_star_alpha);
    const QTable p_v_tilde = apply_transition(mdp, report.v_tilde);
    report.psi_upper_satisfied = true;
    report.psi_lower_satisfied = true;
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double q_star = mdp.reward(s, a) + gamma * p_v_star(s, a);
            const double q_tilde = mdp.reward(s, a) + gamma * p_v_tilde(s, a);
            if (psi_sup(s, a) > q_star + tol) report.psi_upper_satisfied = false;
            if (psi_inf(s, a) < q_tilde - report.bound_width - tol)
                report.psi_lower_satisfied = false;
        }
    }
    return report;
}

/// tau-optimal quantities used by the inherent-error decomposition.
struct TauOptimal {
    ValueVector v_star_tau;
    QTable q_star_tau;      // R + gamma P V*_tau
    QTable a_star_tau;      // Q*_tau - V*_tau
    PolicyTable pi_star;    // softmax(Q*_tau / tau), argmax for tau = 0
};

inline TauOptimal compute_tau_optimal(const TabularMdp& mdp, double tau,
                                      double value_tol = 1e-10) {
    TauOptimal out;
    out.v_star_tau = soft_optimal_value(mdp, tau, value_tol);
    out.q_star_tau = apply_transition(mdp, out.v_star_tau);
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a)
            out.q_star_tau(s, a) = mdp.reward(s, a) + mdp.discount * out.q_star_tau(s, a);
    out.pi_star = tau > 0.0 ? softmax_policy(out.q_star_tau, tau) : argmax_policy(out.q_star_tau);
    out.a_star_tau = out.q_star_tau;
    const ValueVector v = tau > 0.0 ? soft_value(out.q_star_tau, tau) : out.v_star_tau;
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) out.a_star_tau(s, a) -= v[s];
    return out;
}

/// Per-iteration inherent-error terms of a run, with the Identity-baseline
/// columns computed on the same advantage sequence:
///   cross term    Xf:  -kappa <pi*, f(A_{k-1})>
///   entropy term  Hg:  <pi*, kappa A*_tau - gamma P <pi_k, A_{k-1} - g(A_{k-1})>>
///   total         fg:  Xf + Hg.
/// premise_holds records, per iteration, whether
/// gamma P^{pi*} H(pi_k) <= kappa H(pi*) held at every state.
struct ErrorTermReport {
    std::vector<double> delta_xf;    // ||Delta^{Xf}_k||_inf, k = 1..K
    std::vector<double> delta_hg;
    std::vector<double> delta_fg;
    std::vector<double> delta_xid;   // Identity baselines on the same trace
    std::vector<double> delta_hid;
    std::vector<bool> premise_holds;
};

inline ErrorTermReport error_terms(const TabularMdp& mdp, const RunTrace& trace,
                                   const RegParams& params, const BoundingFn& f,
                                   const BoundingFn& g, const PolicyTable& pi_star,
                                   const QTable& a_star_tau) {
    if (pi_star.num_states != mdp.num_states || pi_star.num_actions != mdp.num_actions ||
        a_star_tau.num_states != mdp.num_states || a_star_tau.num_actions != mdp.num_actions)
        throw std::invalid_argument("error_terms: shape mismatch");
    const double kappa = params.kappa();
    const double gamma = mdp.discount;
    const ValueVector h_star = policy_entropy(pi_star);
    const ValueVector kappa_h_star = [&] {
        ValueVector v = h_star;
        for (double& x : v) x *= kappa;
        return v;
    }();
    ValueVector d_hid(mdp.num_states, 0.0);  // <pi*, kappa A*_tau>, iteration-independent
    for (int s = 0; s < mdp.num_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) acc += pi_star(s, a) * a_star_tau(s, a);
        d_hid[s] = kappa * acc;
    }

    ErrorTermReport report;
    for (std::size_t k = 1; k < trace.records.size(); ++k) {
        const IterationRecord& prev = trace.records[k - 1];
        const IterationRecord& cur = trace.records[k];
        if (cur.diverged) break;
        if (!prev.psi.has_value() || !prev.v.has_value() || !cur.pi.has_value())
            throw std::invalid_argument("error_terms: trace must store full tables");
        const long step_t = static_cast<long>(k) - 1;  // step index used by the k-th update

        QTable adv = *prev.psi;
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) adv(s, a) -= (*prev.v)[s];

        ValueVector d_xf(mdp.num_states), d_xid(mdp.num_states);
        for (int s = 0; s < mdp.num_states; ++s) {
            double acc_f = 0.0, acc_id = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double w = pi_star(s, a);
                if (w == 0.0) continue;
                acc_f += w * bound_eval(f, adv(s, a), step_t);
                acc_id += w * adv(s, a);
            }
            d_xf[s] = -kappa * acc_f;
            d_xid[s] = -kappa * acc_id;
        }

        ValueVector u(mdp.num_states, 0.0);  // <pi_k, A_{k-1} - g(A_{k-1})>
        for (int s = 0; s < mdp.num_states; ++s) {
            double acc = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double w = (*cur.pi)(s, a);
                if (w == 0.0) continue;
                acc += w * (adv(s, a) - bound_eval(g, adv(s, a), step_t));
            }
            u[s] = acc;
        }
        const QTable pu = apply_transition(mdp, u);
        ValueVector d_hg(mdp.num_states);
        for (int s = 0; s < mdp.num_states; ++s) {
            double acc = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double w = pi_star(s, a);
                if (w == 0.0) continue;
                acc += w * (kappa * a_star_tau(s, a) - gamma * pu(s, a));
            }
            d_hg[s] = acc;
        }

        ValueVector d_fg(mdp.num_states);
        for (int s = 0; s < mdp.num_states; ++s) d_fg[s] = d_xf[s] + d_hg[s];

        const ValueVector h_k = policy_entropy(*cur.pi);
        const ValueVector ph = apply_policy_transition(mdp, pi_star, h_k);
        bool premise = true;
        for (int s = 0; s < mdp.num_states; ++s)
            if (gamma * ph[s] > kappa_h_star[s] + 1e-12) premise = false;

        report.delta_xf.push_back(max_abs(d_xf));
        report.delta_xid.push_back(max_abs(d_xid));
        report.delta_hg.push_back(max_abs(d_hg));
        report.delta_hid.push_back(max_abs(d_hid));
        report.delta_fg.push_back(max_abs(d_fg));
        report.premise_holds.push_back(premise);
    }
    return report;
}

/// Action-gap summaries recorded along a trace (gap = V_k(s) - Psi_k(s,a),
/// suboptimal actions are those strictly below the row max).
inline std::vector<GapStats> gap_statistics(const RunTrace& trace) {
    std::vector<GapStats> out;
    for (const IterationRecord& rec : trace.records) {
        if (rec.diverged) break;
        out.push_back(rec.gaps);
    }
    return out;
}

}  // namespace regmdp
