#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "regmdp/bounding.hpp"
#include "regmdp/mdp.hpp"
#include "regmdp/rng.hpp"
#include "regmdp/soft_ops.hpp"

namespace regmdp {

enum class Scheme { kMdviExplicit, kMvi, kBal };

struct NoiseConfig {
    enum class Distribution { kUniform, kGaussian };
    Distribution distribution = Distribution::kUniform;
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};

struct PsiInit {
    enum class Kind { kZeros, kUniform, kUniformVTauMax, kTable };
    Kind kind = Kind::kZeros;
    double magnitude = 0.0;  // kUniform: Psi0 ~ Unif(-magnitude, magnitude)
    QTable table;            // kTable

    static PsiInit zeros() { return {}; }
    static PsiInit uniform(double magnitude) { return {Kind::kUniform, magnitude, {}}; }
    static PsiInit uniform_v_tau_max() { return {Kind::kUniformVTauMax, 0.0, {}}; }
    static PsiInit explicit_table(QTable t) { return {Kind::kTable, 0.0, std::move(t)}; }
};

struct TraceOptions {
    bool store_tables = false;    // keep Psi_k, pi_k, V_k and per-state diagnostics
    bool suboptimality = true;    // evaluate ||V^{pi_k}_tau - V*_tau||_inf per iteration
};

/// M-VI is BAL with f = g = Identity and Expected Sarsa is BAL with
/// f = g = Zero; the scheme tag only selects the recursion that is run
/// (explicit MDVI keeps Q_k and pi_k, the others keep Psi_k).
struct SolverConfig {
    Scheme scheme = Scheme::kMvi;
    RegParams params{0.02, 0.99};
    BoundingFn f = BoundingFn::identity();
    BoundingFn g = BoundingFn::identity();
    int iterations = 100;
    std::uint64_t seed = 0;
    std::optional<NoiseConfig> noise;
    PsiInit psi_init = PsiInit::zeros();
    TraceOptions record;
    bool allow_invalid_bounding = false;
    double divergence_ceiling_factor = 1e6;
    double value_tol = 1e-10;  // fixed-point tolerance for internal oracles
};

struct GapStats {
    double min_suboptimal = std::numeric_limits<double>::quiet_NaN();
    double mean_suboptimal = std::numeric_limits<double>::quiet_NaN();
    double max_suboptimal = std::numeric_limits<double>::quiet_NaN();
    double mean_all = std::numeric_limits<double>::quiet_NaN();
};

/// Diagnostics of one solver update.
struct StepDiagnostics {
    ValueVector entropy;         // H(pi_{k+1}) per state
    ValueVector kl;              // KL(pi_{k+1} || pi_k) per state
    ValueVector condition_residual;   // convergence-condition residual per state
};

/// Record k holds the state after the update that produced Psi_k:
/// pi is the policy used in that update (pi_k = greedy of Psi_{k-1}),
/// kl is KL(pi_k || pi_{k-1}) and condition_residual belongs to the same
/// transition. Record 0 is the initialization (uniform pi_0).
struct IterationRecord {
    int iteration = 0;
    double suboptimality = std::numeric_limits<double>::quiet_NaN();
    double entropy_mean = std::numeric_limits<double>::quiet_NaN();
    double kl_mean = std::numeric_limits<double>::quiet_NaN();
    double condition_residual_min = std::numeric_limits<double>::quiet_NaN();
    GapStats gaps;
    double psi_abs_max = 0.0;
    double wall_time_s = 0.0;
    bool diverged = false;

    // populated when TraceOptions::store_tables is set
    std::optional<QTable> psi;
    std::optional<PolicyTable> pi;
    std::optional<ValueVector> v;
    std::optional<StepDiagnostics> diagnostics;
};

struct RunTrace {
    std::vector<IterationRecord> records;
    bool diverged = false;
    int diverged_at = -1;
};

/// Residual of the convergence condition at one transition:
///   lambda KL(pi_{k+1}||pi_k) - gamma P^{pi_{k+1}}(alpha H(pi_{k+1}) + <pi_{k+1}, g(A_k)>),
/// non-negative exactly where the condition holds. States with infinite KL
/// count as satisfied (+infinity).
inline ValueVector convergence_condition_residual(const TabularMdp& mdp,
                                                  const PolicyTable& pi_next,
                                                  const PolicyTable& pi_k, const QTable& a_k,
                                                  const RegParams& params, const BoundingFn& g,
                                                  long step_t = 0) {
    const ValueVector kl = kl_divergence(pi_next, pi_k);
    const ValueVector h = policy_entropy(pi_next);
    ValueVector inner(mdp.num_states, 0.0);
    for (int s = 0; s < mdp.num_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double w = pi_next(s, a);
            if (w == 0.0) continue;
            acc += w * bound_eval(g, a_k(s, a), step_t);
        }
        inner[s] = params.alpha() * h[s] + acc;
    }
    const ValueVector pv = apply_policy_transition(mdp, pi_next, inner);
    ValueVector residual(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) {
        residual[s] = std::isinf(kl[s]) ? std::numeric_limits<double>::infinity()
                                        : params.lambda() * kl[s] - mdp.discount * pv[s];
    }
    return residual;
}

/// One explicit MDVI update:
///   pi_{k+1} = regularized greedy of Q_k anchored at pi_k,
///   Q_{k+1}  = regularized Bellman backup (+ optional error table).
inline std::pair<QTable, PolicyTable> mdvi_explicit_step(const TabularMdp& mdp, const QTable& q_k,
                                                         const PolicyTable& pi_k,
                                                         const RegParams& params,
                                                         const QTable* noise = nullptr) {
    PolicyTable pi_next = params.alpha() > 0.0 ? regularized_greedy(q_k, pi_k, params)
                                               : argmax_policy(q_k);
    QTable q_next = regularized_bellman(mdp, q_k, pi_next, pi_k, params);
    if (noise != nullptr) {
        for (std::size_t i = 0; i < q_next.values.size(); ++i)
            q_next.values[i] += noise->values[i];
    }
    return {std::move(q_next), std::move(pi_next)};
}

struct BalStepResult {
    QTable psi_next;
    PolicyTable pi_next;
    StepDiagnostics diagnostics;
};

/// One BAL update (the bounded gap-increasing operator):
///   pi_{k+1}  = softmax(Psi_k / alpha)          (argmax when alpha = 0)
///   Psi_{k+1} = R + kappa f(A_k) + gamma P <pi_{k+1}, Psi_k - g(A_k)> + eps.
/// pi_prev feeds the KL and condition diagnostics; when absent those are
/// reported against the uniform policy. In the hard case alpha = 0 the
/// entropy is identically zero and KL/condition diagnostics are undefined
/// (NaN).
inline BalStepResult bal_step(const TabularMdp& mdp, const QTable& psi_k, const RegParams& params,
                              const BoundingFn& f, const BoundingFn& g, long step_t = 0,
                              const QTable* noise = nullptr,
                              const PolicyTable* pi_prev = nullptr) {
    const double alpha = params.alpha();
    const double kappa = params.kappa();
    const bool hard = alpha == 0.0;

    BalStepResult out;
    out.pi_next = hard ? argmax_policy(psi_k) : softmax_policy(psi_k, alpha);
    const ValueVector v = soft_value(psi_k, alpha);

    QTable adv = psi_k;
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) adv(s, a) -= v[s];

    ValueVector inner(mdp.num_states, 0.0);
    for (int s = 0; s < mdp.num_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double w = out.pi_next(s, a);
            if (w == 0.0) continue;
            acc += w * (psi_k(s, a) - bound_eval(g, adv(s, a), step_t));
        }
        inner[s] = acc;
    }

    out.psi_next = QTable(mdp.num_states, mdp.num_actions);
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double* p = mdp.p_row(s, a);
            double acc = 0.0;
            for (int s2 = 0; s2 < mdp.num_states; ++s2) acc += p[s2] * inner[s2];
            out.psi_next(s, a) = mdp.reward(s, a) + kappa * bound_eval(f, adv(s, a), step_t) +
                                 mdp.discount * acc;
        }
    }
    if (noise != nullptr) {
        for (std::size_t i = 0; i < out.psi_next.values.size(); ++i)
            out.psi_next.values[i] += noise->values[i];
    }

    out.diagnostics.entropy = hard ? ValueVector(mdp.num_states, 0.0)
                                   : policy_entropy(out.pi_next);
    if (hard) {
        out.diagnostics.kl.assign(mdp.num_states, std::numeric_limits<double>::quiet_NaN());
        out.diagnostics.condition_residual.assign(mdp.num_states,
                                             std::numeric_limits<double>::quiet_NaN());
    } else {
        const PolicyTable uniform = PolicyTable::uniform(mdp.num_states, mdp.num_actions);
        const PolicyTable& ref = pi_prev != nullptr ? *pi_prev : uniform;
        out.diagnostics.kl = kl_divergence(out.pi_next, ref);
        out.diagnostics.condition_residual =
            convergence_condition_residual(mdp, out.pi_next, ref, adv, params, g, step_t);
    }
    return out;
}

/// Max-abs residual of the mirror-descent form of the BAL operator:
/// with Q_k = Psi_k - kappa alpha log pi_k, one BAL update of Psi_k equals
///   T^{lambda,tau}_{pi_{k+1}|pi_k} Q_k + kappa A_k - kappa (A_k - f(A_k))
///     + gamma P <pi_{k+1}, A_k - g(A_k)>,
/// i.e. the MDVI backup of Q_k plus the Munchausen bonus kappa A_k and the
/// two bounding corrections. Both sides are evaluated independently.
/// pi_k must be strictly positive.
inline double mirror_descent_residual(const TabularMdp& mdp, const QTable& psi_k,
                                      const PolicyTable& pi_k, const RegParams& params,
                                      const BoundingFn& f, const BoundingFn& g, long step_t = 0) {
    if (!(params.alpha() > 0.0))
        throw std::invalid_argument("mirror_descent_residual: alpha must be positive");
    const double alpha = params.alpha();
    const double kappa = params.kappa();

    const BalStepResult lhs = bal_step(mdp, psi_k, params, f, g, step_t);

    QTable q_k = psi_k;
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            if (!(pi_k(s, a) > 0.0))
                throw std::invalid_argument(
                    "mirror_descent_residual: reference policy must be strictly positive");
            q_k(s, a) -= kappa * alpha * std::log(pi_k(s, a));
        }
    }
    const QTable adv = soft_advantage(psi_k, alpha);
    QTable rhs = regularized_bellman(mdp, q_k, lhs.pi_next, pi_k, params);
    ValueVector corr(mdp.num_states, 0.0);
    for (int s = 0; s < mdp.num_states; ++s) {
        double acc = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a)
            acc += lhs.pi_next(s, a) * (adv(s, a) - bound_eval(g, adv(s, a), step_t));
        corr[s] = acc;
    }
    const QTable p_corr = apply_transition(mdp, corr);
    double residual = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double av = adv(s, a);
            rhs(s, a) += kappa * av - kappa * (av - bound_eval(f, av, step_t)) +
                         mdp.discount * p_corr(s, a);
            residual = std::max(residual, std::abs(lhs.psi_next(s, a) - rhs(s, a)));
        }
    }
    return residual;
}

/// Overload with the uniform reference policy.
inline double mirror_descent_residual(const TabularMdp& mdp, const QTable& psi_k,
                                      const RegParams& params, const BoundingFn& f,
                                      const BoundingFn& g, long step_t = 0) {
    return mirror_descent_residual(mdp, psi_k, PolicyTable::uniform(mdp.num_states, mdp.num_actions),
                                   params, f, g, step_t);
}

namespace detail {

inline GapStats gap_stats_of(const QTable& psi, const ValueVector& v) {
    GapStats st;
    double sum_all = 0.0, sum_sub = 0.0;
    double min_sub = std::numeric_limits<double>::infinity();
    double max_sub = -std::numeric_limits<double>::infinity();
    long n_all = 0, n_sub = 0;
    for (int s = 0; s < psi.num_states; ++s) {
        double row_max = psi(s, 0);
        for (int a = 1; a < psi.num_actions; ++a) row_max = std::max(row_max, psi(s, a));
        for (int a = 0; a < psi.num_actions; ++a) {
            const double gap = v[s] - psi(s, a);
            sum_all += gap;
            ++n_all;
            if (psi(s, a) < row_max) {
                sum_sub += gap;
                ++n_sub;
                min_sub = std::min(min_sub, gap);
                max_sub = std::max(max_sub, gap);
            }
        }
    }
    st.mean_all = sum_all / static_cast<double>(n_all);
    if (n_sub > 0) {
        st.min_suboptimal = min_sub;
        st.mean_suboptimal = sum_sub / static_cast<double>(n_sub);
        st.max_suboptimal = max_sub;
    }
    return st;
}

inline double mean_of(const ValueVector& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

inline double min_of(const ValueVector& v) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : v) m = std::min(m, x);
    return m;
}

inline QTable draw_psi_init(const TabularMdp& mdp, const SolverConfig& config, Rng& rng) {
    switch (config.psi_init.kind) {
        case PsiInit::Kind::kZeros: return QTable(mdp.num_states, mdp.num_actions, 0.0);
        case PsiInit::Kind::kUniform: {
            QTable psi(mdp.num_states, mdp.num_actions);
            const double m = config.psi_init.magnitude;
            for (double& v : psi.values) v = rng.uniform(-m, m);
            return psi;
        }
        case PsiInit::Kind::kUniformVTauMax: {
            QTable psi(mdp.num_states, mdp.num_actions);
            const double m = v_max(mdp, config.params.tau());
            for (double& v : psi.values) v = rng.uniform(-m, m);
            return psi;
        }
        case PsiInit::Kind::kTable: {
            if (config.psi_init.table.num_states != mdp.num_states ||
                config.psi_init.table.num_actions != mdp.num_actions)
                throw std::invalid_argument("run_scheme: explicit Psi_0 table has wrong shape");
            return config.psi_init.table;
        }
    }
    return QTable(mdp.num_states, mdp.num_actions, 0.0);
}

inline QTable draw_noise(const TabularMdp& mdp, const NoiseConfig& noise, Rng& rng) {
    QTable eps(mdp.num_states, mdp.num_actions);
    for (double& v : eps.values) {
        v = noise.distribution == NoiseConfig::Distribution::kUniform
                ? rng.uniform(-noise.magnitude, noise.magnitude)
                : noise.magnitude * rng.gaussian();
    }
    return eps;
}

}  // namespace detail

/// Runs the configured scheme for config.iterations updates and returns the
/// per-iteration trace. Deterministic given the config (including seed).
///
/// Psi_0 is drawn per psi_init; explicit MDVI derives its Q_0 from the same
/// draw via Q_0 = Psi_0 - kappa alpha log pi_0 (pi_0 uniform), so that the
/// two parameterizations start from equivalent points. A precomputed
/// V*_tau can be supplied to avoid recomputing it across seeds; when absent
/// and suboptimality recording is on, it is computed here.
inline RunTrace run_scheme(const TabularMdp& mdp, const SolverConfig& config,
                           const ValueVector* v_star_tau = nullptr) {
    validate_mdp(mdp);
    if (config.iterations < 0) throw std::invalid_argument("run_scheme: iterations must be >= 0");
    if (!config.allow_invalid_bounding && config.scheme == Scheme::kBal) {
        if (!config.f.is_valid())
            throw std::invalid_argument("run_scheme: bounding fn f (" + config.f.name() +
                                        ") violates the validity conditions");
        if (!config.g.is_valid())
            throw std::invalid_argument("run_scheme: bounding fn g (" + config.g.name() +
                                        ") violates the validity conditions");
    }
    const double alpha = config.params.alpha();
    const double kappa = config.params.kappa();
    const double tau = config.params.tau();
    const bool hard = alpha == 0.0;
    const bool explicit_scheme = config.scheme == Scheme::kMdviExplicit;
    const BoundingFn f = config.scheme == Scheme::kMvi ? BoundingFn::identity() : config.f;
    const BoundingFn g = config.scheme == Scheme::kMvi ? BoundingFn::identity() : config.g;

    ValueVector v_star_local;
    const ValueVector* v_star = v_star_tau;
    if (config.record.suboptimality && v_star == nullptr) {
        v_star_local = soft_optimal_value(mdp, tau, config.value_tol);
        v_star = &v_star_local;
    }

    Rng init_rng(mix_seed(config.seed, 0x70736930ULL));
    Rng noise_rng(mix_seed(config.seed, config.noise ? mix_seed(config.noise->seed, 0x6e6f697365ULL)
                                                     : 0));
    const double ceiling = config.divergence_ceiling_factor * v_max(mdp, alpha);

    QTable psi = detail::draw_psi_init(mdp, config, init_rng);
    PolicyTable pi = PolicyTable::uniform(mdp.num_states, mdp.num_actions);
    QTable q;  // explicit scheme only
    if (explicit_scheme) {
        q = psi;
        const double log_uniform = -std::log(static_cast<double>(mdp.num_actions));
        for (double& v : q.values) v -= kappa * alpha * log_uniform;
    }

    RunTrace trace;
    trace.records.reserve(config.iterations + 1);

    const auto record_iteration = [&](int k, const StepDiagnostics* diag, double wall_s) {
        IterationRecord rec;
        rec.iteration = k;
        rec.wall_time_s = wall_s;
        const ValueVector v = soft_value(psi, alpha);
        rec.gaps = detail::gap_stats_of(psi, v);
        rec.psi_abs_max = 0.0;
        for (double x : psi.values) rec.psi_abs_max = std::max(rec.psi_abs_max, std::abs(x));
        if (diag != nullptr) {
            rec.entropy_mean = detail::mean_of(diag->entropy);
            rec.kl_mean = detail::mean_of(diag->kl);
            rec.condition_residual_min = detail::min_of(diag->condition_residual);
        } else {
            rec.entropy_mean = detail::mean_of(policy_entropy(pi));
            rec.kl_mean = 0.0;
        }
        if (config.record.suboptimality) {
            const ValueVector v_pi = soft_policy_evaluation_direct(mdp, pi, tau);
            rec.suboptimality = max_abs_diff(v_pi, *v_star);
        }
        if (config.record.store_tables) {
            rec.psi = psi;
            rec.pi = pi;
            rec.v = v;
            if (diag != nullptr) rec.diagnostics = *diag;
        }
        trace.records.push_back(std::move(rec));
    };

    record_iteration(0, nullptr, 0.0);

    for (int k = 1; k <= config.iterations; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        StepDiagnostics diag;
        if (explicit_scheme) {
            QTable eps;
            const QTable* noise_ptr = nullptr;
            if (config.noise && config.noise->magnitude > 0.0) {
                eps = detail::draw_noise(mdp, *config.noise, noise_rng);
                noise_ptr = &eps;
            }
            auto [q_next, pi_next] = mdvi_explicit_step(mdp, q, pi, config.params, noise_ptr);
            diag.entropy = hard ? ValueVector(mdp.num_states, 0.0) : policy_entropy(pi_next);
            diag.kl = hard ? ValueVector(mdp.num_states, std::numeric_limits<double>::quiet_NaN())
                           : kl_divergence(pi_next, pi);
            diag.condition_residual.assign(mdp.num_states, std::numeric_limits<double>::quiet_NaN());
            q = std::move(q_next);
            pi = std::move(pi_next);
            // reparameterized view of the iterate, for a scheme-independent
            // trace; log of an underflowed probability is floored at the
            // smallest representable positive double
            psi = q;
            if (!hard) {
                const double log_floor =
                    std::log(std::numeric_limits<double>::denorm_min());
                for (int s = 0; s < mdp.num_states; ++s)
                    for (int a = 0; a < mdp.num_actions; ++a)
                        psi(s, a) += kappa * alpha *
                                     (pi(s, a) > 0.0 ? std::log(pi(s, a)) : log_floor);
            }
        } else {
            QTable eps;
            const QTable* noise_ptr = nullptr;
            if (config.noise && config.noise->magnitude > 0.0) {
                eps = detail::draw_noise(mdp, *config.noise, noise_rng);
                noise_ptr = &eps;
            }
            BalStepResult step = bal_step(mdp, psi, config.params, f, g, k - 1, noise_ptr, &pi);
            psi = std::move(step.psi_next);
            pi = std::move(step.pi_next);
            diag = std::move(step.diagnostics);
        }

        bool finite = true;
        double abs_max = 0.0;
        for (double x : psi.values) {
            if (!std::isfinite(x)) {
                finite = false;
                break;
            }
            abs_max = std::max(abs_max, std::abs(x));
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!finite || abs_max > ceiling) {
            IterationRecord rec;
            rec.iteration = k;
            rec.diverged = true;
            rec.psi_abs_max = finite ? abs_max : std::numeric_limits<double>::infinity();
            rec.wall_time_s = wall;
            trace.records.push_back(std::move(rec));
            trace.diverged = true;
            trace.diverged_at = k;
            break;
        }
        record_iteration(k, &diag, wall);
    }
    return trace;
}

}  // namespace regmdp
