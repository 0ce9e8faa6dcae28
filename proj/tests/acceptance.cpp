// Acceptance suite: end-to-end checks of the solver family's defining
// identities, limit bounds, and the grid-world experiment. Prints one
// PASS/FAIL line per criterion; exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "regmdp/regmdp.hpp"

using namespace regmdp;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void fail(const std::string& msg) {
        if (ok) detail = msg;
        ok = false;
    }
};

QTable random_table(int s, int a, Rng& rng, double scale) {
    QTable t(s, a);
    for (double& v : t.values) v = rng.uniform(-scale, scale);
    return t;
}

PolicyTable random_policy(int s, int a, Rng& rng) {
    PolicyTable pi(s, a);
    for (int i = 0; i < s; ++i) {
        double sum = 0.0;
        for (int j = 0; j < a; ++j) {
            pi(i, j) = 0.05 + rng.uniform();
            sum += pi(i, j);
        }
        for (int j = 0; j < a; ++j) pi(i, j) /= sum;
    }
    return pi;
}

// --------------------------------------------------------------------------
// 1. reparameterization equivalence between the explicit and Munchausen forms

Check criterion_reparameterization() {
    Check c;
    const double params_alpha[4] = {0.1, 0.25, 0.5, 1.0};
    const double params_kappa[4] = {0.0, 0.3, 0.9, 0.99};
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const int S = 2 + static_cast<int>(i % 5);
        const int A = 2 + static_cast<int>(i % 3);
        const TabularMdp mdp = build_random_mdp(S, A, 1000 + i);
        SolverConfig base;
        base.params = RegParams(params_alpha[i % 4], params_kappa[(i / 4) % 4]);
        base.iterations = 50;
        base.seed = i;
        base.psi_init = PsiInit::uniform(3.0);
        base.record.store_tables = true;
        base.record.suboptimality = false;

        SolverConfig expl = base;
        expl.scheme = Scheme::kMdviExplicit;
        SolverConfig mvi = base;
        mvi.scheme = Scheme::kMvi;
        const RunTrace a = run_scheme(mdp, expl);
        const RunTrace b = run_scheme(mdp, mvi);
        if (a.records.size() != b.records.size()) {
            c.fail("trace lengths differ");
            return c;
        }
        for (std::size_t k = 0; k < a.records.size(); ++k) {
            for (std::size_t j = 0; j < a.records[k].psi->values.size(); ++j) {
                worst = std::max(worst, std::abs(a.records[k].psi->values[j] -
                                                 b.records[k].psi->values[j]));
            }
        }
    }
    if (worst > 1e-8) c.fail("max |Psi - (Q + kappa alpha log pi)| = " + format_double(worst));
    c.detail = "max deviation " + format_double(worst);
    return c;
}

// --------------------------------------------------------------------------
// 2. special-case identities: M-VI = BAL(Id,Id), Expected Sarsa = BAL(0,0)

Check criterion_special_cases() {
    Check c;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const TabularMdp mdp = build_random_mdp(5, 3, 2000 + seed);
        SolverConfig mvi;
        mvi.scheme = Scheme::kMvi;
        mvi.params = RegParams(0.4, 0.8);
        mvi.iterations = 60;
        mvi.seed = seed;
        mvi.psi_init = PsiInit::uniform(3.0);
        mvi.record.store_tables = true;
        mvi.record.suboptimality = false;
        SolverConfig bal_id = mvi;
        bal_id.scheme = Scheme::kBal;
        bal_id.f = BoundingFn::identity();
        bal_id.g = BoundingFn::identity();
        const RunTrace a = run_scheme(mdp, mvi);
        const RunTrace b = run_scheme(mdp, bal_id);
        for (std::size_t k = 0; k < a.records.size(); ++k) {
            if (a.records[k].psi->values != b.records[k].psi->values ||
                a.records[k].pi->probs != b.records[k].pi->probs) {
                c.fail("M-VI vs BAL(Id,Id) differ at iteration " + std::to_string(k));
                return c;
            }
        }

        // Expected Sarsa: replay the pure softmax expected backup bit for bit
        SolverConfig es = bal_id;
        es.f = BoundingFn::zero();
        es.g = BoundingFn::zero();
        const RunTrace t = run_scheme(mdp, es);
        QTable psi = *t.records[0].psi;
        for (std::size_t k = 1; k < t.records.size(); ++k) {
            const PolicyTable pi = softmax_policy(psi, es.params.alpha());
            ValueVector inner(mdp.num_states, 0.0);
            for (int s = 0; s < mdp.num_states; ++s) {
                double acc = 0.0;
                for (int a2 = 0; a2 < mdp.num_actions; ++a2)
                    acc += pi(s, a2) * (psi(s, a2) - 0.0);
                inner[s] = acc;
            }
            QTable next(mdp.num_states, mdp.num_actions);
            for (int s = 0; s < mdp.num_states; ++s) {
                for (int a2 = 0; a2 < mdp.num_actions; ++a2) {
                    double dot = 0.0;
                    for (int s2 = 0; s2 < mdp.num_states; ++s2)
                        dot += mdp.p(s, a2, s2) * inner[s2];
                    next(s, a2) =
                        mdp.reward(s, a2) + es.params.kappa() * 0.0 + mdp.discount * dot;
                }
            }
            psi = std::move(next);
            if (t.records[k].psi->values != psi.values) {
                c.fail("BAL(0,0) vs Expected Sarsa differ at iteration " + std::to_string(k));
                return c;
            }
        }
    }
    c.detail = "bit-identical traces on 5 seeds";
    return c;
}

// --------------------------------------------------------------------------
// 3. log-sum-exp lemma suite

Check criterion_lse_lemmas() {
    Check c;
    Rng rng(3000);
    for (int i = 0; i < 10000; ++i) {
        const int n = 1 + static_cast<int>(rng.next_raw() % 8);
        const double alpha = 0.01 + 2.0 * rng.uniform();
        std::vector<double> row(n), bigger(n);
        double row_max = -1e300;
        for (int a = 0; a < n; ++a) {
            row[a] = rng.uniform(-100.0, 100.0);
            bigger[a] = row[a] + rng.uniform(0.0, 5.0);
            row_max = std::max(row_max, row[a]);
        }
        const double l = log_sum_exp(row, alpha);
        if (log_sum_exp(bigger, alpha) < l - 1e-12) c.fail("monotonicity violated");
        if (l < row_max || l > row_max + alpha * std::log(n) + 1e-12)
            c.fail("max sandwich violated");
        const double shift = rng.uniform(-50.0, 50.0);
        std::vector<double> shifted = row;
        for (double& v : shifted) v += shift;
        if (std::abs(log_sum_exp(shifted, alpha) - (l + shift)) >
            1e-12 * std::max(1.0, std::abs(l + shift)))
            c.fail("shift identity violated");
        const double kappa = 0.99 * rng.uniform();
        std::vector<double> scaled = row;
        for (double& v : scaled) v /= (1.0 - kappa);
        const double lhs = log_sum_exp(scaled, alpha);
        const double rhs = log_sum_exp(row, (1.0 - kappa) * alpha) / (1.0 - kappa);
        if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(rhs)))
            c.fail("scaling identity violated");
        if (log_sum_exp(row, 0.0) != row_max) c.fail("alpha = 0 branch is not the row max");
        if (!c.ok) return c;
    }
    c.detail = "10^4 cases per lemma";
    return c;
}

// --------------------------------------------------------------------------
// 4. advantage identity A = alpha log softmax

Check criterion_advantage_identity() {
    Check c;
    Rng rng(4000);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const int n = 2 + static_cast<int>(rng.next_raw() % 7);
        const double alpha = 0.05 + 2.0 * rng.uniform();
        QTable psi = random_table(1, n, rng, 10.0);
        const QTable adv = soft_advantage(psi, alpha);
        const PolicyTable pi = softmax_policy(psi, alpha);
        for (int a = 0; a < n; ++a)
            worst = std::max(worst, std::abs(adv(0, a) - alpha * std::log(pi(0, a))));
    }
    if (worst > 1e-12) c.fail("max |A - alpha log pi| = " + format_double(worst));
    c.detail = "max deviation " + format_double(worst);
    return c;
}

// --------------------------------------------------------------------------
// 5. pessimism: one BAL step never exceeds the soft Bellman backup

Check criterion_pessimism() {
    Check c;
    Rng rng(5000);
    const std::vector<BoundingFn> fns = {
        BoundingFn::identity(),           BoundingFn::zero(),
        BoundingFn::clip(1.0, -1.0, 1.0), BoundingFn::clip(10.0, -1.0, 1.0),
        BoundingFn::clip(1.0, -1.0, 0.0), BoundingFn::tanh_fn(1.0),
        BoundingFn::tanh_fn(10.0),        BoundingFn::time_dependent_clip(1e4, 10.0)};
    for (int i = 0; i < 1000; ++i) {
        const TabularMdp mdp =
            build_random_mdp(2 + i % 5, 2 + i % 3, 5000 + i, 1.0, 0.5 + 0.45 * rng.uniform());
        const QTable psi = random_table(mdp.num_states, mdp.num_actions, rng, 8.0);
        const RegParams params(0.05 + 2.0 * rng.uniform(), 0.99 * rng.uniform());
        const BoundingFn& f = fns[rng.next_raw() % fns.size()];
        const BoundingFn& g = fns[rng.next_raw() % fns.size()];
        const BalStepResult step = bal_step(mdp, psi, params, f, g, i % 11);
        const ValueVector lse = soft_value(psi, params.alpha());
        const QTable pv = apply_transition(mdp, lse);
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double soft_backup = mdp.reward(s, a) + mdp.discount * pv(s, a);
                if (step.psi_next(s, a) > soft_backup + 1e-9) {
                    c.fail("backup exceeded at tuple " + std::to_string(i));
                    return c;
                }
            }
        }
    }
    c.detail = "10^3 random (MDP, Psi, f, g) tuples";
    return c;
}

// --------------------------------------------------------------------------
// 6. hard case (alpha = 0): optimality preservation and gap increase

Check criterion_hard_case() {
    Check c;
    const std::vector<BoundingFn> fns = {BoundingFn::identity(), BoundingFn::clip(1.0, -1.0, 1.0),
                                         BoundingFn::tanh_fn(1.0),
                                         BoundingFn::clip(10.0, -1.0, 1.0)};
    double worst_v = 0.0, worst_gap = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const int S = 3 + static_cast<int>(i % 3);
        const int A = 2 + static_cast<int>(i % 3);
        const TabularMdp mdp = build_random_mdp(S, A, 6000 + i);
        SolverConfig cfg;
        cfg.scheme = Scheme::kBal;
        cfg.f = fns[i % fns.size()];
        cfg.g = fns[(i / 2) % fns.size()];
        cfg.params = RegParams(0.0, i % 2 == 0 ? 0.3 : 0.6);
        cfg.iterations = 5000;
        cfg.seed = i;
        cfg.psi_init = PsiInit::uniform(3.0);
        cfg.record.store_tables = false;
        cfg.record.suboptimality = false;

        // run manually to keep only the final table
        Rng init_rng(mix_seed(cfg.seed, 0x70736930ULL));
        QTable psi(S, A);
        for (double& v : psi.values) v = init_rng.uniform(-3.0, 3.0);
        for (int k = 0; k < cfg.iterations; ++k)
            psi = bal_step(mdp, psi, cfg.params, cfg.f, cfg.g, k).psi_next;

        const ValueVector v_star = exact_v_star(mdp, 1e-12);
        QTable q_star = apply_transition(mdp, v_star);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                q_star(s, a) = mdp.reward(s, a) + mdp.discount * q_star(s, a);
        for (int s = 0; s < S; ++s) {
            double m = psi(s, 0);
            for (int a = 1; a < A; ++a) m = std::max(m, psi(s, a));
            worst_v = std::max(worst_v, std::abs(m - v_star[s]));
            for (int a = 0; a < A; ++a) {
                const double shortfall = (v_star[s] - q_star(s, a)) - (m - psi(s, a));
                worst_gap = std::max(worst_gap, shortfall);
            }
        }
    }
    if (worst_v > 1e-6) c.fail("optimality gap " + format_double(worst_v));
    if (worst_gap > 1e-6) c.fail("action-gap shortfall " + format_double(worst_gap));
    c.detail = "max |max_a Psi - V*| = " + format_double(worst_v) +
               ", max gap shortfall = " + format_double(worst_gap);
    return c;
}

// --------------------------------------------------------------------------
// 7. identity-bounded runs converge between the two soft optima

Check criterion_theorem3_sandwich() {
    Check c;
    double worst_lo = 0.0, worst_hi = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const int S = 3 + static_cast<int>(i % 4);
        const int A = 2 + static_cast<int>(i % 3);
        const TabularMdp mdp = build_random_mdp(S, A, 7000 + i, 1.0, 0.85);
        SolverConfig cfg;
        cfg.scheme = Scheme::kMvi;
        cfg.params = RegParams(0.3, 0.6);
        cfg.iterations = 1500;
        cfg.seed = i;
        cfg.psi_init = PsiInit::uniform(4.0);
        cfg.record.store_tables = true;
        cfg.record.suboptimality = false;
        const RunTrace trace = run_scheme(mdp, cfg);
        const BoundReport report = limit_bound_check(
            mdp, trace, cfg.params, BoundingFn::identity(), BoundingFn::identity());
        if (!report.converged) c.fail("run " + std::to_string(i) + " not converged");
        for (int s = 0; s < S; ++s) {
            worst_hi = std::max(worst_hi, report.v_tilde[s] - report.v_star_alpha[s]);
            worst_lo = std::max(worst_lo, report.v_star_tau[s] - report.v_tilde[s]);
        }
    }
    if (worst_hi > 1e-6) c.fail("upper bound violated by " + format_double(worst_hi));
    if (worst_lo > 1e-6) c.fail("lower bound violated by " + format_double(worst_lo));
    c.detail = "V*_tau <= V~ <= V*_alpha, slack " + format_double(worst_lo) + " / " +
               format_double(worst_hi);
    return c;
}

// --------------------------------------------------------------------------
// 8. condition residual non-negativity for identity g, and the explicit
//    lower bound for bounded f

Check criterion_condition_and_lower_bound() {
    Check c;
    double min_residual = std::numeric_limits<double>::infinity();
    double worst_lower = 0.0, worst_upper = 0.0;
    const std::vector<BoundingFn> bounded_f = {BoundingFn::clip(1.0, -1.0, 1.0),
                                               BoundingFn::tanh_fn(1.0)};
    for (std::uint64_t i = 0; i < 20; ++i) {
        const int S = 3 + static_cast<int>(i % 4);
        const TabularMdp mdp = build_random_mdp(S, 3, 8000 + i, 1.0, 0.85);
        SolverConfig cfg;
        cfg.scheme = Scheme::kBal;
        cfg.f = bounded_f[i % bounded_f.size()];
        cfg.g = BoundingFn::identity();
        cfg.params = RegParams(0.3, 0.6);
        cfg.iterations = 1500;
        cfg.seed = i;
        cfg.psi_init = PsiInit::uniform(4.0);
        cfg.record.store_tables = true;
        cfg.record.suboptimality = false;
        const RunTrace trace = run_scheme(mdp, cfg);

        // (a) with g = Id the residual must be non-negative at every iteration
        for (std::size_t k = 1; k < trace.records.size(); ++k)
            for (double r : trace.records[k].diagnostics->condition_residual)
                min_residual = std::min(min_residual, r);

        // (b) converged values stay within kappa c_f / (1 - gamma) of V*_alpha
        const BoundReport report = limit_bound_check(mdp, trace, cfg.params, cfg.f, cfg.g);
        if (!report.converged) c.fail("run " + std::to_string(i) + " not converged");
        const double width = cfg.params.kappa() * cfg.f.c_h() / (1.0 - mdp.discount);
        for (int s = 0; s < S; ++s) {
            worst_upper = std::max(worst_upper, report.v_tilde[s] - report.v_star_alpha[s]);
            worst_lower = std::max(
                worst_lower, (report.v_star_alpha[s] - width) - report.v_tilde[s]);
        }
    }
    if (min_residual < -1e-10)
        c.fail("condition residual dipped to " + format_double(min_residual));
    if (worst_upper > 1e-6) c.fail("upper bound violated by " + format_double(worst_upper));
    if (worst_lower > 1e-6) c.fail("lower bound violated by " + format_double(worst_lower));
    c.detail = "min residual " + format_double(min_residual) + ", bound slack " +
               format_double(worst_upper) + " / " + format_double(worst_lower);
    return c;
}

// --------------------------------------------------------------------------
// 9. inherent-error dominance of bounded f and conditional dominance of g

Check criterion_error_terms() {
    Check c;
    long premise_count = 0, total = 0;
    const std::vector<BoundingFn> gs = {BoundingFn::clip(1.0, -1.0, 1.0),
                                        BoundingFn::tanh_fn(1.0)};
    for (std::uint64_t i = 0; i < 20; ++i) {
        const TabularMdp mdp = build_random_mdp(5, 3, 9000 + i, 1.0, 0.5);
        SolverConfig cfg;
        cfg.scheme = Scheme::kBal;
        cfg.f = BoundingFn::clip(1.0, -1.0, 1.0);
        cfg.g = gs[i % gs.size()];
        cfg.params = RegParams(3.0, 0.7);
        cfg.iterations = 200;
        cfg.seed = i;
        cfg.psi_init = PsiInit::uniform(3.0);
        cfg.record.store_tables = true;
        cfg.record.suboptimality = false;
        const RunTrace trace = run_scheme(mdp, cfg);
        const TauOptimal opt = compute_tau_optimal(mdp, cfg.params.tau(), 1e-12);
        const ErrorTermReport report =
            error_terms(mdp, trace, cfg.params, cfg.f, cfg.g, opt.pi_star, opt.a_star_tau);
        for (std::size_t k = 0; k < report.delta_xf.size(); ++k) {
            ++total;
            if (report.delta_xf[k] > report.delta_xid[k] + 1e-12) {
                c.fail("cross-term dominance violated at run " + std::to_string(i) +
                       " iteration " + std::to_string(k + 1));
                return c;
            }
            if (report.delta_xf[k] > cfg.f.c_h() + 1e-12) {
                c.fail("cross term exceeded c_f at run " + std::to_string(i));
                return c;
            }
            if (report.premise_holds[k]) {
                ++premise_count;
                if (report.delta_hg[k] > report.delta_hid[k] + 1e-12) {
                    c.fail("entropy-term dominance violated under its premise at run " +
                           std::to_string(i) + " iteration " + std::to_string(k + 1));
                    return c;
                }
            }
        }
    }
    if (premise_count == 0) c.fail("entropy-term premise never held; test is vacuous");
    c.detail = "premise held on " + std::to_string(premise_count) + "/" +
               std::to_string(total) + " iterations";
    return c;
}

// --------------------------------------------------------------------------
// 10. mirror-descent identity of the bounded operator

Check criterion_mirror_descent() {
    Check c;
    Rng rng(10000);
    const std::vector<BoundingFn> fns = {
        BoundingFn::identity(),           BoundingFn::zero(),
        BoundingFn::clip(1.0, -1.0, 1.0), BoundingFn::clip(10.0, -1.0, 1.0),
        BoundingFn::clip(1.0, -1.0, 0.0), BoundingFn::tanh_fn(1.0),
        BoundingFn::tanh_fn(10.0),        BoundingFn::time_dependent_clip(1e4, 10.0)};
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const TabularMdp mdp = build_random_mdp(2 + i % 4, 2 + i % 3, 10000 + i);
        const QTable psi = random_table(mdp.num_states, mdp.num_actions, rng, 10.0);
        const PolicyTable pi_k = random_policy(mdp.num_states, mdp.num_actions, rng);
        const RegParams params(0.05 + 1.95 * rng.uniform(), 0.99 * rng.uniform());
        const BoundingFn& f = fns[rng.next_raw() % fns.size()];
        const BoundingFn& g = fns[rng.next_raw() % fns.size()];
        worst = std::max(worst,
                         mirror_descent_residual(mdp, psi, pi_k, params, f, g, i % 13));
    }
    if (worst > 1e-9) c.fail("max residual " + format_double(worst));
    c.detail = "max residual " + format_double(worst);
    return c;
}

// --------------------------------------------------------------------------
// 11 & 12. grid-world experiment: early-stage ordering and byte determinism

struct AggregateCurves {
    std::map<std::string, std::vector<double>> normalized;  // run -> per-iteration IQM
};

AggregateCurves read_aggregate(const fs::path& path) {
    AggregateCurves out;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing aggregate: " + path.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string run, iter, n, raw, norm;
        std::getline(row, run, ',');
        std::getline(row, iter, ',');
        std::getline(row, n, ',');
        std::getline(row, raw, ',');
        std::getline(row, norm, ',');
        auto& curve = out.normalized[run];
        const std::size_t k = std::stoul(iter);
        if (curve.size() <= k) curve.resize(k + 1, 0.0);
        curve[k] = std::strtod(norm.c_str(), nullptr);
    }
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Check criterion_gridworld(const ExperimentConfig& base, const fs::path& out_a) {
    Check c;
    ExperimentConfig cfg = base;
    cfg.outputs.directory = out_a.string();
    fs::remove_all(out_a);
    run_experiment(cfg, 4);  // several workers; the rerun below uses one

    const AggregateCurves curves = read_aggregate(out_a / "aggregate.csv");
    const auto& mvi = curves.normalized.at("mvi");
    const auto& tanh_both = curves.normalized.at("bal_tanh");
    const auto& g_id = curves.normalized.at("bal_gid");
    const std::size_t quartile = (mvi.size() - 1) / 4;

    // (a) bounded advantage learning beats M-VI across the first quartile
    std::size_t below = 0;
    for (std::size_t k = 1; k <= quartile; ++k)
        if (tanh_both[k] < mvi[k]) ++below;
    const double frac_a = static_cast<double>(below) / static_cast<double>(quartile);

    // (b) bounded g beats identity g during the active descent (the stage
    // where the reference curve still lies between 1e-4 and 0.5; earlier the
    // policies are effectively deterministic and g cannot act, later both
    // runs sit on the converged plateau)
    std::size_t window = 0, below_g = 0;
    for (std::size_t k = 1; k < g_id.size(); ++k) {
        if (g_id[k] < 1e-4 || g_id[k] > 0.5) continue;
        ++window;
        if (tanh_both[k] < g_id[k]) ++below_g;
    }
    const double frac_b = window > 0 ? static_cast<double>(below_g) / window : 0.0;

    if (frac_a < 0.8)
        c.fail("BAL(tanh,tanh) below M-VI on only " + format_double(frac_a) +
               " of the first quartile");
    if (window == 0) c.fail("descent window is empty");
    if (frac_b < 0.8)
        c.fail("g=tanh below g=Id on only " + format_double(frac_b) +
               " of the descent window");
    c.detail = "vs M-VI: " + format_double(frac_a) + " of first quartile; g=tanh vs g=Id: " +
               format_double(frac_b) + " of " + std::to_string(window) +
               " descent iterations";
    return c;
}

Check criterion_determinism(const ExperimentConfig& base, const fs::path& out_a,
                            const fs::path& out_b) {
    Check c;
    ExperimentConfig cfg = base;
    cfg.outputs.directory = out_b.string();
    fs::remove_all(out_b);
    run_experiment(cfg, 1);  // single worker, so scheduling differs from run A

    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(out_a)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const fs::path rel = fs::relative(entry.path(), out_a);
        if (slurp(entry.path()) != slurp(out_b / rel)) {
            c.fail("CSV differs across reruns: " + rel.string());
            return c;
        }
        ++compared;
    }
    if (compared == 0) c.fail("no CSVs found to compare");
    c.detail = std::to_string(compared) + " CSV files byte-identical";
    return c;
}

}  // namespace

int main() {
    const fs::path source_dir = REGMDP_SOURCE_DIR;
    const fs::path preset = source_dir / "presets" / "gridworld-d1.json";
    ExperimentConfig grid_cfg;
    try {
        grid_cfg = experiment_from_json(load_json_file(preset.string()));
    } catch (const std::exception& e) {
        std::printf("FAIL cannot load preset gridworld-d1: %s\n", e.what());
        return 1;
    }
    const fs::path out_a = fs::path("acceptance_out") / "gridworld-d1";
    const fs::path out_b = fs::path("acceptance_out") / "gridworld-d1-rerun";

    struct Entry {
        std::string name;
        std::function<Check()> fn;
        double time_limit_s;  // 0 = no stated limit
    };
    const std::vector<Entry> criteria = {
        {"1 reparameterization equivalence of explicit and Munchausen recursions",
         criterion_reparameterization, 5.0},
        {"2 special cases: M-VI = BAL(Id,Id), Expected Sarsa = BAL(0,0)",
         criterion_special_cases, 0.0},
        {"3 log-sum-exp lemma suite", criterion_lse_lemmas, 5.0},
        {"4 advantage identity A = alpha log softmax", criterion_advantage_identity, 0.0},
        {"5 pessimism of the bounded operator", criterion_pessimism, 0.0},
        {"6 hard case: optimality preserving and gap increasing", criterion_hard_case, 30.0},
        {"7 converged identity runs sandwiched between soft optima",
         criterion_theorem3_sandwich, 0.0},
        {"8 condition residual and explicit lower bound", criterion_condition_and_lower_bound,
         0.0},
        {"9 inherent-error dominance of bounded f and g", criterion_error_terms, 0.0},
        {"10 mirror-descent identity", criterion_mirror_descent, 0.0},
        {"11 grid-world early-stage ordering",
         [&] { return criterion_gridworld(grid_cfg, out_a); }, 120.0},
        {"12 byte-identical reruns",
         [&] { return criterion_determinism(grid_cfg, out_a, out_b); }, 0.0},
    };

    int failures = 0;
    for (const auto& entry : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Check result;
        try {
            result = entry.fn();
        } catch (const std::exception& e) {
            result.fail(std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (entry.time_limit_s > 0.0 && secs > entry.time_limit_s)
            result.fail("exceeded the " + format_double(entry.time_limit_s) +
                        "s runtime budget");
        std::printf("%s criterion %s (%.2fs)%s%s\n", result.ok ? "PASS" : "FAIL",
                    entry.name.c_str(), secs, result.detail.empty() ? "" : " - ",
                    result.detail.c_str());
        if (!result.ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
