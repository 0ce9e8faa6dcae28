#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "regmdp/analysis.hpp"
#include "regmdp/environments.hpp"

using namespace regmdp;
using Catch::Matchers::WithinAbs;

TEST_CASE("iqm: pinned values and invariances") {
    CHECK(iqm({1.0, 2.0, 3.0, 4.0}) == 2.5);
    CHECK(iqm({7.5, 7.5, 7.5}) == 7.5);
    CHECK(iqm({42.0}) == 42.0);
    CHECK_THROWS_AS(iqm({}), std::invalid_argument);

    // reference rank-counting oracle on a seeded sample
    Rng rng(101);
    std::vector<double> sample(100);
    for (double& v : sample) v = rng.uniform(-10.0, 10.0);
    const std::size_t n = sample.size(), k = n / 4;
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rank = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (sample[j] < sample[i] || (sample[j] == sample[i] && j < i)) ++rank;
        if (rank >= k && rank < n - k) {
            acc += sample[i];
            ++used;
        }
    }
    REQUIRE(used == n - 2 * k);
    CHECK_THAT(iqm(sample), WithinAbs(acc / static_cast<double>(used), 1e-12));

    // permutation invariance and range bounds
    std::vector<double> shuffled = sample;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.next_raw() % i]);
    CHECK(iqm(shuffled) == iqm(sample));
    const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
    CHECK(iqm(sample) >= *lo);
    CHECK(iqm(sample) <= *hi);
}

TEST_CASE("suboptimality_curve: optimal policy, single record, unit start") {
    const TabularMdp mdp = build_random_mdp(4, 3, 7);
    const double tau = 0.2;
    const TauOptimal opt = compute_tau_optimal(mdp, tau, 1e-12);

    // the soft-optimal policy has (near) zero suboptimality
    const ValueVector v_pi = soft_policy_evaluation_direct(mdp, opt.pi_star, tau);
    CHECK(max_abs_diff(v_pi, opt.v_star_tau) < 1e-8);

    SolverConfig cfg;
    cfg.scheme = Scheme::kMvi;
    cfg.params = RegParams(0.5, 0.6);
    cfg.iterations = 0;
    cfg.seed = 2;
    cfg.record.store_tables = true;
    const RunTrace single = run_scheme(mdp, cfg);
    const auto curve = suboptimality_curve(mdp, single, cfg.params.tau(),
                                           soft_optimal_value(mdp, cfg.params.tau(), 1e-12));
    REQUIRE(curve.size() == 1);
    CHECK(curve[0] == 1.0);

    cfg.iterations = 20;
    const RunTrace trace = run_scheme(mdp, cfg);
    const auto longer = suboptimality_curve(mdp, trace, cfg.params.tau(),
                                            soft_optimal_value(mdp, cfg.params.tau(), 1e-12));
    REQUIRE(longer.size() == 21);
    CHECK(longer[0] == 1.0);
    for (double v : longer) CHECK(v >= 0.0);
}

TEST_CASE("limit_bound_check: identity sandwich on converged runs") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const TabularMdp mdp = build_random_mdp(5, 3, 300 + seed, 1.0, 0.85);
        SolverConfig cfg;
        cfg.scheme = Scheme::kMvi;
        cfg.params = RegParams(0.3, 0.6);
        cfg.iterations = 1500;
        cfg.seed = seed;
        cfg.psi_init = PsiInit::uniform(4.0);
        cfg.record.store_tables = true;
        cfg.record.suboptimality = false;
        const RunTrace trace = run_scheme(mdp, cfg);
        const BoundReport report = limit_bound_check(mdp, trace, cfg.params,
                                                     BoundingFn::identity(),
                                                     BoundingFn::identity());
        CHECK(report.converged);
        CHECK(report.upper_satisfied);
        CHECK(report.theorem3_lower_applicable);
        CHECK(report.theorem3_lower_satisfied);
        CHECK(report.psi_upper_satisfied);
        CHECK(std::isinf(report.c_f));
        CHECK(report.delta_bar_g == 0.0);
    }
}

TEST_CASE("limit_bound_check: bounded f with identity g") {
    const TabularMdp mdp = build_random_mdp(5, 3, 310, 1.0, 0.85);
    SolverConfig cfg;
    cfg.scheme = Scheme::kBal;
    cfg.f = BoundingFn::clip(1.0, -1.0, 1.0);
    cfg.g = BoundingFn::identity();
    cfg.params = RegParams(0.3, 0.6);
    cfg.iterations = 1500;
    cfg.seed = 0;
    cfg.psi_init = PsiInit::uniform(4.0);
    cfg.record.store_tables = true;
    cfg.record.suboptimality = false;
    const RunTrace trace = run_scheme(mdp, cfg);
    const BoundReport report = limit_bound_check(mdp, trace, cfg.params, cfg.f, cfg.g);
    CHECK(report.converged);
    CHECK(report.c_f == 1.0);
    CHECK(report.delta_bar_g == 0.0);
    CHECK_THAT(report.bound_width, WithinAbs(cfg.params.kappa(), 1e-12));
    CHECK(report.upper_satisfied);
    CHECK(report.lower_satisfied);
    CHECK(report.psi_upper_satisfied);
    CHECK(report.psi_lower_satisfied);
}

TEST_CASE("limit_bound_check: zero bounding widths") {
    // c_f = 0 for the Zero variant; the lower-bound width is purely the
    // entropy-reduction term gamma alpha log|A|
    const TabularMdp mdp = build_random_mdp(4, 3, 320, 1.0, 0.85);
    SolverConfig cfg;
    cfg.scheme = Scheme::kBal;
    cfg.f = BoundingFn::zero();
    cfg.g = BoundingFn::zero();
    cfg.params = RegParams(0.3, 0.6);
    cfg.iterations = 1200;
    cfg.seed = 0;
    cfg.record.store_tables = true;
    cfg.record.suboptimality = false;
    const RunTrace trace = run_scheme(mdp, cfg);
    const BoundReport report = limit_bound_check(mdp, trace, cfg.params, cfg.f, cfg.g);
    CHECK(report.c_f == 0.0);
    CHECK(report.delta_bar_g == 1.0);
    CHECK_THAT(report.bound_width,
               WithinAbs(mdp.discount * 0.3 * std::log(3.0), 1e-12));
    CHECK(report.upper_satisfied);
}

TEST_CASE("error_terms: unconditional and conditional dominance") {
    int premise_seen = 0;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const TabularMdp mdp = build_random_mdp(5, 3, 330 + seed, 1.0, 0.5);
        SolverConfig cfg;
        cfg.scheme = Scheme::kBal;
        cfg.f = BoundingFn::clip(1.0, -1.0, 1.0);
        cfg.g = BoundingFn::clip(1.0, -1.0, 1.0);
        cfg.params = RegParams(3.0, 0.7);
        cfg.iterations = 120;
        cfg.seed = seed;
        cfg.psi_init = PsiInit::uniform(3.0);
        cfg.record.store_tables = true;
        cfg.record.suboptimality = false;
        const RunTrace trace = run_scheme(mdp, cfg);
        const TauOptimal opt = compute_tau_optimal(mdp, cfg.params.tau(), 1e-12);
        const ErrorTermReport report =
            error_terms(mdp, trace, cfg.params, cfg.f, cfg.g, opt.pi_star, opt.a_star_tau);
        REQUIRE(report.delta_xf.size() == 120);
        for (std::size_t k = 0; k < report.delta_xf.size(); ++k) {
            CHECK(report.delta_xf[k] <= report.delta_xid[k] + 1e-12);
            CHECK(report.delta_xf[k] <= cfg.f.c_h() + 1e-12);
            CHECK(report.delta_fg[k] <=
                  report.delta_xf[k] + report.delta_hg[k] + 1e-12);
            if (report.premise_holds[k]) {
                ++premise_seen;
                CHECK(report.delta_hg[k] <= report.delta_hid[k] + 1e-12);
            }
        }
    }
    CHECK(premise_seen > 100);  // the conditional branch is actually exercised
}

TEST_CASE("error_terms: shape mismatches are rejected") {
    const TabularMdp mdp = build_random_mdp(4, 3, 335);
    SolverConfig cfg;
    cfg.scheme = Scheme::kMvi;
    cfg.params = RegParams(0.5, 0.5);
    cfg.iterations = 2;
    cfg.seed = 0;
    cfg.record.store_tables = true;
    cfg.record.suboptimality = false;
    const RunTrace trace = run_scheme(mdp, cfg);
    const PolicyTable wrong_pi = PolicyTable::uniform(3, 3);
    const QTable wrong_a(3, 3, 0.0);
    CHECK_THROWS_AS(error_terms(mdp, trace, cfg.params, BoundingFn::identity(),
                                BoundingFn::identity(), wrong_pi, wrong_a),
                    std::invalid_argument);
}

TEST_CASE("gap_statistics: soft uniform rows and hard argmax rows") {
    const TabularMdp mdp = build_random_mdp(3, 4, 340);
    SolverConfig cfg;
    cfg.scheme = Scheme::kMvi;
    cfg.params = RegParams(0.02, 0.5);
    cfg.iterations = 0;
    cfg.seed = 0;
    cfg.psi_init = PsiInit::zeros();
    cfg.record.store_tables = true;
    cfg.record.suboptimality = false;
    const RunTrace trace = run_scheme(mdp, cfg);
    const std::vector<GapStats> stats = gap_statistics(trace);
    REQUIRE(stats.size() == 1);
    // uniform row: every gap is alpha log|A|, and no action is strictly suboptimal
    CHECK_THAT(stats[0].mean_all, WithinAbs(0.02 * std::log(4.0), 1e-12));
    CHECK(std::isnan(stats[0].min_suboptimal));

    // hard case: gap at the argmax action is zero
    SolverConfig hard = cfg;
    hard.params = RegParams(0.0, 0.5);
    hard.psi_init = PsiInit::uniform(2.0);
    hard.iterations = 5;
    const RunTrace htrace = run_scheme(mdp, hard);
    for (const IterationRecord& rec : htrace.records) {
        const QTable& psi = *rec.psi;
        const ValueVector& v = *rec.v;
        for (int s = 0; s < 3; ++s) {
            double m = psi(s, 0);
            for (int a = 1; a < 4; ++a) m = std::max(m, psi(s, a));
            CHECK(v[s] - m == 0.0);
        }
        if (!std::isnan(rec.gaps.min_suboptimal)) CHECK(rec.gaps.min_suboptimal >= 0.0);
    }
}

TEST_CASE("gap_statistics: gap increasing pushes suboptimal actions further down") {
    // soft advantage learning (M-VI) vs Expected Sarsa at a matched iteration
    const TabularMdp mdp = build_random_mdp(5, 3, 350);
    SolverConfig al;
    al.scheme = Scheme::kMvi;
    al.params = RegParams(0.3, 0.7);
    al.iterations = 40;
    al.seed = 3;
    al.psi_init = PsiInit::uniform(2.0);
    al.record.store_tables = true;
    al.record.suboptimality = false;
    SolverConfig es = al;
    es.scheme = Scheme::kBal;
    es.f = BoundingFn::zero();
    es.g = BoundingFn::zero();
    const RunTrace t_al = run_scheme(mdp, al);
    const RunTrace t_es = run_scheme(mdp, es);
    const std::vector<GapStats> g_al = gap_statistics(t_al);
    const std::vector<GapStats> g_es = gap_statistics(t_es);
    CHECK(g_al.back().mean_suboptimal >= g_es.back().mean_suboptimal);
}
