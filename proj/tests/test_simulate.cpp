#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "branchtail/asymptotics.hpp"
#include "branchtail/error.hpp"
#include "branchtail/models.hpp"
#include "branchtail/simulate.hpp"
#include "branchtail/tailstats.hpp"

using namespace branchtail;

namespace {

// Exact P(tau = k) for the first-passage time of S_n = sum(N_i - 1) to -1:
// dynamic programming over (step, level), independent of the simulators.
std::vector<double> tau_pmf_oracle(const std::vector<double>& offspring_pmf, int kmax) {
    std::vector<double> pmf(kmax + 1, 0.0);
    // level[l] = P(walk alive at current step with S = l)
    std::vector<double> level(1, 1.0);  // before step 1: S_0 = 0
    for (int step = 1; step <= kmax; ++step) {
        std::vector<double> next(level.size() + offspring_pmf.size(), 0.0);
        for (std::size_t l = 0; l < level.size(); ++l) {
            if (level[l] == 0.0) continue;
            for (std::size_t j = 0; j < offspring_pmf.size(); ++j) {
                const double p = level[l] * offspring_pmf[j];
                // S moves from l to l + j - 1
                if (l + j == 0)
                    pmf[step] += p;  // hit -1
                else
                    next[l + j - 1] += p;
            }
        }
        level = std::move(next);
    }
    return pmf;
}

JointModel bernoulli_model(double p) { return IndependentPair{ConstantDist{1.0}, BernoulliDist{p}}; }

struct WeldStats {
    double mean = 0.0;
    double se = 0.0;
};

WeldStats mean_se(const std::vector<double>& v) {
    double s = 0.0, s2 = 0.0;
    for (double x : v) {
        s += x;
        s2 += x * x;
    }
    const double n = static_cast<double>(v.size());
    WeldStats out;
    out.mean = s / n;
    out.se = std::sqrt(std::max(0.0, s2 / n - out.mean * out.mean) / n);
    return out;
}

} // namespace

TEST_CASE("degenerate trees") {
    RandomStream rng(1, 0);
    JointModel leaf = IndependentPair{ParetoDist{1.5, 1.0}, ConstantDist{0.0}};
    SimOutcome o = simulate_R_single(leaf, rng, 1000);
    CHECK(o.tree_size == 1);
    CHECK(o.value >= 1.0);
    CHECK(!o.truncated);

    JointModel unit = IndependentPair{ConstantDist{1.0}, ConstantDist{0.0}};
    CHECK(simulate_R_single(unit, rng, 1000).value == 1.0);
    CHECK(simulate_tau(unit, rng, 1000).value == 1.0);
}

TEST_CASE("progeny of Bernoulli(1/2) offspring is geometric") {
    // brute-force oracle: P(tau = k) = 0.5^k
    std::vector<double> pmf = tau_pmf_oracle({0.5, 0.5}, 12);
    for (int k = 1; k <= 12; ++k) CHECK(pmf[k] == doctest::Approx(std::pow(0.5, k)).epsilon(1e-12));

    JointModel model = bernoulli_model(0.5);
    RandomStream rng(9, 0);
    const int n = 200000;
    std::vector<double> counts(11, 0.0);
    for (int i = 0; i < n; ++i) {
        SimOutcome o = simulate_R_single(model, rng, 100000);
        if (o.value <= 10.0) counts[static_cast<std::size_t>(o.value)] += 1.0;
    }
    for (int k = 1; k <= 10; ++k) {
        const double expect = std::pow(0.5, k);
        const double se = std::sqrt(expect * (1.0 - expect) / n);
        CHECK(std::fabs(counts[k] / n - expect) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("tau equals total progeny path by path on a shared stream") {
    JointModel model = bernoulli_model(0.4);
    for (std::uint64_t rep = 0; rep < 2000; ++rep) {
        RandomStream a(77, rep), b(77, rep);
        SimOutcome tau = simulate_tau(model, a, 100000);
        SimOutcome tree = simulate_R_single(model, b, 100000);
        CHECK(tau.value == static_cast<double>(tree.tree_size));
    }
}

TEST_CASE("Wald identity for tau across subcritical offspring means") {
    struct Case {
        JointModel model;
        double nbar;
    };
    std::vector<Case> cases = {
        {bernoulli_model(0.25), 0.25},
        {bernoulli_model(0.5), 0.5},
        {IndependentPair{ConstantDist{1.0}, PoissonDist{0.75}}, 0.75},
        {IndependentPair{ConstantDist{1.0}, PoissonDist{0.9}}, 0.9},
    };
    for (const auto& c : cases) {
        const std::uint64_t n = 200000;
        std::vector<double> taus(n);
        parallel_for_streams(n, 4321, 2, [&](std::uint64_t rep, RandomStream& rng) {
            taus[rep] = simulate_tau(c.model, rng, 10000000).value;
        });
        WeldStats st = mean_se(taus);
        const double expect = 1.0 / (1.0 - c.nbar);
        CHECK(std::fabs(st.mean - expect) <= 3.0 * st.se);
    }
}

TEST_CASE("weight functional: (1,0) is tau and (0,1) matches R in law") {
    JointModel mg1 = MG1Pair{ParetoDist{1.5, 1.0}, 0.25};
    for (std::uint64_t rep = 0; rep < 500; ++rep) {
        RandomStream a(5, rep), b(5, rep);
        CHECK(simulate_V(mg1, 1.0, 0.0, a, 100000).value ==
              simulate_tau(mg1, b, 100000).value);
    }
    // Q == 1 makes (0,1) identical to tau as well.
    JointModel unit = IndependentPair{ConstantDist{1.0}, BernoulliDist{0.5}};
    for (std::uint64_t rep = 0; rep < 500; ++rep) {
        RandomStream a(6, rep), b(6, rep);
        CHECK(simulate_V(unit, 0.0, 1.0, a, 100000).value ==
              simulate_tau(unit, b, 100000).value);
    }
    RandomStream rng(1, 0);
    CHECK_THROWS_AS((void)simulate_V(mg1, 0.0, 0.0, rng, 100), Error);
}

TEST_CASE("V(0,1) and R agree in distribution on the flagship dependence") {
    JointModel mg1 = MG1Pair{ParetoDist{1.5, 1.0}, 0.25};
    const std::uint64_t n = 1000000;
    std::vector<double> v(n), r(n);
    parallel_for_streams(n, 101, 2, [&](std::uint64_t rep, RandomStream& rng) {
        v[rep] = simulate_V(mg1, 0.0, 1.0, rng, 10000000).value;
    });
    parallel_for_streams(n, 202, 2, [&](std::uint64_t rep, RandomStream& rng) {
        r[rep] = simulate_R_single(mg1, rng, 10000000).value;
    });
    CHECK(ks_two_sample(v, r) <= 0.005);
}

TEST_CASE("multiclass sampler reduces to the single-class walk for K=1") {
    JointModel mg1 = MG1Pair{ParetoDist{1.5, 1.0}, 0.25};
    MulticlassModel wrapped = MulticlassModel::single(mg1);
    for (std::uint64_t rep = 0; rep < 2000; ++rep) {
        RandomStream a(8, rep), b(8, rep);
        SimOutcome multi = simulate_R_multi(wrapped, 0, a, 100000);
        SimOutcome single = simulate_R_single(mg1, b, 100000);
        CHECK(multi.value == single.value);
        CHECK(multi.tree_size == single.tree_size);
    }
}

TEST_CASE("multiclass empirical means match the linear solve within 2%") {
    IndependentVec c1{ConstantDist{1.0}, {PoissonDist{0.3}, PoissonDist{0.2}}};
    IndependentVec c2{ConstantDist{1.0}, {PoissonDist{0.4}, PoissonDist{0.2}}};
    MulticlassModel model = MulticlassModel::from_classes({c1, c2});
    MeanSolution means = solve_means(model.mean_matrix(), model.qbar());
    for (std::size_t type = 0; type < 2; ++type) {
        const std::uint64_t n = 1000000;
        std::vector<double> vals(n);
        parallel_for_streams(n, 900 + type, 2, [&](std::uint64_t rep, RandomStream& rng) {
            vals[rep] = simulate_R_multi(model, type, rng, 10000000).value;
        });
        WeldStats st = mean_se(vals);
        CHECK(st.mean == doctest::Approx(means.rbar[type]).epsilon(0.02));
    }
}

TEST_CASE("truncation flags fire at the cap instead of throwing") {
    JointModel busy = MG1Pair{ParetoDist{1.5, 1.0}, 0.25};
    RandomStream rng(3, 0);
    int truncated = 0;
    for (int i = 0; i < 3000; ++i) {
        SimOutcome o = simulate_R_single(busy, rng, 3);
        if (o.truncated) {
            ++truncated;
            CHECK(o.tree_size == 3);
        }
    }
    CHECK(truncated > 0);
}

// Scripted stand-in for the reduced-pair walk: replays a fixed list of
// (q, n-vector) draws in order.
struct ScriptedModel {
    std::vector<VectorSample> draws;
    mutable std::size_t next = 0;
    std::size_t types = 2;

    std::size_t type_count() const { return types; }
    VectorSample sample_vector(std::size_t, RandomStream&) const { return draws[next++]; }
};

TEST_CASE("reduced pair absorbs direct-line subtrees of the eliminated type") {
    // Two-type family tree: the type-1 ancestor has one type-1 child and two
    // type-2 daughters in direct line. The first (upper) daughter's type-2
    // subtree has 4 members contributing 2 type-1 children in total (the
    // daughter herself and her first child contribute one each); the second
    // daughter's subtree is a single childless node.
    ScriptedModel script;
    script.draws = {
        {10.0, {1.0, 2.0}, false},  // ancestor: Q=10, one type-1 child, two type-2 daughters
        {1.0, {1.0, 2.0}, false},   // upper daughter m: one type-1 child, two type-2 children
        {1.0, {1.0, 0.0}, false},   //   her first child: one type-1 child, no type-2
        {1.0, {0.0, 1.0}, false},   //   her second child: one type-2 child
        {1.0, {0.0, 0.0}, false},   //   grandchild closing the line (size 4 total)
        {100.0, {0.0, 0.0}, false}, // second daughter: size-1 subtree, distinctive weight
    };
    RandomStream rng(0, 0);
    ReducedDraw red = simulate_reduced_pair_t(script, 0, rng, 1000000);
    CHECK(red.q == doctest::Approx(10.0 + 4.0 * 1.0 + 100.0));
    CHECK(red.n.size() == 1);
    CHECK(red.n[0] == doctest::Approx(1.0 + 2.0 + 0.0));
    CHECK(red.subtree_nodes == 5);
    CHECK(!red.truncated);
}

TEST_CASE("reduced pair with no eliminated-type daughters truncates the vector") {
    ScriptedModel script;
    script.draws = {{3.5, {2.0, 0.0}, false}};
    RandomStream rng(0, 0);
    ReducedDraw red = simulate_reduced_pair_t(script, 0, rng, 1000);
    CHECK(red.q == 3.5);
    CHECK(red.n[0] == 2.0);
    CHECK(red.subtree_nodes == 0);
}

TEST_CASE("reduced-pair sample means match reduce_means within 2%") {
    IndependentVec c1{ConstantDist{1.0}, {PoissonDist{0.3}, PoissonDist{0.2}}};
    IndependentVec c2{ConstantDist{1.0}, {PoissonDist{0.4}, PoissonDist{0.2}}};
    auto model = std::make_shared<MulticlassModel>(MulticlassModel::from_classes({c1, c2}));
    ReducedMeans expect = reduce_means(model->mean_matrix(), model->qbar());

    const std::uint64_t n = 1000000;
    std::vector<double> q(n), n1(n);
    parallel_for_streams(n, 606, 2, [&](std::uint64_t rep, RandomStream& rng) {
        ReducedDraw draw = simulate_reduced_pair(*model, 0, rng, 10000000);
        q[rep] = draw.q;
        n1[rep] = draw.n[0];
    });
    CHECK(mean_se(q).mean == doctest::Approx(expect.qbar[0]).epsilon(0.02));
    CHECK(mean_se(n1).mean == doctest::Approx(expect.m(0, 0)).epsilon(0.02));
}

TEST_CASE("reduced model: R(1) distribution is preserved by type elimination") {
    IndependentVec c1{ConstantDist{1.0}, {PoissonDist{0.3}, PoissonDist{0.2}}};
    IndependentVec c2{ConstantDist{1.0}, {PoissonDist{0.4}, PoissonDist{0.2}}};
    auto parent = std::make_shared<MulticlassModel>(MulticlassModel::from_classes({c1, c2}));
    MulticlassModel reduced = MulticlassModel::reduced_from(parent, 10000000);
    CHECK(reduced.type_count() == 1);
    CHECK(reduced.mean_matrix()(0, 0) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(reduced.qbar()[0] == doctest::Approx(1.25).epsilon(1e-12));

    const std::uint64_t n = 300000;
    std::vector<double> orig(n), red(n);
    parallel_for_streams(n, 11, 2, [&](std::uint64_t rep, RandomStream& rng) {
        orig[rep] = simulate_R_multi(*parent, 0, rng, 10000000).value;
    });
    parallel_for_streams(n, 22, 2, [&](std::uint64_t rep, RandomStream& rng) {
        red[rep] = simulate_R_multi(reduced, 0, rng, 10000000).value;
    });
    CHECK(ks_two_sample(orig, red) <= 0.01);
}

TEST_CASE("run_replications is deterministic and worker-count independent") {
    JointModel mg1 = MG1Pair{ParetoDist{1.5, 1.0}, 0.25};
    MulticlassModel model = MulticlassModel::single(mg1);
    SimTask task;
    task.kind = SimKind::progeny;

    SimConfig one{123, 5000, 10000000, 1};
    SimConfig four{123, 5000, 10000000, 4};
    RunResult a = run_replications(model, task, one);
    RunResult b = run_replications(model, task, one);
    RunResult c = run_replications(model, task, four);
    CHECK(a.values == b.values);
    CHECK(a.values == c.values);  // identical order, not just multiset
    CHECK(a.truncated == c.truncated);
}

TEST_CASE("partial-sum exceedance ratios stay uniformly bounded below the threshold scale") {
    // For S_k = Z_1 + ... + Z_k with Pareto(1.5, 1) summands and k well below
    // x/zbar, the ratio P(S_k > x) / (k * x^-1.5) stays bounded by a modest
    // constant (single-jump dominance).
    const double x = 200.0;
    const std::uint64_t n = 1000000;
    for (int k : {2, 5, 10}) {
        std::vector<double> hits(n, 0.0);
        parallel_for_streams(n, 500 + k, 2, [&](std::uint64_t rep, RandomStream& rng) {
            double s = 0.0;
            for (int j = 0; j < k; ++j) s += std::pow(rng.uniform(), -2.0 / 3.0);
            hits[rep] = s > x ? 1.0 : 0.0;
        });
        double p = 0.0;
        for (double h : hits) p += h;
        p /= static_cast<double>(n);
        const double ratio = p / (k * std::pow(x, -1.5));
        CHECK(ratio > 0.5);
        CHECK(ratio <= 2.5);
    }
}

TEST_CASE("truncation fraction on the flagship preset is negligible") {
    JointModel mg1 = MG1Pair{ParetoDist{1.5, 1.0}, 0.25};
    MulticlassModel model = MulticlassModel::single(mg1);
    SimTask task;
    SimConfig cfg{20240801, 100000, 10000000, 2};
    RunResult run = run_replications(model, task, cfg);
    // regression-pinned: no truncations at cap 1e7 at this scale
    CHECK(run.truncated == 0);
}
