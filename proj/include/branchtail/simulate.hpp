#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <thread>
#include <vector>

#include "branchtail/models.hpp"
#include "branchtail/rng.hpp"

namespace branchtail {

struct SimConfig {
    std::uint64_t seed = 1;
    std::uint64_t replications = 1;
    std::uint64_t cap = 10000000;  // maximum individuals per tree
    unsigned workers = 1;
};

struct SimOutcome {
    double value = 0.0;
    bool truncated = false;
    std::uint64_t tree_size = 0;  // total individuals processed
};

struct ReducedDraw {
    double q = 0.0;
    std::vector<double> n;
    bool truncated = false;
    std::uint64_t subtree_nodes = 0;
};

// Anything that can draw per-type (Q, N-vector) samples. Satisfied by
// MulticlassModel and by scripted stand-ins in tests.
template <class M>
concept VectorModel = requires(const M& m, std::size_t i, RandomStream& rng) {
    { m.type_count() } -> std::convertible_to<std::size_t>;
    { m.sample_vector(i, rng) } -> std::convertible_to<VectorSample>;
};

// Total weight R = sum of Q over the branching tree rooted in one type-i
// ancestor. Nodes are processed iteratively with per-type pending counters
// (a breadth-style frontier that never recurses); drawing stops at `cap`
// individuals and sets the truncation flag instead of throwing.
template <VectorModel M>
SimOutcome simulate_R_multi_t(const M& model, std::size_t type, RandomStream& rng,
                              std::uint64_t cap) {
    const std::size_t k = model.type_count();
    std::vector<std::uint64_t> pending(k, 0);
    pending[type] = 1;
    std::uint64_t alive = 1;

    SimOutcome out;
    while (alive > 0) {
        if (out.tree_size >= cap) {
            out.truncated = true;
            break;
        }
        std::size_t t = 0;
        while (pending[t] == 0) ++t;
        VectorSample draw = model.sample_vector(t, rng);
        out.value += draw.q;
        if (draw.truncated) out.truncated = true;
        ++out.tree_size;
        --pending[t];
        --alive;
        for (std::size_t j = 0; j < k; ++j) {
            auto c = static_cast<std::uint64_t>(draw.n[j]);
            pending[j] += c;
            alive += c;
        }
    }
    return out;
}

// Direct-line elimination of the highest-indexed type: draws (Q(i), N(i)),
// then absorbs each type-K daughter's single-type descendant line into the
// modified pair. The absorbed subtrees are one-type trees walked with a
// plain pending counter.
template <VectorModel M>
ReducedDraw simulate_reduced_pair_t(const M& model, std::size_t type, RandomStream& rng,
                                    std::uint64_t cap) {
    const std::size_t k = model.type_count();
    const std::size_t last = k - 1;

    VectorSample root = model.sample_vector(type, rng);
    ReducedDraw out;
    out.q = root.q;
    out.n.assign(root.n.begin(), root.n.begin() + static_cast<std::ptrdiff_t>(last));
    out.truncated = root.truncated;

    const auto daughters = static_cast<std::uint64_t>(root.n[last]);
    for (std::uint64_t m = 0; m < daughters; ++m) {
        std::uint64_t pending = 1;
        while (pending > 0) {
            if (out.subtree_nodes >= cap) {
                out.truncated = true;
                return out;
            }
            VectorSample g = model.sample_vector(last, rng);
            out.q += g.q;
            if (g.truncated) out.truncated = true;
            for (std::size_t j = 0; j < last; ++j) out.n[j] += g.n[j];
            pending += static_cast<std::uint64_t>(g.n[last]);
            --pending;
            ++out.subtree_nodes;
        }
    }
    return out;
}

SimOutcome simulate_R_multi(const MulticlassModel& model, std::size_t type, RandomStream& rng,
                            std::uint64_t cap);
ReducedDraw simulate_reduced_pair(const MulticlassModel& model, std::size_t type,
                                  RandomStream& rng, std::uint64_t cap);

// Single-class walks over the joint pair law. All three consume draws in
// the same order, so e.g. tau and the progeny count of the Q==1 tree agree
// path by path on a shared stream.
SimOutcome simulate_R_single(const JointModel& model, RandomStream& rng, std::uint64_t cap);

// First passage of the walk S_n = sum (N_i - 1) to level -1.
SimOutcome simulate_tau(const JointModel& model, RandomStream& rng, std::uint64_t cap);

// V = sum_{i<=tau} (k0 + k1 Q_i); (1,0) is tau itself, (0,1) is R in law.
SimOutcome simulate_V(const JointModel& model, double k0, double k1, RandomStream& rng,
                      std::uint64_t cap);

// ---------------------------------------------------------------------------
// Replication harness.

enum class SimKind { progeny, tau, weight };

struct SimTask {
    SimKind kind = SimKind::progeny;
    double k0 = 0.0;
    double k1 = 1.0;
    std::size_t type = 0;  // ancestor type for multiclass progeny
};

struct RunResult {
    std::vector<double> values;  // ordered by replication index
    std::uint64_t truncated = 0;
};

// Runs f(rep_index, stream) for rep_index in [0, n), split across workers in
// contiguous blocks. Each replication gets its own counter-based stream
// keyed by (seed, rep_index), so output is independent of the worker count
// and of scheduling.
template <class F>
void parallel_for_streams(std::uint64_t n, std::uint64_t seed, unsigned workers, F&& f) {
    if (workers <= 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) {
            RandomStream rng(seed, i);
            f(i, rng);
        }
        return;
    }
    const std::uint64_t block = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t lo = w * block;
        const std::uint64_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, seed, &f] {
            for (std::uint64_t i = lo; i < hi; ++i) {
                RandomStream rng(seed, i);
                f(i, rng);
            }
        });
    }
    for (auto& t : threads) t.join();
}

RunResult run_replications(const MulticlassModel& model, const SimTask& task,
                           const SimConfig& cfg);

} // namespace branchtail
